use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column sums must be 1 within this.
pub const COLUMN_SUM_TOL: f64 = 1e-9;
/// Entries may dip this far below zero.
pub const NEGATIVE_ENTRY_TOL: f64 = 1e-12;

/// Column-stochastic matrix `M` with `M[x][y] = P(x | y)`.
///
/// Rows index outcomes of the coarser observable, columns outcomes of the
/// finer one, so `A(x) = Σ_y M[x][y] B(y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StochasticRows", into = "StochasticRows")]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} stochastic matrix",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check()?;
        Ok(m)
    }

    /// Row-major nested form.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidStochasticMatrix("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    fn check(&self) -> Result<()> {
        if let Some(v) = self.data.iter().find(|v| !v.is_finite() || **v < -NEGATIVE_ENTRY_TOL) {
            return Err(Error::InvalidStochasticMatrix(format!("entry {v} is negative")));
        }
        for y in 0..self.cols {
            let s = self.column_sum(y);
            if (s - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidStochasticMatrix(format!("column {y} sums to {s}")));
            }
        }
        Ok(())
    }

    fn column_sum(&self, y: usize) -> f64 {
        (0..self.rows).map(|x| self.get(x, y)).sum()
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    /// Every column equal to the distribution `p`: the coin-tossing post-processing.
    pub fn constant_columns(p: &[f64], cols: usize) -> Result<Self> {
        let rows = p.len();
        let mut data = vec![0.0; rows * cols];
        for (x, &px) in p.iter().enumerate() {
            for y in 0..cols {
                data[x * cols + y] = px;
            }
        }
        Self::new(rows, cols, data)
    }

    /// Relabelling `y -> perm[y]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut data = vec![0.0; n * n];
        for (y, &x) in perm.iter().enumerate() {
            if x >= n {
                return Err(Error::InvalidStochasticMatrix(format!("target {x} out of range")));
            }
            data[x * n + y] = 1.0;
        }
        Self::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.cols + y]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .take(self.rows)
            .collect()
    }

    /// `self · earlier`: first post-process with `earlier`, then with `self`.
    pub fn then(&self, earlier: &Self) -> Result<Self> {
        if self.cols != earlier.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} after {}x{}",
                self.rows, self.cols, earlier.rows, earlier.cols
            )));
        }
        let mut data = vec![0.0; self.rows * earlier.cols];
        for x in 0..self.rows {
            for z in 0..earlier.cols {
                data[x * earlier.cols + z] = (0..self.cols).map(|y| self.get(x, y) * earlier.get(y, z)).sum();
            }
        }
        Self::new(self.rows, earlier.cols, data)
    }

    /// Clips tiny negatives and renormalises columns. Used to clean LP output.
    pub(crate) fn from_raw_clean(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self> {
        for v in data.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        for y in 0..cols {
            let s: f64 = (0..rows).map(|x| data[x * cols + y]).sum();
            if s > 0.0 {
                for x in 0..rows {
                    data[x * cols + y] /= s;
                }
            }
        }
        Self::new(rows, cols, data)
    }
}

#[derive(Serialize, Deserialize)]
struct StochasticRows(Vec<Vec<f64>>);

impl TryFrom<StochasticRows> for StochasticMatrix {
    type Error = Error;

    fn try_from(r: StochasticRows) -> Result<Self> {
        Self::from_rows(&r.0)
    }
}

impl From<StochasticMatrix> for StochasticRows {
    fn from(m: StochasticMatrix) -> Self {
        StochasticRows(m.to_rows())
    }
}
