//! Dense two-phase simplex with Bland's rule for small equality-form LPs:
//! minimise `c·x` subject to `A x = b`, `x ≥ 0`.

use serde::Serialize;

/// Reduced costs above `-COST_TOL` count as non-negative.
const COST_TOL: f64 = 1e-11;
/// Smallest admissible pivot magnitude.
const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// Equality constraints `A x = b` over non-negative variables.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars, "constraint row has the wrong length");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `max_i |A_i x - b_i|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Sum of artificial variables at the end of phase 1.
    pub phase1_objective: f64,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    /// Original plus artificial columns.
    n: usize,
    /// `m` rows of `n + 1` entries, last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.t[i][j];
                }
            }
        }
        d
    }

    /// Runs Bland's rule on `cost`, allowing only columns `< allowed` to enter.
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> LpStatus {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return LpStatus::IterationLimit;
            }
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j] < -COST_TOL && !self.basis.contains(&j)) else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.n] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return LpStatus::Unbounded,
            }
        }
    }

    fn value(&self, j: usize) -> f64 {
        self.basis
            .iter()
            .position(|&b| b == j)
            .map_or(0.0, |i| self.t[i][self.n])
    }
}

/// Minimises `cost · x` (or just finds a feasible point when `cost` is `None`).
/// `feas_tol` bounds the phase-1 optimum accepted as feasible.
pub fn lp_minimize(sys: &LinearSystem, cost: Option<&[f64]>, feas_tol: f64) -> LpSolution {
    let nv = sys.num_vars;
    let m = sys.rows.len();
    let n = nv + m;
    let mut t = Vec::with_capacity(m);
    for (row, &b) in sys.rows.iter().zip(&sys.rhs) {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * sign).collect();
        r.resize(n + 1, 0.0);
        r[nv + t.len()] = 1.0;
        r[n] = b * sign;
        t.push(r);
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        basis: (nv..n).collect(),
        pivots: 0,
    };

    let mut phase1_cost = vec![0.0; n];
    for c in phase1_cost.iter_mut().skip(nv) {
        *c = 1.0;
    }
    let status = tab.optimise(&phase1_cost, n);
    let phase1_objective: f64 = (nv..n).map(|j| tab.value(j)).sum();
    let x_now = |tab: &Tableau| (0..nv).map(|j| tab.value(j).max(0.0)).collect::<Vec<_>>();
    if status == LpStatus::IterationLimit {
        return LpSolution {
            status,
            x: x_now(&tab),
            phase1_objective,
            objective: f64::NAN,
            pivots: tab.pivots,
        };
    }
    if phase1_objective > feas_tol {
        return LpSolution {
            status: LpStatus::Infeasible,
            x: x_now(&tab),
            phase1_objective,
            objective: f64::NAN,
            pivots: tab.pivots,
        };
    }

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    for i in 0..tab.m {
        if tab.basis[i] >= nv {
            if let Some(j) = (0..nv).find(|&j| tab.t[i][j].abs() > 1e-9 && !tab.basis.contains(&j)) {
                tab.pivot(i, j);
            }
        }
    }

    let Some(cost) = cost else {
        let x = x_now(&tab);
        return LpSolution {
            status: LpStatus::Optimal,
            x,
            phase1_objective,
            objective: 0.0,
            pivots: tab.pivots,
        };
    };
    let mut full_cost = cost.to_vec();
    full_cost.resize(n, 0.0);
    let status = tab.optimise(&full_cost, nv);
    let x = x_now(&tab);
    let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
    LpSolution {
        status,
        x,
        phase1_objective,
        objective,
        pivots: tab.pivots,
    }
}
