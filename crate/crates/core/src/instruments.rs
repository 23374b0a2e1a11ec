//! Instruments: outcome-indexed CP maps, each stored as a Schrödinger Kraus list.

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, TP_TOL};
use crate::error::{Error, Result};
use crate::numerics::{psd_sqrt, CMatrix};
use crate::observables::Observable;
use crate::report::{ValidationReport, ViolationKind};
use crate::stochastic::StochasticMatrix;

/// Outcomes with probability below this have no conditional state.
pub const MIN_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentData", into = "InstrumentData")]
pub struct Instrument {
    dim_in: usize,
    dim_out: usize,
    branches: Vec<Vec<CMatrix>>,
}

/// Unvalidated JSON body `{"dim_in", "dim_out", "branches"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstrumentData {
    pub dim_in: usize,
    pub dim_out: usize,
    pub branches: Vec<Vec<CMatrix>>,
}

/// Result of [`Instrument::conditional_state`].
#[derive(Clone, Debug)]
pub struct ConditionalState {
    pub probability: f64,
    /// `None` when the outcome has (numerically) zero probability.
    pub state: Option<CMatrix>,
}

pub fn validate_instrument(dim_in: usize, dim_out: usize, branches: &[Vec<CMatrix>]) -> ValidationReport {
    let mut report = ValidationReport::default();
    if branches.is_empty() {
        report.push(ViolationKind::Shape, 1.0, None, "instrument has no outcomes");
        return report;
    }
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for (x, branch) in branches.iter().enumerate() {
        for k in branch {
            if k.rows() != dim_out || k.cols() != dim_in {
                report.push(
                    ViolationKind::Shape,
                    1.0,
                    Some(x),
                    format!("branch {x} has a {}x{} Kraus operator", k.rows(), k.cols()),
                );
                return report;
            }
            sum += &k.adjoint_mul(k);
        }
    }
    let tp = sum.dist(&CMatrix::identity(dim_in));
    if tp > TP_TOL {
        report.push(
            ViolationKind::NotTracePreserving,
            tp,
            None,
            "branches do not sum to a channel",
        );
    }
    report
}

impl Instrument {
    pub fn new(dim_in: usize, dim_out: usize, branches: Vec<Vec<CMatrix>>) -> Result<Self> {
        let report = validate_instrument(dim_in, dim_out, &branches);
        if !report.is_ok() {
            return Err(Error::InvalidInstrument(report));
        }
        Ok(Self {
            dim_in,
            dim_out,
            branches,
        })
    }

    /// Lüders instrument: branch `x` has the single Kraus operator `√A(x)`.
    pub fn lueders(a: &Observable) -> Result<Self> {
        let branches = a
            .effects()
            .iter()
            .map(|e| psd_sqrt(e).map(|s| vec![s]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(a.dim(), a.dim(), branches)
    }

    /// A channel viewed as a one-outcome instrument.
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            branches: vec![ch.kraus().to_vec()],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn num_outcomes(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Vec<CMatrix>] {
        &self.branches
    }

    pub fn branch(&self, x: usize) -> &[CMatrix] {
        &self.branches[x]
    }

    /// Effect `x` is `Σ_i K_{x,i}* K_{x,i}`.
    pub fn induced_observable(&self) -> Observable {
        let effects = self
            .branches
            .iter()
            .map(|b| {
                let mut e = CMatrix::zeros(self.dim_in, self.dim_in);
                for k in b {
                    e += &k.adjoint_mul(k);
                }
                e.hermitian_part()
            })
            .collect();
        Observable::with_dim(self.dim_in, effects).expect("instrument effects form a POVM")
    }

    /// `Σ_x 𝓘_x` as a channel.
    pub fn total_channel(&self) -> Channel {
        let kraus: Vec<CMatrix> = self.branches.iter().flatten().cloned().collect();
        Channel::new(self.dim_in, self.dim_out, kraus).expect("validated instrument")
    }

    /// `𝓘'_x = Σ_y M[x][y] 𝓘_y`, realised by scaling Kraus operators with `√M[x][y]`.
    pub fn postprocess(&self, m: &StochasticMatrix) -> Result<Self> {
        if m.cols() != self.num_outcomes() {
            return Err(Error::DimensionMismatch(format!(
                "stochastic matrix has {} columns but the instrument has {} outcomes",
                m.cols(),
                self.num_outcomes()
            )));
        }
        let branches = (0..m.rows())
            .map(|x| {
                let mut out = Vec::new();
                for (y, branch) in self.branches.iter().enumerate() {
                    let w = m.get(x, y);
                    if w > 0.0 {
                        out.extend(branch.iter().map(|k| k.scale(w.sqrt())));
                    }
                }
                out
            })
            .collect();
        Self::new(self.dim_in, self.dim_out, branches)
    }

    /// Unnormalised output `𝓘_x^S(ρ)`.
    pub fn apply_branch(&self, x: usize, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.branches[x] {
            out += &k.sandwich(rho);
        }
        out
    }

    /// Probability of `x` and the normalised post-measurement state.
    pub fn conditional_state(&self, x: usize, rho: &CMatrix) -> ConditionalState {
        let out = self.apply_branch(x, rho);
        let probability = out.trace().re;
        let state = (probability >= MIN_PROBABILITY).then(|| out.scale(1.0 / probability));
        ConditionalState { probability, state }
    }
}

impl TryFrom<InstrumentData> for Instrument {
    type Error = Error;

    fn try_from(d: InstrumentData) -> Result<Self> {
        Self::new(d.dim_in, d.dim_out, d.branches)
    }
}

impl From<Instrument> for InstrumentData {
    fn from(i: Instrument) -> Self {
        InstrumentData {
            dim_in: i.dim_in,
            dim_out: i.dim_out,
            branches: i.branches,
        }
    }
}
