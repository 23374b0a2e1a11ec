//! Closed-form disturbance floor: spectral width of effects and the
//! `(1/16)·sup_x width(A(x))²` lower bound valid for every channel compatible
//! with `A`.

use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::numerics::{herm_eig, CMatrix, HermEig};
use crate::observables::Observable;
use crate::ordering::{is_a_channel, FeasibilityStatus, SolverOptions};

/// Slack on `0 ≤ E ≤ I` before an operator is rejected as an effect.
pub const EFFECT_TOL: f64 = 1e-8;

fn effect_eig(e: &CMatrix) -> Result<HermEig> {
    let eig = herm_eig(e)?;
    let defect = (-eig.min()).max(eig.max() - 1.0);
    if defect > EFFECT_TOL {
        return Err(Error::NotAnEffect { defect });
    }
    Ok(eig)
}

/// `λ_max(E) - λ_min(E)`, which equals `‖E‖ + ‖I - E‖ - 1` for an effect.
pub fn spectral_width(e: &CMatrix) -> Result<f64> {
    let eig = effect_eig(e)?;
    Ok((eig.max().min(1.0) - eig.min().max(0.0)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantApprox {
    /// Minimiser of `‖E - p·I‖` over `p ∈ [0, 1]`.
    pub p: f64,
    /// The minimal operator-norm distance.
    pub distance: f64,
}

pub fn best_constant_approx(e: &CMatrix) -> Result<ConstantApprox> {
    let eig = effect_eig(e)?;
    let (lo, hi) = (eig.min().max(0.0), eig.max().min(1.0));
    Ok(ConstantApprox {
        p: ((lo + hi) / 2.0).clamp(0.0, 1.0),
        distance: ((hi - lo) / 2.0).max(0.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisturbanceBound {
    pub per_effect_width: Vec<f64>,
    /// `(1/16)·max_x width²`.
    pub bound: f64,
    /// Zero-based outcome attaining the maximum (first one on ties).
    pub argmax_outcome: usize,
}

/// Lower bound on the decodability disturbance of any channel compatible with `a`.
pub fn dksw_lower_bound(a: &Observable) -> Result<DisturbanceBound> {
    let per_effect_width = a.effects().iter().map(spectral_width).collect::<Result<Vec<_>>>()?;
    let mut argmax_outcome = 0;
    for (x, &w) in per_effect_width.iter().enumerate() {
        if w > per_effect_width[argmax_outcome] {
            argmax_outcome = x;
        }
    }
    let sup = per_effect_width.get(argmax_outcome).copied().unwrap_or(0.0);
    Ok(DisturbanceBound {
        per_effect_width,
        bound: sup * sup / 16.0,
        argmax_outcome,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneFloor {
    pub floor: f64,
    pub bound: DisturbanceBound,
    /// Residual of the compatibility witness that licenses the floor.
    pub compatibility_residual: f64,
}

/// The bound of `a`, after checking that `lambda` is compatible with `a`.
pub fn monotone_floor(lambda: &Channel, a: &Observable, opts: &SolverOptions) -> Result<MonotoneFloor> {
    let out = is_a_channel(lambda, a, opts)?;
    match out.status {
        FeasibilityStatus::Feasible => {
            let bound = dksw_lower_bound(a)?;
            Ok(MonotoneFloor {
                floor: bound.bound,
                bound,
                compatibility_residual: out.residual,
            })
        }
        FeasibilityStatus::Infeasible => Err(Error::NotCompatible { defect: out.residual }),
        FeasibilityStatus::Undecided => Err(Error::Undecided),
    }
}
