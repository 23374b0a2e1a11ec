//! Dense complex linear algebra: Hermitian eigendecomposition, PSD functions,
//! norms, Kronecker products and partial traces.

mod eig;
mod matrix;
mod psd;

pub use eig::{herm_eig, operator_norm, spectral_norm, HermEig, HERMITIAN_TOL};
pub use matrix::{CMatrix, Subsystem, C64};
pub use psd::{
    isometry_extend, isometry_extend_with, psd_pinv_sqrt, psd_project, psd_rank, psd_sqrt, KernelCompletion,
    CONSISTENCY_TOL, PSD_TOL, RANK_TOL,
};

/// `A ⊗ B`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Partial trace over `which` of an operator on `d1 ⊗ d2`.
pub fn partial_trace(x: &CMatrix, d1: usize, d2: usize, which: Subsystem) -> crate::Result<CMatrix> {
    x.partial_trace(d1, d2, which)
}
