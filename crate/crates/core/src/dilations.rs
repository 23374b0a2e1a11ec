//! Canonical Naimark dilation and the least-disturbing channel `Λ_A`.
//!
//! The dilation space is `H ⊗ C^n` with `n = |Ω_A|`. The isometry is
//! `K ψ = Σ_{x ∈ Ω_A} √A(x) ψ ⊗ e_x` and the PVM is `Â(x) = I ⊗ |e_x⟩⟨e_x|`.
//! `Λ_A` has Kraus operators `Â(x) K`, so in the Schrödinger picture it
//! sends `ρ` to `Σ_x √A(x) ρ √A(x) ⊗ |e_x⟩⟨e_x|`.

use serde::Serialize;

use crate::channels::Channel;
use crate::instruments::Instrument;
use crate::numerics::{psd_sqrt, CMatrix, C64};
use crate::observables::Observable;

#[derive(Clone, Debug, Serialize)]
pub struct NaimarkDilation {
    /// Input dimension `d`.
    pub dim: usize,
    /// Outcomes of `A` carried by the dilation (the support `Ω_A`), in order.
    pub outcomes: Vec<usize>,
    /// `K: H -> H ⊗ C^n`.
    pub isometry: CMatrix,
    /// One projection per entry of `outcomes`.
    pub pvm: Vec<CMatrix>,
}

impl NaimarkDilation {
    pub fn dilation_dim(&self) -> usize {
        self.isometry.rows()
    }

    /// Position of outcome `x` among the dilation's outcomes.
    pub fn slot(&self, x: usize) -> Option<usize> {
        self.outcomes.iter().position(|&o| o == x)
    }

    /// `Â(x) K`, the Kraus operator of the branch for slot `s`.
    pub fn branch_operator(&self, s: usize) -> CMatrix {
        &self.pvm[s] * &self.isometry
    }
}

/// Canonical tensor-product dilation over the support of `a`.
pub fn naimark(a: &Observable) -> NaimarkDilation {
    let d = a.dim();
    let outcomes = a.support().indices;
    let n = outcomes.len();
    let mut k = CMatrix::zeros(d * n, d);
    for (s, &x) in outcomes.iter().enumerate() {
        let root = psd_sqrt(a.effect(x)).expect("effects of a valid observable are PSD");
        for i in 0..d {
            for j in 0..d {
                k[(i * n + s, j)] = root[(i, j)];
            }
        }
    }
    let pvm = (0..n)
        .map(|s| {
            let mut e = CMatrix::zeros(n, n);
            e[(s, s)] = C64::new(1.0, 0.0);
            CMatrix::identity(d).kron(&e)
        })
        .collect();
    NaimarkDilation {
        dim: d,
        outcomes,
        isometry: k,
        pvm,
    }
}

/// `Λ_A(C) = Σ_x K* Â(x) C Â(x) K`, stored with Kraus operators `Â(x) K`.
pub fn least_disturbing_channel(a: &Observable) -> Channel {
    least_disturbing_instrument(a).total_channel()
}

/// `𝓘_x(C) = K* Â(x) C Â(x) K`; outcomes outside the support get an empty branch.
pub fn least_disturbing_instrument(a: &Observable) -> Instrument {
    let dil = naimark(a);
    let out_dim = dil.dilation_dim();
    let branches = (0..a.num_outcomes())
        .map(|x| match dil.slot(x) {
            Some(s) => vec![dil.branch_operator(s)],
            None => Vec::new(),
        })
        .collect();
    Instrument::new(a.dim(), out_dim, branches).expect("Naimark branches are trace preserving")
}
