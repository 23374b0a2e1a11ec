//! Explicit degrading maps: for an instrument implementing `A` with total
//! channel `Λ`, a channel `ℰ` with `Λ = Λ_A ∘ ℰ` in the Heisenberg picture
//! (`Λ^S = ℰ^S ∘ Λ_A^S`).
//!
//! For each `x ∈ Ω_A` the branch Kraus operators are stacked into
//! `c_x: H → K ⊗ C^m` with `c_x*c_x = A(x)`. Isometries `W_x`, `J_x` satisfy
//! `W_x √A(x) = c_x` and `J_x √A(x) = Â(x)K`, and
//!
//! `ℰ(C) = Σ_x Â(x)J_x W_x*(C ⊗ I)W_x J_x*Â(x) + tr[ρC]·(I - Σ_x Â(x)J_x J_x*Â(x))`.

use serde::Serialize;

use crate::channels::Channel;
use crate::dilations::{least_disturbing_channel, naimark, NaimarkDilation};
use crate::error::{Error, Result};
use crate::instruments::Instrument;
use crate::numerics::{herm_eig, isometry_extend_with, psd_sqrt, CMatrix, KernelCompletion};
use crate::observables::Observable;
use crate::ordering::{is_a_channel, FeasibilityStatus, SolverOptions};

/// Largest accepted `‖Choi(Λ_A ∘ ℰ) - Choi(Λ)‖`.
pub const VERIFY_TOL: f64 = 1e-7;
/// Largest accepted distance between a claimed and the induced observable.
pub const CLAIM_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated in the remainder operator.
pub const REMAINDER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct DegradingOptions {
    /// State `ρ` on the output space of `Λ`; maximally mixed when absent.
    pub anchor: Option<CMatrix>,
    pub completion: KernelCompletion,
}

/// Audit record for one outcome in the support.
#[derive(Clone, Debug, Serialize)]
pub struct DegradingBlock {
    pub outcome: usize,
    pub c: CMatrix,
    pub w: CMatrix,
    pub j: CMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegradingCertificate {
    /// `ℰ`, stored in the Schrödinger picture: `H ⊗ C^n → K`.
    pub epsilon: Channel,
    /// `‖Choi(Λ_A ∘ ℰ) - Choi(Λ)‖_F`.
    pub residual: f64,
    pub blocks: Vec<DegradingBlock>,
    pub anchor_state: CMatrix,
    /// Environment size `m` used for stacking.
    pub env_dim: usize,
    pub observable: Observable,
    pub dilation: NaimarkDilation,
}

impl DegradingCertificate {
    /// `Σ_x Â(x)J_x J_x*Â(x)`.
    fn covered(&self) -> CMatrix {
        let n = self.dilation.dilation_dim();
        let mut s = CMatrix::zeros(n, n);
        for b in &self.blocks {
            let slot = self.dilation.slot(b.outcome).expect("blocks cover the support");
            let p = &self.dilation.pvm[slot];
            let pj = p * &b.j;
            s += &(&pj * &pj.adjoint());
        }
        s
    }

    /// `I - Σ_x Â(x)J_x J_x*Â(x)`, the coefficient of the `tr[ρC]` term.
    pub fn remainder_operator(&self) -> CMatrix {
        let n = self.dilation.dilation_dim();
        (&CMatrix::identity(n) - &self.covered()).hermitian_part()
    }
}

/// `‖I - Σ_x K*Â(x)J_x J_x*Â(x)K‖_F`, which vanishes because
/// `Σ_x √A(x) J_x*J_x √A(x) = Σ_x A(x) = I`.
pub fn remainder_projector_defect(cert: &DegradingCertificate) -> f64 {
    let k = &cert.dilation.isometry;
    let compressed = k.adjoint_mul(&(&cert.covered() * k));
    compressed.dist(&CMatrix::identity(cert.dilation.dim))
}

/// Builds `ℰ` for an instrument. When `claimed` is given it must match the
/// induced observable within [`CLAIM_TOL`].
pub fn degrade(
    inst: &Instrument,
    claimed: Option<&Observable>,
    opts: &DegradingOptions,
) -> Result<DegradingCertificate> {
    let a = inst.induced_observable();
    if let Some(c) = claimed {
        if c.dim() != a.dim() || c.num_outcomes() != a.num_outcomes() {
            return Err(Error::DimensionMismatch(format!(
                "claimed observable has {} outcomes on dimension {}, the instrument {} on {}",
                c.num_outcomes(),
                c.dim(),
                a.num_outcomes(),
                a.dim()
            )));
        }
        let defect = c.distance(&a);
        if defect > CLAIM_TOL {
            return Err(Error::NotCompatible { defect });
        }
    }
    build(inst, a, opts)
}

/// Builds `ℰ` for a bare channel compatible with `a`, via the environment
/// observable `R` from [`is_a_channel`]: branch `x` has Kraus operators
/// `(I ⊗ ⟨j|)(I ⊗ √R(x))V`.
pub fn degrade_channel(
    lambda: &Channel,
    a: &Observable,
    opts: &DegradingOptions,
    solver: &SolverOptions,
) -> Result<DegradingCertificate> {
    let out = is_a_channel(lambda, a, solver)?;
    match out.status {
        FeasibilityStatus::Feasible => {}
        FeasibilityStatus::Infeasible => return Err(Error::NotCompatible { defect: out.residual }),
        FeasibilityStatus::Undecided => return Err(Error::Undecided),
    }
    let w = out.witness.expect("feasible outcome has a witness");
    let st = &w.stinespring;
    let (d_in, d_out, m) = (lambda.dim_in(), lambda.dim_out(), st.env_dim);
    let mut branches = Vec::with_capacity(a.num_outcomes());
    for r in w.radon_nikodym.effects() {
        let root = CMatrix::identity(d_out).kron(&psd_sqrt(r)?);
        let v = &root * &st.isometry;
        let branch: Vec<CMatrix> = (0..m)
            .map(|j| CMatrix::from_fn(d_out, d_in, |o, i| v[(o * m + j, i)]))
            .filter(|k| k.max_abs() > 0.0)
            .collect();
        branches.push(branch);
    }
    let inst = Instrument::new(d_in, d_out, branches)?;
    let induced = inst.induced_observable();
    build(&inst, induced, opts)
}

fn build(inst: &Instrument, a: Observable, opts: &DegradingOptions) -> Result<DegradingCertificate> {
    let (d_in, d_out) = (inst.dim_in(), inst.dim_out());
    let anchor = match &opts.anchor {
        Some(rho) => {
            crate::channels::check_state(rho)?;
            if rho.rows() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "anchor state has dimension {} but the channel outputs {}",
                    rho.rows(),
                    d_out
                )));
            }
            rho.clone()
        }
        None => CMatrix::identity(d_out).scale(1.0 / d_out as f64),
    };

    let dil = naimark(&a);
    let big = dil.dilation_dim();
    let widest = dil.outcomes.iter().map(|&x| inst.branch(x).len()).max().unwrap_or(1);
    // W_x maps into K ⊗ C^m and must be an isometry on H, so d_out·m ≥ d_in.
    let m = widest.max(d_in.div_ceil(d_out)).max(1);

    let mut blocks = Vec::with_capacity(dil.outcomes.len());
    let mut kraus = Vec::new();
    for (s, &x) in dil.outcomes.iter().enumerate() {
        let branch = inst.branch(x);
        let c = CMatrix::from_fn(d_out * m, d_in, |r, i| {
            let (o, j) = (r / m, r % m);
            branch.get(j).map_or(Default::default(), |k| k[(o, i)])
        });
        let effect = a.effect(x);
        let w = isometry_extend_with(&c, effect, opts.completion)?;
        let pk = dil.branch_operator(s);
        let j = isometry_extend_with(&pk, effect, opts.completion)?;
        let p = &(&w * &j.adjoint()) * &dil.pvm[s];
        for jj in 0..m {
            let f = CMatrix::from_fn(d_out, big, |o, col| p[(o * m + jj, col)]);
            if f.max_abs() > 0.0 {
                kraus.push(f);
            }
        }
        blocks.push(DegradingBlock { outcome: x, c, w, j });
    }

    let mut cert = DegradingCertificate {
        epsilon: Channel::identity(1),
        residual: f64::NAN,
        blocks,
        anchor_state: anchor,
        env_dim: m,
        observable: a,
        dilation: dil,
    };

    // σ ↦ tr[Gσ]·ρ has Kraus operators √(g_k r_l)|r_l⟩⟨g_k|.
    let g = herm_eig(&cert.remainder_operator())?;
    if g.min() < -REMAINDER_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: g.min(),
        });
    }
    let r = herm_eig(&cert.anchor_state.hermitian_part())?;
    for (gk, &gv) in g.values.iter().enumerate() {
        if gv <= 0.0 {
            continue;
        }
        for (rl, &rv) in r.values.iter().enumerate() {
            if rv <= 0.0 {
                continue;
            }
            let s = (gv * rv).sqrt();
            kraus.push(CMatrix::from_fn(d_out, big, |o, col| {
                r.vectors[(o, rl)] * g.vectors[(col, gk)].conj() * s
            }));
        }
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(d_out, big));
    }
    cert.epsilon = Channel::new(big, d_out, kraus)?;

    let la = least_disturbing_channel(&cert.observable);
    cert.residual = Channel::compose(&cert.epsilon, &la)?.choi_distance(&inst.total_channel());
    if cert.residual.is_nan() || cert.residual > VERIFY_TOL {
        return Err(Error::VerificationFailed {
            residual: cert.residual,
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilations::least_disturbing_instrument;
    use crate::qubit::qubit_observable;
    use crate::random::{random_instrument, random_observable, random_state, random_stochastic, rng};

    fn unital_defect(eps: &Channel) -> f64 {
        let d = eps.dim_out();
        eps.apply_heisenberg(&CMatrix::identity(d))
            .dist(&CMatrix::identity(eps.dim_in()))
    }

    #[test]
    fn least_disturbing_instrument_degrades_trivially() {
        let mut g = rng(81);
        for (d, n) in [(2, 2), (3, 3)] {
            let a = random_observable(&mut g, d, n);
            let cert = degrade(&least_disturbing_instrument(&a), Some(&a), &DegradingOptions::default()).unwrap();
            assert!(cert.residual <= 1e-9);
            assert!(unital_defect(&cert.epsilon) <= 1e-9);
        }
    }

    #[test]
    fn lueders_qubit_instrument() {
        let a = qubit_observable([0.3, 0.4, 0.5]).unwrap();
        let inst = Instrument::lueders(&a).unwrap();
        let cert = degrade(&inst, Some(&a), &DegradingOptions::default()).unwrap();
        assert!(cert.residual <= 1e-8);
        assert!(cert.epsilon.validate().is_ok());
        assert_eq!(cert.epsilon.dim_in(), 4);
        assert_eq!(cert.epsilon.dim_out(), 2);
    }

    #[test]
    fn postprocessed_lueders_instruments() {
        let mut g = rng(82);
        for d in [2, 3] {
            for _ in 0..3 {
                let b = random_observable(&mut g, d, 3);
                let m = random_stochastic(&mut g, 2, 3);
                let inst = Instrument::lueders(&b).unwrap().postprocess(&m).unwrap();
                let a = b.smear(&m).unwrap();
                let cert = degrade(&inst, Some(&a), &DegradingOptions::default()).unwrap();
                assert!(cert.residual <= 1e-7);
                assert!(unital_defect(&cert.epsilon) <= 1e-9);
                assert!(remainder_projector_defect(&cert) <= 1e-9);
                assert!(herm_eig(&cert.remainder_operator()).unwrap().min() >= -1e-9);
            }
        }
    }

    #[test]
    fn output_smaller_than_input_is_padded() {
        let mut g = rng(83);
        let inst = random_instrument(&mut g, 4, 2, 3, 1);
        let cert = degrade(&inst, None, &DegradingOptions::default()).unwrap();
        assert!(cert.env_dim >= 2);
        assert!(cert.residual <= 1e-7);
    }

    #[test]
    fn remainder_defect_examples() {
        for a in [
            Observable::standard_basis(3),
            Observable::coin_toss(&[0.3, 0.7], 2).unwrap(),
        ] {
            let cert = degrade(&Instrument::lueders(&a).unwrap(), None, &DegradingOptions::default()).unwrap();
            assert!(remainder_projector_defect(&cert) <= 1e-12);
        }
    }

    #[test]
    fn anchor_and_completion_do_not_matter() {
        let mut g = rng(84);
        let inst = random_instrument(&mut g, 2, 3, 3, 2);
        for seed in 0..4 {
            let opts = DegradingOptions {
                anchor: Some(random_state(&mut g, 3)),
                completion: KernelCompletion::Randomized(seed),
            };
            let cert = degrade(&inst, None, &opts).unwrap();
            assert!(cert.residual <= 1e-7);
        }
    }

    #[test]
    fn claimed_observable_must_match() {
        let a = qubit_observable([0.0, 0.0, 0.8]).unwrap();
        let other = qubit_observable([0.8, 0.0, 0.0]).unwrap();
        let inst = Instrument::lueders(&a).unwrap();
        let r = degrade(&inst, Some(&other), &DegradingOptions::default());
        assert!(matches!(r, Err(Error::NotCompatible { .. })));
    }

    #[test]
    fn bare_channel_route() {
        let mut g = rng(85);
        let b = random_observable(&mut g, 2, 3);
        let a = b.smear(&random_stochastic(&mut g, 2, 3)).unwrap();
        let lambda = Instrument::lueders(&b).unwrap().total_channel();
        let cert = degrade_channel(&lambda, &a, &DegradingOptions::default(), &SolverOptions::default()).unwrap();
        assert!(cert.residual <= 1e-7);
        assert!(cert.observable.distance(&a) <= 1e-6);
        let z = Observable::standard_basis(2);
        let r = degrade_channel(
            &Channel::identity(2),
            &z,
            &DegradingOptions::default(),
            &SolverOptions::default(),
        );
        assert!(matches!(r, Err(Error::NotCompatible { .. })));
    }
}
