//! Deciders for the smearing order on observables, the degrading order on
//! channels and compatibility of a channel with an observable.

mod projections;
mod simplex;

use serde::Serialize;

pub use crate::stochastic::StochasticMatrix;
pub use projections::{
    coords_to_herm, herm_dim, herm_to_coords, join_blocks, psd_affine_feasible, split_blocks, ProjectionMethod,
    PsdAffineProblem,
};
pub use simplex::{lp_minimize, LinearSystem, LpSolution, LpStatus};

use crate::channels::{Channel, ChoiMatrix, Stinespring};
use crate::error::{Error, Result};
use crate::numerics::{herm_eig, psd_pinv_sqrt, CMatrix};
use crate::observables::Observable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub residual: f64,
    pub gap: f64,
}

/// Result of a feasibility query. For feasible outcomes `residual` is the
/// re-verified witness residual; otherwise it is the evidence against
/// feasibility (phase-1 optimum, least-squares defect or stalled gap).
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityOutcome<W> {
    pub status: FeasibilityStatus,
    pub witness: Option<W>,
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

impl<W> FeasibilityOutcome<W> {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }

    fn rejected<V>(self, status: FeasibilityStatus, residual: f64) -> FeasibilityOutcome<V> {
        FeasibilityOutcome {
            status,
            witness: None,
            residual,
            iterations: self.iterations,
            trace: self.trace,
        }
    }

    fn accepted<V>(self, witness: V, residual: f64) -> FeasibilityOutcome<V> {
        FeasibilityOutcome {
            status: FeasibilityStatus::Feasible,
            witness: Some(witness),
            residual,
            iterations: self.iterations,
            trace: self.trace,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Phase-1 threshold and witness tolerance for the LP.
    pub lp_tol: f64,
    /// Witness tolerance for the PSD problems.
    pub feas_tol: f64,
    /// Stalled gaps above this are reported infeasible.
    pub infeasible_gap: f64,
    pub max_iters: usize,
    pub method: ProjectionMethod,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            lp_tol: 1e-7,
            feas_tol: 1e-6,
            infeasible_gap: 1e-4,
            max_iters: 20_000,
            method: ProjectionMethod::default(),
            record_trace: false,
        }
    }
}

/// Feasibility of `A x = b, x ≥ 0`.
pub fn lp_feasible(sys: &LinearSystem, opts: &SolverOptions) -> FeasibilityOutcome<Vec<f64>> {
    let sol = lp_minimize(sys, None, opts.lp_tol);
    let out = FeasibilityOutcome {
        status: FeasibilityStatus::Undecided,
        witness: None::<Vec<f64>>,
        residual: sol.phase1_objective,
        iterations: sol.pivots,
        trace: Vec::new(),
    };
    match sol.status {
        LpStatus::Optimal => {
            let r = sys.residual(&sol.x);
            if r <= opts.lp_tol {
                out.accepted(sol.x, r)
            } else {
                out.rejected(FeasibilityStatus::Undecided, r)
            }
        }
        LpStatus::Infeasible => out.rejected(FeasibilityStatus::Infeasible, sol.phase1_objective),
        _ => out,
    }
}

/// Decides `A ⪯ B`, i.e. `A(x) = Σ_y M_xy B(y)` for a column-stochastic `M`.
pub fn obs_leq(a: &Observable, b: &Observable, opts: &SolverOptions) -> Result<FeasibilityOutcome<StochasticMatrix>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observables act on dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.num_outcomes(), b.num_outcomes());
    let d2 = herm_dim(a.dim());
    let b_coords: Vec<Vec<f64>> = b
        .effects()
        .iter()
        .map(|e| {
            let mut c = Vec::with_capacity(d2);
            herm_to_coords(e, &mut c);
            c
        })
        .collect();
    // Variable M_xy sits at x * nb + y.
    let mut sys = LinearSystem::new(na * nb);
    for x in 0..na {
        let mut ac = Vec::with_capacity(d2);
        herm_to_coords(a.effect(x), &mut ac);
        for (k, &rhs) in ac.iter().enumerate() {
            let mut row = vec![0.0; na * nb];
            for y in 0..nb {
                row[x * nb + y] = b_coords[y][k];
            }
            sys.push(row, rhs);
        }
    }
    for y in 0..nb {
        let mut row = vec![0.0; na * nb];
        for x in 0..na {
            row[x * nb + y] = 1.0;
        }
        sys.push(row, 1.0);
    }
    let lp = lp_feasible(&sys, opts);
    if !lp.is_feasible() {
        let r = lp.residual;
        let s = lp.status;
        return Ok(lp.rejected(s, r));
    }
    let raw = lp.witness.clone().expect("feasible LP has a point");
    let m = StochasticMatrix::from_raw_clean(na, nb, raw)?;
    let residual = smearing_residual(a, b, &m);
    Ok(if residual <= opts.lp_tol {
        lp.accepted(m, residual)
    } else {
        lp.rejected(FeasibilityStatus::Undecided, residual)
    })
}

/// `max_x ‖A(x) - Σ_y M_xy B(y)‖_F`.
pub fn smearing_residual(a: &Observable, b: &Observable, m: &StochasticMatrix) -> f64 {
    match b.smear(m) {
        Ok(s) => a.distance(&s),
        Err(_) => f64::INFINITY,
    }
}

/// `A ⪯ B` and `B ⪯ A`; undecided counts as `false`.
pub fn obs_equiv(a: &Observable, b: &Observable, opts: &SolverOptions) -> Result<bool> {
    Ok(obs_leq(a, b, opts)?.is_feasible() && obs_leq(b, a, opts)?.is_feasible())
}

/// Channel from a PSD Choi matrix, with trace preservation restored by
/// `K ↦ K T^{-1/2}`, `T = Σ K*K`.
fn channel_from_psd_choi(d_in: usize, d_out: usize, x: &CMatrix) -> Result<Channel> {
    let e = herm_eig(&x.hermitian_part())?;
    let cutoff = 1e-14 * e.max().max(1.0);
    let mut kraus = Vec::new();
    for (k, &lam) in e.values.iter().enumerate() {
        if lam <= cutoff {
            break;
        }
        let s = lam.sqrt();
        kraus.push(CMatrix::from_fn(d_out, d_in, |o, i| e.vectors[(i * d_out + o, k)] * s));
    }
    let mut t = CMatrix::zeros(d_in, d_in);
    for k in &kraus {
        t += &k.adjoint_mul(k);
    }
    let fix = psd_pinv_sqrt(&t.hermitian_part())?;
    let kraus = kraus.iter().map(|k| k * &fix).collect();
    Channel::new(d_in, d_out, kraus)
}

/// Decides `Λ₁ ≾ Λ₂`: a channel `ℰ` with `Λ₁ = Λ₂ ∘ ℰ` (Heisenberg), i.e.
/// `Λ₁^S = ℰ^S ∘ Λ₂^S`. The witness is `ℰ`, stored in the Schrödinger picture.
pub fn chan_leq(l1: &Channel, l2: &Channel, opts: &SolverOptions) -> Result<FeasibilityOutcome<Channel>> {
    if l1.dim_in() != l2.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "channels have input dimensions {} and {}",
            l1.dim_in(),
            l2.dim_in()
        )));
    }
    let d = l1.dim_in();
    let (d2, d1) = (l2.dim_out(), l1.dim_out());
    // Λ₂^S(|i⟩⟨j|), row-major in (i, j).
    let images: Vec<CMatrix> = (0..d * d)
        .map(|ij| {
            let mut u = CMatrix::zeros(d, d);
            u[(ij / d, ij % d)] = crate::numerics::C64::new(1.0, 0.0);
            l2.apply(&u)
        })
        .collect();
    let map = |x: &[CMatrix]| -> Vec<CMatrix> {
        let choi = ChoiMatrix {
            dim_in: d2,
            dim_out: d1,
            matrix: x[0].clone(),
        };
        let tp = x[0]
            .partial_trace(d2, d1, crate::numerics::Subsystem::Second)
            .expect("block shape matches");
        let mut composed = CMatrix::zeros(d * d1, d * d1);
        for i in 0..d {
            for j in 0..d {
                let out = choi.apply(&images[i * d + j]);
                for o in 0..d1 {
                    for p in 0..d1 {
                        composed[(i * d1 + o, j * d1 + p)] = out[(o, p)];
                    }
                }
            }
        }
        vec![tp, composed.hermitian_part()]
    };
    let target = [CMatrix::identity(d2), l1.choi().matrix];
    let problem = PsdAffineProblem::from_map(&[d2 * d1], map, &target);
    let start = [CMatrix::identity(d2 * d1).scale(1.0 / d1 as f64)];
    let out = psd_affine_feasible(&problem, Some(&start), opts);
    if !out.is_feasible() {
        let (s, r) = (out.status, out.residual);
        return Ok(out.rejected(s, r));
    }
    let x = out.witness.as_ref().expect("feasible outcome has a witness")[0].clone();
    let t = x.partial_trace(d2, d1, crate::numerics::Subsystem::Second)?;
    let s = psd_pinv_sqrt(&t.hermitian_part())?.kron(&CMatrix::identity(d1));
    let repaired = s.sandwich(&x).hermitian_part();
    let Ok(eps) = channel_from_psd_choi(d2, d1, &repaired) else {
        let r = out.residual;
        return Ok(out.rejected(FeasibilityStatus::Undecided, r));
    };
    let residual = Channel::compose(&eps, l2)?.choi_distance(l1);
    Ok(if residual <= opts.feas_tol {
        out.accepted(eps, residual)
    } else {
        out.rejected(FeasibilityStatus::Undecided, residual)
    })
}

/// Witness of compatibility: a minimal Stinespring dilation `V` of the channel
/// and an environment observable `R` with `A(x) = V*(I ⊗ R(x))V`.
#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityWitness {
    pub stinespring: Stinespring,
    pub radon_nikodym: Observable,
}

impl CompatibilityWitness {
    /// `max_x ‖A(x) - V*(I ⊗ R(x))V‖_F`.
    pub fn residual(&self, a: &Observable) -> f64 {
        if a.num_outcomes() != self.radon_nikodym.num_outcomes() {
            return f64::INFINITY;
        }
        a.effects()
            .iter()
            .zip(self.radon_nikodym.effects())
            .map(|(e, r)| self.stinespring.environment_form(r).dist(e))
            .fold(0.0, f64::max)
    }
}

/// Decides whether `Λ` is compatible with `A` by searching for `R` on the
/// environment of a minimal Stinespring dilation.
pub fn is_a_channel(
    lambda: &Channel,
    a: &Observable,
    opts: &SolverOptions,
) -> Result<FeasibilityOutcome<CompatibilityWitness>> {
    if lambda.dim_in() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel input has dimension {} but the observable acts on {}",
            lambda.dim_in(),
            a.dim()
        )));
    }
    let st = lambda.minimal_stinespring()?;
    let m = st.env_dim;
    let n = a.num_outcomes();
    let map = |r: &[CMatrix]| -> Vec<CMatrix> {
        let mut total = CMatrix::zeros(m, m);
        let mut out = Vec::with_capacity(n + 1);
        out.push(CMatrix::zeros(0, 0));
        for rx in r {
            total += rx;
            out.push(st.environment_form(rx));
        }
        out[0] = total;
        out
    };
    let mut target = vec![CMatrix::identity(m)];
    target.extend(a.effects().iter().cloned());
    let problem = PsdAffineProblem::from_map(&vec![m; n], map, &target);
    let start = vec![CMatrix::identity(m).scale(1.0 / n as f64); n];
    let out = psd_affine_feasible(&problem, Some(&start), opts);
    if !out.is_feasible() {
        let (s, r) = (out.status, out.residual);
        return Ok(out.rejected(s, r));
    }
    let r = out.witness.as_ref().expect("feasible outcome has a witness");
    let mut total = CMatrix::zeros(m, m);
    for rx in r {
        total += rx;
    }
    let fix = psd_pinv_sqrt(&total.hermitian_part())?;
    let repaired: Vec<CMatrix> = r.iter().map(|rx| fix.sandwich(rx).hermitian_part()).collect();
    let Ok(radon_nikodym) = Observable::with_dim(m, repaired) else {
        let res = out.residual;
        return Ok(out.rejected(FeasibilityStatus::Undecided, res));
    };
    let witness = CompatibilityWitness {
        stinespring: st,
        radon_nikodym,
    };
    let residual = witness.residual(a);
    Ok(if residual <= opts.feas_tol {
        out.accepted(witness, residual)
    } else {
        out.rejected(FeasibilityStatus::Undecided, residual)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilations::least_disturbing_channel;
    use crate::random::{random_channel, random_observable, random_sharp, random_state, random_stochastic, rng};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn hadamard_basis() -> Observable {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| crate::numerics::C64::new(x, 0.0);
        Observable::sharp_from_basis(&[vec![c(h), c(h)], vec![c(h), c(-h)]]).unwrap()
    }

    #[test]
    fn lp_examples() {
        let mut s = LinearSystem::new(1);
        s.push(vec![1.0], 1.0);
        assert!(lp_feasible(&s, &opts()).is_feasible());
        let mut s = LinearSystem::new(1);
        s.push(vec![1.0], -1.0);
        assert_eq!(lp_feasible(&s, &opts()).status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn coin_toss_is_below_everything() {
        let mut g = rng(51);
        let p = [0.3, 0.7];
        let c = Observable::coin_toss(&p, 3).unwrap();
        for _ in 0..5 {
            let b = random_observable(&mut g, 3, 4);
            let out = obs_leq(&c, &b, &opts()).unwrap();
            assert!(out.is_feasible());
            assert!(out.residual <= 1e-7);
            // The canonical witness M_xy = p(x) also works.
            let m = StochasticMatrix::constant_columns(&p, 4).unwrap();
            assert!(smearing_residual(&c, &b, &m) <= 1e-12);
        }
    }

    #[test]
    fn smearing_is_below() {
        let mut g = rng(52);
        for _ in 0..10 {
            let b = random_observable(&mut g, 2, 3);
            let m0 = random_stochastic(&mut g, 4, 3);
            let a = b.smear(&m0).unwrap();
            let out = obs_leq(&a, &b, &opts()).unwrap();
            assert!(out.is_feasible());
            assert!(smearing_residual(&a, &b, out.witness.as_ref().unwrap()) <= 1e-7);
        }
    }

    #[test]
    fn sharp_bases_are_incomparable() {
        let z = Observable::standard_basis(2);
        let x = hadamard_basis();
        let out = obs_leq(&z, &x, &opts()).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Infeasible);
        assert!(out.residual > 1e-7);
        assert_eq!(obs_leq(&x, &z, &opts()).unwrap().status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn transitivity_composes_witnesses() {
        let mut g = rng(53);
        let c = random_observable(&mut g, 2, 2);
        let b = c.smear(&random_stochastic(&mut g, 3, 2)).unwrap();
        let a = b.smear(&random_stochastic(&mut g, 2, 3)).unwrap();
        let m1 = obs_leq(&a, &b, &opts()).unwrap().witness.unwrap();
        let m2 = obs_leq(&b, &c, &opts()).unwrap().witness.unwrap();
        assert!(smearing_residual(&a, &c, &m1.then(&m2).unwrap()) <= 1e-7);
    }

    #[test]
    fn equivalence_examples() {
        let mut g = rng(54);
        let a = random_observable(&mut g, 2, 3);
        assert!(obs_equiv(&a, &a.permuted(&[2, 0, 1]).unwrap(), &opts()).unwrap());
        let p = Observable::coin_toss(&[0.5, 0.5], 2).unwrap();
        let q = Observable::coin_toss(&[0.1, 0.2, 0.7], 2).unwrap();
        assert!(obs_equiv(&p, &q, &opts()).unwrap());
        let sharp = Observable::standard_basis(2);
        let mix = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(!obs_equiv(&sharp, &sharp.smear(&mix).unwrap(), &opts()).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let r = obs_leq(&Observable::standard_basis(2), &Observable::standard_basis(3), &opts());
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = chan_leq(&Channel::identity(2), &Channel::identity(3), &opts());
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn identity_is_greatest_channel() {
        let mut g = rng(55);
        for _ in 0..3 {
            let l = random_channel(&mut g, 2, 3, 2);
            let out = chan_leq(&l, &Channel::identity(2), &opts()).unwrap();
            assert!(out.is_feasible(), "{:?}", out.status);
            assert!(out.witness.unwrap().choi_distance(&l) <= 1e-6);
        }
    }

    #[test]
    fn trash_and_prepare_is_least_channel() {
        let mut g = rng(56);
        for _ in 0..3 {
            let l = random_channel(&mut g, 2, 3, 2);
            let rho = random_state(&mut g, 2);
            let t = Channel::trash_and_prepare(&rho, 2).unwrap();
            let out = chan_leq(&t, &l, &opts()).unwrap();
            assert!(out.is_feasible(), "{:?}", out.status);
            assert!(out.residual <= 1e-6);
        }
    }

    #[test]
    fn identity_cannot_be_decoded_from_a_measurement() {
        let l = least_disturbing_channel(&Observable::standard_basis(2));
        let out = chan_leq(&Channel::identity(2), &l, &opts()).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Infeasible);
        assert!(out.residual > 1e-4);
    }

    #[test]
    fn least_disturbing_channel_is_compatible() {
        let mut g = rng(57);
        for (d, n) in [(2, 2), (2, 3), (3, 3)] {
            let a = random_observable(&mut g, d, n);
            let out = is_a_channel(&least_disturbing_channel(&a), &a, &opts()).unwrap();
            assert!(out.is_feasible(), "{:?}", out.status);
            assert!(out.witness.unwrap().residual(&a) <= 1e-6);
        }
    }

    #[test]
    fn smeared_observable_is_compatible_with_finer_channel() {
        let mut g = rng(58);
        for _ in 0..5 {
            let b = random_observable(&mut g, 2, 3);
            let a = b.smear(&random_stochastic(&mut g, 2, 3)).unwrap();
            let out = is_a_channel(&least_disturbing_channel(&b), &a, &opts()).unwrap();
            assert!(out.is_feasible(), "{:?}", out.status);
        }
    }

    #[test]
    fn identity_is_only_compatible_with_coin_tosses() {
        let sharp = random_sharp(&mut rng(59), 2);
        let out = is_a_channel(&Channel::identity(2), &sharp, &opts()).unwrap();
        assert_eq!(out.status, FeasibilityStatus::Infeasible);
        let coin = Observable::coin_toss(&[0.4, 0.6], 2).unwrap();
        assert!(is_a_channel(&Channel::identity(2), &coin, &opts())
            .unwrap()
            .is_feasible());
    }

    #[test]
    fn compatibility_matches_degrading_by_least_disturbing_channel() {
        let mut g = rng(60);
        let b = random_observable(&mut g, 2, 2);
        let a = b.smear(&random_stochastic(&mut g, 2, 2)).unwrap();
        let lb = least_disturbing_channel(&b);
        let la = least_disturbing_channel(&a);
        assert!(is_a_channel(&lb, &a, &opts()).unwrap().is_feasible());
        assert!(chan_leq(&lb, &la, &opts()).unwrap().is_feasible());
        let z = Observable::standard_basis(2);
        let x = hadamard_basis();
        let lz = least_disturbing_channel(&z);
        assert!(!is_a_channel(&lz, &x, &opts()).unwrap().is_feasible());
        assert!(!chan_leq(&lz, &least_disturbing_channel(&x), &opts())
            .unwrap()
            .is_feasible());
    }

    #[test]
    fn witnesses_serialise() {
        let out = obs_leq(&Observable::standard_basis(2), &Observable::standard_basis(2), &opts()).unwrap();
        let v = serde_json::to_value(&out).unwrap();
        assert_eq!(v["status"], "feasible");
        assert!(v["witness"].is_array());
    }
}
