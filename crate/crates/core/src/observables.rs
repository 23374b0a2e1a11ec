//! POVMs: validation, canonical constructors and classical smearing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, CMatrix, C64};
use crate::report::{ValidationReport, ViolationKind};
use crate::stochastic::StochasticMatrix;

/// Tolerance for effect positivity and completeness.
pub const OBSERVABLE_TOL: f64 = 1e-9;
/// Effects with operator norm at or below this are outside the support.
pub const ZERO_EFFECT_TOL: f64 = 1e-10;

/// Finite-outcome observable on a `dim`-dimensional space. Outcomes are
/// positional; zero effects are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableData", into = "ObservableData")]
pub struct Observable {
    dim: usize,
    effects: Vec<CMatrix>,
}

/// Unvalidated JSON body `{"dim": d, "effects": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableData {
    pub dim: usize,
    pub effects: Vec<CMatrix>,
}

/// Indices of the outcomes with a nonzero effect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcomeSupport {
    pub indices: Vec<usize>,
}

impl OutcomeSupport {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.indices.contains(&x)
    }
}

/// Checks positivity of every effect and `Σ_x A(x) = I`. Never panics.
pub fn validate_observable(dim: usize, effects: &[CMatrix]) -> ValidationReport {
    let mut report = ValidationReport::default();
    if effects.is_empty() {
        report.push(ViolationKind::Shape, 1.0, None, "observable has no outcomes");
        return report;
    }
    let mut total = CMatrix::zeros(dim, dim);
    let mut shapes_ok = true;
    for (x, e) in effects.iter().enumerate() {
        if e.rows() != dim || e.cols() != dim {
            report.push(
                ViolationKind::Shape,
                1.0,
                Some(x),
                format!("effect {x} is {}x{}, expected {dim}x{dim}", e.rows(), e.cols()),
            );
            shapes_ok = false;
            continue;
        }
        let asym = e.hermitian_defect();
        if asym > OBSERVABLE_TOL {
            report.push(
                ViolationKind::NonHermitian,
                asym,
                Some(x),
                format!("effect {x} is not Hermitian"),
            );
        }
        match herm_eig(&e.hermitian_part()) {
            Ok(eig) if eig.min() < -OBSERVABLE_TOL => report.push(
                ViolationKind::NotPsd,
                -eig.min(),
                Some(x),
                format!("effect {x} has negative eigenvalue {:.3e}", eig.min()),
            ),
            Ok(_) => {}
            Err(err) => report.push(ViolationKind::NotPsd, f64::INFINITY, Some(x), err.to_string()),
        }
        total += e;
    }
    if shapes_ok {
        let defect = total.dist(&CMatrix::identity(dim));
        if defect > OBSERVABLE_TOL {
            report.push(
                ViolationKind::Incomplete,
                defect,
                None,
                "effects do not sum to the identity",
            );
        }
    }
    report
}

impl Observable {
    /// Validated constructor; the dimension is read off the first effect.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let dim = effects.first().map_or(0, CMatrix::rows);
        Self::with_dim(dim, effects)
    }

    pub fn with_dim(dim: usize, effects: Vec<CMatrix>) -> Result<Self> {
        let report = validate_observable(dim, &effects);
        if !report.is_ok() {
            return Err(Error::InvalidObservable(report));
        }
        let effects = effects.into_iter().map(|e| e.hermitian_part()).collect();
        Ok(Self { dim, effects })
    }

    /// Coin-tossing observable `C_p(x) = p(x) I`.
    pub fn coin_toss(p: &[f64], dim: usize) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > OBSERVABLE_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        Ok(Self {
            dim,
            effects: p.iter().map(|&v| CMatrix::identity(dim).scale(v)).collect(),
        })
    }

    /// Sharp observable `|φ_x⟩⟨φ_x|` for an orthonormal basis.
    pub fn sharp_from_basis(vectors: &[Vec<C64>]) -> Result<Self> {
        let d = vectors.len();
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "basis of {d} vectors must have {d} components each"
            )));
        }
        let gram = CMatrix::from_fn(d, d, |i, j| {
            vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a.conj() * b).sum()
        });
        let defect = gram.dist(&CMatrix::identity(d));
        if defect > OBSERVABLE_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self {
            dim: d,
            effects: vectors.iter().map(|v| CMatrix::outer(v, v)).collect(),
        })
    }

    /// Sharp observable in the computational basis.
    pub fn standard_basis(dim: usize) -> Self {
        let vectors: Vec<Vec<C64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self::sharp_from_basis(&vectors).expect("standard basis is orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &CMatrix {
        &self.effects[x]
    }

    pub fn validate(&self) -> ValidationReport {
        validate_observable(self.dim, &self.effects)
    }

    pub fn support(&self) -> OutcomeSupport {
        OutcomeSupport {
            indices: self
                .effects
                .iter()
                .enumerate()
                .filter(|(_, e)| e.max_abs() > ZERO_EFFECT_TOL && effect_norm(e) > ZERO_EFFECT_TOL)
                .map(|(x, _)| x)
                .collect(),
        }
    }

    /// `A(x) = Σ_y M[x][y] B(y)`.
    pub fn smear(&self, m: &StochasticMatrix) -> Result<Self> {
        if m.cols() != self.num_outcomes() {
            return Err(Error::DimensionMismatch(format!(
                "stochastic matrix has {} columns but the observable has {} outcomes",
                m.cols(),
                self.num_outcomes()
            )));
        }
        let effects = (0..m.rows())
            .map(|x| {
                let mut e = CMatrix::zeros(self.dim, self.dim);
                for (y, b) in self.effects.iter().enumerate() {
                    let w = m.get(x, y);
                    if w != 0.0 {
                        e += &b.scale(w);
                    }
                }
                e
            })
            .collect();
        Ok(Self { dim: self.dim, effects })
    }

    /// Relabels outcome `x` as `perm[x]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        self.smear(&StochasticMatrix::permutation(perm)?)
    }

    /// Appends zero effects up to `n` outcomes.
    pub fn padded(&self, n: usize) -> Self {
        let mut effects = self.effects.clone();
        while effects.len() < n {
            effects.push(CMatrix::zeros(self.dim, self.dim));
        }
        Self { dim: self.dim, effects }
    }

    /// Largest Frobenius distance between corresponding effects, treating
    /// missing trailing outcomes as zero effects.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let n = self.num_outcomes().max(other.num_outcomes());
        let a = self.padded(n);
        let b = other.padded(n);
        a.effects
            .iter()
            .zip(&b.effects)
            .map(|(x, y)| x.dist(y))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Outcome probabilities `tr[ρ A(x)]`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| (rho * e).trace().re).collect()
    }
}

fn effect_norm(e: &CMatrix) -> f64 {
    herm_eig(&e.hermitian_part()).map_or(f64::INFINITY, |eig| eig.max().abs().max(eig.min().abs()))
}

impl TryFrom<ObservableData> for Observable {
    type Error = Error;

    fn try_from(d: ObservableData) -> Result<Self> {
        Self::with_dim(d.dim, d.effects)
    }
}

impl From<Observable> for ObservableData {
    fn from(o: Observable) -> Self {
        ObservableData {
            dim: o.dim,
            effects: o.effects,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_observable, random_stochastic, rng};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn coin_toss_is_valid() {
        let c = Observable::coin_toss(&[0.3, 0.7], 3).unwrap();
        assert!(c.validate().is_ok());
        assert!(c.effect(0).dist(&CMatrix::identity(3).scale(0.3)) < 1e-15);
        let single = Observable::coin_toss(&[1.0], 2).unwrap();
        assert_eq!(single.effects(), &[CMatrix::identity(2)]);
        let half = Observable::coin_toss(&[0.5, 0.5], 2).unwrap();
        assert_eq!(half.effect(1), &CMatrix::identity(2).scale(0.5));
    }

    #[test]
    fn coin_toss_rejects_bad_distribution() {
        assert!(matches!(
            Observable::coin_toss(&[0.5, 0.6], 2),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(Observable::coin_toss(&[1.5, -0.5], 2).is_err());
    }

    #[test]
    fn completeness_violation_reported() {
        let rep = validate_observable(2, &[CMatrix::identity(2), CMatrix::identity(2)]);
        assert!(rep.has(ViolationKind::Incomplete));
        assert!(!rep.has(ViolationKind::NotPsd));
        let v = &rep.violations[0];
        assert!((v.magnitude - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn psd_violation_reported() {
        let rep = validate_observable(2, &[CMatrix::diag(&[1.1, 0.0]), CMatrix::diag(&[-0.1, 1.0])]);
        assert!(rep.has(ViolationKind::NotPsd));
        assert!(!rep.has(ViolationKind::Incomplete));
    }

    #[test]
    fn shape_violation_does_not_panic() {
        let rep = validate_observable(2, &[CMatrix::identity(3)]);
        assert!(rep.has(ViolationKind::Shape));
        assert!(validate_observable(2, &[]).has(ViolationKind::Shape));
    }

    #[test]
    fn support_examples() {
        let c = Observable::coin_toss(&[1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(c.support().indices, vec![0]);
        let sharp = Observable::standard_basis(2);
        assert_eq!(sharp.support().indices, vec![0, 1]);
        assert_eq!(sharp.padded(3).support().indices, vec![0, 1]);
    }

    #[test]
    fn sharp_bases() {
        let s = Observable::standard_basis(2);
        assert_eq!(s.effect(0), &CMatrix::diag(&[1.0, 0.0]));
        assert_eq!(s.effect(1), &CMatrix::diag(&[0.0, 1.0]));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = Observable::sharp_from_basis(&[vec![r(h), r(h)], vec![r(h), r(-h)]]).unwrap();
        let sx = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let plus = (&CMatrix::identity(2) + &sx).scale(0.5);
        let minus = (&CMatrix::identity(2) - &sx).scale(0.5);
        assert!(had.effect(0).dist(&plus) < 1e-15);
        assert!(had.effect(1).dist(&minus) < 1e-15);

        let s3 = Observable::standard_basis(3);
        assert_eq!(s3.effect(2), &CMatrix::diag(&[0.0, 0.0, 1.0]));
        for e in s3.effects() {
            assert!((e * e).dist(e) < 1e-10);
        }
    }

    #[test]
    fn sharp_rejects_non_orthonormal() {
        let err = Observable::sharp_from_basis(&[vec![r(1.0), r(0.0)], vec![r(1.0), r(0.0)]]);
        assert!(matches!(err, Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn smear_identity_and_constant() {
        let mut g = rng(1);
        let b = random_observable(&mut g, 3, 4);
        assert!(b.smear(&StochasticMatrix::identity(4)).unwrap().approx_eq(&b, 1e-15));
        let p = [0.2, 0.8];
        let m = StochasticMatrix::constant_columns(&p, 4).unwrap();
        let a = b.smear(&m).unwrap();
        assert!(a.approx_eq(&Observable::coin_toss(&p, 3).unwrap(), 1e-12));
    }

    #[test]
    fn smear_qubit_flip_shrinks_bloch_vector() {
        // A^v smeared by a symmetric flip with probability q is A^{(1-2q)v}.
        let v = [0.3, -0.4, 0.5];
        let q = 0.2;
        let m = StochasticMatrix::from_rows(&[vec![1.0 - q, q], vec![q, 1.0 - q]]).unwrap();
        let a = crate::qubit::qubit_observable(v).unwrap().smear(&m).unwrap();
        let expected = crate::qubit::qubit_observable(v.map(|c| (1.0 - 2.0 * q) * c)).unwrap();
        assert!(a.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn smear_dimension_mismatch() {
        let b = Observable::standard_basis(2);
        assert!(matches!(
            b.smear(&StochasticMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn smear_composes() {
        let mut g = rng(4);
        for _ in 0..10 {
            let b = random_observable(&mut g, 2, 3);
            let m1 = random_stochastic(&mut g, 4, 3);
            let m2 = random_stochastic(&mut g, 2, 4);
            let lhs = b.smear(&m1).unwrap().smear(&m2).unwrap();
            let rhs = b.smear(&m2.then(&m1).unwrap()).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
            assert!(lhs.validate().is_ok());
        }
    }

    #[test]
    fn equality_ignores_trailing_zeros() {
        let a = Observable::standard_basis(2);
        assert!(a.approx_eq(&a.padded(5), 0.0));
    }

    #[test]
    fn json_schema() {
        let a = Observable::coin_toss(&[1.0], 1).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"dim":1,"effects":[[[[1.0,0.0]]]]}"#);
        let bad = r#"{"dim":1,"effects":[[[[1.0,0.0]]],[[[1.0,0.0]]]]}"#;
        assert!(serde_json::from_str::<Observable>(bad).is_err());
    }
}
