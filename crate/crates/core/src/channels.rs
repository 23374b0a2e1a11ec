//! Quantum channels stored as Schrödinger-picture Kraus operators.
//!
//! The Heisenberg action is the adjoint, `Λ(C) = Σ_i K_i* C K_i`, so
//! `tr[Λ^S(ρ) C] = tr[ρ Λ(C)]`. The Choi matrix puts the input system first:
//! `J = Σ_{ij} |i⟩⟨j| ⊗ Λ^S(|i⟩⟨j|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, psd_rank, CMatrix, Subsystem, C64, RANK_TOL};
use crate::report::{ValidationReport, ViolationKind};

/// `‖Σ K*K - I‖` tolerance.
pub const TP_TOL: f64 = 1e-9;
/// Most negative Choi eigenvalue accepted as CP.
pub const CP_TOL: f64 = 1e-8;
/// Choi distance below which two channels are considered equal.
pub const CHANNEL_EQ_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelData", into = "ChannelData")]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

/// Unvalidated JSON body `{"dim_in", "dim_out", "kraus"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelData {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<CMatrix>,
}

/// Choi matrix on `dim_in * dim_out` dimensions, input factor first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: CMatrix,
}

/// Stinespring isometry `V: H -> K_out ⊗ K_env`, with `Λ(C) = V*(C ⊗ I)V`.
#[derive(Clone, Debug, Serialize)]
pub struct Stinespring {
    pub isometry: CMatrix,
    pub dim_out: usize,
    pub env_dim: usize,
}

impl Stinespring {
    /// Stacks Kraus operators: `V ψ = Σ_j K_j ψ ⊗ e_j`.
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> Self {
        let m = kraus.len();
        let v = CMatrix::from_fn(dim_out * m, dim_in, |r, i| kraus[r % m][(r / m, i)]);
        Self {
            isometry: v,
            dim_out,
            env_dim: m,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.isometry.cols()
    }

    /// `V*(C ⊗ I)V`.
    pub fn heisenberg(&self, c: &CMatrix) -> CMatrix {
        self.sandwich_env(&c.kron(&CMatrix::identity(self.env_dim)))
    }

    /// `V*(I ⊗ R)V` for an environment operator `R`.
    pub fn environment_form(&self, r: &CMatrix) -> CMatrix {
        self.sandwich_env(&CMatrix::identity(self.dim_out).kron(r))
    }

    fn sandwich_env(&self, big: &CMatrix) -> CMatrix {
        self.isometry.adjoint_mul(&(big * &self.isometry)).hermitian_part()
    }

    /// The `j`-th Kraus operator `(I ⊗ ⟨j|) V`.
    pub fn kraus(&self, j: usize) -> CMatrix {
        let m = self.env_dim;
        CMatrix::from_fn(self.dim_out, self.dim_in(), |o, i| self.isometry[(o * m + j, i)])
    }
}

/// Reports the trace-preservation defect and the most negative Choi eigenvalue.
pub fn validate_channel(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (k, op) in kraus.iter().enumerate() {
        if op.rows() != dim_out || op.cols() != dim_in {
            report.push(
                ViolationKind::Shape,
                1.0,
                Some(k),
                format!(
                    "Kraus operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    op.rows(),
                    op.cols()
                ),
            );
        }
    }
    if !report.is_ok() {
        return report;
    }
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        sum += &k.adjoint_mul(k);
    }
    let tp = sum.dist(&CMatrix::identity(dim_in));
    if tp > TP_TOL {
        report.push(
            ViolationKind::NotTracePreserving,
            tp,
            None,
            "Σ K*K differs from the identity",
        );
    }
    let choi = choi_from_kraus(dim_in, dim_out, kraus);
    check_cp(&choi, &mut report);
    report
}

/// Same checks on a Choi matrix (which may describe a non-CP map).
pub fn validate_choi(choi: &ChoiMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = choi.dim_in * choi.dim_out;
    if choi.matrix.rows() != n || choi.matrix.cols() != n {
        report.push(ViolationKind::Shape, 1.0, None, "Choi matrix has the wrong size");
        return report;
    }
    let asym = choi.matrix.hermitian_defect();
    if asym > TP_TOL {
        report.push(ViolationKind::NonHermitian, asym, None, "Choi matrix is not Hermitian");
    }
    let reduced = choi
        .matrix
        .partial_trace(choi.dim_in, choi.dim_out, Subsystem::Second)
        .expect("size checked");
    let tp = reduced.dist(&CMatrix::identity(choi.dim_in));
    if tp > TP_TOL {
        report.push(
            ViolationKind::NotTracePreserving,
            tp,
            None,
            "output partial trace differs from the identity",
        );
    }
    check_cp(&choi.matrix.hermitian_part(), &mut report);
    report
}

fn check_cp(choi: &CMatrix, report: &mut ValidationReport) {
    match herm_eig(choi) {
        Ok(e) if e.min() < -CP_TOL => report.push(
            ViolationKind::NotCompletelyPositive,
            -e.min(),
            None,
            format!("Choi matrix has eigenvalue {:.3e}", e.min()),
        ),
        Ok(_) => {}
        Err(err) => report.push(
            ViolationKind::NotCompletelyPositive,
            f64::INFINITY,
            None,
            err.to_string(),
        ),
    }
}

fn choi_from_kraus(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> CMatrix {
    let n = dim_in * dim_out;
    let mut j = CMatrix::zeros(n, n);
    for k in kraus {
        // vec(K)[i * d_out + o] = K[o][i]
        let v: Vec<C64> = (0..n).map(|r| k[(r % dim_out, r / dim_out)]).collect();
        for a in 0..n {
            if v[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..n {
                j[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    j.hermitian_part()
}

impl Channel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let report = validate_trace_preservation(dim_in, dim_out, &kraus);
        if !report.is_ok() {
            return Err(Error::InvalidChannel(report));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMatrix::identity(dim)],
        }
    }

    /// `ρ ↦ U ρ U*`; `U` may be an isometry.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(u.cols(), u.rows(), vec![u])
    }

    /// `Λ_ρ`: discard the input and prepare `ρ`. Heisenberg form `C ↦ tr[ρC] I`.
    pub fn trash_and_prepare(rho: &CMatrix, dim_in: usize) -> Result<Self> {
        check_state(rho)?;
        let d_out = rho.rows();
        let e = herm_eig(rho)?;
        let mut kraus = Vec::new();
        for (l, &r) in e.values.iter().enumerate() {
            if r <= RANK_TOL {
                continue;
            }
            let col = e.vectors.column(l);
            for i in 0..dim_in {
                let mut k = CMatrix::zeros(d_out, dim_in);
                for o in 0..d_out {
                    k[(o, i)] = col[o] * r.sqrt();
                }
                kraus.push(k);
            }
        }
        // Eigenvalues below the rank cut leave a tiny trace defect; restore it.
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += &k.adjoint_mul(k);
        }
        let s = sum[(0, 0)].re;
        let kraus = kraus.into_iter().map(|k| k.scale(1.0 / s.sqrt())).collect();
        Self::new(dim_in, d_out, kraus)
    }

    /// `S_σ(C) = tr[σC] I`, the completely depolarizing channel onto `σ`.
    pub fn depolarize_to(sigma: &CMatrix, dim_in: usize) -> Result<Self> {
        Self::trash_and_prepare(sigma, dim_in)
    }

    /// Convex combination `Σ_k w_k Λ_k`.
    pub fn mix(parts: &[(f64, &Channel)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty mixture".into()))?
            .1;
        let mut kraus = Vec::new();
        for &(w, ch) in parts {
            if ch.dim_in != first.dim_in || ch.dim_out != first.dim_out {
                return Err(Error::DimensionMismatch(
                    "mixture of channels with different shapes".into(),
                ));
            }
            if !(0.0..=1.0 + 1e-12).contains(&w) {
                return Err(Error::InvalidDistribution(format!("mixture weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            kraus.extend(ch.kraus.iter().map(|k| k.scale(w.sqrt())));
        }
        Self::new(first.dim_in, first.dim_out, kraus)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn validate(&self) -> ValidationReport {
        validate_channel(self.dim_in, self.dim_out, &self.kraus)
    }

    /// Schrödinger action `ρ ↦ Σ K ρ K*`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += &k.sandwich(rho);
        }
        out
    }

    /// Heisenberg action `C ↦ Σ K* C K`.
    pub fn apply_heisenberg(&self, c: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += &k.adjoint_mul(&(c * k));
        }
        out
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            matrix: choi_from_kraus(self.dim_in, self.dim_out, &self.kraus),
        }
    }

    /// Schrödinger composition `later ∘ earlier` (first `earlier`, then `later`).
    /// In Heisenberg language this is `earlier ∘ later`.
    pub fn compose(later: &Channel, earlier: &Channel) -> Result<Channel> {
        if later.dim_in != earlier.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed a {}-dimensional output into a {}-dimensional input",
                earlier.dim_out, later.dim_in
            )));
        }
        let mut kraus = Vec::with_capacity(later.kraus.len() * earlier.kraus.len());
        for l in &later.kraus {
            for e in &earlier.kraus {
                let p = l * e;
                if p.max_abs() > 0.0 {
                    kraus.push(p);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(later.dim_out, earlier.dim_in));
        }
        Channel::new(earlier.dim_in, later.dim_out, kraus)
    }

    /// Same channel with a minimal Kraus set (size = Choi rank).
    pub fn minimal(&self) -> Result<Channel> {
        self.choi().to_channel()
    }

    /// Minimal Stinespring dilation. The stored Kraus operators are used
    /// directly when they are linearly independent; otherwise they are
    /// re-derived from the Choi matrix.
    pub fn minimal_stinespring(&self) -> Result<Stinespring> {
        let m = self.kraus.len();
        let gram = CMatrix::from_fn(m, m, |i, j| self.kraus[i].adjoint_mul(&self.kraus[j]).trace());
        let kraus = if psd_rank(&gram.hermitian_part())? == m {
            self.kraus.clone()
        } else {
            self.minimal()?.kraus
        };
        Ok(Stinespring::from_kraus(self.dim_in, self.dim_out, &kraus))
    }

    /// Complementary channel into the environment of the minimal Stinespring
    /// dilation: `ρ ↦ tr_out[V ρ V*]`.
    pub fn conjugate(&self) -> Result<Channel> {
        let st = self.minimal_stinespring()?;
        let m = st.env_dim;
        let kraus = (0..self.dim_out)
            .map(|o| CMatrix::from_fn(m, self.dim_in, |j, i| st.isometry[(o * m + j, i)]))
            .collect();
        Channel::new(self.dim_in, m, kraus)
    }

    /// Frobenius distance of Choi matrices; infinite when shapes differ.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return f64::INFINITY;
        }
        self.choi().matrix.dist(&other.choi().matrix)
    }

    pub fn approx_eq(&self, other: &Channel, tol: f64) -> bool {
        self.choi_distance(other) <= tol
    }
}

fn validate_trace_preservation(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> ValidationReport {
    let mut report = ValidationReport::default();
    if kraus.is_empty() {
        report.push(ViolationKind::Shape, 1.0, None, "channel has no Kraus operators");
        return report;
    }
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for (k, op) in kraus.iter().enumerate() {
        if op.rows() != dim_out || op.cols() != dim_in {
            report.push(
                ViolationKind::Shape,
                1.0,
                Some(k),
                format!(
                    "Kraus operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    op.rows(),
                    op.cols()
                ),
            );
            return report;
        }
        sum += &op.adjoint_mul(op);
    }
    let tp = sum.dist(&CMatrix::identity(dim_in));
    if tp > TP_TOL {
        report.push(
            ViolationKind::NotTracePreserving,
            tp,
            None,
            "Σ K*K differs from the identity",
        );
    }
    report
}

pub(crate) fn check_state(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() || rho.rows() == 0 {
        return Err(Error::InvalidState("state must be a non-empty square matrix".into()));
    }
    if rho.hermitian_defect() > 1e-9 {
        return Err(Error::InvalidState("state is not Hermitian".into()));
    }
    let e = herm_eig(&rho.hermitian_part())?;
    if e.min() < -1e-9 {
        return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", e.min())));
    }
    let t = rho.trace();
    if (t.re - 1.0).abs() > 1e-9 || t.im.abs() > 1e-9 {
        return Err(Error::InvalidState(format!("trace is {t}")));
    }
    Ok(())
}

impl ChoiMatrix {
    /// Kraus operators from the eigendecomposition, one per eigenvalue above
    /// the rank tolerance.
    pub fn to_channel(&self) -> Result<Channel> {
        let report = validate_choi(self);
        if report.has(ViolationKind::Shape) || report.has(ViolationKind::NotCompletelyPositive) {
            return Err(Error::InvalidChannel(report));
        }
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        let e = herm_eig(&self.matrix.hermitian_part())?;
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= RANK_TOL {
                break;
            }
            let s = lam.sqrt();
            kraus.push(CMatrix::from_fn(d_out, d_in, |o, i| e.vectors[(i * d_out + o, k)] * s));
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(d_out, d_in));
        }
        Channel::new(d_in, d_out, kraus)
    }

    /// Action of the map on an input operator: `tr_in[(Y^T ⊗ I) J]`.
    pub fn apply(&self, y: &CMatrix) -> CMatrix {
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        let mut out = CMatrix::zeros(d_out, d_out);
        for a in 0..d_in {
            for b in 0..d_in {
                let w = y[(a, b)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for o in 0..d_out {
                    for p in 0..d_out {
                        out[(o, p)] += w * self.matrix[(a * d_out + o, b * d_out + p)];
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<ChannelData> for Channel {
    type Error = Error;

    fn try_from(d: ChannelData) -> Result<Self> {
        Self::new(d.dim_in, d.dim_out, d.kraus)
    }
}

impl From<Channel> for ChannelData {
    fn from(c: Channel) -> Self {
        ChannelData {
            dim_in: c.dim_in,
            dim_out: c.dim_out,
            kraus: c.kraus,
        }
    }
}
