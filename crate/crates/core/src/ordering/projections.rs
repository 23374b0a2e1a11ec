//! Feasibility of `{X = (X_1, …, X_k) : X_i ⪰ 0, G(X) = h}` by alternating
//! projections (Anderson-accelerated, or Dykstra's variant).
//!
//! Hermitian blocks are flattened to real coordinates (diagonal entries, then
//! `√2·Re` and `√2·Im` of the strict upper triangle), which makes the
//! Euclidean metric on coordinates the Frobenius metric on matrices.

use serde::{Deserialize, Serialize};

use super::{FeasibilityOutcome, FeasibilityStatus, SolverOptions, TracePoint};
use crate::numerics::{herm_eig, CMatrix, C64};

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Iterations between residual checks.
const CHECK_EVERY: usize = 10;
/// Window over which the inter-set gap must be stable before declaring infeasibility.
const STALL_WINDOW: usize = 500;
const STALL_REL_CHANGE: f64 = 1e-3;

/// Number of real coordinates of an `n × n` Hermitian matrix.
pub fn herm_dim(n: usize) -> usize {
    n * n
}

pub fn herm_to_coords(h: &CMatrix, out: &mut Vec<f64>) {
    let n = h.rows();
    for i in 0..n {
        out.push(h[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            out.push(SQRT2 * z.re);
            out.push(SQRT2 * z.im);
        }
    }
}

pub fn coords_to_herm(c: &[f64], n: usize) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(c[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(c[k], c[k + 1]) / SQRT2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Affine constraints `G x = h` over PSD blocks of the given sizes.
#[derive(Clone, Debug, Serialize)]
pub struct PsdAffineProblem {
    pub blocks: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl PsdAffineProblem {
    /// Builds `G` by applying a real-linear, Hermitian-preserving `map` to
    /// every coordinate basis element; `target` is the required image.
    pub fn from_map(blocks: &[usize], map: impl Fn(&[CMatrix]) -> Vec<CMatrix>, target: &[CMatrix]) -> Self {
        let n: usize = blocks.iter().map(|&b| herm_dim(b)).sum();
        let mut rhs = Vec::new();
        for t in target {
            herm_to_coords(t, &mut rhs);
        }
        let mut rows = vec![vec![0.0; n]; rhs.len()];
        let mut unit = vec![0.0; n];
        for col in 0..n {
            unit[col] = 1.0;
            let image = map(&split_blocks(blocks, &unit));
            unit[col] = 0.0;
            let mut c = Vec::with_capacity(rhs.len());
            for m in &image {
                herm_to_coords(m, &mut c);
            }
            assert_eq!(c.len(), rhs.len(), "map image does not match the target shape");
            for (r, v) in c.into_iter().enumerate() {
                rows[r][col] = v;
            }
        }
        Self {
            blocks: blocks.to_vec(),
            rows,
            rhs,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.blocks.iter().map(|&b| herm_dim(b)).sum()
    }

    /// `‖G x - h‖₂` in coordinates.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let r = dot(row, x) - b;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn residual_blocks(&self, x: &[CMatrix]) -> f64 {
        self.residual(&join_blocks(x))
    }
}

pub fn split_blocks(blocks: &[usize], x: &[f64]) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(blocks.len());
    let mut off = 0;
    for &b in blocks {
        out.push(coords_to_herm(&x[off..off + herm_dim(b)], b));
        off += herm_dim(b);
    }
    out
}

pub fn join_blocks(x: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in x {
        herm_to_coords(m, &mut out);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

/// Orthonormal row basis `Q` with `Q x = t` equivalent to the (least-squares
/// corrected) system `G x = h`.
struct AffineProjector {
    q: Vec<Vec<f64>>,
    t: Vec<f64>,
}

impl AffineProjector {
    /// Also returns `‖h - P_range(G) h‖`, the smallest residual any `x` can reach.
    fn new(p: &PsdAffineProblem) -> (Self, f64) {
        let m = p.rows.len();
        let n = p.num_vars();
        // Column space of G, to project h onto range(G).
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let scale = p.rows.iter().map(|r| norm(r)).fold(0.0, f64::max).max(1.0);
        for col in 0..n {
            let mut v: Vec<f64> = (0..m).map(|r| p.rows[r][col]).collect();
            let before = norm(&v);
            if before == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &v);
                    axpy(&mut v, -c, u);
                }
            }
            let after = norm(&v);
            if after > 1e-10 * scale {
                v.iter_mut().for_each(|e| *e /= after);
                basis.push(v);
            }
        }
        let mut h_range = vec![0.0; m];
        for u in &basis {
            let c = dot(u, &p.rhs);
            axpy(&mut h_range, c, u);
        }
        let ls_residual = p
            .rhs
            .iter()
            .zip(&h_range)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();

        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut t: Vec<f64> = Vec::new();
        for (row, &b) in p.rows.iter().zip(&h_range) {
            let mut v = row.clone();
            let mut tau = b;
            let before = norm(&v);
            if before == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for (qk, &tk) in q.iter().zip(&t) {
                    let c = dot(qk, &v);
                    axpy(&mut v, -c, qk);
                    tau -= c * tk;
                }
            }
            let after = norm(&v);
            if after > 1e-10 * before {
                v.iter_mut().for_each(|e| *e /= after);
                q.push(v);
                t.push(tau / after);
            }
        }
        (Self { q, t }, ls_residual)
    }

    /// Projection for orthonormal rows: `x - Qᵀ(Qx - t)`, evaluated in one pass.
    fn project(&self, x: &mut [f64]) {
        let coeffs: Vec<f64> = self.q.iter().zip(&self.t).map(|(qk, &tk)| dot(qk, x) - tk).collect();
        for (qk, c) in self.q.iter().zip(coeffs) {
            axpy(x, -c, qk);
        }
    }
}

fn project_psd(blocks: &[usize], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut off = 0;
    for &b in blocks {
        let h = coords_to_herm(&x[off..off + herm_dim(b)], b);
        let p = herm_eig(&h)
            .expect("coordinate blocks are Hermitian")
            .reconstruct_with(|v| v.max(0.0));
        herm_to_coords(&p, &mut out);
        off += herm_dim(b);
    }
    out
}

/// Iteration scheme for [`psd_affine_feasible`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    /// Alternating projections `x ↦ P_psd(P_aff(x))` with Anderson
    /// acceleration and a monotone safeguard.
    #[default]
    Anderson,
    /// Dykstra's corrected alternating projections; converges to the point of
    /// the intersection nearest the start, which can be slow when that point
    /// lies on the PSD boundary.
    Dykstra,
}

enum Verdict {
    Continue,
    Feasible(f64),
    Infeasible(f64),
}

/// Shared bookkeeping: best iterate, residual trace and stall detection.
struct Monitor<'a> {
    problem: &'a PsdAffineProblem,
    opts: &'a SolverOptions,
    target: f64,
    trace: Vec<TracePoint>,
    gaps: Vec<(usize, f64)>,
    best: Option<(f64, Vec<f64>)>,
}

impl<'a> Monitor<'a> {
    fn new(problem: &'a PsdAffineProblem, opts: &'a SolverOptions) -> Self {
        Self {
            problem,
            opts,
            target: opts.feas_tol * 0.01,
            trace: Vec::new(),
            gaps: Vec::new(),
            best: None,
        }
    }

    /// `p` is a PSD iterate and `gap` its distance to the paired affine point.
    fn observe(&mut self, it: usize, p: &[f64], gap: f64) -> Verdict {
        if !it.is_multiple_of(CHECK_EVERY) && it != 1 {
            return Verdict::Continue;
        }
        let residual = self.problem.residual(p);
        if self.best.as_ref().is_none_or(|(r, _)| residual < *r) {
            self.best = Some((residual, p.to_vec()));
        }
        if self.opts.record_trace && (it == 1 || it.is_multiple_of(100)) {
            self.trace.push(TracePoint {
                iteration: it,
                residual,
                gap,
            });
        }
        if residual <= self.target {
            return Verdict::Feasible(residual);
        }
        if it.is_multiple_of(100) {
            self.gaps.push((it, gap));
            let recent = self
                .gaps
                .iter()
                .filter(|(i, _)| it - i < STALL_WINDOW)
                .map(|g| g.1)
                .fold(f64::INFINITY, f64::min);
            let older = self
                .gaps
                .iter()
                .filter(|(i, _)| it - i >= STALL_WINDOW)
                .map(|g| g.1)
                .fold(f64::INFINITY, f64::min);
            if older.is_finite() && recent > self.opts.infeasible_gap && recent >= (1.0 - STALL_REL_CHANGE) * older {
                return Verdict::Infeasible(recent);
            }
        }
        Verdict::Continue
    }

    fn finish(self, verdict: Verdict, iterations: usize) -> FeasibilityOutcome<Vec<CMatrix>> {
        let blocks = &self.problem.blocks;
        let (status, witness, residual) = match verdict {
            Verdict::Feasible(r) => {
                let (_, p) = self.best.expect("a feasible check records its iterate");
                (FeasibilityStatus::Feasible, Some(split_blocks(blocks, &p)), r)
            }
            Verdict::Infeasible(gap) => (FeasibilityStatus::Infeasible, None, gap),
            Verdict::Continue => match self.best {
                Some((r, p)) if r <= self.opts.feas_tol => {
                    (FeasibilityStatus::Feasible, Some(split_blocks(blocks, &p)), r)
                }
                Some((r, _)) => (FeasibilityStatus::Undecided, None, r),
                None => (FeasibilityStatus::Undecided, None, f64::INFINITY),
            },
        };
        FeasibilityOutcome {
            status,
            witness,
            residual,
            iterations,
            trace: self.trace,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Searches for PSD blocks meeting the affine constraints, starting from
/// `start` (zero when absent). A feasible outcome carries PSD blocks whose
/// affine residual is at most `opts.feas_tol`.
pub fn psd_affine_feasible(
    problem: &PsdAffineProblem,
    start: Option<&[CMatrix]>,
    opts: &SolverOptions,
) -> FeasibilityOutcome<Vec<CMatrix>> {
    let n = problem.num_vars();
    let (proj, ls_residual) = AffineProjector::new(problem);
    if ls_residual > opts.feas_tol {
        // No point at all, PSD or not, meets the equations.
        return FeasibilityOutcome {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            residual: ls_residual,
            iterations: 0,
            trace: Vec::new(),
        };
    }
    let x0 = match start {
        Some(s) => join_blocks(s),
        None => vec![0.0; n],
    };
    assert_eq!(x0.len(), n, "start point has the wrong shape");
    let monitor = Monitor::new(problem, opts);
    match opts.method {
        ProjectionMethod::Dykstra => run_dykstra(problem, &proj, x0, monitor),
        ProjectionMethod::Anderson => run_anderson(problem, &proj, x0, monitor),
    }
}

fn run_dykstra(
    problem: &PsdAffineProblem,
    proj: &AffineProjector,
    mut x: Vec<f64>,
    mut monitor: Monitor,
) -> FeasibilityOutcome<Vec<CMatrix>> {
    let mut q = vec![0.0; x.len()];
    let max_iters = monitor.opts.max_iters;
    for it in 1..=max_iters {
        let mut y = x.clone();
        proj.project(&mut y);
        let mut z = y.clone();
        axpy(&mut z, 1.0, &q);
        x = project_psd(&problem.blocks, &z);
        for ((qi, zi), xi) in q.iter_mut().zip(&z).zip(&x) {
            *qi = zi - xi;
        }
        match monitor.observe(it, &x, distance(&x, &y)) {
            Verdict::Continue => {}
            v => return monitor.finish(v, it),
        }
    }
    monitor.finish(Verdict::Continue, max_iters)
}

/// Memory of the Anderson extrapolation.
const ANDERSON_MEMORY: usize = 8;
/// An extrapolated step is kept while its residual stays within this factor
/// of the best residual seen; a strict monotone test stalls on boundary solutions.
const ANDERSON_SAFEGUARD: f64 = 100.0;

/// One alternating-projection sweep: returns `(P_aff x, P_psd P_aff x)`.
fn sweep(problem: &PsdAffineProblem, proj: &AffineProjector, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut y = x.to_vec();
    proj.project(&mut y);
    let p = project_psd(&problem.blocks, &y);
    (y, p)
}

fn run_anderson(
    problem: &PsdAffineProblem,
    proj: &AffineProjector,
    x: Vec<f64>,
    mut monitor: Monitor,
) -> FeasibilityOutcome<Vec<CMatrix>> {
    let max_iters = monitor.opts.max_iters;
    let (mut y, mut p) = sweep(problem, proj, &x);
    let mut g: Vec<f64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
    let mut best_g = norm(&g);
    // Differences of successive residuals and images.
    let mut dg: Vec<Vec<f64>> = Vec::new();
    let mut dp: Vec<Vec<f64>> = Vec::new();

    for it in 1..=max_iters {
        match monitor.observe(it, &p, distance(&p, &y)) {
            Verdict::Continue => {}
            v => return monitor.finish(v, it),
        }
        let candidate = match anderson_coefficients(&dg, &g) {
            Some(gamma) => {
                let mut c = p.clone();
                for (coef, d) in gamma.iter().zip(&dp) {
                    axpy(&mut c, -coef, d);
                }
                c
            }
            None => p.clone(),
        };
        let (cy, cp) = sweep(problem, proj, &candidate);
        let cg: Vec<f64> = cp.iter().zip(&candidate).map(|(a, b)| a - b).collect();
        let cg_norm = norm(&cg);
        let (ny, np, ng, ng_norm) = if cg_norm <= ANDERSON_SAFEGUARD * best_g || dg.is_empty() {
            (cy, cp, cg, cg_norm)
        } else {
            // Safeguard: fall back to the plain sweep and restart the memory.
            dg.clear();
            dp.clear();
            let plain = p.clone();
            let (py, pp) = sweep(problem, proj, &plain);
            let pg: Vec<f64> = pp.iter().zip(&plain).map(|(a, b)| a - b).collect();
            let pn = norm(&pg);
            (py, pp, pg, pn)
        };
        dg.push(ng.iter().zip(&g).map(|(a, b)| a - b).collect());
        dp.push(np.iter().zip(&p).map(|(a, b)| a - b).collect());
        if dg.len() > ANDERSON_MEMORY {
            dg.remove(0);
            dp.remove(0);
        }
        best_g = best_g.min(ng_norm);
        y = ny;
        p = np;
        g = ng;
    }
    monitor.finish(Verdict::Continue, max_iters)
}

/// Regularised least squares `argmin_γ ‖g - Σ γ_i dg_i‖`.
fn anderson_coefficients(dg: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let k = dg.len();
    if k == 0 {
        return None;
    }
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for i in 0..k {
        for j in 0..=i {
            let v = dot(&dg[i], &dg[j]);
            a[i][j] = v;
            a[j][i] = v;
        }
        b[i] = dot(&dg[i], g);
    }
    let scale = (0..k).map(|i| a[i][i]).fold(0.0, f64::max);
    if scale <= 0.0 {
        return None;
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-10 * scale;
    }
    solve_spd(a, b)
}

/// Cholesky solve of a small symmetric positive definite system.
#[allow(clippy::needless_range_loop)]
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for j in 0..k {
        let mut d = a[j][j];
        for l in 0..j {
            d -= a[j][l] * a[j][l];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..k {
            let mut s = a[i][j];
            for l in 0..j {
                s -= a[i][l] * a[j][l];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..k {
        let mut s = b[i];
        for l in 0..i {
            s -= a[i][l] * b[l];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for l in i + 1..k {
            s -= a[l][i] * b[l];
        }
        b[i] = s / a[i][i];
    }
    Some(b)
}
