//! Functions of positive semidefinite matrices and the partial-isometry
//! extension used by the degrading construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eig::{herm_eig, HermEig};
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as kernel.
pub const RANK_TOL: f64 = 1e-9;
/// Eigenvalues in `[-PSD_TOL, 0)` clamp to zero; anything lower is an error.
pub const PSD_TOL: f64 = 1e-8;
/// Allowed `‖c*c - A‖` in [`isometry_extend`].
pub const CONSISTENCY_TOL: f64 = 1e-8;

fn psd_eig(p: &CMatrix) -> Result<HermEig> {
    let e = herm_eig(p)?;
    if e.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(e)
}

pub fn psd_sqrt(p: &CMatrix) -> Result<CMatrix> {
    Ok(psd_eig(p)?.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Pseudo-inverse square root: `λ^{-1/2}` on eigenvalues above [`RANK_TOL`], zero elsewhere.
pub fn psd_pinv_sqrt(p: &CMatrix) -> Result<CMatrix> {
    Ok(psd_eig(p)?.reconstruct_with(|x| if x > RANK_TOL { x.powf(-0.5) } else { 0.0 }))
}

/// Euclidean (Frobenius) projection of a Hermitian matrix onto the PSD cone.
pub fn psd_project(h: &CMatrix) -> Result<CMatrix> {
    Ok(herm_eig(h)?.reconstruct_with(|x| x.max(0.0)))
}

/// Number of eigenvalues above [`RANK_TOL`].
pub fn psd_rank(p: &CMatrix) -> Result<usize> {
    Ok(herm_eig(p)?.values.iter().filter(|&&x| x > RANK_TOL).count())
}

/// Source of candidate directions when completing a partial isometry on the kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelCompletion {
    /// Standard basis vectors of the codomain, pivoted by residual norm.
    #[default]
    StandardBasis,
    /// Columns of a seeded random unitary; yields a different but equally
    /// valid extension.
    Randomized(u64),
}

/// Extends the partial isometry `c · A^{+1/2}` to an isometry `W` with
/// `W √A = c`.
///
/// `c` is `d' x d` with `c*c = A`. On the support of `A` the result equals
/// `c A^{+1/2}` (re-orthonormalised); the kernel of `A` is mapped onto an
/// orthonormal set orthogonal to that range.
pub fn isometry_extend(c: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    isometry_extend_with(c, a, KernelCompletion::StandardBasis)
}

pub fn isometry_extend_with(c: &CMatrix, a: &CMatrix, completion: KernelCompletion) -> Result<CMatrix> {
    let d = a.rows();
    if !a.is_square() || c.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "c is {}x{}, A is {}x{}",
            c.rows(),
            c.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let dp = c.rows();
    if dp < d {
        return Err(Error::DimensionMismatch(format!(
            "codomain dimension {dp} is smaller than domain dimension {d}"
        )));
    }
    let defect = c.adjoint_mul(c).dist(a);
    if defect > CONSISTENCY_TOL {
        return Err(Error::Inconsistent { defect });
    }

    let e = psd_eig(a)?;
    let support: Vec<usize> = (0..d).filter(|&k| e.values[k] > RANK_TOL).collect();
    let kernel: Vec<usize> = (0..d).filter(|&k| e.values[k] <= RANK_TOL).collect();

    // Images of the support eigenvectors: c u_k / sqrt(λ_k).
    let mut images: Vec<Vec<C64>> = support
        .iter()
        .map(|&k| {
            let u = CMatrix::column_vector(&e.vectors.column(k));
            let s = 1.0 / e.values[k].sqrt();
            (c * &u).column(0).into_iter().map(|z| z * s).collect()
        })
        .collect();
    lowdin_orthonormalize(&mut images);

    let mut basis = images.clone();
    let completion_vectors = complete_orthonormal(&basis, dp, kernel.len(), completion);
    basis.extend(completion_vectors.iter().cloned());

    // W = Σ_k w_k u_k*, with w_k = image (support) or completion (kernel).
    let mut w = CMatrix::zeros(dp, d);
    for (slot, &k) in support.iter().chain(kernel.iter()).enumerate() {
        let target = &basis[slot];
        for i in 0..dp {
            for j in 0..d {
                w[(i, j)] += target[i] * e.vectors[(j, k)].conj();
            }
        }
    }
    Ok(w)
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Symmetric orthonormalisation `Y (Y*Y)^{-1/2}`; keeps each vector as close
/// as possible to its input.
fn lowdin_orthonormalize(vs: &mut [Vec<C64>]) {
    let k = vs.len();
    if k == 0 {
        return;
    }
    let gram = CMatrix::from_fn(k, k, |i, j| dot(&vs[i], &vs[j]));
    let Ok(inv_sqrt) = psd_pinv_sqrt(&gram.hermitian_part()) else {
        return;
    };
    let n = vs[0].len();
    let originals = vs.to_vec();
    for j in 0..k {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, orig) in originals.iter().enumerate() {
            let coef = inv_sqrt[(i, j)];
            for (o, z) in out.iter_mut().zip(orig) {
                *o += z * coef;
            }
        }
        vs[j] = out;
    }
}

/// Gram–Schmidt with column pivoting: repeatedly picks the candidate with the
/// largest component orthogonal to `existing`.
fn complete_orthonormal(
    existing: &[Vec<C64>],
    dim: usize,
    count: usize,
    completion: KernelCompletion,
) -> Vec<Vec<C64>> {
    let mut candidates: Vec<Vec<C64>> = (0..dim)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    if let KernelCompletion::Randomized(seed) = completion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = crate::random::random_unitary(&mut rng, dim);
        candidates = (0..dim).map(|j| u.column(j)).collect();
        candidates.shuffle(&mut rng);
    }

    let mut basis: Vec<Vec<C64>> = existing.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for cand in &candidates {
            let mut r = cand.clone();
            // Two passes of classical Gram–Schmidt for stability.
            for _ in 0..2 {
                for b in &basis {
                    let coef = dot(b, &r);
                    for (x, y) in r.iter_mut().zip(b) {
                        *x -= coef * y;
                    }
                }
            }
            let nr = norm(&r);
            if best.as_ref().is_none_or(|(bn, _)| nr > *bn) {
                best = Some((nr, r));
            }
        }
        let (nr, mut r) = best.expect("candidate set is never empty");
        for x in r.iter_mut() {
            *x /= nr;
        }
        basis.push(r.clone());
        out.push(r);
    }
    out
}
