//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

/// Asymmetry tolerance (relative to `max(1, max|H_ij|)`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Stop when the off-diagonal Frobenius norm drops below this (relative).
const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with the matching unitary of eigenvectors
/// stored as columns.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    /// `U f(Λ) U*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in fv.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * lam;
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            h.rows(),
            h.cols()
        )));
    }
    let asym = h.hermitian_defect();
    if asym > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(jacobi(h.hermitian_part()))
}

fn off_diag_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: CMatrix) -> HermEig {
    let n = a.rows();
    let mut v = CMatrix::identity(n);
    let scale = a.norm_fro().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diag_norm(&a) <= OFF_DIAG_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE * 1e4 {
                    continue;
                }
                // Rotate in the (p, q) plane by U = diag(1, e^{-iφ}) · G with G real.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                // A <- A U (columns p, q).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                // A <- U* A (rows p, q).
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermEig { values, vectors }
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn operator_norm(h: &CMatrix) -> Result<f64> {
    let e = herm_eig(h)?;
    Ok(e.max().abs().max(e.min().abs()))
}

/// Largest singular value of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = if m.rows() >= m.cols() {
        m.adjoint_mul(m)
    } else {
        m * &m.adjoint()
    };
    match herm_eig(&gram.hermitian_part()) {
        Ok(e) => e.max().max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, rng};

    #[test]
    fn identity_has_unit_spectrum() {
        let e = herm_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = herm_eig(&CMatrix::diag(&[1.0, -1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
    }

    #[test]
    fn pauli_y_spectrum_and_vectors() {
        let y = CMatrix::from_vec(
            2,
            2,
            vec![C64::new(0., 0.), C64::new(0., -1.), C64::new(0., 1.), C64::new(0., 0.)],
        )
        .unwrap();
        let e = herm_eig(&y).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        assert!(e.reconstruct().dist(&y) < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut r = rng(7);
        for n in [1, 2, 3, 4, 6, 8, 12] {
            let h = random_hermitian(&mut r, n);
            let e = herm_eig(&h).unwrap();
            let scale = operator_norm(&h).unwrap().max(1.0);
            assert!(e.reconstruct().dist(&h) <= 1e-10 * scale, "n = {n}");
            let uu = e.vectors.adjoint_mul(&e.vectors);
            assert!(uu.dist(&CMatrix::identity(n)) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut r = rng(3);
        let u = crate::random::random_unitary(&mut r, 4);
        let h = u.sandwich(&CMatrix::diag(&[2.0, 2.0, -1.0, -1.0]));
        let e = herm_eig(&h).unwrap();
        assert!(e.reconstruct().dist(&h) < 1e-12);
        assert!((e.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&CMatrix::identity(3)).unwrap(), 1.0);
        assert!((operator_norm(&CMatrix::diag(&[0.3, 0.7])).unwrap() - 0.7).abs() < 1e-15);
        let phi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let proj = CMatrix::outer(&phi, &phi);
        assert!((operator_norm(&proj).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_rectangular() {
        let m = CMatrix::from_real(1, 2, &[3.0, 4.0]).unwrap();
        assert!((spectral_norm(&m) - 5.0).abs() < 1e-12);
    }
}
