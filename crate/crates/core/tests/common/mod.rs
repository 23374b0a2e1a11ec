//! Independent checks built from plain matrix products, with no use of the
//! library's Choi, dilation or solver code.

#![allow(dead_code)]

use qnd_core::{CMatrix, Channel, Observable, StochasticMatrix, C64};

pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r == i && c == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `Σ_k K ρ K*`.
pub fn apply_kraus(kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(kraus[0].rows(), kraus[0].rows());
    for k in kraus {
        out += &(&(k * rho) * &k.adjoint());
    }
    out
}

/// `Σ_k K* K`.
pub fn kraus_sum(kraus: &[CMatrix], dim_in: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        out += &(&k.adjoint() * k);
    }
    out
}

/// `sqrt(Σ_ij ‖f(E_ij) - g(E_ij)‖²)`, the Frobenius distance of the Choi matrices.
pub fn action_distance(d: usize, f: impl Fn(&CMatrix) -> CMatrix, g: impl Fn(&CMatrix) -> CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let e = unit(d, i, j);
            s += f(&e).dist(&g(&e)).powi(2);
        }
    }
    s.sqrt()
}

pub fn channel_distance(a: &Channel, b: &Channel) -> f64 {
    action_distance(a.dim_in(), |e| apply_kraus(a.kraus(), e), |e| apply_kraus(b.kraus(), e))
}

/// Distance between `later ∘ earlier` and `target`, computed stepwise.
pub fn composition_distance(later: &Channel, earlier: &Channel, target: &Channel) -> f64 {
    action_distance(
        target.dim_in(),
        |e| apply_kraus(later.kraus(), &apply_kraus(earlier.kraus(), e)),
        |e| apply_kraus(target.kraus(), e),
    )
}

/// `max_x ‖A(x) - Σ_y M[x][y] B(y)‖_F`.
pub fn smearing_defect(a: &Observable, b: &Observable, m: &StochasticMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..a.num_outcomes() {
        let mut s = CMatrix::zeros(a.dim(), a.dim());
        for y in 0..b.num_outcomes() {
            s += &b.effect(y).scale(m.get(x, y));
        }
        worst = worst.max(s.dist(a.effect(x)));
    }
    worst
}

/// Checks that `m` is entrywise non-negative with unit column sums.
pub fn stochastic_defect(m: &StochasticMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for y in 0..m.cols() {
        let mut col = 0.0;
        for x in 0..m.rows() {
            worst = worst.max(-m.get(x, y));
            col += m.get(x, y);
        }
        worst = worst.max((col - 1.0).abs());
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix by bisection on the Sylvester
/// inertia of `H - tI`, computed with complex `LDL*` elimination.
pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    let n = h.rows();
    let bound = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if negative_pivots(h, mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[allow(clippy::needless_range_loop)]
fn negative_pivots(h: &CMatrix, shift: f64) -> usize {
    let n = h.rows();
    let mut a: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { h[(i, j)] - shift } else { h[(i, j)] })
                .collect()
        })
        .collect();
    let mut count = 0;
    for k in 0..n {
        let mut p = a[k][k].re;
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            count += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k + 1..n {
                let t = f * a[k][j];
                a[i][j] -= t;
            }
        }
    }
    count
}

/// Checks `R(x) ≥ 0` and `Σ R(x) = I`.
pub fn observable_defect(o: &Observable) -> f64 {
    let mut s = CMatrix::zeros(o.dim(), o.dim());
    let mut worst: f64 = 0.0;
    for e in o.effects() {
        worst = worst.max(-min_eigenvalue(e));
        s += e;
    }
    worst.max(s.dist(&CMatrix::identity(o.dim())))
}

/// `V*(I ⊗ R)V` with `V` stacked as rows `o * m + j`.
pub fn environment_form(v: &CMatrix, dim_out: usize, m: usize, r: &CMatrix) -> CMatrix {
    let big = CMatrix::from_fn(dim_out * m, dim_out * m, |a, b| {
        if a / m == b / m {
            r[(a % m, b % m)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &(&v.adjoint() * &big) * v
}
