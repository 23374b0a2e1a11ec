//! Seeded generators for random test instances: matrices, states,
//! observables, channels, instruments and stochastic matrices.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::Channel;
use crate::instruments::Instrument;
use crate::numerics::{psd_pinv_sqrt, CMatrix, C64};
use crate::observables::Observable;
use crate::stochastic::StochasticMatrix;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    random_complex(rng, n, n).hermitian_part()
}

/// Full-rank (almost surely) PSD matrix `G G*`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_complex(rng, n, n);
    (&g * &g.adjoint()).hermitian_part()
}

/// Haar-ish unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    isometrize(&random_complex(rng, n, n))
}

/// `G (G*G)^{-1/2}`: the isometry closest to `G` (full column rank assumed).
pub fn isometrize(g: &CMatrix) -> CMatrix {
    let inv = psd_pinv_sqrt(&g.adjoint_mul(g).hermitian_part()).expect("Gram matrix is PSD");
    g * &inv
}

/// Random full-rank density matrix.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let p = random_psd(rng, n);
    let t = p.trace().re;
    p.scale(1.0 / t)
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let v = random_complex(rng, n, 1);
    let nv = v.norm_fro();
    let v = v.scale(1.0 / nv);
    &v * &v.adjoint()
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Column-stochastic matrix with strictly positive entries.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> StochasticMatrix {
    let mut data = vec![0.0; rows * cols];
    for y in 0..cols {
        let p = random_distribution(rng, rows);
        for x in 0..rows {
            data[x * cols + y] = p[x];
        }
    }
    StochasticMatrix::new(rows, cols, data).expect("columns are normalised")
}

/// Generic POVM: normalised random PSD effects, `S^{-1/2} G_x S^{-1/2}`.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Observable {
    let raw: Vec<CMatrix> = (0..outcomes).map(|_| random_psd(rng, dim)).collect();
    let mut total = CMatrix::zeros(dim, dim);
    for g in &raw {
        total += g;
    }
    let inv = psd_pinv_sqrt(&total).expect("sum of PSD is PSD");
    let effects = raw.iter().map(|g| (&(&inv * g) * &inv).hermitian_part()).collect();
    Observable::new(effects).expect("normalised POVM")
}

/// Sharp observable in a random orthonormal basis.
pub fn random_sharp<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let u = random_unitary(rng, dim);
    let vectors: Vec<Vec<C64>> = (0..dim).map(|j| u.column(j)).collect();
    Observable::sharp_from_basis(&vectors).expect("unitary columns are orthonormal")
}

/// Random channel with `kraus_count` Kraus operators, from a random isometry
/// `d_in -> d_out * kraus_count`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, kraus_count: usize) -> Channel {
    assert!(dim_out * kraus_count >= dim_in, "no isometry into a smaller space");
    let v = isometrize(&random_complex(rng, dim_out * kraus_count, dim_in));
    let kraus = (0..kraus_count)
        .map(|j| CMatrix::from_fn(dim_out, dim_in, |o, i| v[(o * kraus_count + j, i)]))
        .collect();
    Channel::new(dim_in, dim_out, kraus).expect("isometry blocks are trace preserving")
}

/// Random instrument: a random channel whose Kraus operators are dealt out
/// into `outcomes` branches.
pub fn random_instrument<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    outcomes: usize,
    kraus_per_branch: usize,
) -> Instrument {
    let ch = random_channel(rng, dim_in, dim_out, outcomes * kraus_per_branch);
    let branches = ch.kraus().chunks(kraus_per_branch).map(<[CMatrix]>::to_vec).collect();
    Instrument::new(dim_in, dim_out, branches).expect("trace preserving by construction")
}
