//! Binary qubit observables `A^v(±) = ½(I ± v·σ)`, the weighted unitary
//! mixtures `λ·id + (1-λ)·𝒱` realised by their Lüders channels, and the
//! algebra of composing such mixtures.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};
use crate::observables::Observable;

/// Bloch vectors with `‖v‖` below this have no defined axis.
pub const AXIS_TOL: f64 = 1e-12;
/// Slack allowed on `‖v‖ ≤ 1` and on weights in `[½, 1]`.
pub const RANGE_TOL: f64 = 1e-12;
/// `1 - ‖v‖²` below this counts as a unit vector; a rounded unit vector
/// would otherwise shift `λ` by `√(1 - ‖v‖²) ≈ 1e-8`.
pub const UNIT_NORM_TOL: f64 = 1e-14;
/// Colinearity threshold on `‖w × v‖` in [`qubit_order`].
pub const COLINEAR_TOL: f64 = 1e-10;

/// `[σ_x, σ_y, σ_z]`.
pub fn pauli() -> [CMatrix; 3] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_vec(2, 2, vec![z, one, one, z]).expect("2x2"),
        CMatrix::from_vec(2, 2, vec![z, -i, i, z]).expect("2x2"),
        CMatrix::from_vec(2, 2, vec![one, z, z, -one]).expect("2x2"),
    ]
}

/// `v·σ`.
pub fn sigma_dot(v: [f64; 3]) -> CMatrix {
    let [sx, sy, sz] = pauli();
    &(&sx.scale(v[0]) + &sy.scale(v[1])) + &sz.scale(v[2])
}

pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn check_bloch(v: [f64; 3]) -> Result<f64> {
    let n = norm3(v);
    if !n.is_finite() || n > 1.0 + RANGE_TOL {
        return Err(Error::InvalidBlochVector(n));
    }
    Ok(n)
}

/// `A^v` with outcomes ordered `[+1, -1]`.
pub fn qubit_observable(v: [f64; 3]) -> Result<Observable> {
    check_bloch(v)?;
    let s = sigma_dot(v).scale(0.5);
    let half = CMatrix::identity(2).scale(0.5);
    Observable::with_dim(2, vec![&half + &s, &half - &s])
}

/// `λ·id + (1-λ)·𝒱` with `𝒱(C) = (n·σ) C (n·σ)` for the unit axis `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedUnitaryMix {
    pub lambda: f64,
    pub axis: [f64; 3],
}

impl WeightedUnitaryMix {
    pub fn new(lambda: f64, axis: [f64; 3]) -> Result<Self> {
        check_weight(lambda)?;
        let n = norm3(axis);
        if n < AXIS_TOL {
            return Err(Error::DegenerateAxis);
        }
        Ok(Self {
            lambda,
            axis: axis.map(|c| c / n),
        })
    }

    /// Kraus operators `√λ I` and `√(1-λ) n·σ`.
    pub fn channel(&self) -> Channel {
        let mut kraus = vec![CMatrix::identity(2).scale(self.lambda.sqrt())];
        if self.lambda < 1.0 {
            kraus.push(sigma_dot(self.axis).scale((1.0 - self.lambda).sqrt()));
        }
        Channel::new(2, 2, kraus).expect("weighted unitary mix is a channel")
    }
}

/// Total channel of the Lüders instrument of `A^v` as a weighted unitary mix,
/// `λ = (1 + √(1-‖v‖²))/2` with axis `v/‖v‖`.
pub fn lueders_decomposition(v: [f64; 3]) -> Result<WeightedUnitaryMix> {
    let n = check_bloch(v)?;
    if n < AXIS_TOL {
        return Err(Error::DegenerateAxis);
    }
    let slack = 1.0 - n * n;
    let lambda = if slack <= UNIT_NORM_TOL {
        0.5
    } else {
        (1.0 + slack.sqrt()) / 2.0
    };
    WeightedUnitaryMix::new(lambda, v)
}

/// The Lüders channel of `A^v`; the identity when `v = 0`.
pub fn lueders_channel(v: [f64; 3]) -> Result<Channel> {
    match lueders_decomposition(v) {
        Ok(mix) => Ok(mix.channel()),
        Err(Error::DegenerateAxis) => Ok(Channel::identity(2)),
        Err(e) => Err(e),
    }
}

fn check_weight(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || !(0.5 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&lambda) {
        return Err(Error::InvalidWeight(lambda));
    }
    Ok(())
}

/// Identity weight of a composition of two mixes on a common axis:
/// `μ = 1 - λ - λ' + 2λλ'`.
pub fn compose_weights(lambda: f64, lambda_prime: f64) -> Result<f64> {
    check_weight(lambda)?;
    check_weight(lambda_prime)?;
    Ok(1.0 - lambda - lambda_prime + 2.0 * lambda * lambda_prime)
}

/// The `λ'` with `compose_weights(λ, λ') = μ`, which exists iff `μ ≤ λ`.
pub fn solve_intermediate_weight(lambda: f64, mu: f64) -> Result<f64> {
    check_weight(lambda)?;
    check_weight(mu)?;
    if (lambda - 0.5).abs() <= RANGE_TOL {
        return if (mu - 0.5).abs() <= RANGE_TOL {
            Ok(1.0)
        } else {
            Err(Error::SingularSharpness { mu })
        };
    }
    if mu > lambda + RANGE_TOL {
        return Err(Error::NoSolution { lambda, mu });
    }
    Ok(((mu + lambda - 1.0) / (2.0 * lambda - 1.0)).clamp(0.5, 1.0))
}

/// Identity weight of a qubit channel of the form `λ·id + (1-λ)·𝒱`, read off
/// its Choi matrix as `⟨Ω|J|Ω⟩/4` with `|Ω⟩ = |00⟩ + |11⟩`.
pub fn identity_weight(ch: &Channel) -> Result<f64> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Err(Error::DimensionMismatch("identity weight needs a qubit channel".into()));
    }
    let j = ch.choi().matrix;
    let idx = [0, 3];
    let mut s = C64::new(0.0, 0.0);
    for &a in &idx {
        for &b in &idx {
            s += j[(a, b)];
        }
    }
    Ok(s.re / 4.0)
}

/// `A^w ⪯ A^v`: `w` and `v` colinear (either orientation) and `‖w‖ ≤ ‖v‖`.
pub fn qubit_order(w: [f64; 3], v: [f64; 3]) -> bool {
    let cross = [
        w[1] * v[2] - w[2] * v[1],
        w[2] * v[0] - w[0] * v[2],
        w[0] * v[1] - w[1] * v[0],
    ];
    norm3(cross) <= COLINEAR_TOL && norm3(w) <= norm3(v) + RANGE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::Instrument;
    use crate::numerics::herm_eig;

    #[test]
    fn observable_examples() {
        let a = qubit_observable([0.0, 0.0, 1.0]).unwrap();
        assert!(a.effect(0).dist(&CMatrix::diag(&[1.0, 0.0])) < 1e-15);
        assert!(a.effect(1).dist(&CMatrix::diag(&[0.0, 1.0])) < 1e-15);
        let c = qubit_observable([0.0; 3]).unwrap();
        assert!(c.approx_eq(&Observable::coin_toss(&[0.5, 0.5], 2).unwrap(), 1e-15));
        let x = qubit_observable([0.6, 0.0, 0.0]).unwrap();
        let e = herm_eig(x.effect(0)).unwrap();
        assert!((e.values[0] - 0.8).abs() < 1e-12 && (e.values[1] - 0.2).abs() < 1e-12);
        assert!(matches!(
            qubit_observable([1.0, 1.0, 0.0]),
            Err(Error::InvalidBlochVector(_))
        ));
    }

    #[test]
    fn decomposition_examples() {
        let m = lueders_decomposition([0.0, 1.0, 0.0]).unwrap();
        assert!((m.lambda - 0.5).abs() < 1e-15);
        let m = lueders_decomposition([0.0, 0.0, 0.6]).unwrap();
        assert!((m.lambda - 0.9).abs() < 1e-12);
        assert_eq!(m.axis, [0.0, 0.0, 1.0]);
        assert!(matches!(lueders_decomposition([0.0; 3]), Err(Error::DegenerateAxis)));
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(lueders_decomposition([s, s, s]).unwrap().lambda, 0.5);
        assert!(lueders_channel([0.0; 3])
            .unwrap()
            .approx_eq(&Channel::identity(2), 1e-15));
    }

    #[test]
    fn decomposition_matches_lueders_channel() {
        for v in [[0.6, 0.0, 0.0], [0.1, -0.4, 0.3], [0.0, 0.0, 1.0], [0.5, 0.5, 0.5]] {
            let total = Instrument::lueders(&qubit_observable(v).unwrap())
                .unwrap()
                .total_channel();
            let mix = lueders_decomposition(v).unwrap();
            assert!(mix.channel().choi_distance(&total) <= 1e-10, "{v:?}");
        }
    }

    #[test]
    fn weight_algebra() {
        assert!((compose_weights(0.8, 1.0).unwrap() - 0.8).abs() < 1e-15);
        assert!((compose_weights(0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((compose_weights(0.9, 0.75).unwrap() - 0.7).abs() < 1e-12);
        assert!((solve_intermediate_weight(0.9, 0.7).unwrap() - 0.75).abs() < 1e-12);
        assert!((solve_intermediate_weight(0.8, 0.8).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            solve_intermediate_weight(0.6, 0.8),
            Err(Error::NoSolution { .. })
        ));
        assert!(matches!(
            solve_intermediate_weight(0.5, 0.7),
            Err(Error::SingularSharpness { .. })
        ));
        assert_eq!(solve_intermediate_weight(0.5, 0.5).unwrap(), 1.0);
        assert!(matches!(compose_weights(0.4, 0.9), Err(Error::InvalidWeight(_))));
    }

    #[test]
    fn composition_reads_off_identity_weight() {
        let axis = [0.0, 0.0, 1.0];
        let (l, lp) = (0.9, 0.75);
        let a = WeightedUnitaryMix::new(l, axis).unwrap().channel();
        let b = WeightedUnitaryMix::new(lp, axis).unwrap().channel();
        let composed = Channel::compose(&a, &b).unwrap();
        assert!((identity_weight(&composed).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn order_examples() {
        let v = [0.3, -0.2, 0.5];
        assert!(qubit_order(v.map(|c| c * 0.3), v));
        assert!(qubit_order(v.map(|c| -c), v));
        assert!(!qubit_order(v.map(|c| c * 1.2), v));
        assert!(!qubit_order([0.2, 0.3, 0.0], [0.0, 0.0, 0.5]));
        assert!(qubit_order([0.0; 3], [0.0; 3]));
    }
}
