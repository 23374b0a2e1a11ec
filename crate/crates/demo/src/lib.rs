//! Browser bindings for the qubit family: the Lüders channel and disturbance
//! bound of `A^v`, composition of weighted unitary mixtures, and the smearing
//! order between two binary qubit observables.
//!
//! Every export returns a JSON string; failures are reported as `{"error": ...}`.

use qnd_core::bounds::dksw_lower_bound;
use qnd_core::numerics::herm_eig;
use qnd_core::qubit::{
    compose_weights, identity_weight, lueders_decomposition, qubit_observable, qubit_order, solve_intermediate_weight,
    WeightedUnitaryMix,
};
use qnd_core::{is_a_channel, obs_leq, Channel, Error, Instrument, SolverOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value, Error>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e.to_string() })).to_string()
}

fn explore(v: [f64; 3]) -> Result<Value, Error> {
    let a = qubit_observable(v)?;
    let lueders = Instrument::lueders(&a)?.total_channel();
    let mix = match lueders_decomposition(v) {
        Ok(m) => Some(m),
        Err(Error::DegenerateAxis) => None,
        Err(e) => return Err(e),
    };
    let spectrum = herm_eig(a.effect(0))?.values;
    let bound = dksw_lower_bound(&a)?;
    let compat = is_a_channel(&lueders, &a, &SolverOptions::default())?;
    Ok(json!({
        "lambda": mix.map_or(1.0, |m| m.lambda),
        "axis": mix.map(|m| m.axis),
        "plus_effect_spectrum": spectrum,
        "width": bound.per_effect_width[0],
        "bound": bound.bound,
        "identity_weight": identity_weight(&lueders)?,
        "compatible": compat.is_feasible(),
        "compatibility_residual": compat.residual,
    }))
}

/// Lüders channel of `A^v` as `λ·id + (1-λ)·𝒱`, with the bound `width²/16`.
#[wasm_bindgen]
pub fn lueders_explorer(vx: f64, vy: f64, vz: f64) -> String {
    respond(explore([vx, vy, vz]))
}

fn compose(lambda: f64, lambda_prime: f64) -> Result<Value, Error> {
    let axis = [0.0, 0.0, 1.0];
    let mu = compose_weights(lambda, lambda_prime)?;
    let composed = Channel::compose(
        &WeightedUnitaryMix::new(lambda_prime, axis)?.channel(),
        &WeightedUnitaryMix::new(lambda, axis)?.channel(),
    )?;
    Ok(json!({ "mu": mu, "measured_mu": identity_weight(&composed)? }))
}

/// Identity weight of composing two mixtures on a common axis, closed form and measured.
#[wasm_bindgen]
pub fn compose_mixtures(lambda: f64, lambda_prime: f64) -> String {
    respond(compose(lambda, lambda_prime))
}

/// The `λ'` that degrades weight `λ` to `μ`.
#[wasm_bindgen]
pub fn solve_weight(lambda: f64, mu: f64) -> String {
    respond(solve_intermediate_weight(lambda, mu).map(|lp| json!({ "lambda_prime": lp })))
}

fn order(w: [f64; 3], v: [f64; 3]) -> Result<Value, Error> {
    let out = obs_leq(&qubit_observable(w)?, &qubit_observable(v)?, &SolverOptions::default())?;
    Ok(json!({
        "closed_form": qubit_order(w, v),
        "lp_status": out.status,
        "witness": out.witness.map(|m| m.to_rows()),
    }))
}

/// Whether `A^w ⪯ A^v`, from the closed form and from the LP decider.
#[wasm_bindgen]
pub fn order_check(wx: f64, wy: f64, wz: f64, vx: f64, vy: f64, vz: f64) -> String {
    respond(order([wx, wy, wz], [vx, vy, vz]))
}
