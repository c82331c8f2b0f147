use std::collections::BTreeMap;

use serde::Serialize;

use super::{hyperbolic_terms, TERM_NAMES};
use crate::error::{HnsError, Result};
use crate::solvers::{ModelParams, SolverState};
use crate::spectral::{divergence, sobolev_norm, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub time: f64,
    pub e0: f64,
    pub e_delta: f64,
    /// 3D only.
    pub e_half: Option<f64>,
    /// 3D only.
    pub e_half_delta: Option<f64>,
    pub div_l2: f64,
    pub script_e: f64,
    /// The terms of `e_delta`.
    pub components: BTreeMap<String, f64>,
}

impl EnergyReport {
    /// `(name, value)` pairs of every scalar, for probe output.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("E0".to_string(), self.e0),
            ("E_delta".to_string(), self.e_delta),
        ];
        if let Some(v) = self.e_half {
            out.push(("E_half".into(), v));
        }
        if let Some(v) = self.e_half_delta {
            out.push(("E_half_delta".into(), v));
        }
        out.push(("div_l2".into(), self.div_l2));
        out.push(("script_E".into(), self.script_e));
        out
    }
}

/// Energy at index σ and its terms.
fn energy_at(state: &SolverState, params: &ModelParams, sigma: f64) -> Result<(f64, [f64; 4])> {
    if !params.model.is_hyperbolic() {
        let v = 0.5 * sobolev_norm(&state.u, sigma).powi(2);
        return Ok((v, [v, 0.0, 0.0, 0.0]));
    }
    let u_t = state.velocity()?;
    let penalty = if params.penalized() {
        1.0 / params.alpha
    } else {
        0.0
    };
    let terms = hyperbolic_terms(&state.u, u_t, &state.u, sigma, params.epsilon, penalty)?;
    Ok((terms.iter().sum(), terms))
}

/// All energies of `state`: `E⁰` and `E^δ`, plus `E^{1/2}` and `E^{1/2+δ}`
/// in 3D. `n` is the exponent used for the compound functional.
pub fn energy(state: &SolverState, params: &ModelParams, n: u32) -> Result<EnergyReport> {
    let delta = params.delta;
    let (e0, _) = energy_at(state, params, 0.0)?;
    let (e_delta, terms) = energy_at(state, params, delta)?;
    let (e_half, e_half_delta) = if state.u.grid.dim == 3 {
        (
            Some(energy_at(state, params, 0.5)?.0),
            Some(energy_at(state, params, 0.5 + delta)?.0),
        )
    } else {
        (None, None)
    };
    let mut report = EnergyReport {
        time: state.time,
        e0,
        e_delta,
        e_half,
        e_half_delta,
        div_l2: divergence(&state.u).l2_norm(),
        script_e: 0.0,
        components: TERM_NAMES
            .iter()
            .map(|s| s.to_string())
            .zip(terms)
            .collect(),
    };
    report.script_e = script_e(&report, n);
    Ok(report)
}

/// `E^δ(1+E⁰)^N` in 2D, `E^{1/2+δ}(1+E^{1/2})^N` in 3D.
pub fn script_e(report: &EnergyReport, n: u32) -> f64 {
    let (top, base) = match (report.e_half_delta, report.e_half) {
        (Some(top), Some(base)) => (top, base),
        _ => (report.e_delta, report.e0),
    };
    top * (1.0 + base).powi(n as i32)
}

/// Norm governing the compound functional: `‖u‖_{Ḣ^{n/2−1}}`.
pub fn critical_norm(u: &SpectralField) -> f64 {
    sobolev_norm(u, 0.5 * u.grid.dim as f64 - 1.0)
}

/// Young constant `C_δ = δ·C^{2/δ}·(p/4)^{−(2−δ)/δ}` with `p = 2/(2−δ)`.
pub fn young_constant(delta: f64, c: f64) -> f64 {
    let p = 2.0 / (2.0 - delta);
    delta * c.powf(2.0 / delta) * (p / 4.0).powf(-(2.0 - delta) / delta)
}

/// `C_δ‖u₀‖^{2(1−δ)/δ}(1 + 2‖u₀‖²)`.
pub fn decay_product(u0_norm: f64, delta: f64, c: f64) -> f64 {
    let factor = if u0_norm == 0.0 && delta >= 1.0 {
        1.0
    } else {
        u0_norm.powf(2.0 * (1.0 - delta) / delta)
    };
    young_constant(delta, c) * factor * (1.0 + 2.0 * u0_norm * u0_norm)
}

/// Smallest `N` with `x − N/4 < 0`, plus one: `⌈4x⌉ + 1`.
pub fn n_from_product(x: f64) -> u32 {
    (4.0 * x).ceil().max(0.0) as u32 + 1
}

/// Exponent `N` of the compound functional from the critical norm of `u₀`
/// and measured constants (`C2`, `C3`).
pub fn compute_n(u0_norm: f64, delta: f64, constants: &BTreeMap<String, f64>) -> Result<u32> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(HnsError::InvalidParams(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let get = |k: &str| {
        constants
            .get(k)
            .copied()
            .ok_or_else(|| HnsError::InvalidParams(format!("missing constant {k}")))
    };
    let c = get("C3")? * get("C2")?;
    Ok(n_from_product(decay_product(u0_norm, delta, c)))
}
