use std::collections::BTreeMap;

use serde::Serialize;

use super::{hyperbolic_terms, TERM_NAMES};
use crate::error::{HnsError, Result};
use crate::solvers::{ModelParams, SolverState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulatedEnergyReport {
    pub time: f64,
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub reference_run_id: String,
}

impl ModulatedEnergyReport {
    pub fn with_reference(mut self, run_id: impl Into<String>) -> Self {
        self.reference_run_id = run_id.into();
        self
    }
}

/// Modulated energy of `state` against `reference` at the critical index
/// σ = n/2 − 1, with `w = u − u_ref`:
/// `½‖Λ^σ(w+εw_t)‖² + (ε²/2)‖Λ^σw_t‖² + ε‖w‖²_{Ḣ^{σ+1}} + (ε/α)‖div u‖²_{Ḣ^σ}`.
pub fn modulated_energy(
    state: &SolverState,
    reference: &SolverState,
    params: &ModelParams,
) -> Result<ModulatedEnergyReport> {
    state.u.check_grid(&reference.u)?;
    if (state.time - reference.time).abs() > 1e-9 * state.time.abs().max(1.0) {
        return Err(HnsError::Misaligned {
            state: state.time,
            reference: reference.time,
        });
    }
    let w = state.u.sub(&reference.u);
    let w_t = state.velocity()?.sub(reference.velocity()?);
    let sigma = 0.5 * state.u.grid.dim as f64 - 1.0;
    let penalty = if params.penalized() {
        1.0 / params.alpha
    } else {
        0.0
    };
    let terms = hyperbolic_terms(&w, &w_t, &state.u, sigma, params.epsilon, penalty)?;
    Ok(ModulatedEnergyReport {
        time: state.time,
        value: terms.iter().sum(),
        components: TERM_NAMES
            .iter()
            .map(|s| s.to_string())
            .zip(terms)
            .collect(),
        reference_run_id: String::new(),
    })
}
