//! Energy functionals, modulated energies and the smallness gates of the
//! convergence results.

mod energy;
mod gates;
mod modulated;

pub use energy::{
    compute_n, critical_norm, decay_product, energy, n_from_product, script_e, young_constant,
    EnergyReport,
};
pub use gates::{
    size_ratio_table, smallness_gates, GateEntry, GateKind, GateReport, RatioRow, RatioTable,
};
pub use modulated::{modulated_energy, ModulatedEnergyReport};

use crate::error::Result;
use crate::spectral::{divergence, lambda_power, sobolev_norm, SpectralField};

/// The four terms of the hyperbolic energy at index σ, built from `(w, w_t)`:
/// `½‖Λ^σ(w+εw_t)‖²`, `(ε²/2)‖Λ^σw_t‖²`, `ε‖w‖²_{Ḣ^{σ+1}}` and
/// `(ε/α)‖Λ^σ div p‖²` where `p` is the field carrying the penalty.
pub(crate) fn hyperbolic_terms(
    w: &SpectralField,
    w_t: &SpectralField,
    penalty_field: &SpectralField,
    sigma: f64,
    epsilon: f64,
    penalty: f64,
) -> Result<[f64; 4]> {
    let damped = 0.5 * sq(&lambda_power(&w.axpy(epsilon, w_t), sigma)?);
    let kinetic = 0.5 * epsilon * epsilon * sq(&lambda_power(w_t, sigma)?);
    let gradient = epsilon * sobolev_norm(w, sigma + 1.0).powi(2);
    let pen = if penalty > 0.0 {
        epsilon * penalty * sq(&lambda_power(&divergence(penalty_field), sigma)?)
    } else {
        0.0
    };
    Ok([damped, kinetic, gradient, pen])
}

fn sq(f: &SpectralField) -> f64 {
    sobolev_norm(f, 0.0).powi(2)
}

pub(crate) const TERM_NAMES: [&str; 4] = ["damped", "kinetic", "gradient", "penalty"];
