//! Parameter sweeps, rate fits and the finite-speed measurement.

mod front;
mod initial_data;
mod rates;
mod sweep;

pub use front::{finite_speed_experiment, Branch, BumpSpec, FrontReport};
pub use initial_data::{build_initial_data, frequency_cutoff, limit_data, InitialDataSpec};
pub use rates::{fit_rate, RateFit};
pub use sweep::{
    run_configured_sweep, sweep_alpha, sweep_epsilon, SweepConfig, SweepError, SweepPoint,
    SweepResult, SweepVariable, DEFAULT_ALPHAS, DEFAULT_EPSILONS, SWEEP_CSV_HEADER,
};
