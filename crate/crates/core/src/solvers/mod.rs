//! Time integration of NS, HNS^ε and HNS^{ε,α}.

mod nonlinear;
mod params;
mod picard;
mod propagator;
mod simulation;
mod stepper;

pub use nonlinear::{convective_direct, forcing, nonlinear_term, recover_pressure};
pub use params::{Model, ModelParams};
pub use picard::{local_time_bound, picard_local_solve, PicardConfig, PicardResult};
pub use propagator::{linear_propagator, HeatWeights, LinearPropagator, ModeWeights};
pub use simulation::{
    check_advective_cfl, run_simulation, support_radius, write_probe_csv, Probe, ProbeSample,
    SimulationError, SimulationOptions, SimulationOutput, PROBE_CSV_HEADER,
};
pub use stepper::{
    discrete_residual, linear_spectral_radius, step, Scheme, SolverState, Stepper, StepperConfig,
    RK4_STABILITY_LIMIT,
};
