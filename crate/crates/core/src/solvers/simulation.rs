use std::io::Write;

use super::params::ModelParams;
use super::stepper::{Scheme, SolverState, Stepper, StepperConfig};
use crate::energies::{energy, EnergyReport};
use crate::error::{HnsError, Result};
use crate::spectral::{divergence, sobolev_norm, SpectralField};

/// Scalar diagnostics evaluated on snapshots.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// Every scalar of the energy report.
    Energy,
    /// `‖u‖_{Ḣ^σ}`, named `norm_H{σ}`.
    Sobolev(f64),
    DivL2,
    MaxAbs,
    /// Largest torus distance from `center` where `|u|` exceeds `threshold`.
    SupportRadius {
        center: [f64; 3],
        threshold: f64,
    },
}

impl Probe {
    fn evaluate(&self, state: &SolverState, report: &EnergyReport, out: &mut Vec<ProbeSample>) {
        let t = state.time;
        let mut push = |name: String, value: f64| {
            out.push(ProbeSample {
                time: t,
                name,
                value,
            })
        };
        match self {
            Probe::Energy => report.scalars().into_iter().for_each(|(n, v)| push(n, v)),
            Probe::Sobolev(s) => push(format!("norm_H{s}"), sobolev_norm(&state.u, *s)),
            Probe::DivL2 => push("div_l2".into(), divergence(&state.u).l2_norm()),
            Probe::MaxAbs => push("linf".into(), state.u.to_physical().max_abs()),
            Probe::SupportRadius { center, threshold } => push(
                "support_radius".into(),
                support_radius(&state.u, *center, *threshold).unwrap_or(0.0),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSample {
    pub time: f64,
    pub name: String,
    pub value: f64,
}

pub const PROBE_CSV_HEADER: [&str; 3] = ["time", "probe_name", "value"];

pub fn write_probe_csv<W: Write>(w: W, samples: &[ProbeSample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROBE_CSV_HEADER)?;
    for s in samples {
        out.write_record([s.time.to_string(), s.name.clone(), s.value.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Largest distance from `center` of a grid point where the magnitude of `u`
/// exceeds `threshold`; `None` when no point does.
pub fn support_radius(u: &SpectralField, center: [f64; 3], threshold: f64) -> Option<f64> {
    let grid = u.grid;
    let mag = u.to_physical().magnitude();
    mag.iter()
        .enumerate()
        .filter(|(_, m)| **m > threshold)
        .map(|(i, _)| grid.torus_distance(grid.point(i), center))
        .reduce(f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub probes: Vec<Probe>,
    /// Retain the state at every snapshot.
    pub keep_snapshots: bool,
    /// Exponent of the compound energy functional.
    pub energy_exponent: u32,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            probes: vec![Probe::Energy],
            keep_snapshots: false,
            energy_exponent: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutput {
    pub energies: Vec<EnergyReport>,
    pub series: Vec<ProbeSample>,
    pub snapshots: Vec<SolverState>,
    pub final_state: Option<SolverState>,
}

/// A failed run with everything recorded before the failure.
#[derive(Debug)]
pub struct SimulationError {
    pub error: HnsError,
    pub partial: SimulationOutput,
}

impl From<SimulationError> for HnsError {
    fn from(e: SimulationError) -> Self {
        e.error
    }
}

impl From<HnsError> for SimulationError {
    fn from(error: HnsError) -> Self {
        SimulationError {
            error,
            partial: SimulationOutput::default(),
        }
    }
}

/// Advective step restriction `dt · Σ_j max|u_j| · k_max ≤ 1` for the
/// explicit treatment of the nonlinearity.
pub fn check_advective_cfl(
    u: &SpectralField,
    params: &ModelParams,
    cfg: &StepperConfig,
) -> Result<()> {
    if !params.nonlinear || cfg.scheme != Scheme::ExpLinearRk2 {
        return Ok(());
    }
    let phys = u.to_physical();
    let speed: f64 = phys
        .samples
        .iter()
        .map(|c| c.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
        .sum();
    let number = cfg.dt * speed * u.grid.k_max();
    if number > 1.0 {
        return Err(HnsError::Unstable(format!(
            "advective CFL number {number:.3} exceeds 1 (dt = {}, max speed {speed:.3e})",
            cfg.dt
        )));
    }
    Ok(())
}

/// Step from `(u₀, u₁)` to `cfg.t_end`, evaluating the probes every
/// `cfg.snapshot_every` steps and at the final time.
pub fn run_simulation(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    cfg: &StepperConfig,
    options: &SimulationOptions,
) -> std::result::Result<SimulationOutput, SimulationError> {
    u0.check_grid(u1)?;
    check_advective_cfl(u0, params, cfg)?;
    let stepper = Stepper::new(*params, *cfg, u0.grid)?;
    let mut state = SolverState::initial(u0.clone(), u1.clone(), params);
    let threshold = Stepper::blowup_threshold(&state);
    let mut out = SimulationOutput::default();
    let record = |state: &SolverState, out: &mut SimulationOutput| -> Result<()> {
        let report = energy(state, params, options.energy_exponent)?;
        for p in &options.probes {
            p.evaluate(state, &report, &mut out.series);
        }
        out.energies.push(report);
        if options.keep_snapshots {
            out.snapshots.push(state.clone());
        }
        Ok(())
    };
    let fail = |error: HnsError, out: SimulationOutput| SimulationError {
        error,
        partial: out,
    };
    if let Err(e) = record(&state, &mut out) {
        return Err(fail(e, out));
    }
    let steps = cfg.steps();
    for n in 1..=steps {
        let h = if n == steps {
            cfg.t_end - (n - 1) as f64 * cfg.dt
        } else {
            cfg.dt
        };
        state = match stepper.step_by(&state, h) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, out)),
        };
        if n == steps {
            state.time = cfg.t_end;
        }
        if Stepper::exceeds(&state, threshold) {
            return Err(fail(HnsError::BlowUp { time: state.time }, out));
        }
        if n % cfg.snapshot_every == 0 || n == steps {
            if let Err(e) = record(&state, &mut out) {
                return Err(fail(e, out));
            }
        }
    }
    out.final_state = Some(state);
    Ok(out)
}
