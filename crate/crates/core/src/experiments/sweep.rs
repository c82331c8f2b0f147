use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::initial_data::{build_initial_data, limit_data, InitialDataSpec};
use super::rates::{fit_rate, RateFit};
use crate::energies::modulated_energy;
use crate::error::{HnsError, Result};
use crate::solvers::{
    check_advective_cfl, Model, ModelParams, SolverState, Stepper, StepperConfig,
};
use crate::spectral::{divergence, sobolev_norm, GridSpec};

pub const DEFAULT_ALPHAS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Alpha,
    Epsilon,
}

impl SweepVariable {
    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepVariable::Alpha => DEFAULT_ALPHAS.to_vec(),
            SweepVariable::Epsilon => DEFAULT_EPSILONS.to_vec(),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::Alpha => "alpha",
            SweepVariable::Epsilon => "epsilon",
        })
    }
}

impl FromStr for SweepVariable {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(SweepVariable::Alpha),
            "epsilon" | "eps" => Ok(SweepVariable::Epsilon),
            _ => Err(HnsError::InvalidParams(format!(
                "unknown sweep variable {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    /// Strictly decreasing, at least 3 points spanning 2 decades.
    pub values: Vec<f64>,
    /// Template for the swept model: ε for α-sweeps, and `s`, `δ`, the
    /// nonlinearity and damping switches for both.
    pub fixed: ModelParams,
    pub initial_data: InitialDataSpec,
    pub t_final: f64,
    pub grid: GridSpec,
    /// Overrides any seed in `initial_data`.
    pub seed: u64,
    pub dt: f64,
    /// Suprema are taken over every `snapshot_every`-th step and the final time.
    pub snapshot_every: usize,
    pub workers: usize,
    /// Prefix of the per-point run ids.
    pub run_label: String,
    /// Fill the runtime column; off keeps the CSV byte-reproducible.
    pub record_runtime: bool,
}

impl SweepConfig {
    pub fn new(
        variable: SweepVariable,
        fixed: ModelParams,
        initial_data: InitialDataSpec,
        grid: GridSpec,
    ) -> Self {
        SweepConfig {
            variable,
            values: variable.default_values(),
            fixed,
            initial_data,
            t_final: 1.0,
            grid,
            seed: 0,
            dt: 5e-3,
            snapshot_every: 1,
            workers: 1,
            run_label: "sweep".into(),
            record_runtime: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HnsError::InvalidParams(m));
        if self.values.len() < 3 {
            return bad(format!(
                "a sweep needs at least 3 values, got {}",
                self.values.len()
            ));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("sweep values must be positive".into());
        }
        if self.values.windows(2).any(|w| w[1] >= w[0]) {
            return bad("sweep values must be strictly decreasing".into());
        }
        let span = (self.values[0] / self.values[self.values.len() - 1]).log10();
        if span < 2.0 - 1e-9 {
            return bad(format!("sweep values must span 2 decades, got {span:.2}"));
        }
        if !(self.t_final > 0.0)
            || !(self.dt > 0.0)
            || self.snapshot_every == 0
            || self.workers == 0
        {
            return bad("t_final, dt, snapshot_every and workers must be positive".into());
        }
        self.grid.validate()
    }

    fn stepper_config(&self) -> StepperConfig {
        StepperConfig {
            snapshot_every: self.snapshot_every,
            ..StepperConfig::new(self.dt, self.t_final)
        }
    }

    /// Model pair `(swept, reference)` at one sweep value.
    pub fn models(&self, value: f64) -> (ModelParams, ModelParams) {
        let t = self.fixed;
        match self.variable {
            SweepVariable::Alpha => (
                ModelParams {
                    model: Model::HnsEpsAlpha,
                    alpha: value,
                    ..t
                },
                ModelParams {
                    model: Model::HnsEps,
                    alpha: f64::INFINITY,
                    ..t
                },
            ),
            SweepVariable::Epsilon => (
                ModelParams {
                    epsilon: value,
                    ..t
                },
                ModelParams {
                    model: Model::Ns,
                    epsilon: 0.0,
                    alpha: f64::INFINITY,
                    ..t
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub t_final: f64,
    /// α-sweeps only.
    pub sup_modulated_energy: Option<f64>,
    /// `∫₀ᵀ ‖div u‖²_{L²} dt` by the trapezoid rule over all steps.
    pub div_l2t_l2: f64,
    /// `sup_t ‖u − u_ref‖²_{Ḣ^{n/2−1}}`.
    pub sup_sobolev_diff_sq: f64,
    pub runtime_seconds: f64,
    pub run_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub points: Vec<SweepPoint>,
    /// `(metric, fit)` for each fitted column.
    pub fits: Vec<(String, RateFit)>,
    record_runtime: bool,
}

/// A sweep that stopped early, with the points completed before the failure.
#[derive(Debug)]
pub struct SweepError {
    pub error: HnsError,
    pub partial: Vec<SweepPoint>,
}

impl From<SweepError> for HnsError {
    fn from(e: SweepError) -> Self {
        e.error
    }
}

impl From<HnsError> for SweepError {
    fn from(error: HnsError) -> Self {
        SweepError {
            error,
            partial: Vec::new(),
        }
    }
}

pub const SWEEP_CSV_HEADER: [&str; 8] = [
    "sweep_var",
    "value",
    "T_final",
    "sup_modulated_energy",
    "div_l2t_l2",
    "sup_sobolev_diff_sq",
    "runtime_seconds",
    "run_id",
];

fn metric(point: &SweepPoint, name: &str) -> Option<f64> {
    match name {
        "sup_modulated_energy" => point.sup_modulated_energy,
        "div_l2t_l2" => Some(point.div_l2t_l2),
        "sup_sobolev_diff_sq" => Some(point.sup_sobolev_diff_sq),
        _ => None,
    }
}

impl SweepResult {
    /// Points without fits, e.g. the completed part of an aborted sweep.
    pub fn from_points(
        variable: SweepVariable,
        points: Vec<SweepPoint>,
        record_runtime: bool,
    ) -> Self {
        SweepResult {
            variable,
            points,
            fits: Vec::new(),
            record_runtime,
        }
    }

    pub fn fit(&self, name: &str) -> Option<&RateFit> {
        self.fits.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// One row per point and a final `rate_fit` row holding the fitted slopes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SWEEP_CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for p in &self.points {
            out.write_record([
                self.variable.to_string(),
                p.value.to_string(),
                p.t_final.to_string(),
                opt(p.sup_modulated_energy),
                p.div_l2t_l2.to_string(),
                p.sup_sobolev_diff_sq.to_string(),
                opt(self.record_runtime.then_some(p.runtime_seconds)),
                p.run_id.clone(),
            ])?;
        }
        let slope = |name: &str| opt(self.fit(name).map(|f| f.slope));
        out.write_record([
            "rate_fit".to_string(),
            self.variable.to_string(),
            String::new(),
            slope("sup_modulated_energy"),
            slope("div_l2t_l2"),
            slope("sup_sobolev_diff_sq"),
            String::new(),
            "slope".to_string(),
        ])?;
        out.flush()?;
        Ok(())
    }

    /// For each fit, `<stem>_<metric>.dat` with `(value, metric)` columns and
    /// a `.caption` sidecar. Returns the written paths.
    pub fn write_plot_data(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (name, fit) in &self.fits {
            let dat = dir.join(format!("{stem}_{name}.dat"));
            let mut body = String::new();
            for p in &self.points {
                if let Some(y) = metric(p, name) {
                    body.push_str(&format!("{} {}\n", p.value, y));
                }
            }
            fs::write(&dat, body)?;
            let caption = dir.join(format!("{stem}_{name}.caption"));
            fs::write(
                &caption,
                format!(
                    "{name} against {var} on log-log axes; fitted slope {:.4}, intercept {:.4}, r^2 {:.4}\n",
                    fit.slope,
                    fit.intercept,
                    fit.r_squared,
                    var = self.variable
                ),
            )?;
            written.push(dat);
            written.push(caption);
        }
        Ok(written)
    }

    /// Whether the metric does not increase as the swept value decreases,
    /// allowing each step a relative inversion of `slack`.
    pub fn monotone(&self, name: &str, slack: f64) -> bool {
        let ys: Vec<f64> = self.points.iter().filter_map(|p| metric(p, name)).collect();
        ys.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
    }
}

/// Run two models in lockstep from their own initial states.
fn lockstep(
    a: &Stepper,
    b: &Stepper,
    mut sa: SolverState,
    mut sb: SolverState,
    mut on_step: impl FnMut(usize, &SolverState, &SolverState, bool) -> Result<()>,
) -> Result<()> {
    let cfg = a.cfg;
    let ta = Stepper::blowup_threshold(&sa);
    let tb = Stepper::blowup_threshold(&sb);
    on_step(0, &sa, &sb, true)?;
    let steps = cfg.steps();
    for n in 1..=steps {
        let h = if n == steps {
            cfg.t_end - (n - 1) as f64 * cfg.dt
        } else {
            cfg.dt
        };
        sa = a.step_by(&sa, h)?;
        sb = b.step_by(&sb, h)?;
        if n == steps {
            sa.time = cfg.t_end;
            sb.time = cfg.t_end;
        }
        if Stepper::exceeds(&sa, ta) {
            return Err(HnsError::BlowUp { time: sa.time });
        }
        if Stepper::exceeds(&sb, tb) {
            return Err(HnsError::BlowUp { time: sb.time });
        }
        on_step(n, &sa, &sb, n % cfg.snapshot_every == 0 || n == steps)?;
    }
    Ok(())
}

fn run_point(cfg: &SweepConfig, index: usize, value: f64) -> Result<SweepPoint> {
    let start = Instant::now();
    let (swept, reference) = cfg.models(value);
    let spec = cfg.initial_data.with_seed(cfg.seed);
    let (u0, u1) = build_initial_data(&spec, cfg.grid, &swept)?;
    let ref_u0 = match cfg.variable {
        SweepVariable::Alpha => u0.clone(),
        SweepVariable::Epsilon => limit_data(&spec, cfg.grid)?,
    };
    let scfg = cfg.stepper_config();
    check_advective_cfl(&u0, &swept, &scfg)?;
    check_advective_cfl(&ref_u0, &reference, &scfg)?;
    let a = Stepper::new(swept, scfg, cfg.grid)?;
    let b = Stepper::new(reference, scfg, cfg.grid)?;
    let sa = SolverState::initial(u0, u1.clone(), &swept);
    let sb = SolverState::initial(ref_u0, u1, &reference);

    let sigma = 0.5 * cfg.grid.dim as f64 - 1.0;
    let with_modulated = cfg.variable == SweepVariable::Alpha;
    let mut sup_mod = 0.0_f64;
    let mut sup_diff = 0.0_f64;
    let mut div_int = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    lockstep(&a, &b, sa, sb, |_, x, y, snapshot| {
        let d2 = divergence(&x.u).l2_norm().powi(2);
        if let Some((t0, d0)) = prev {
            div_int += 0.5 * (x.time - t0) * (d0 + d2);
        }
        prev = Some((x.time, d2));
        if snapshot {
            sup_diff = sup_diff.max(sobolev_norm(&x.u.sub(&y.u), sigma).powi(2));
            if with_modulated {
                sup_mod = sup_mod.max(modulated_energy(x, y, &swept)?.value);
            }
        }
        Ok(())
    })?;
    Ok(SweepPoint {
        index,
        value,
        t_final: cfg.t_final,
        sup_modulated_energy: with_modulated.then_some(sup_mod),
        div_l2t_l2: div_int,
        sup_sobolev_diff_sq: sup_diff,
        runtime_seconds: start.elapsed().as_secs_f64(),
        run_id: format!("{}-{}-{:02}", cfg.run_label, cfg.variable, index),
    })
}

fn run_sweep(cfg: &SweepConfig, metrics: &[&str]) -> std::result::Result<SweepResult, SweepError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HnsError::InvalidParams(format!("worker pool: {e}")))?;
    let results: Vec<Result<SweepPoint>> = pool.install(|| {
        cfg.values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| run_point(cfg, i, v))
            .collect()
    });
    let mut points = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(error) => {
                return Err(SweepError {
                    error,
                    partial: points,
                })
            }
        }
    }
    let mut fits = Vec::new();
    for name in metrics {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| metric(p, name).map(|y| (p.value, y)))
            .collect();
        // all-zero columns (sentinel runs) carry no rate
        if pts.iter().all(|(_, y)| *y > 0.0) {
            fits.push((name.to_string(), fit_rate(&pts)?));
        }
    }
    Ok(SweepResult {
        variable: cfg.variable,
        points,
        fits,
        record_runtime: cfg.record_runtime,
    })
}

/// Penalized model against the unpenalized one at fixed ε, for each α.
pub fn sweep_alpha(cfg: &SweepConfig) -> std::result::Result<SweepResult, SweepError> {
    if cfg.variable != SweepVariable::Alpha {
        return Err(HnsError::InvalidParams("sweep_alpha needs an alpha sweep".into()).into());
    }
    run_sweep(cfg, &["sup_modulated_energy", "div_l2t_l2"])
}

/// The template model at each ε against NS started from the limit data.
pub fn sweep_epsilon(cfg: &SweepConfig) -> std::result::Result<SweepResult, SweepError> {
    if cfg.variable != SweepVariable::Epsilon {
        return Err(HnsError::InvalidParams("sweep_epsilon needs an epsilon sweep".into()).into());
    }
    run_sweep(cfg, &["sup_sobolev_diff_sq"])
}

/// Dispatch on the configured variable.
pub fn run_configured_sweep(cfg: &SweepConfig) -> std::result::Result<SweepResult, SweepError> {
    match cfg.variable {
        SweepVariable::Alpha => sweep_alpha(cfg),
        SweepVariable::Epsilon => sweep_epsilon(cfg),
    }
}
