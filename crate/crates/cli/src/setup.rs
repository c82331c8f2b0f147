use std::collections::BTreeMap;
use std::path::PathBuf;

use hns_core::experiments::InitialDataSpec;
use hns_core::lp::estimate_constants;
use hns_core::solvers::{Model, ModelParams, Scheme, StepperConfig};
use hns_core::spectral::{GridSpec, DEFAULT_DEALIAS};

use crate::config::Config;
use crate::CliError;

pub const COMMON_KEYS: &[&str] = &[
    "seed",
    "workers",
    "grid.dim",
    "grid.n",
    "grid.length",
    "grid.dealias",
    "model",
    "model.epsilon",
    "model.alpha",
    "model.s",
    "model.delta",
    "model.nonlinear",
    "model.damped",
];
pub const DATA_KEYS: &[&str] = &[
    "data.kind",
    "data.amplitude",
    "data.perturbation",
    "data.slope",
    "data.max_mode",
    "data.path",
    "data.cutoff",
];
pub const TIME_KEYS: &[&str] = &[
    "time.dt",
    "time.scheme",
    "time.snapshot_every",
    "time.t_end",
];
pub const CONSTANT_KEYS: &[&str] = &[
    "constants.K",
    "constants.K1",
    "constants.K2",
    "constants.C",
    "constants.C0",
    "constants.C1",
    "constants.C2",
    "constants.C3",
    "constants.C4",
    "constants.self_embedding",
    "lp.trials",
    "lp.delta",
];

pub fn grid(cfg: &Config, default_dim: usize, default_n: usize) -> Result<GridSpec, CliError> {
    let dim = cfg.get_or("grid.dim", default_dim)?;
    let n = cfg.get_or("grid.n", default_n)?;
    let length = cfg.get_or("grid.length", 2.0 * std::f64::consts::PI)?;
    let dealias = cfg.get_or("grid.dealias", DEFAULT_DEALIAS)?;
    Ok(GridSpec::with_dealias(dim, n, length, dealias)?)
}

pub fn params(cfg: &Config, default_model: Model) -> Result<ModelParams, CliError> {
    let model = cfg.get_or("model", default_model)?;
    let base = match model {
        Model::Ns => ModelParams::ns(),
        Model::HnsEps => ModelParams::hns_eps(1e-2),
        Model::HnsEpsAlpha => ModelParams::hns_eps_alpha(1e-2, 1e-2),
    };
    let p = ModelParams {
        epsilon: cfg.get_or("model.epsilon", base.epsilon)?,
        alpha: cfg.get_or("model.alpha", base.alpha)?,
        s: cfg.get_or("model.s", base.s)?,
        delta: cfg.get_or("model.delta", base.delta)?,
        nonlinear: cfg.get_or("model.nonlinear", base.nonlinear)?,
        damped: cfg.get_or("model.damped", base.damped)?,
        ..base
    };
    p.validate()?;
    Ok(p)
}

pub fn seed(cfg: &Config) -> Result<u64, CliError> {
    cfg.require(&["seed"])?;
    Ok(cfg.get("seed")?.expect("checked above"))
}

pub fn data(cfg: &Config, seed: u64) -> Result<InitialDataSpec, CliError> {
    let kind = cfg.raw("data.kind").unwrap_or("taylor_green");
    let base = match kind {
        "zero" => InitialDataSpec::Zero,
        "taylor_green" => InitialDataSpec::TaylorGreen {
            amplitude: cfg.get_or("data.amplitude", 1.0)?,
            perturbation: cfg.get_or("data.perturbation", 0.2)?,
            seed,
        },
        "random" => InitialDataSpec::RandomBandLimited {
            amplitude: cfg.get_or("data.amplitude", 1.0)?,
            slope: cfg.get_or("data.slope", 1.75)?,
            max_mode: cfg.get_or("data.max_mode", i64::MAX)?,
            seed,
        },
        "file" => {
            cfg.require(&["data.path"])?;
            InitialDataSpec::File(PathBuf::from(cfg.raw("data.path").expect("checked above")))
        }
        other => {
            return Err(CliError::Validation(format!(
                "data.kind must be zero, taylor_green, random or file, got {other:?}"
            )))
        }
    };
    Ok(if cfg.get_or("data.cutoff", false)? {
        InitialDataSpec::FrequencyCutoff(Box::new(base))
    } else {
        base
    })
}

pub fn stepping(
    cfg: &Config,
    default_dt: f64,
    default_t_end: f64,
) -> Result<StepperConfig, CliError> {
    Ok(StepperConfig {
        dt: cfg.get_or("time.dt", default_dt)?,
        scheme: cfg.get_or("time.scheme", Scheme::ExpLinearRk2)?,
        snapshot_every: cfg.get_or("time.snapshot_every", 1)?,
        t_end: cfg.get_or("time.t_end", default_t_end)?,
    })
}

pub fn workers(cfg: &Config) -> Result<usize, CliError> {
    let default = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let w = cfg.get_or("workers", default)?;
    if w == 0 {
        return Err(CliError::Validation("workers must be positive".into()));
    }
    Ok(w)
}

/// Constants from `constants.<name>` keys, estimated from `seed` for any missing one.
pub fn constants(
    cfg: &Config,
    seed: u64,
    needed: &[&str],
) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for (k, _) in cfg.entries().range("constants.".to_string()..) {
        let Some(name) = k.strip_prefix("constants.") else {
            break;
        };
        out.insert(name.to_string(), cfg.get::<f64>(k)?.expect("key exists"));
    }
    if needed.iter().any(|k| !out.contains_key(*k)) {
        let trials = cfg.get_or("lp.trials", 200)?;
        let delta = cfg.get_or("lp.delta", 0.5)?;
        for (k, v) in estimate_constants(seed, trials, delta)? {
            out.entry(k).or_insert(v);
        }
    }
    Ok(out)
}
