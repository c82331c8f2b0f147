use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use hns_core::energies::{compute_n, critical_norm, size_ratio_table, smallness_gates};
use hns_core::experiments::{
    build_initial_data, finite_speed_experiment, limit_data, run_configured_sweep, Branch,
    BumpSpec, SweepConfig, SweepResult, SweepVariable,
};
use hns_core::lp::{
    estimate_constants, verify_inequality, write_reports_csv, Inequality, InequalityParams,
};
use hns_core::solvers::{run_simulation, write_probe_csv, Model, Probe, SimulationOptions};
use hns_core::spectral::snapshot::write_spectral;

use crate::config::Config;
use crate::manifest::Status;
use crate::setup::{self, COMMON_KEYS, CONSTANT_KEYS, DATA_KEYS, TIME_KEYS};
use crate::CliError;

/// Files written by a command and its final status.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub status: Status,
    pub error: Option<CliError>,
}

impl Outcome {
    fn ok(outputs: Vec<PathBuf>) -> Self {
        Outcome {
            outputs,
            status: Status::Ok,
            error: None,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", path.display())))
}

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// Validate keys and fill command-specific defaults before the run id is taken.
pub fn prepare(command: &str, cfg: &mut Config) -> Result<(), CliError> {
    let allowed = match command {
        "simulate" => keys(&[
            COMMON_KEYS,
            DATA_KEYS,
            TIME_KEYS,
            &["energy.n", "output.snapshots"],
        ]),
        "sweep" => keys(&[
            COMMON_KEYS,
            DATA_KEYS,
            TIME_KEYS,
            &[
                "sweep.variable",
                "sweep.values",
                "sweep.label",
                "sweep.record_runtime",
            ],
        ]),
        "lp-check" => keys(&[
            COMMON_KEYS,
            &["lp.trials", "lp.delta", "lp.constants", "lp.inequalities"],
        ]),
        "speed-test" => keys(&[
            COMMON_KEYS,
            &[
                "front.branch",
                "front.width_cells",
                "front.samples",
                "front.t_end",
            ],
        ]),
        "gates" => keys(&[COMMON_KEYS, DATA_KEYS, CONSTANT_KEYS, &["gates.epsilons"]]),
        _ => return Err(CliError::Validation(format!("unknown command {command}"))),
    };
    cfg.check_keys(&allowed)?;
    cfg.require(&["seed"])?;
    match command {
        "sweep" => {
            cfg.require(&["sweep.variable"])?;
            let var: SweepVariable = cfg.get("sweep.variable")?.expect("checked above");
            if var == SweepVariable::Epsilon {
                cfg.set_default("data.kind", "random");
                cfg.set_default("data.cutoff", "true");
            }
        }
        "speed-test" => {
            cfg.set_default("model.nonlinear", "false");
            cfg.set_default("model.damped", "false");
        }
        _ => {}
    }
    Ok(())
}

pub fn run(command: &str, cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    match command {
        "simulate" => simulate(cfg, dir),
        "sweep" => sweep(cfg, dir),
        "lp-check" => lp_check(cfg, dir),
        "speed-test" => speed_test(cfg, dir),
        "gates" => gates(cfg, dir),
        _ => Err(CliError::Validation(format!("unknown command {command}"))),
    }
}

fn simulate(cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let seed = setup::seed(cfg)?;
    let grid = setup::grid(cfg, 2, 64)?;
    let params = setup::params(cfg, Model::HnsEpsAlpha)?;
    let spec = setup::data(cfg, seed)?;
    let stepping = setup::stepping(cfg, 5e-3, 1.0)?;
    let (u0, u1) = build_initial_data(&spec, grid, &params)?;
    let options = SimulationOptions {
        probes: vec![
            Probe::Energy,
            Probe::Sobolev(0.5 * grid.dim as f64 - 1.0),
            Probe::MaxAbs,
        ],
        keep_snapshots: false,
        energy_exponent: cfg.get_or("energy.n", 1)?,
    };
    let probes_path = dir.join("probes.csv");
    match run_simulation(&u0, &u1, &params, &stepping, &options) {
        Ok(out) => {
            write_probe_csv(create(&probes_path)?, &out.series)?;
            let mut outputs = vec![probes_path];
            if cfg.get_or("output.snapshots", true)? {
                let state = out.final_state.expect("completed run has a final state");
                let path = dir.join("u_final.bin");
                write_spectral(&mut create(&path)?, &state.u, state.time)?;
                outputs.push(path);
                if let Some(v) = &state.u_t {
                    let path = dir.join("ut_final.bin");
                    write_spectral(&mut create(&path)?, v, state.time)?;
                    outputs.push(path);
                }
            }
            Ok(Outcome::ok(outputs))
        }
        Err(failure) => {
            write_probe_csv(create(&probes_path)?, &failure.partial.series)?;
            let error = CliError::from(failure.error);
            Ok(Outcome {
                outputs: vec![probes_path],
                status: error.status(),
                error: Some(error),
            })
        }
    }
}

fn sweep(cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let seed = setup::seed(cfg)?;
    let variable: SweepVariable = cfg.get("sweep.variable")?.expect("validated in prepare");
    let grid = setup::grid(cfg, 2, 128)?;
    let fixed = setup::params(cfg, Model::HnsEps)?;
    let spec = setup::data(cfg, seed)?;
    let stepping = setup::stepping(cfg, 5e-3, 1.0)?;
    let sweep_cfg = SweepConfig {
        values: cfg
            .get_list("sweep.values")?
            .unwrap_or_else(|| variable.default_values()),
        t_final: stepping.t_end,
        dt: stepping.dt,
        snapshot_every: stepping.snapshot_every,
        seed,
        workers: setup::workers(cfg)?,
        run_label: cfg.raw("sweep.label").unwrap_or("sweep").to_string(),
        record_runtime: cfg.get_or("sweep.record_runtime", false)?,
        ..SweepConfig::new(variable, fixed, spec, grid)
    };
    let csv_path = dir.join("sweep.csv");
    match run_configured_sweep(&sweep_cfg) {
        Ok(result) => {
            result.write_csv(create(&csv_path)?)?;
            let mut outputs = vec![csv_path];
            outputs.extend(result.write_plot_data(dir, &variable.to_string())?);
            for (name, fit) in &result.fits {
                println!("{name}: slope {:.4}, r^2 {:.4}", fit.slope, fit.r_squared);
            }
            Ok(Outcome::ok(outputs))
        }
        Err(failure) => {
            SweepResult::from_points(variable, failure.partial, sweep_cfg.record_runtime)
                .write_csv(create(&csv_path)?)?;
            let error = CliError::from(failure.error);
            Ok(Outcome {
                outputs: vec![csv_path],
                status: error.status(),
                error: Some(error),
            })
        }
    }
}

fn lp_check(cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let seed = setup::seed(cfg)?;
    let trials = cfg.get_or("lp.trials", 500)?;
    let delta = cfg.get_or("lp.delta", 0.5)?;
    let names: Vec<Inequality> = cfg
        .get_list("lp.inequalities")?
        .unwrap_or_else(|| Inequality::ALL.to_vec());
    let dims: Vec<usize> = match cfg.get::<usize>("grid.dim")? {
        Some(d) => vec![d],
        None => vec![2, 3],
    };
    let mut reports = Vec::new();
    for dim in dims {
        let mut p = InequalityParams {
            delta,
            ..InequalityParams::default_for(dim)
        };
        if cfg.contains("grid.n") || cfg.contains("grid.length") {
            p.grid = setup::grid(cfg, dim, p.grid.n)?;
        }
        for ineq in &names {
            let r = verify_inequality(*ineq, trials, seed, &p)?;
            println!(
                "{:<14} dim {dim}  max {:.6}  mean {:.6}",
                r.name, r.max_ratio, r.mean_ratio
            );
            reports.push(r);
        }
    }
    let path = dir.join("inequalities.csv");
    write_reports_csv(create(&path)?, &reports)?;
    let mut outputs = vec![path];
    if cfg.get_or("lp.constants", false)? {
        let constants = estimate_constants(seed, trials, delta)?;
        let path = dir.join("constants.csv");
        let mut text = String::from("name,value\n");
        for (k, v) in &constants {
            text.push_str(&format!("{k},{v}\n"));
        }
        fs::write(&path, text).map_err(|e| CliError::Internal(e.to_string()))?;
        outputs.push(path);
    }
    Ok(Outcome::ok(outputs))
}

fn speed_test(cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    setup::seed(cfg)?;
    let grid = setup::grid(cfg, 2, 256)?;
    let params = setup::params(cfg, Model::HnsEpsAlpha)?;
    let branches = match cfg.raw("front.branch").unwrap_or("both") {
        "irrotational" => vec![Branch::Irrotational],
        "solenoidal" => vec![Branch::Solenoidal],
        "both" => vec![Branch::Irrotational, Branch::Solenoidal],
        other => {
            return Err(CliError::Validation(format!(
                "front.branch must be irrotational, solenoidal or both, got {other:?}"
            )))
        }
    };
    let width = cfg.get_or("front.width_cells", 4.0)? * grid.spacing();
    let samples = cfg.get_or("front.samples", 40)?;
    let mut outputs = Vec::new();
    for branch in branches {
        let speed = match branch {
            Branch::Irrotational => params.c1(),
            Branch::Solenoidal => params.c2(),
        };
        // stay clear of the antipode: the θ-radius of a Gaussian is about 6 widths
        let default_t = 0.8 * (0.5 * grid.length - 6.5 * width) / speed;
        let bump = BumpSpec {
            width,
            samples,
            ..BumpSpec::centered(&grid, branch, cfg.get_or("front.t_end", default_t)?)
        };
        let report = finite_speed_experiment(&params, grid, &bump)?;
        let name = match branch {
            Branch::Irrotational => "irrotational",
            Branch::Solenoidal => "solenoidal",
        };
        println!(
            "{name}: measured speed {:.4}, expected {:.4} ({:.2}% off), cone bound {}",
            report.measured_speed,
            report.branch_speed,
            100.0 * report.speed_error(),
            if report.slope_bound_satisfied {
                "holds"
            } else {
                "VIOLATED"
            }
        );
        let path = dir.join(format!("front_{name}.csv"));
        report.write_csv(create(&path)?)?;
        outputs.push(path);
    }
    Ok(Outcome::ok(outputs))
}

fn gates(cfg: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let seed = setup::seed(cfg)?;
    let grid = setup::grid(cfg, 2, 64)?;
    let params = setup::params(cfg, Model::HnsEpsAlpha)?;
    let spec = setup::data(cfg, seed)?;
    let needed: &[&str] = if grid.dim == 2 {
        &["C2", "C3", "K"]
    } else {
        &["C2", "C3", "K1", "K2"]
    };
    let constants = setup::constants(cfg, seed, needed)?;
    let (u0, u1) = build_initial_data(&spec, grid, &params)?;
    let v0 = limit_data(&spec, grid)?;
    let report = smallness_gates(&u0, &u1, &v0, &params, &constants)?;
    let eps_grid = cfg
        .get_list("gates.epsilons")?
        .unwrap_or_else(|| SweepVariable::Epsilon.default_values());
    let table = size_ratio_table(&v0, params.s, &eps_grid, |eps| {
        build_initial_data(
            &spec,
            grid,
            &hns_core::solvers::ModelParams {
                epsilon: eps,
                ..params
            },
        )
    })?;
    let n = compute_n(critical_norm(&u0), params.delta, &constants)?;

    let mut text = report.to_string();
    text.push_str(&format!(
        "\nleading size ratio over epsilon (slope {:.4}, bounded: {})\n",
        table.slope, table.bounded
    ));
    for r in &table.rows {
        text.push_str(&format!("  {:>10.3e}  {:.6e}\n", r.epsilon, r.ratio));
    }
    text.push_str(&format!("\nenergy exponent N = {n}\n"));
    print!("{text}");

    let txt = dir.join("gates.txt");
    fs::write(&txt, &text).map_err(|e| CliError::Internal(e.to_string()))?;
    let csv = dir.join("gates.csv");
    report.write_csv(create(&csv)?)?;
    let ratios = dir.join("size_ratio.csv");
    table.write_csv(create(&ratios)?)?;
    Ok(Outcome::ok(vec![txt, csv, ratios]))
}
