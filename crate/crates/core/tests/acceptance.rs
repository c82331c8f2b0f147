//! End-to-end acceptance run: one line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::time::Instant;

use hns_core::energies::{compute_n, critical_norm, smallness_gates};
use hns_core::experiments::{
    build_initial_data, finite_speed_experiment, limit_data, sweep_alpha, sweep_epsilon, Branch,
    BumpSpec, InitialDataSpec, SweepConfig, SweepResult, SweepVariable,
};
use hns_core::lp::{
    decompose, decompose_with, estimate_constants, paraproduct_split, verify_inequality, Cutoff,
};
use hns_core::lp::{Inequality, InequalityParams};
use hns_core::solvers::{
    discrete_residual, picard_local_solve, run_simulation, ModelParams, PicardConfig,
    SimulationOptions, SolverState, Stepper, StepperConfig,
};
use hns_core::spectral::sampling::random_field;
use hns_core::spectral::{
    divergence, gradient, helmholtz_project, lambda_power, pointwise_product, sobolev_norm,
    GridSpec, Projection, SpectralField,
};
use hns_core::HnsError;
use num_complex::Complex64;

type Check = Result<(bool, String), HnsError>;

fn rel(err: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

fn workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn spectral_identities() -> Check {
    let mut worst: f64 = 0.0;
    for (dim, n) in [(2, 128), (3, 32)] {
        let grid = GridSpec::periodic(dim, n)?;
        let f = random_field(grid, dim, 7, 1.0);
        let scale = f.max_abs_coeff();
        let p = helmholtz_project(&f, Projection::P);
        let q = helmholtz_project(&f, Projection::Q);
        worst = worst.max(rel(
            helmholtz_project(&p, Projection::P).max_abs_diff(&p),
            scale,
        ));
        worst = worst.max(rel(
            helmholtz_project(&p, Projection::Q).max_abs_coeff(),
            scale,
        ));
        worst = worst.max(rel(p.add(&q).max_abs_diff(&f), scale));
        // ℚ = ∇Δ⁻¹div
        let gdd = gradient(&divergence(&f)).apply_multiplier(|i| {
            let k2 = grid.k_squared(i);
            if k2 == 0.0 {
                0.0
            } else {
                -1.0 / k2
            }
        });
        worst = worst.max(rel(gdd.max_abs_diff(&q), scale));
        worst = worst.max(rel(divergence(&p).max_abs_coeff(), scale * grid.k_max()));

        // Parseval
        let phys = f.to_physical().l2_norm();
        worst = worst.max(rel((phys - sobolev_norm(&f, 0.0)).abs(), phys));

        // Λ^a Λ^b = Λ^{a+b}
        for (a, b) in [(-1.0, 0.5), (0.5, 1.5), (1.0, -0.5)] {
            let two = lambda_power(&lambda_power(&f, a)?, b)?;
            let one = lambda_power(&f, a + b)?;
            worst = worst.max(rel(two.max_abs_diff(&one), one.max_abs_coeff()));
        }

        // NS keeps divergence-free data divergence-free
        let params = ModelParams::ns();
        let stepper = Stepper::new(params, StepperConfig::new(2e-3, 1.0), grid)?;
        let u0 = helmholtz_project(&random_field(grid, dim, 3, 2.0), Projection::P);
        let mut s = SolverState::initial(
            u0.scale(2.0 / u0.l2_norm()),
            SpectralField::zeros(grid, dim),
            &params,
        );
        for _ in 0..20 {
            s = stepper.step(&s)?;
        }
        worst = worst.max(rel(divergence(&s.u).l2_norm(), sobolev_norm(&s.u, 1.0)));
    }
    Ok((worst <= 1e-12, format!("worst relative defect {worst:.2e}")))
}

fn lp_suite() -> Check {
    let mut recon: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    for (dim, n) in [(2, 128), (3, 32)] {
        let grid = GridSpec::periodic(dim, n)?;
        let f = random_field(grid, 1, 4, 1.0);
        for cutoff in [Cutoff::Sharp, Cutoff::Smooth] {
            let d = decompose_with(&f, cutoff);
            recon = recon.max(rel(d.reconstruct().max_abs_diff(&f), f.max_abs_coeff()));
        }
        let d = decompose(&f);
        let norm2 = f.l2_norm().powi(2);
        for (i, (_, a)) in d.blocks.iter().enumerate() {
            for (_, b) in d.blocks.iter().skip(i + 1) {
                ortho = ortho.max(rel(a.inner(b).abs(), norm2));
            }
        }
    }

    let mut ratio_ok = true;
    let mut extreme = (f64::INFINITY, 0.0f64);
    let g2 = GridSpec::periodic(2, 64)?;
    let g3 = GridSpec::periodic(3, 16)?;
    for trial in 0..200u64 {
        let grid = if trial % 2 == 0 { g2 } else { g3 };
        let slope = 0.5 + (trial % 5) as f64 * 0.5;
        let f = random_field(grid, 1, 1000 + trial, slope);
        let d = decompose(&f);
        for sigma in [-1.0f64, 0.5, 1.0, 1.5] {
            let r = d.lp_sobolev_norm(sigma) / sobolev_norm(&f, sigma);
            let bound = 2f64.powf(sigma.abs());
            extreme = (extreme.0.min(r * bound), extreme.1.max(r / bound));
            ratio_ok &= r >= 1.0 / bound * (1.0 - 1e-12) && r <= bound * (1.0 + 1e-12);
        }
    }

    let mut para: f64 = 0.0;
    let grid = GridSpec::periodic(2, 64)?;
    let pairs = [
        (
            random_field(grid, 1, 20, 1.0),
            random_field(grid, 1, 21, 1.5),
        ),
        (
            random_field(grid, 2, 22, 1.0),
            random_field(grid, 2, 23, 0.5),
        ),
        (
            random_field(grid, 1, 24, 1.0),
            random_field(grid, 2, 25, 2.0),
        ),
    ];
    for (u, v) in &pairs {
        let (a, b) = paraproduct_split(u, v)?;
        let full = pointwise_product(u, v)?;
        para = para.max(rel(a.add(&b).max_abs_diff(&full), full.max_abs_coeff()));
    }

    let passed = recon <= 1e-12 && ortho <= 1e-12 && ratio_ok && para <= 1e-10;
    Ok((
        passed,
        format!(
            "reconstruction {recon:.1e}, orthogonality {ortho:.1e}, norm ratios in bounds: {ratio_ok} (tightest {:.3}/{:.3}), paraproduct {para:.1e}",
            extreme.0,
            extreme.1
        ),
    ))
}

fn inequality_boundedness() -> Check {
    let p2 = InequalityParams::default_for(2);
    let p3 = InequalityParams::default_for(3);
    let mut finite = true;
    let mut names = Vec::new();
    for (ineq, p) in [
        (Inequality::DivLp, &p2),
        (Inequality::Ladyzhenskaya, &p2),
        (Inequality::BesovInterp, &p2),
        (Inequality::Tame, &p2),
        (Inequality::Bernstein, &p2),
        (Inequality::L3Embedding, &p3),
    ] {
        let r = verify_inequality(ineq, 500, 1, p)?;
        finite &= r.max_ratio.is_finite() && r.max_ratio > 0.0;
        names.push(format!("{} {:.3}", r.name, r.max_ratio));
    }
    let stable = |ineq: Inequality, p: &InequalityParams| -> Result<(f64, f64), HnsError> {
        let a = verify_inequality(ineq, 500, 1, p)?.max_ratio;
        let b = verify_inequality(ineq, 500, 2, p)?.max_ratio;
        Ok((a, b))
    };
    let (k_a, k_b) = stable(Inequality::Ladyzhenskaya, &p2)?;
    let (k2_a, k2_b) = stable(Inequality::L3Embedding, &p3)?;
    let spread = |a: f64, b: f64| (a - b).abs() / a.max(b);
    let passed = finite && spread(k_a, k_b) <= 0.05 && spread(k2_a, k2_b) <= 0.05;
    Ok((
        passed,
        format!(
            "{}; K {k_a:.4}/{k_b:.4}, K2 {k2_a:.4}/{k2_b:.4} over seeds 1/2",
            names.join(", ")
        ),
    ))
}

/// `ελ'' + dλ' + κλ = 0` from `(λ(0), λ'(0)) = (a, b)`, by its characteristic roots.
fn mode_oracle(
    eps: f64,
    d: f64,
    kappa: f64,
    a: Complex64,
    b: Complex64,
    t: f64,
) -> (Complex64, Complex64) {
    let disc = Complex64::new(d * d - 4.0 * eps * kappa, 0.0).sqrt();
    let rp = (-d + disc) / (2.0 * eps);
    let rm = (-d - disc) / (2.0 * eps);
    let (ep, em) = ((rp * t).exp(), (rm * t).exp());
    let cp = (b - rm * a) / (rp - rm);
    let cm = (b - rp * a) / (rp - rm);
    (cp * ep - cm * em, cp * rp * ep - cm * rm * em)
}

fn linear_exactness() -> Check {
    let grid = GridSpec::periodic(2, 16)?;
    let u0 = random_field(grid, 2, 31, 1.5);
    let u1 = random_field(grid, 2, 32, 1.5);
    let dt = 1e-3;
    let mut worst: f64 = 0.0;
    for eps in [1e-1, 1e-2] {
        for alpha in [1e-1, 1e-3] {
            let params = ModelParams::hns_eps_alpha(eps, alpha).linear();
            let stepper = Stepper::new(params, StepperConfig::new(dt, 1.0), grid)?;
            let parts = |f: &SpectralField| {
                let q = helmholtz_project(f, Projection::Q);
                (f.sub(&q), q)
            };
            let ((p0, q0), (p1, q1)) = (parts(&u0), parts(&u1));
            let mut s = SolverState::initial(u0.clone(), u1.clone(), &params);
            let scale = u0.max_abs_coeff().max(u1.max_abs_coeff());
            for n in 1..=100 {
                s = stepper.step(&s)?;
                let t = n as f64 * dt;
                let mut exact_u = SpectralField::zeros(grid, 2);
                let mut exact_v = SpectralField::zeros(grid, 2);
                for i in 0..grid.len() {
                    let k2 = grid.k_squared(i);
                    if k2 == 0.0 {
                        continue;
                    }
                    for c in 0..2 {
                        let (up, vp) =
                            mode_oracle(eps, 1.0, k2, p0.components[c][i], p1.components[c][i], t);
                        let (uq, vq) = mode_oracle(
                            eps,
                            1.0,
                            params.q_factor() * k2,
                            q0.components[c][i],
                            q1.components[c][i],
                            t,
                        );
                        exact_u.components[c][i] = up + uq;
                        exact_v.components[c][i] = vp + vq;
                    }
                }
                worst = worst.max(rel(s.u.max_abs_diff(&exact_u), scale));
                worst = worst.max(rel(
                    s.velocity()?.max_abs_diff(&exact_v),
                    exact_v.max_abs_coeff().max(scale),
                ));
            }
        }
    }

    // halving dt in the discrete residual of an exact trajectory
    let params = ModelParams::hns_eps_alpha(1e-1, 1e-1).linear();
    let smooth = random_field(grid, 2, 33, 3.0);
    let residual = |h: f64| -> Result<f64, HnsError> {
        let stepper = Stepper::new(params, StepperConfig::new(h, 1.0), grid)?;
        let steps = (0.05 / h).round() as usize;
        let mut states = vec![SolverState::initial(
            smooth.clone(),
            SpectralField::zeros(grid, 2),
            &params,
        )];
        for _ in 0..steps + 1 {
            let next = stepper.step(states.last().expect("nonempty"))?;
            states.push(next);
        }
        let k = states.len();
        Ok(discrete_residual(
            &states[k - 3].u,
            &states[k - 2].u,
            &states[k - 1].u,
            &params,
            h,
        )
        .l2_norm())
    };
    let factor = residual(2e-3)? / residual(1e-3)?;
    let passed = worst <= 1e-8 && (3.5..=4.5).contains(&factor);
    Ok((
        passed,
        format!("max trajectory defect {worst:.2e}, residual ratio under dt halving {factor:.3}"),
    ))
}

fn alpha_sweep_config() -> SweepConfig {
    let grid = GridSpec::periodic(2, 128).expect("grid");
    let data = InitialDataSpec::TaylorGreen {
        amplitude: 1.0,
        perturbation: 0.2,
        seed: 1,
    };
    SweepConfig {
        seed: 1,
        workers: workers(),
        run_label: "acceptance".into(),
        ..SweepConfig::new(SweepVariable::Alpha, ModelParams::hns_eps(1e-2), data, grid)
    }
}

fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>, HnsError> {
    let mut buf = Vec::new();
    result.write_csv(&mut buf)?;
    Ok(buf)
}

fn fit_line(result: &SweepResult, name: &str) -> (f64, f64) {
    result
        .fit(name)
        .map_or((f64::NAN, f64::NAN), |f| (f.slope, f.r_squared))
}

fn epsilon_convergence() -> Check {
    let grid = GridSpec::periodic(2, 128)?;
    let data = InitialDataSpec::FrequencyCutoff(Box::new(InitialDataSpec::RandomBandLimited {
        amplitude: 1.0,
        slope: 1.75,
        max_mode: i64::MAX,
        seed: 1,
    }));
    let fixed = ModelParams {
        s: 0.5,
        ..ModelParams::hns_eps(1e-2)
    };
    let cfg = SweepConfig {
        dt: 2e-3,
        seed: 1,
        workers: workers(),
        ..SweepConfig::new(SweepVariable::Epsilon, fixed, data, grid)
    };
    let result = sweep_epsilon(&cfg).map_err(|e| e.error)?;
    let (slope, r2) = fit_line(&result, "sup_sobolev_diff_sq");
    let target = 0.5 * fixed.s - 0.1;
    Ok((
        slope >= target && r2 >= 0.9,
        format!("slope {slope:.3} (needs >= {target:.2}), r^2 {r2:.4}"),
    ))
}

fn finite_speed() -> Check {
    let grid = GridSpec::periodic(2, 512)?;
    let params = ModelParams {
        damped: false,
        ..ModelParams::hns_eps_alpha(1e-2, 1e-2).linear()
    };
    let mut passed = true;
    let mut notes = Vec::new();
    for branch in [Branch::Irrotational, Branch::Solenoidal] {
        let (speed, label) = match branch {
            Branch::Irrotational => (params.c1(), "Q"),
            Branch::Solenoidal => (params.c2(), "P"),
        };
        let width = 4.0 * grid.spacing();
        let t_end = 0.8 * (0.5 * grid.length - 6.5 * width) / speed;
        let bump = BumpSpec {
            width,
            ..BumpSpec::centered(&grid, branch, t_end)
        };
        let r = finite_speed_experiment(&params, grid, &bump)?;
        passed &= r.slope_bound_satisfied && r.speed_error() <= 0.05;
        notes.push(format!(
            "{label} front {:.3} vs {:.3} ({:.2}%), bound {}",
            r.measured_speed,
            speed,
            100.0 * r.speed_error(),
            if r.slope_bound_satisfied {
                "held"
            } else {
                "violated"
            }
        ));
    }
    Ok((passed, notes.join("; ")))
}

/// Largest relative growth per unit time of a sampled series.
fn worst_growth(series: &[(f64, f64)]) -> f64 {
    series
        .windows(2)
        .map(|w| {
            let (dt, dv) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if dt > 0.0 {
                dv / (w[0].1.abs().max(f64::MIN_POSITIVE) * dt)
            } else {
                0.0
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn energy_monotonicity(constants: &BTreeMap<String, f64>) -> Check {
    let mut passed = true;
    let mut notes = Vec::new();
    let cases = [
        (
            GridSpec::periodic(2, 64)?,
            InitialDataSpec::TaylorGreen {
                amplitude: 0.3,
                perturbation: 0.2,
                seed: 1,
            },
        ),
        (
            GridSpec::periodic(3, 32)?,
            InitialDataSpec::RandomBandLimited {
                amplitude: 0.05,
                slope: 2.0,
                max_mode: 4,
                seed: 1,
            },
        ),
    ];
    for (grid, spec) in cases {
        let params = ModelParams::hns_eps_alpha(1e-2, 1e-2);
        let (u0, u1) = build_initial_data(&spec, grid, &params)?;
        let v0 = limit_data(&spec, grid)?;
        let gates = smallness_gates(&u0, &u1, &v0, &params, constants)?;
        let n = compute_n(critical_norm(&u0), params.delta, constants)?;
        let options = SimulationOptions {
            energy_exponent: n,
            ..SimulationOptions::default()
        };
        let out = run_simulation(&u0, &u1, &params, &StepperConfig::new(5e-3, 1.0), &options)
            .map_err(|e| e.error)?;
        let base: Vec<(f64, f64)> = out
            .energies
            .iter()
            .map(|e| {
                (
                    e.time,
                    if grid.dim == 2 {
                        e.e0
                    } else {
                        e.e_half.unwrap_or(f64::NAN)
                    },
                )
            })
            .collect();
        let compound: Vec<(f64, f64)> = out.energies.iter().map(|e| (e.time, e.script_e)).collect();
        let (g_base, g_compound) = (worst_growth(&base), worst_growth(&compound));
        let ok = gates.all_passed() && g_base <= 1e-6 && g_compound <= 1e-6;
        passed &= ok;
        let failed: Vec<&str> = gates
            .entries
            .iter()
            .filter(|e| !e.passed)
            .map(|e| e.name.as_str())
            .collect();
        notes.push(format!(
            "{}D: gates {}, N = {n}, worst growth {:.1e} / {:.1e}",
            grid.dim,
            if failed.is_empty() {
                "pass".to_string()
            } else {
                format!("fail {failed:?}")
            },
            g_base,
            g_compound
        ));
    }
    Ok((passed, notes.join("; ")))
}

fn picard() -> Check {
    let grid = GridSpec::periodic(2, 16)?;
    let cfg = PicardConfig {
        t_final: 0.05,
        steps: 32,
        max_iter: 60,
        tol: 1e-12,
    };
    let u0 = helmholtz_project(&random_field(grid, 2, 5, 2.0), Projection::P);
    let u0 = u0.scale(0.05 / u0.l2_norm());
    let z = SpectralField::zeros(grid, 2);
    let r = picard_local_solve(&u0, &z, &ModelParams::hns_eps_alpha(0.1, 0.5), &cfg)?;
    let ratios = r.contraction_ratios();
    let worst_ratio = ratios.iter().skip(1).fold(0.0f64, |a, &b| a.max(b));

    let params = ModelParams::hns_eps_alpha(0.1, 0.1).linear();
    let u0 = random_field(grid, 2, 6, 2.0);
    let u1 = random_field(grid, 2, 7, 2.0);
    let lin = picard_local_solve(&u0, &u1, &params, &PicardConfig { steps: 256, ..cfg })?;
    let stepper = Stepper::new(
        params,
        StepperConfig::new(cfg.t_final / 8.0, cfg.t_final),
        grid,
    )?;
    let mut s = SolverState::initial(u0.clone(), u1, &params);
    for _ in 0..8 {
        s = stepper.step(&s)?;
    }
    let defect = rel(lin.state.u.max_abs_diff(&s.u), u0.max_abs_coeff());
    Ok((
        worst_ratio < 1.0 && defect <= 1e-6,
        format!(
            "{} iterations, worst ratio after the second {worst_ratio:.3}, linear defect {defect:.1e}",
            r.iterations
        ),
    ))
}

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
    limit: f64,
}

fn run(id: usize, title: &'static str, limit: f64, f: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let line = Line {
        id,
        title,
        passed: passed && seconds < limit,
        detail,
        seconds,
        limit,
    };
    print_line(&line);
    line
}

fn print_line(l: &Line) {
    println!(
        "criterion {:>2} {:<30} {}  {} [{:.1} s of {:.0} s]",
        l.id,
        l.title,
        if l.passed { "PASS" } else { "FAIL" },
        l.detail,
        l.seconds,
        l.limit
    );
}

fn main() {
    let mut lines = vec![
        run(1, "spectral identities", 60.0, spectral_identities),
        run(2, "Littlewood-Paley suite", 120.0, lp_suite),
        run(3, "inequality boundedness", 300.0, inequality_boundedness),
        run(4, "linear solver exactness", 60.0, linear_exactness),
    ];

    let start = Instant::now();
    let cfg = alpha_sweep_config();
    let first = sweep_alpha(&cfg).map_err(|e| e.error);
    let sweep_seconds = start.elapsed().as_secs_f64();
    match &first {
        Ok(result) => {
            let (s, r2) = fit_line(result, "div_l2t_l2");
            lines.push(Line {
                id: 5,
                title: "weak compressibility",
                passed: s >= 0.9 && r2 >= 0.95 && sweep_seconds < 1800.0,
                detail: format!("div slope {s:.3} (needs >= 0.90), r^2 {r2:.4}"),
                seconds: sweep_seconds,
                limit: 1800.0,
            });
            let (s, r2) = fit_line(result, "sup_modulated_energy");
            lines.push(Line {
                id: 6,
                title: "modulated energy convergence",
                passed: s >= 0.45 && r2 >= 0.9 && sweep_seconds < 2700.0,
                detail: format!("slope {s:.3} (needs >= 0.45), r^2 {r2:.4}"),
                seconds: sweep_seconds,
                limit: 2700.0,
            });
        }
        Err(e) => {
            for (id, title, limit) in [
                (5, "weak compressibility", 1800.0),
                (6, "modulated energy convergence", 2700.0),
            ] {
                lines.push(Line {
                    id,
                    title,
                    passed: false,
                    detail: format!("error: {e}"),
                    seconds: sweep_seconds,
                    limit,
                });
            }
        }
    }
    print_line(&lines[4]);
    print_line(&lines[5]);

    lines.push(run(
        7,
        "epsilon convergence to NS",
        1800.0,
        epsilon_convergence,
    ));
    lines.push(run(8, "finite propagation speed", 600.0, finite_speed));
    lines.push(run(9, "energy monotonicity", 1200.0, || {
        let constants = estimate_constants(1, 200, 0.5)?;
        energy_monotonicity(&constants)
    }));
    lines.push(run(10, "Picard local solver", 300.0, picard));
    lines.push(run(11, "determinism", 1800.0, || {
        let a = sweep_csv(
            first
                .as_ref()
                .map_err(|e| HnsError::InvalidParams(e.to_string()))?,
        )?;
        let b = sweep_csv(&sweep_alpha(&cfg).map_err(|e| e.error)?)?;
        Ok((
            a == b,
            format!("{} CSV bytes, identical: {}", a.len(), a == b),
        ))
    }));

    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", lines.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
