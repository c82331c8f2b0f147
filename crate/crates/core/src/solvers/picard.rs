use num_complex::Complex64;

use super::nonlinear::forcing;
use super::params::ModelParams;
use super::propagator::linear_propagator;
use super::stepper::SolverState;
use crate::error::{HnsError, Result};
use crate::spectral::{sobolev_norm, Projection, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub t_final: f64,
    /// Number of uniform intervals of the time mesh.
    pub steps: usize,
    pub max_iter: usize,
    /// Stop once successive iterates are this close in the `X_T` norm.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub state: SolverState,
    /// `X_T` distances between successive iterates.
    pub trace: Vec<f64>,
    /// `X_T` norms of the iterates.
    pub norms: Vec<f64>,
    pub iterations: usize,
    /// Local existence time allowed by the contraction estimate.
    pub time_bound: f64,
    pub within_bound: bool,
}

impl PicardResult {
    /// Ratios of successive distances.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.trace.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

type Trajectory = Vec<(SpectralField, SpectralField)>;

/// `‖u‖_{L^∞Ḣ^{n/2+δ}} + ‖u‖_{L^∞Ḣ^{n/2+δ−1}} + ‖∂ₜu‖_{L^∞Ḣ^{n/2+δ−1}}` over the mesh.
fn xt_norm(traj: &[(SpectralField, SpectralField)], delta: f64) -> f64 {
    let Some((u, _)) = traj.first() else {
        return 0.0;
    };
    let s = 0.5 * u.grid.dim as f64 + delta;
    let sup =
        |f: &dyn Fn(&(SpectralField, SpectralField)) -> f64| traj.iter().map(f).fold(0.0, f64::max);
    sup(&|p| sobolev_norm(&p.0, s))
        + sup(&|p| sobolev_norm(&p.0, s - 1.0))
        + sup(&|p| sobolev_norm(&p.1, s - 1.0))
}

fn xt_distance(a: &Trajectory, b: &Trajectory, delta: f64) -> f64 {
    let diff: Trajectory = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.0.sub(&y.0), x.1.sub(&y.1)))
        .collect();
    xt_norm(&diff, delta)
}

/// Local existence time `C / (1 + [(C_ε + c₁)‖u₀‖_{Ḣ^{n/2+δ}} + 2‖u₀‖_{Ḣ^{n/2+δ−1}}
/// + (C̃_ε + 1/c₁)‖u₁‖_{Ḣ^{n/2+δ−1}}])` with `C_ε = 2 + 1/√ε`, `C̃_ε = 2 + √ε`.
pub fn local_time_bound(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    c: f64,
) -> f64 {
    let s = 0.5 * u0.grid.dim as f64 + params.delta;
    let eps = params.epsilon;
    let c1 = params.c1();
    let bracket = (2.0 + 1.0 / eps.sqrt() + c1) * sobolev_norm(u0, s)
        + 2.0 * sobolev_norm(u0, s - 1.0)
        + (2.0 + eps.sqrt() + 1.0 / c1) * sobolev_norm(u1, s - 1.0);
    c / (1.0 + bracket)
}

/// Per-mode multipliers at each mesh lag: `[A_ℙ, A_ℚ, B_ℙ, B_ℚ, Ȧ_ℙ, Ȧ_ℚ]`.
fn lag_tables(
    params: &ModelParams,
    u0: &SpectralField,
    steps: usize,
    h: f64,
) -> Vec<Vec<[f64; 6]>> {
    let grid = u0.grid;
    (0..=steps)
        .map(|d| {
            let prop = linear_propagator(params, d as f64 * h);
            (0..grid.len())
                .map(|i| {
                    let k = grid.k_squared(i).sqrt();
                    [
                        prop.a(k, Projection::P),
                        prop.a(k, Projection::Q),
                        prop.b(k, Projection::P),
                        prop.b(k, Projection::Q),
                        prop.a_dot(k, Projection::P),
                        prop.a_dot(k, Projection::Q),
                    ]
                })
                .collect()
        })
        .collect()
}

/// Split each mode of a vector field into its ℙ and ℚ parts.
fn split(f: &SpectralField) -> Vec<([Complex64; 3], [Complex64; 3])> {
    let grid = f.grid;
    let dim = grid.dim;
    (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let k2 = grid.k_squared(i);
            let mut p = [Complex64::default(); 3];
            let mut q = [Complex64::default(); 3];
            let dot: Complex64 = if k2 > 0.0 {
                (0..dim)
                    .map(|j| f.components[j][i] * k[j])
                    .sum::<Complex64>()
                    / k2
            } else {
                Complex64::default()
            };
            for j in 0..dim {
                q[j] = dot * k[j];
                p[j] = f.components[j][i] - q[j];
            }
            (p, q)
        })
        .collect()
}

/// One application of the Duhamel map
/// `φ(u)(t) = A(t)u₀ + B(t)u₁ + ∫₀ᵗ B(t−s)(f(u) − ∂ₜu)(s)/ε ds`
/// on the mesh, with the trapezoid rule; `∂ₜφ` uses `Ḃ = A`.
fn duhamel(
    params: &ModelParams,
    lags: &[Vec<[f64; 6]>],
    u0: &[([Complex64; 3], [Complex64; 3])],
    u1: &[([Complex64; 3], [Complex64; 3])],
    prev: &Trajectory,
    h: f64,
) -> Trajectory {
    let grid = prev[0].0.grid;
    let dim = grid.dim;
    let sources: Vec<_> = prev
        .iter()
        .map(|(u, v)| split(&forcing(params, u).sub(v).scale(1.0 / params.epsilon)))
        .collect();
    (0..prev.len())
        .map(|m| {
            let mut u = SpectralField::zeros(grid, dim);
            let mut v = SpectralField::zeros(grid, dim);
            for i in 0..grid.len() {
                let t = &lags[m][i];
                let mut acc_u = [Complex64::default(); 3];
                let mut acc_v = [Complex64::default(); 3];
                for j in 0..dim {
                    let (p0, q0) = (u0[i].0[j], u0[i].1[j]);
                    let (p1, q1) = (u1[i].0[j], u1[i].1[j]);
                    acc_u[j] = p0 * t[0] + q0 * t[1] + p1 * t[2] + q1 * t[3];
                    acc_v[j] = p0 * t[4] + q0 * t[5] + p1 * t[0] + q1 * t[1];
                }
                for (l, src) in sources.iter().enumerate().take(m + 1) {
                    let w = if l == 0 || l == m { 0.5 * h } else { h };
                    let lag = &lags[m - l][i];
                    for j in 0..dim {
                        let (p, q) = (src[i].0[j], src[i].1[j]);
                        acc_u[j] += (p * lag[2] + q * lag[3]) * w;
                        acc_v[j] += (p * lag[0] + q * lag[1]) * w;
                    }
                }
                for j in 0..dim {
                    u.components[j][i] = acc_u[j];
                    v.components[j][i] = acc_v[j];
                }
            }
            (u, v)
        })
        .collect()
}

/// Fixed-point iteration of the Duhamel map from `u⁰ = 0` on a uniform mesh
/// of `[0, T]`, monitored in the `X_T` norm.
pub fn picard_local_solve(
    u0: &SpectralField,
    u1: &SpectralField,
    params: &ModelParams,
    cfg: &PicardConfig,
) -> Result<PicardResult> {
    params.validate()?;
    if !params.model.is_hyperbolic() {
        return Err(HnsError::InvalidParams(
            "Picard iteration needs a hyperbolic model".into(),
        ));
    }
    u0.check_grid(u1)?;
    let mean_free = |f: &SpectralField| {
        f.components
            .iter()
            .all(|c| c[0].norm() <= 1e-12 * f.max_abs_coeff())
    };
    if !mean_free(u0) || !mean_free(u1) {
        return Err(HnsError::RejectedInput(
            "initial data must be mean-zero".into(),
        ));
    }
    let (u0, u1) = (&u0.without_mean(), &u1.without_mean());
    if cfg.steps == 0 || !(cfg.t_final > 0.0) || cfg.max_iter == 0 {
        return Err(HnsError::InvalidParams(
            "Picard mesh needs t_final > 0, steps ≥ 1 and max_iter ≥ 1".into(),
        ));
    }
    let h = cfg.t_final / cfg.steps as f64;
    let lags = lag_tables(params, u0, cfg.steps, h);
    let (s0, s1) = (split(u0), split(u1));
    let zero = SpectralField::zeros(u0.grid, u0.grid.dim);
    let mut current: Trajectory = vec![(zero.clone(), zero); cfg.steps + 1];
    let mut trace = Vec::new();
    let mut norms = Vec::new();
    let mut increases = 0;
    for iter in 1..=cfg.max_iter {
        let next = duhamel(params, &lags, &s0, &s1, &current, h);
        let d = xt_distance(&next, &current, params.delta);
        norms.push(xt_norm(&next, params.delta));
        if !d.is_finite() {
            trace.push(d);
            return Err(HnsError::ContractionFailure { trace });
        }
        if trace.last().is_some_and(|&last| d > last) {
            increases += 1;
        } else {
            increases = 0;
        }
        trace.push(d);
        current = next;
        if d <= cfg.tol {
            let (u, u_t) = current.pop().expect("mesh is nonempty");
            let time_bound = local_time_bound(u0, u1, params, 1.0);
            return Ok(PicardResult {
                state: SolverState {
                    u,
                    u_t: Some(u_t),
                    time: cfg.t_final,
                },
                trace,
                norms,
                iterations: iter,
                time_bound,
                within_bound: cfg.t_final <= time_bound,
            });
        }
        if increases >= 3 {
            return Err(HnsError::ContractionFailure { trace });
        }
    }
    Err(HnsError::NoConvergence {
        max_iter: cfg.max_iter,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sampling::random_field;
    use crate::spectral::{helmholtz_project, GridSpec};

    fn config(t_final: f64, steps: usize) -> PicardConfig {
        PicardConfig {
            t_final,
            steps,
            max_iter: 60,
            tol: 1e-12,
        }
    }

    #[test]
    fn zero_data_converges_at_once() {
        let grid = GridSpec::periodic(2, 8).unwrap();
        let z = SpectralField::zeros(grid, 2);
        let r = picard_local_solve(
            &z,
            &z,
            &ModelParams::hns_eps_alpha(0.1, 0.1),
            &config(0.05, 8),
        )
        .unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.state.u.max_abs_coeff(), 0.0);
    }

    /// `ελ'' + λ' + κλ = 0` with `λ(0) = 1`, `λ'(0) = 0`, by its characteristic roots.
    fn damped_mode(eps: f64, kappa: f64, t: f64) -> f64 {
        let disc = 1.0 - 4.0 * eps * kappa;
        if disc > 0.0 {
            let r1 = (-1.0 + disc.sqrt()) / (2.0 * eps);
            let r2 = (-1.0 - disc.sqrt()) / (2.0 * eps);
            (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1)
        } else {
            let a = -1.0 / (2.0 * eps);
            let w = (-disc).sqrt() / (2.0 * eps);
            (a * t).exp() * ((w * t).cos() - a / w * (w * t).sin())
        }
    }

    #[test]
    fn linear_iteration_matches_damped_mode() {
        // ℙ mode: κ = |k|², ℚ mode: κ = (1 + 1/α)|k|²
        let grid = GridSpec::periodic(2, 8).unwrap();
        let (eps, alpha, t) = (0.1, 0.1, 0.05);
        let params = ModelParams::hns_eps_alpha(eps, alpha).linear();
        let u0 = crate::spectral::PhysicalField::from_fn(grid, 2, |x, c| {
            if c == 0 {
                x[1].cos() + x[0].sin()
            } else {
                0.0
            }
        })
        .to_spectral()
        .unwrap();
        let z = SpectralField::zeros(grid, 2);
        let r = picard_local_solve(&u0, &z, &params, &config(t, 256)).unwrap();
        let gp = damped_mode(eps, 1.0, t);
        let gq = damped_mode(eps, 1.0 + 1.0 / alpha, t);
        let expected = crate::spectral::PhysicalField::from_fn(grid, 2, |x, c| {
            if c == 0 {
                gp * x[1].cos() + gq * x[0].sin()
            } else {
                0.0
            }
        });
        let got = r.state.u.to_physical();
        for (a, b) in got
            .samples
            .iter()
            .flatten()
            .zip(expected.samples.iter().flatten())
        {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn small_data_contracts_geometrically() {
        let grid = GridSpec::periodic(2, 16).unwrap();
        let u0 = helmholtz_project(&random_field(grid, 2, 5, 2.0), Projection::P);
        let u0 = u0.scale(0.05 / u0.l2_norm());
        let z = SpectralField::zeros(grid, 2);
        let params = ModelParams::hns_eps_alpha(0.1, 0.5);
        let r = picard_local_solve(&u0, &z, &params, &config(0.05, 32)).unwrap();
        let ratios = r.contraction_ratios();
        assert!(ratios.iter().skip(1).all(|&q| q < 1.0), "{ratios:?}");
        assert!(r.time_bound > 0.0);
    }

    #[test]
    fn rejects_parabolic_model() {
        let grid = GridSpec::periodic(2, 8).unwrap();
        let z = SpectralField::zeros(grid, 2);
        assert!(picard_local_solve(&z, &z, &ModelParams::ns(), &config(0.1, 4)).is_err());
    }

    #[test]
    fn iteration_cap_reports_trace() {
        let grid = GridSpec::periodic(2, 8).unwrap();
        let u0 = random_field(grid, 2, 1, 1.0);
        let z = SpectralField::zeros(grid, 2);
        let cfg = PicardConfig {
            max_iter: 2,
            ..config(0.05, 8)
        };
        match picard_local_solve(&u0, &z, &ModelParams::hns_eps(0.1), &cfg) {
            Err(HnsError::NoConvergence { max_iter: 2, trace }) => assert_eq!(trace.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
