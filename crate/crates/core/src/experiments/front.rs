use std::io::Write;

use serde::Serialize;

use crate::error::{HnsError, Result};
use crate::solvers::{support_radius, ModelParams, SolverState, Stepper, StepperConfig};
use crate::spectral::{gradient, GridSpec, PhysicalField, SpectralField};

/// Which Helmholtz branch the bump excites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `u₀ = ∇g`, travelling at `c₁`.
    Irrotational,
    /// `u₀ = (∂₂g, −∂₁g, 0)`, travelling at `c₂`.
    Solenoidal,
}

/// Gaussian `g = amplitude·exp(−|x−center|²/(2 width²))` shaped into initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
    pub branch: Branch,
    pub t_end: f64,
    /// Number of sampling intervals in `[0, t_end]`.
    pub samples: usize,
}

impl BumpSpec {
    /// Bump centred in the box with width `L/40`, sampled 40 times.
    pub fn centered(grid: &GridSpec, branch: Branch, t_end: f64) -> Self {
        BumpSpec {
            center: [0.5 * grid.length; 3],
            width: grid.length / 40.0,
            amplitude: 1.0,
            branch,
            t_end,
            samples: 40,
        }
    }

    pub fn initial_velocity(&self, grid: GridSpec) -> Result<SpectralField> {
        let s2 = self.width * self.width;
        let g = PhysicalField::from_fn(grid, 1, |x, _| {
            let r2: f64 = (0..grid.dim).map(|a| (x[a] - self.center[a]).powi(2)).sum();
            self.amplitude * (-0.5 * r2 / s2).exp()
        })
        .to_spectral()?;
        let grad = gradient(&g);
        let u = match self.branch {
            Branch::Irrotational => grad,
            Branch::Solenoidal => {
                let mut parts = vec![grad.component(1), grad.component(0).scale(-1.0)];
                if grid.dim == 3 {
                    parts.push(SpectralField::zeros(grid, 1));
                }
                SpectralField::from_components(grid, parts)
            }
        };
        Ok(u.without_mean())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontReport {
    pub times: Vec<f64>,
    pub support_radius: Vec<f64>,
    /// `R + c₁t + 2h` at each sample.
    pub bound_radius: Vec<f64>,
    pub c1: f64,
    /// Characteristic speed of the excited branch.
    pub branch_speed: f64,
    /// Least-squares slope of the radius over the last three quarters of the window.
    pub measured_speed: f64,
    pub threshold: f64,
    pub slope_bound_satisfied: bool,
}

impl FrontReport {
    pub const CSV_HEADER: [&'static str; 3] = ["time", "support_radius", "bound_radius"];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for ((t, r), b) in self
            .times
            .iter()
            .zip(&self.support_radius)
            .zip(&self.bound_radius)
        {
            out.write_record([t.to_string(), r.to_string(), b.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `|measured − expected| / expected`.
    pub fn speed_error(&self) -> f64 {
        (self.measured_speed - self.branch_speed).abs() / self.branch_speed
    }
}

/// Evolve a localized bump and track the radius of its θ-support,
/// θ = 1e−8 × the initial maximum.
pub fn finite_speed_experiment(
    params: &ModelParams,
    grid: GridSpec,
    bump: &BumpSpec,
) -> Result<FrontReport> {
    if !params.model.is_hyperbolic() {
        return Err(HnsError::InvalidParams(
            "finite speed needs a hyperbolic model".into(),
        ));
    }
    if bump.samples == 0 || !(bump.t_end > 0.0) {
        return Err(HnsError::InvalidParams(
            "front sampling needs t_end > 0 and samples ≥ 1".into(),
        ));
    }
    let u0 = bump.initial_velocity(grid)?;
    let threshold = 1e-8 * u0.to_physical().max_abs();
    let r0 = support_radius(&u0, bump.center, threshold).unwrap_or(0.0);
    let c1 = params.c1();
    let speed = match bump.branch {
        Branch::Irrotational => c1,
        Branch::Solenoidal => params.c2(),
    };
    let half = 0.5 * grid.length;
    if bump.t_end >= (half - r0) / speed {
        return Err(HnsError::InvalidWindow(format!(
            "t_end = {} reaches the antipode: the front needs {:.4e} to cross the half box",
            bump.t_end,
            (half - r0) / speed
        )));
    }
    let antipode = {
        let mut p = bump.center;
        for x in p.iter_mut().take(grid.dim) {
            *x = (*x + half).rem_euclid(grid.length);
        }
        p
    };
    let h = grid.spacing();
    let dt = bump.t_end / bump.samples as f64;
    let stepper = Stepper::new(*params, StepperConfig::new(dt, bump.t_end), grid)?;
    let mut state = SolverState::initial(u0.clone(), SpectralField::zeros(grid, grid.dim), params);
    let mut times = vec![0.0];
    let mut radii = vec![r0];
    for n in 1..=bump.samples {
        state = stepper.step(&state)?;
        let phys = state.u.to_physical();
        let mag = phys.magnitude();
        let at_antipode = mag
            .iter()
            .enumerate()
            .filter(|(i, _)| grid.torus_distance(grid.point(*i), antipode) <= h)
            .any(|(_, m)| *m > threshold);
        if at_antipode {
            return Err(HnsError::InvalidWindow(format!(
                "signal above threshold at the antipode at t = {}",
                state.time
            )));
        }
        times.push(n as f64 * dt);
        radii.push(support_radius(&state.u, bump.center, threshold).unwrap_or(0.0));
    }
    let bound: Vec<f64> = times.iter().map(|t| r0 + c1 * t + 2.0 * h).collect();
    let satisfied = radii.iter().zip(&bound).all(|(r, b)| r <= b);
    let tail: Vec<(f64, f64)> = times
        .iter()
        .zip(&radii)
        .filter(|(t, _)| **t >= 0.25 * bump.t_end)
        .map(|(t, r)| (*t, *r))
        .collect();
    let measured_speed = linear_slope(&tail);
    Ok(FrontReport {
        times,
        support_radius: radii,
        bound_radius: bound,
        c1,
        branch_speed: speed,
        measured_speed,
        threshold,
        slope_bound_satisfied: satisfied,
    })
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave_params() -> ModelParams {
        ModelParams {
            damped: false,
            ..ModelParams::hns_eps_alpha(1e-2, 1e-2).linear()
        }
    }

    #[test]
    fn c1_for_equal_eps_and_alpha() {
        assert!((wave_params().c1() - 100.498_756_211_208_9).abs() < 1e-9);
    }

    #[test]
    fn zero_bump_has_empty_support() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let bump = BumpSpec {
            amplitude: 0.0,
            ..BumpSpec::centered(&grid, Branch::Irrotational, 0.005)
        };
        let r = finite_speed_experiment(&wave_params(), grid, &bump).unwrap();
        assert!(r.support_radius.iter().all(|&x| x == 0.0));
        assert!(r.slope_bound_satisfied);
    }

    #[test]
    fn solenoidal_front_moves_at_c2() {
        let grid = GridSpec::periodic(2, 128).unwrap();
        let bump = BumpSpec {
            width: 4.0 * grid.spacing(),
            ..BumpSpec::centered(&grid, Branch::Solenoidal, 0.15)
        };
        let r = finite_speed_experiment(&wave_params(), grid, &bump);
        let r = r.unwrap();
        assert!(r.slope_bound_satisfied);
        assert!(r.speed_error() < 0.05, "{}", r.measured_speed);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 42);
    }

    #[test]
    fn window_past_the_antipode_is_rejected() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let bump = BumpSpec::centered(&grid, Branch::Irrotational, 0.1);
        let err = finite_speed_experiment(&wave_params(), grid, &bump).unwrap_err();
        assert!(matches!(err, HnsError::InvalidWindow(_)));
    }

    #[test]
    fn bump_data_lies_on_its_branch() {
        use crate::spectral::{helmholtz_project, Projection};
        let grid = GridSpec::periodic(3, 16).unwrap();
        for (branch, other) in [
            (Branch::Irrotational, Projection::P),
            (Branch::Solenoidal, Projection::Q),
        ] {
            let u = BumpSpec::centered(&grid, branch, 0.1)
                .initial_velocity(grid)
                .unwrap();
            assert!(helmholtz_project(&u, other).max_abs_coeff() <= 1e-14 * u.max_abs_coeff());
        }
    }
}
