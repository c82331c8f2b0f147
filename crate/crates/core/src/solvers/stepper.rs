use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::nonlinear::forcing;
use super::params::{Model, ModelParams};
use super::propagator::{HeatWeights, ModeWeights};
use crate::error::{HnsError, Result};
use crate::spectral::{GridSpec, SpectralField};

/// `(u, ∂ₜu, t)`; `u_t` is absent for NS.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: SpectralField,
    pub u_t: Option<SpectralField>,
    pub time: f64,
}

impl SolverState {
    /// Initial state for `params`; `u1` is dropped for NS.
    pub fn initial(u0: SpectralField, u1: SpectralField, params: &ModelParams) -> Self {
        SolverState {
            u_t: params.model.is_hyperbolic().then_some(u1),
            u: u0,
            time: 0.0,
        }
    }

    pub fn zero(grid: GridSpec, params: &ModelParams) -> Self {
        let z = SpectralField::zeros(grid, grid.dim);
        Self::initial(z.clone(), z, params)
    }

    pub fn velocity(&self) -> Result<&SpectralField> {
        self.u_t
            .as_ref()
            .ok_or_else(|| HnsError::MissingState("∂ₜu is absent".into()))
    }

    fn max_abs(&self) -> f64 {
        let a = self.u.max_abs_coeff();
        self.u_t.as_ref().map_or(a, |v| a.max(v.max_abs_coeff()))
    }

    fn is_finite(&self) -> bool {
        self.u.is_finite() && self.u_t.as_ref().is_none_or(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exact linear propagator with second-order exponential treatment of the nonlinearity.
    ExpLinearRk2,
    /// Classical RK4 on the full system; a cross-check with a step-size restriction.
    Rk4Full,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ExpLinearRk2 => "EXP_LINEAR_RK2",
            Scheme::Rk4Full => "RK4_FULL",
        })
    }
}

impl FromStr for Scheme {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EXP_LINEAR_RK2" => Ok(Scheme::ExpLinearRk2),
            "RK4_FULL" => Ok(Scheme::Rk4Full),
            _ => Err(HnsError::InvalidParams(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub snapshot_every: usize,
    pub t_end: f64,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        StepperConfig {
            dt,
            scheme: Scheme::ExpLinearRk2,
            snapshot_every: 1,
            t_end,
        }
    }

    /// Number of steps to reach `t_end`, the last one possibly shortened.
    pub fn steps(&self) -> usize {
        let n = (self.t_end / self.dt - 1e-9).ceil();
        n.max(0.0) as usize
    }
}

/// RK4 stability limit on `dt·ρ` used by the construction check.
pub const RK4_STABILITY_LIMIT: f64 = 2.5;

#[derive(Debug, Clone)]
enum Weights {
    Heat(Vec<HeatWeights>),
    /// Per mode: ℙ-branch and ℚ-branch weights.
    Wave(Vec<[ModeWeights; 2]>),
}

/// Precomputed integrator for one model, grid and step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: ModelParams,
    pub cfg: StepperConfig,
    pub grid: GridSpec,
    weights: Weights,
    dt_weights: f64,
}

/// Largest modulus of the linear eigenvalues over all modes.
pub fn linear_spectral_radius(params: &ModelParams, grid: &GridSpec) -> f64 {
    let kappa = grid.dim as f64 * grid.k_max().powi(2) * params.q_factor();
    match params.model {
        Model::Ns => kappa,
        _ => {
            let eps = params.epsilon;
            let d = params.damping();
            let disc = d * d - 4.0 * eps * kappa;
            if disc >= 0.0 {
                (d + disc.sqrt()) / (2.0 * eps)
            } else {
                (kappa / eps).sqrt()
            }
        }
    }
}

fn build_weights(params: &ModelParams, grid: &GridSpec, h: f64) -> Weights {
    match params.model {
        Model::Ns => Weights::Heat(
            (0..grid.len())
                .map(|i| HeatWeights::new(grid.k_squared(i), h))
                .collect(),
        ),
        _ => {
            let eps = params.epsilon;
            let d = params.damping();
            let qf = params.q_factor();
            let mut cache: std::collections::HashMap<i64, [ModeWeights; 2]> = Default::default();
            let w = (0..grid.len())
                .map(|i| {
                    let r2 = grid.mode_radius_sq(i);
                    *cache.entry(r2).or_insert_with(|| {
                        let k2 = grid.k_squared(i);
                        [
                            ModeWeights::new(eps, d, k2, h),
                            ModeWeights::new(eps, d, qf * k2, h),
                        ]
                    })
                })
                .collect();
            Weights::Wave(w)
        }
    }
}

impl Stepper {
    pub fn new(params: ModelParams, cfg: StepperConfig, grid: GridSpec) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return Err(HnsError::InvalidParams(format!(
                "dt must be positive, got {}",
                cfg.dt
            )));
        }
        if !(cfg.t_end >= 0.0) {
            return Err(HnsError::InvalidParams(format!(
                "t_end must be nonnegative, got {}",
                cfg.t_end
            )));
        }
        if cfg.snapshot_every == 0 {
            return Err(HnsError::InvalidParams(
                "snapshot_every must be positive".into(),
            ));
        }
        if cfg.scheme == Scheme::Rk4Full {
            let rho = linear_spectral_radius(&params, &grid);
            if cfg.dt * rho > RK4_STABILITY_LIMIT {
                return Err(HnsError::Unstable(format!(
                    "RK4_FULL needs dt·ρ ≤ {RK4_STABILITY_LIMIT}, got dt = {} with ρ = {rho:.4e}",
                    cfg.dt
                )));
            }
        }
        let weights = match cfg.scheme {
            Scheme::ExpLinearRk2 => build_weights(&params, &grid, cfg.dt),
            Scheme::Rk4Full => Weights::Heat(Vec::new()),
        };
        Ok(Stepper {
            params,
            cfg,
            grid,
            weights,
            dt_weights: cfg.dt,
        })
    }

    /// Advance by `cfg.dt`.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        self.step_by(state, self.cfg.dt)
    }

    /// Advance by `h ≤ dt`; a shorter step rebuilds the weights on the fly.
    pub fn step_by(&self, state: &SolverState, h: f64) -> Result<SolverState> {
        let next = match self.cfg.scheme {
            Scheme::ExpLinearRk2 => {
                if (h - self.dt_weights).abs() <= 1e-15 * self.dt_weights {
                    self.exp_step(state, &self.weights, h)?
                } else {
                    let w = build_weights(&self.params, &self.grid, h);
                    self.exp_step(state, &w, h)?
                }
            }
            Scheme::Rk4Full => self.rk4_step(state, h)?,
        };
        if !next.is_finite() {
            return Err(HnsError::BlowUp { time: next.time });
        }
        Ok(next)
    }

    fn exp_step(&self, s: &SolverState, weights: &Weights, h: f64) -> Result<SolverState> {
        let grid = self.grid;
        let n0 = forcing(&self.params, &s.u);
        match weights {
            Weights::Heat(w) => {
                let mut a = s.u.clone();
                for c in 0..grid.dim {
                    for i in 0..grid.len() {
                        a.components[c][i] =
                            s.u.components[c][i] * w[i].e + n0.components[c][i] * w[i].w0;
                    }
                }
                let n1 = forcing(&self.params, &a);
                let mut u = a;
                for c in 0..grid.dim {
                    for i in 0..grid.len() {
                        u.components[c][i] += (n1.components[c][i] - n0.components[c][i]) * w[i].w1;
                    }
                }
                Ok(SolverState {
                    u,
                    u_t: None,
                    time: s.time + h,
                })
            }
            Weights::Wave(w) => {
                let v = s.velocity()?;
                let (au, _) = wave_update(&grid, w, &s.u, v, &n0, &n0);
                let n1 = forcing(&self.params, &au);
                let (u, ut) = wave_update(&grid, w, &s.u, v, &n0, &n1);
                Ok(SolverState {
                    u,
                    u_t: Some(ut),
                    time: s.time + h,
                })
            }
        }
    }

    /// Time derivative of `(u, ∂ₜu)` for the full system.
    fn rhs(
        &self,
        u: &SpectralField,
        v: Option<&SpectralField>,
    ) -> (SpectralField, Option<SpectralField>) {
        let grid = self.grid;
        let f = forcing(&self.params, u);
        let qf = self.params.q_factor();
        let mut lin = SpectralField::zeros(grid, grid.dim);
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let k2 = grid.k_squared(i);
            let dot: Complex64 = (0..grid.dim).map(|j| u.components[j][i] * k[j]).sum();
            for j in 0..grid.dim {
                let q = if k2 > 0.0 {
                    dot * (k[j] / k2)
                } else {
                    Complex64::default()
                };
                let p = u.components[j][i] - q;
                lin.components[j][i] = -(p + q * qf) * k2;
            }
        }
        match v {
            None => (lin.add(&f), None),
            Some(v) => {
                let eps = self.params.epsilon;
                let acc = lin.add(&f).axpy(-self.params.damping(), v).scale(1.0 / eps);
                (v.clone(), Some(acc))
            }
        }
    }

    fn rk4_step(&self, s: &SolverState, h: f64) -> Result<SolverState> {
        let u0 = &s.u;
        let v0 = s.u_t.as_ref();
        if self.params.model.is_hyperbolic() {
            s.velocity()?;
        }
        let shift = |du: &SpectralField, dv: &Option<SpectralField>, a: f64| {
            (
                u0.axpy(a, du),
                v0.zip(dv.as_ref()).map(|(v, d)| v.axpy(a, d)),
            )
        };
        let (k1u, k1v) = self.rhs(u0, v0);
        let (u, v) = shift(&k1u, &k1v, 0.5 * h);
        let (k2u, k2v) = self.rhs(&u, v.as_ref());
        let (u, v) = shift(&k2u, &k2v, 0.5 * h);
        let (k3u, k3v) = self.rhs(&u, v.as_ref());
        let (u, v) = shift(&k3u, &k3v, h);
        let (k4u, k4v) = self.rhs(&u, v.as_ref());
        let combine = |y: &SpectralField,
                       a: &SpectralField,
                       b: &SpectralField,
                       c: &SpectralField,
                       d: &SpectralField| {
            let mut out = y.clone();
            out.add_assign_scaled(h / 6.0, a);
            out.add_assign_scaled(h / 3.0, b);
            out.add_assign_scaled(h / 3.0, c);
            out.add_assign_scaled(h / 6.0, d);
            out
        };
        let u = combine(u0, &k1u, &k2u, &k3u, &k4u);
        let u_t = match (v0, k1v, k2v, k3v, k4v) {
            (Some(v), Some(a), Some(b), Some(c), Some(d)) => Some(combine(v, &a, &b, &c, &d)),
            _ => None,
        };
        Ok(SolverState {
            u,
            u_t,
            time: s.time + h,
        })
    }

    /// Blow-up threshold relative to the initial state.
    pub fn blowup_threshold(initial: &SolverState) -> f64 {
        let m = initial.max_abs();
        if m > 0.0 {
            1e12 * m
        } else {
            1e12
        }
    }

    pub fn exceeds(state: &SolverState, threshold: f64) -> bool {
        !state.is_finite() || state.max_abs() > threshold
    }
}

/// Apply ℙ/ℚ branch weights mode by mode.
fn wave_update(
    grid: &GridSpec,
    w: &[[ModeWeights; 2]],
    u: &SpectralField,
    v: &SpectralField,
    n0: &SpectralField,
    n1: &SpectralField,
) -> (SpectralField, SpectralField) {
    let dim = grid.dim;
    let mut ou = SpectralField::zeros(*grid, dim);
    let mut ov = SpectralField::zeros(*grid, dim);
    let split =
        |f: &SpectralField, i: usize, k: &[f64; 3], k2: f64| -> ([Complex64; 3], [Complex64; 3]) {
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
        };
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = grid.k_squared(i);
        let [wp, wq] = &w[i];
        let (up, uq) = split(u, i, &k, k2);
        let (vp, vq) = split(v, i, &k, k2);
        let (ap, aq) = split(n0, i, &k, k2);
        let (bp, bq) = split(n1, i, &k, k2);
        for j in 0..dim {
            let (xp, yp) = wp.apply(up[j], vp[j], ap[j], bp[j]);
            let (xq, yq) = wq.apply(uq[j], vq[j], aq[j], bq[j]);
            ou.components[j][i] = xp + xq;
            ov.components[j][i] = yp + yq;
        }
    }
    (ou, ov)
}

/// One step from `state` with a fresh stepper.
pub fn step(state: &SolverState, params: &ModelParams, cfg: &StepperConfig) -> Result<SolverState> {
    Stepper::new(*params, *cfg, state.u.grid)?.step(state)
}

/// Model-equation residual at the middle of three equally spaced states, with
/// time derivatives by centered differences.
pub fn discrete_residual(
    prev: &SpectralField,
    cur: &SpectralField,
    next: &SpectralField,
    params: &ModelParams,
    dt: f64,
) -> SpectralField {
    let grid = cur.grid;
    let f = forcing(params, cur);
    let qf = params.q_factor();
    let mut lin = SpectralField::zeros(grid, grid.dim);
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = grid.k_squared(i);
        let dot: Complex64 = (0..grid.dim).map(|j| cur.components[j][i] * k[j]).sum();
        for j in 0..grid.dim {
            let q = if k2 > 0.0 {
                dot * (k[j] / k2)
            } else {
                Complex64::default()
            };
            lin.components[j][i] = (cur.components[j][i] - q + q * qf) * k2;
        }
    }
    let first = next.sub(prev).scale(0.5 / dt);
    let mut r = lin.sub(&f);
    match params.model {
        Model::Ns => r.add_assign_scaled(1.0, &first),
        _ => {
            let second = next.sub(&cur.scale(2.0)).add(prev).scale(1.0 / (dt * dt));
            r.add_assign_scaled(params.epsilon, &second);
            r.add_assign_scaled(params.damping(), &first);
        }
    }
    r
}
