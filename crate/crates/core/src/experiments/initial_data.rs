use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use crate::error::{HnsError, Result};
use crate::solvers::ModelParams;
use crate::spectral::sampling::{random_field_with, stream_rng};
use crate::spectral::snapshot::{read_snapshot, Snapshot};
use crate::spectral::{helmholtz_project, GridSpec, PhysicalField, Projection, SpectralField};

/// Recipe for the initial velocity `u₀`; the initial `∂ₜu` is zero.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    Zero,
    /// Taylor–Green vortex of the given amplitude plus a seeded random
    /// divergence-free perturbation with `perturbation` times its L² norm.
    TaylorGreen {
        amplitude: f64,
        perturbation: f64,
        seed: u64,
    },
    /// Seeded random divergence-free field with coefficients `∝ |m|^{-slope}`
    /// for `|m_j| ≤ max_mode`, scaled to L² norm `amplitude`.
    RandomBandLimited {
        amplitude: f64,
        slope: f64,
        max_mode: i64,
        seed: u64,
    },
    /// Data `v₀` from the inner recipe with the modes `√ε|k| ≥ 1` removed.
    FrequencyCutoff(Box<InitialDataSpec>),
    /// A snapshot file holding `u₀`.
    File(PathBuf),
}

impl InitialDataSpec {
    /// The same recipe drawing from `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            InitialDataSpec::TaylorGreen {
                amplitude,
                perturbation,
                ..
            } => InitialDataSpec::TaylorGreen {
                amplitude: *amplitude,
                perturbation: *perturbation,
                seed,
            },
            InitialDataSpec::RandomBandLimited {
                amplitude,
                slope,
                max_mode,
                ..
            } => InitialDataSpec::RandomBandLimited {
                amplitude: *amplitude,
                slope: *slope,
                max_mode: *max_mode,
                seed,
            },
            InitialDataSpec::FrequencyCutoff(inner) => {
                InitialDataSpec::FrequencyCutoff(Box::new(inner.with_seed(seed)))
            }
            other => other.clone(),
        }
    }

    /// Whether the recipe draws random numbers.
    pub fn is_random(&self) -> bool {
        match self {
            InitialDataSpec::TaylorGreen { perturbation, .. } => *perturbation != 0.0,
            InitialDataSpec::RandomBandLimited { .. } => true,
            InitialDataSpec::FrequencyCutoff(inner) => inner.is_random(),
            InitialDataSpec::Zero | InitialDataSpec::File(_) => false,
        }
    }
}

fn taylor_green(grid: GridSpec) -> SpectralField {
    let w = grid.fundamental();
    PhysicalField::from_fn(grid, grid.dim, |x, c| {
        let (sx, cx) = (w * x[0]).sin_cos();
        let (sy, cy) = (w * x[1]).sin_cos();
        let cz = if grid.dim == 3 { (w * x[2]).cos() } else { 1.0 };
        match c {
            0 => sx * cy * cz,
            1 => -cx * sy * cz,
            _ => 0.0,
        }
    })
    .to_spectral()
    .expect("closed-form field is finite")
    .without_mean()
}

fn random_solenoidal(
    grid: GridSpec,
    seed: u64,
    slope: f64,
    max_mode: i64,
    norm: f64,
) -> SpectralField {
    let mut rng = stream_rng(seed, 0);
    let f = helmholtz_project(
        &random_field_with(grid, grid.dim, &mut rng, slope, max_mode),
        Projection::P,
    );
    let l2 = f.l2_norm();
    if l2 > 0.0 {
        f.scale(norm / l2)
    } else {
        f
    }
}

/// Remove every mode with `√ε|k| ≥ 1`.
pub fn frequency_cutoff(v0: &SpectralField, epsilon: f64) -> SpectralField {
    let grid = v0.grid;
    v0.apply_multiplier(|i| {
        if epsilon * grid.k_squared(i) < 1.0 {
            1.0
        } else {
            0.0
        }
    })
}

/// The limit data `v₀` of a recipe: the recipe itself without any cutoff.
pub fn limit_data(spec: &InitialDataSpec, grid: GridSpec) -> Result<SpectralField> {
    grid.validate()?;
    let u = match spec {
        InitialDataSpec::Zero => SpectralField::zeros(grid, grid.dim),
        InitialDataSpec::TaylorGreen {
            amplitude,
            perturbation,
            seed,
        } => {
            let tg = taylor_green(grid).scale(*amplitude);
            if *perturbation == 0.0 {
                tg
            } else {
                let noise =
                    random_solenoidal(grid, *seed, 2.0, grid.dealias_mode_limit().min(8), 1.0);
                tg.axpy(perturbation * tg.l2_norm(), &noise)
            }
        }
        InitialDataSpec::RandomBandLimited {
            amplitude,
            slope,
            max_mode,
            seed,
        } => random_solenoidal(
            grid,
            *seed,
            *slope,
            (*max_mode).min(grid.dealias_mode_limit()),
            *amplitude,
        ),
        InitialDataSpec::FrequencyCutoff(inner) => limit_data(inner, grid)?,
        InitialDataSpec::File(path) => {
            let mut r = BufReader::new(File::open(path)?);
            let field = match read_snapshot(&mut r)? {
                Snapshot::Spectral { field, .. } => field,
                Snapshot::Physical { field, .. } => field.to_spectral()?,
            };
            if !field.grid.same_as(&grid) || field.ncomp() != grid.dim {
                return Err(HnsError::GridMismatch(format!(
                    "{} holds a {}-component field on {}^{}, expected {}^{}",
                    path.display(),
                    field.ncomp(),
                    field.grid.n,
                    field.grid.dim,
                    grid.n,
                    grid.dim
                )));
            }
            helmholtz_project(&field.without_mean(), Projection::P)
        }
    };
    Ok(u)
}

/// `(u₀, u₁)` for a run of `params`: divergence-free, mean-zero, `u₁ = 0`.
pub fn build_initial_data(
    spec: &InitialDataSpec,
    grid: GridSpec,
    params: &ModelParams,
) -> Result<(SpectralField, SpectralField)> {
    let v0 = limit_data(spec, grid)?;
    let u0 = match spec {
        InitialDataSpec::FrequencyCutoff(_) => {
            if !(params.epsilon > 0.0) {
                return Err(HnsError::InvalidParams(
                    "the frequency cutoff needs epsilon > 0".into(),
                ));
            }
            frequency_cutoff(&v0, params.epsilon)
        }
        _ => v0,
    };
    Ok((u0, SpectralField::zeros(grid, grid.dim)))
}
