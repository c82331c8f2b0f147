use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::decomposition::{decompose, DyadicDecomposition, NormIndex};
use crate::error::{HnsError, Result};
use crate::spectral::sampling::{random_field_with, stream_rng};
use crate::spectral::{
    divergence, gradient, helmholtz_project, raw_product, sobolev_norm, GridSpec, PhysicalField,
    Projection, SpectralField,
};

/// Inequalities that can be checked numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Inequality {
    /// `‖div u · u‖_{Ḣ^{n/2+δ−1}} ≤ 2C ‖u‖_{Ḣ^{n/2+δ}} ‖u‖_∞`
    DivLp,
    /// `‖f‖²_{L⁴} ≤ K ‖f‖^{2−n/2}_{L²} ‖f‖^{n/2}_{Ḣ¹}`
    Ladyzhenskaya,
    /// `‖f‖_∞ ≤ C₂ ‖f‖^δ_{Ḣ^{n/2−1+δ}} ‖f‖^{1−δ}_{Ḣ^{n/2+δ}}`
    BesovInterp,
    /// `‖uv‖_{Ḣ^s} ≤ C₁ (‖u‖_∞‖v‖_{Ḣ^s} + ‖u‖_{Ḣ^s}‖v‖_∞)`
    Tame,
    /// `‖∂^α Δ_q u‖_{L²} ≤ C₀^{|α|} 2^{q|α|} ‖Δ_q u‖_{L²}`
    Bernstein,
    /// `‖f‖_{L^{2n/(n−1)}} ≤ K₂ ‖f‖_{Ḣ^{1/2}}`
    L3Embedding,
    /// `‖(u·∇)u‖_{Ḣ^{n/2−1+δ}} ≤ C₃ ‖u‖_∞ ‖u‖_{Ḣ^{n/2+δ}}`
    Nonlinearity,
    /// `‖u‖_{Ḣ^δ} ≤ C₄ ‖u‖^{1−δ}_{L²} ‖u‖^δ_{Ḣ¹}`
    SobolevInterp,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::DivLp,
        Inequality::Ladyzhenskaya,
        Inequality::BesovInterp,
        Inequality::Tame,
        Inequality::Bernstein,
        Inequality::L3Embedding,
        Inequality::Nonlinearity,
        Inequality::SobolevInterp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Inequality::DivLp => "div_lp",
            Inequality::Ladyzhenskaya => "ladyzhenskaya",
            Inequality::BesovInterp => "besov_interp",
            Inequality::Tame => "tame",
            Inequality::Bernstein => "bernstein",
            Inequality::L3Embedding => "l3_embedding",
            Inequality::Nonlinearity => "nonlinearity",
            Inequality::SobolevInterp => "sobolev_interp",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        Inequality::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| HnsError::InvalidParams(format!("unknown inequality {s:?}")))
    }
}

/// Sampling and index parameters of a verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityParams {
    pub grid: GridSpec,
    /// Regularity offset δ of the critical indices.
    pub delta: f64,
    /// Sobolev index of the tame estimate; `None` means `n/2 + δ`.
    pub sigma: Option<f64>,
    /// Derivative order of the Bernstein check.
    pub order: u32,
    /// Project every sample onto divergence-free fields.
    pub divergence_free: bool,
}

impl InequalityParams {
    pub fn new(grid: GridSpec) -> Self {
        InequalityParams {
            grid,
            delta: 0.5,
            sigma: None,
            order: 1,
            divergence_free: false,
        }
    }

    /// 64² for 2D and 32³ for 3D on the 2π-torus.
    pub fn default_for(dim: usize) -> Self {
        let n = if dim == 2 { 64 } else { 32 };
        Self::new(GridSpec::periodic(dim, n).expect("default grid"))
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HnsError::InvalidParams(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.order == 0 {
            return Err(HnsError::InvalidParams(
                "Bernstein order must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub witness_seed: u64,
    /// Trial index at which the maximum was attained.
    pub witness_trial: usize,
    pub grid: GridSpec,
}

impl InequalityReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "name",
        "trials",
        "max_ratio",
        "mean_ratio",
        "seed",
        "dim",
        "n",
        "length",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.samples.to_string(),
            format!("{:e}", self.max_ratio),
            format!("{:e}", self.mean_ratio),
            self.witness_seed.to_string(),
            self.grid.dim.to_string(),
            self.grid.n.to_string(),
            format!("{:e}", self.grid.length),
        ]
    }
}

pub fn write_reports_csv<W: Write>(w: W, reports: &[InequalityReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(InequalityReport::CSV_HEADER)?;
    for r in reports {
        out.write_record(r.csv_record())?;
    }
    out.flush()?;
    Ok(())
}

/// Largest mode kept by samples, so quadratic products stay unaliased.
fn sample_band(grid: &GridSpec) -> i64 {
    grid.n as i64 / 4 - 1
}

fn band_limit(f: &SpectralField, max_mode: i64) -> SpectralField {
    let grid = f.grid;
    let mut out = f.apply_multiplier(|i| {
        let m = grid.modes(i);
        if m[..grid.dim].iter().all(|x| x.abs() <= max_mode) {
            1.0
        } else {
            0.0
        }
    });
    out.remove_mean();
    out
}

/// Gaussian bump with a random center and width, times a random direction.
fn bump(grid: GridSpec, ncomp: usize, rng: &mut ChaCha8Rng) -> SpectralField {
    let h = grid.spacing();
    let width = rng.random_range(2.0 * h..(grid.length / 10.0).max(4.0 * h));
    let mut center = [0.0; 3];
    for c in center.iter_mut().take(grid.dim) {
        *c = rng.random_range(0.0..grid.length);
    }
    let dir: Vec<f64> = (0..ncomp).map(|_| rng.random_range(-1.0..1.0)).collect();
    let phys = PhysicalField::from_fn(grid, ncomp, |x, c| {
        let d = grid.torus_distance(x, center);
        dir[c] * (-0.5 * d * d / (width * width)).exp()
    });
    band_limit(
        &phys.to_spectral().expect("finite bump"),
        sample_band(&grid),
    )
}

/// A handful of random Fourier modes with random amplitudes.
fn few_modes(grid: GridSpec, ncomp: usize, rng: &mut ChaCha8Rng) -> SpectralField {
    let band = sample_band(&grid);
    let count = rng.random_range(1..=4);
    let mut f = SpectralField::zeros(grid, ncomp);
    for _ in 0..count {
        let mut idx = [0usize; 3];
        for a in idx.iter_mut().take(grid.dim) {
            *a = grid.mode_to_index(rng.random_range(-band..=band));
        }
        let i = grid.flatten(idx);
        for c in 0..ncomp {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            f.components[c][i] += z;
            let j = grid.mirror(i);
            f.components[c][j] += z.conj();
        }
    }
    f.enforce_hermitian();
    f.remove_mean();
    f
}

/// Sample for trial `t`: families rotate between power-law spectra, bumps and few-mode fields.
fn sample_field(
    grid: GridSpec,
    ncomp: usize,
    rng: &mut ChaCha8Rng,
    trial: usize,
    div_free: bool,
) -> SpectralField {
    let f = match trial % 3 {
        0 => {
            let slope = rng.random_range(0.5..3.0);
            let band = rng.random_range(2..=sample_band(&grid));
            random_field_with(grid, ncomp, rng, slope, band)
        }
        1 => bump(grid, ncomp, rng),
        _ => few_modes(grid, ncomp, rng),
    };
    if div_free && ncomp == grid.dim {
        helmholtz_project(&f, Projection::P)
    } else {
        f
    }
}

fn linf(f: &SpectralField) -> f64 {
    f.to_physical().max_abs()
}

/// `(u·∇)u` by direct products of quarter-band samples.
fn convective(u: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid;
    let g = gradient(u);
    let mut out = SpectralField::zeros(grid, grid.dim);
    for c in 0..grid.dim {
        for j in 0..grid.dim {
            let term = raw_product(&u.component(j), &g.component(c * grid.dim + j))?;
            out.components[c]
                .iter_mut()
                .zip(&term.components[0])
                .for_each(|(o, t)| *o += t);
        }
    }
    Ok(out)
}

/// One trial's `(LHS, RHS)`.
fn evaluate(
    ineq: Inequality,
    params: &InequalityParams,
    trial: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let grid = params.grid;
    let n = grid.dim as f64;
    let delta = params.delta;
    let vector =
        |rng: &mut ChaCha8Rng| sample_field(grid, grid.dim, rng, trial, params.divergence_free);
    let scalar = |rng: &mut ChaCha8Rng| sample_field(grid, 1, rng, trial, false);
    Ok(match ineq {
        Inequality::DivLp => {
            let u = vector(rng);
            let prod = raw_product(&divergence(&u), &u)?;
            (
                sobolev_norm(&prod, n / 2.0 + delta - 1.0),
                sobolev_norm(&u, n / 2.0 + delta) * linf(&u),
            )
        }
        Inequality::Ladyzhenskaya => {
            let u = vector(rng);
            let l4 = u.to_physical().lp_norm(4.0);
            let l2 = sobolev_norm(&u, 0.0);
            let h1 = sobolev_norm(&u, 1.0);
            (l4 * l4, l2.powf(2.0 - n / 2.0) * h1.powf(n / 2.0))
        }
        Inequality::BesovInterp => {
            let f = scalar(rng);
            (
                linf(&f),
                sobolev_norm(&f, n / 2.0 - 1.0 + delta).powf(delta)
                    * sobolev_norm(&f, n / 2.0 + delta).powf(1.0 - delta),
            )
        }
        Inequality::Tame => {
            let s = params.sigma.unwrap_or(n / 2.0 + delta);
            let u = scalar(rng);
            let v = scalar(rng);
            let uv = raw_product(&u, &v)?.without_mean();
            (
                sobolev_norm(&uv, s),
                linf(&u) * sobolev_norm(&v, s) + sobolev_norm(&u, s) * linf(&v),
            )
        }
        Inequality::Bernstein => {
            let u = vector(rng);
            let d: DyadicDecomposition = decompose(&u);
            let top = super::decomposition::sharp_block_index(
                sample_band(&grid).pow(2) * grid.dim as i64,
            );
            let q = rng.random_range(0..=top);
            let block = d.block(q).expect("block in range").clone();
            let mut alpha = [0u32; 3];
            for _ in 0..params.order {
                alpha[rng.random_range(0..grid.dim)] += 1;
            }
            let k0 = grid.fundamental();
            let deriv = block.apply_multiplier(|i| {
                let k = grid.wavevector(i);
                (0..grid.dim)
                    .map(|a| k[a].abs().powi(alpha[a] as i32))
                    .product()
            });
            let scale = (2f64.powi(q) * k0).powi(params.order as i32);
            (deriv.l2_norm(), scale * block.l2_norm())
        }
        Inequality::L3Embedding => {
            let p = 2.0 * n / (n - 1.0);
            let f = scalar(rng);
            (f.to_physical().lp_norm(p), sobolev_norm(&f, 0.5))
        }
        Inequality::Nonlinearity => {
            let u = vector(rng);
            let c = convective(&u)?.without_mean();
            (
                sobolev_norm(&c, n / 2.0 - 1.0 + delta),
                linf(&u) * sobolev_norm(&u, n / 2.0 + delta),
            )
        }
        Inequality::SobolevInterp => {
            let u = vector(rng);
            (
                sobolev_norm(&u, delta),
                sobolev_norm(&u, 0.0).powf(1.0 - delta) * sobolev_norm(&u, 1.0).powf(delta),
            )
        }
    })
}

/// Randomized ratio maximization `LHS/RHS` over `trials` samples.
///
/// Each trial draws from its own stream derived from `(seed, trial)`, so the
/// report does not depend on the thread count.
pub fn verify_inequality(
    ineq: Inequality,
    trials: usize,
    seed: u64,
    params: &InequalityParams,
) -> Result<InequalityReport> {
    params.validate()?;
    if trials == 0 {
        return Err(HnsError::InvalidParams("trials must be at least 1".into()));
    }
    let ratios: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64 + 1);
            let (lhs, rhs) = evaluate(ineq, params, t, &mut rng)?;
            let tiny = 1e-13 * lhs.abs().max(1.0);
            if rhs <= tiny || !rhs.is_finite() {
                Ok(None)
            } else {
                Ok(Some(lhs / rhs))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_ratio = 0.0;
    let mut witness = 0;
    let mut sum = 0.0;
    let mut used = 0;
    for (t, r) in ratios.iter().enumerate() {
        if let Some(r) = r {
            if !r.is_finite() {
                return Err(HnsError::Domain(format!(
                    "{ineq}: non-finite ratio at trial {t}"
                )));
            }
            if *r > max_ratio {
                max_ratio = *r;
                witness = t;
            }
            sum += r;
            used += 1;
        }
    }
    if used == 0 {
        return Err(HnsError::Inconclusive {
            name: ineq.name().to_string(),
            skipped: trials,
        });
    }
    Ok(InequalityReport {
        name: ineq.name().to_string(),
        samples: used,
        skipped: trials - used,
        max_ratio,
        mean_ratio: sum / used as f64,
        witness_seed: seed,
        witness_trial: witness,
        grid: params.grid,
    })
}

/// Working constants from randomized maximization on the default grids.
///
/// Keys: `K` (2D Ladyzhenskaya), `K1` (3D nonlinearity at indices 1/2 and
/// 1/2+δ), `K2` (3D L³ embedding), `C` (div_lp, halved), `C0` (Bernstein),
/// `C1` (2D tame at 1+δ), `C2` (2D Besov interpolation), `C3` (2D nonlinearity
/// at indices 0 and δ), `C4` (2D Sobolev interpolation), `self_embedding`.
pub fn estimate_constants(seed: u64, trials: usize, delta: f64) -> Result<BTreeMap<String, f64>> {
    if trials < 100 {
        return Err(HnsError::InvalidParams(format!(
            "at least 100 trials required, got {trials}"
        )));
    }
    let p2 = InequalityParams {
        delta,
        ..InequalityParams::default_for(2)
    };
    let p3 = InequalityParams {
        delta,
        ..InequalityParams::default_for(3)
    };
    let run = |i: Inequality, p: &InequalityParams| {
        verify_inequality(i, trials, seed, p).map(|r| r.max_ratio)
    };
    // δ → 0 limit of the nonlinearity estimate, evaluated just above zero
    let near_zero = |p: &InequalityParams| InequalityParams { delta: 1e-9, ..*p };

    let mut out = BTreeMap::new();
    out.insert("K".into(), run(Inequality::Ladyzhenskaya, &p2)?);
    out.insert(
        "K1".into(),
        run(Inequality::Nonlinearity, &p3)?.max(run(Inequality::Nonlinearity, &near_zero(&p3))?),
    );
    out.insert("K2".into(), run(Inequality::L3Embedding, &p3)?);
    out.insert("C".into(), 0.5 * run(Inequality::DivLp, &p2)?);
    out.insert("C0".into(), run(Inequality::Bernstein, &p2)?);
    out.insert("C1".into(), run(Inequality::Tame, &p2)?);
    out.insert("C2".into(), run(Inequality::BesovInterp, &p2)?);
    out.insert(
        "C3".into(),
        run(Inequality::Nonlinearity, &p2)?.max(run(Inequality::Nonlinearity, &near_zero(&p2))?),
    );
    out.insert("C4".into(), run(Inequality::SobolevInterp, &p2)?);
    out.insert("self_embedding".into(), 1.0);
    Ok(out)
}

/// Besov norm `Ḃ^s_{2,1}` of a field, the space that embeds into `L^∞`.
pub fn besov_21(f: &SpectralField, s: f64) -> f64 {
    decompose(f)
        .besov_norm(s, NormIndex::Finite(2), NormIndex::Finite(1))
        .expect("supported indices")
}
