use num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{HnsError, Result};

/// Real field sampled on the uniform grid, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: GridSpec,
    pub samples: Vec<Vec<f64>>,
}

/// Fourier coefficients of a real field, one array per component.
///
/// Coefficients are mode amplitudes: the forward transform divides by the
/// number of grid points, so `cos(k·x)` has coefficient `1/2` at `±k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub components: Vec<Vec<Complex64>>,
}

impl PhysicalField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        PhysicalField {
            grid,
            samples: vec![vec![0.0; grid.len()]; ncomp],
        }
    }

    /// Samples `f(x, component)` at every grid point.
    pub fn from_fn(grid: GridSpec, ncomp: usize, f: impl Fn([f64; 3], usize) -> f64) -> Self {
        let samples = (0..ncomp)
            .map(|c| (0..grid.len()).map(|i| f(grid.point(i), c)).collect())
            .collect();
        PhysicalField { grid, samples }
    }

    pub fn ncomp(&self) -> usize {
        self.samples.len()
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        let len = self.grid.len();
        (0..len)
            .map(|i| self.samples.iter().map(|s| s[i] * s[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// Max over grid points of the pointwise magnitude.
    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// Quadrature of `(∫ |u|^p dx)^{1/p}` on the torus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let cell = self.grid.volume() / self.grid.len() as f64;
        let sum: f64 = self.magnitude().iter().map(|m| m.powf(p)).sum();
        (cell * sum).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.volume() / self.grid.len() as f64;
        let sum: f64 = self
            .samples
            .iter()
            .flat_map(|s| s.iter())
            .map(|x| x * x)
            .sum();
        (cell * sum).sqrt()
    }

    pub fn mean(&self, component: usize) -> f64 {
        self.samples[component].iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn to_spectral(&self) -> Result<SpectralField> {
        to_spectral(self)
    }
}

/// Forward transform with Hermitian symmetry enforced on the output.
pub fn to_spectral(f: &PhysicalField) -> Result<SpectralField> {
    f.grid.validate()?;
    for (c, s) in f.samples.iter().enumerate() {
        if s.len() != f.grid.len() {
            return Err(HnsError::GridMismatch(format!(
                "component {c} has {} samples, grid expects {}",
                s.len(),
                f.grid.len()
            )));
        }
        if let Some(bad) = s.iter().position(|x| !x.is_finite()) {
            return Err(HnsError::RejectedInput(format!(
                "non-finite sample {} at component {c}, index {bad}",
                s[bad]
            )));
        }
    }
    let components = f
        .samples
        .iter()
        .map(|s| fft::forward_real(&f.grid, s))
        .collect();
    let mut out = SpectralField {
        grid: f.grid,
        components,
    };
    out.enforce_hermitian();
    Ok(out)
}

/// Inverse transform; the imaginary residue of non-Hermitian entries is discarded.
pub fn to_physical(f: &SpectralField) -> PhysicalField {
    PhysicalField {
        grid: f.grid,
        samples: f
            .components
            .iter()
            .map(|c| fft::inverse_real(&f.grid, c))
            .collect(),
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        SpectralField {
            grid,
            components: vec![vec![Complex64::default(); grid.len()]; ncomp],
        }
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.components.len() == 1
    }

    pub fn is_vector(&self) -> bool {
        self.components.len() == self.grid.dim
    }

    pub fn to_physical(&self) -> PhysicalField {
        to_physical(self)
    }

    /// Whether every component has an exactly vanishing k = 0 coefficient.
    pub fn is_mean_zero(&self) -> bool {
        self.components.iter().all(|c| c[0] == Complex64::default())
    }

    pub fn remove_mean(&mut self) {
        for c in self.components.iter_mut() {
            c[0] = Complex64::default();
        }
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.remove_mean();
        out
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            components: vec![self.components[c].clone()],
        }
    }

    pub fn from_components(grid: GridSpec, parts: Vec<SpectralField>) -> Self {
        SpectralField {
            grid,
            components: parts.into_iter().flat_map(|p| p.components).collect(),
        }
    }

    /// Replace every coefficient by the average of itself and the conjugate of its mirror.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        for comp in self.components.iter_mut() {
            for i in 0..grid.len() {
                let j = grid.mirror(i);
                if j < i {
                    continue;
                }
                if j == i {
                    comp[i] = Complex64::new(comp[i].re, 0.0);
                } else {
                    let avg = 0.5 * (comp[i] + comp[j].conj());
                    comp[i] = avg;
                    comp[j] = avg.conj();
                }
            }
        }
    }

    /// Largest violation of `F(-k) = conj F(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid;
        let mut worst: f64 = 0.0;
        for comp in &self.components {
            for i in 0..grid.len() {
                let j = grid.mirror(i);
                worst = worst.max((comp[i] - comp[j].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Coefficient-space sup distance.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Real L² inner product `∫ u·v dx` via Plancherel.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let sum: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| (x * y.conj()).re)
            .sum();
        self.grid.volume() * sum
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        self.map(|z| z * a)
    }

    pub fn scale_in_place(&mut self, a: f64) {
        for c in self.components.iter_mut() {
            for z in c.iter_mut() {
                *z *= a;
            }
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|&z| f(z)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.axpy(-1.0, other)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        assert_eq!(self.ncomp(), other.ncomp(), "component count mismatch");
        SpectralField {
            grid: self.grid,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| p + q * a).collect())
                .collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, a: f64, other: &SpectralField) {
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            for (p, q) in x.iter_mut().zip(y.iter()) {
                *p += q * a;
            }
        }
    }

    /// Multiply each coefficient by a real multiplier `m(flat index)`.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> SpectralField {
        let grid = self.grid;
        let weights: Vec<f64> = (0..grid.len()).map(m).collect();
        SpectralField {
            grid,
            components: self
                .components
                .iter()
                .map(|c| c.iter().zip(&weights).map(|(z, w)| z * w).collect())
                .collect(),
        }
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }
}
