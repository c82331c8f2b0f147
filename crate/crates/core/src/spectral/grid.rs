use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HnsError, Result};

/// Uniform periodic grid on the torus `[0, L)^dim`.
///
/// Storage is row-major with axis 0 slowest. Along every axis the array
/// index `j` maps to the integer mode `j` for `j < n/2` and `j - n`
/// otherwise, so modes cover `[-n/2, n/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub dealias_fraction: f64,
}

pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

impl GridSpec {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::with_dealias(dim, n, length, DEFAULT_DEALIAS)
    }

    pub fn with_dealias(dim: usize, n: usize, length: f64, dealias_fraction: f64) -> Result<Self> {
        let grid = GridSpec {
            dim,
            n,
            length,
            dealias_fraction,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// 2π-periodic grid, the default domain of the experiments.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(HnsError::InvalidGrid(format!(
                "dim must be 2 or 3, got {}",
                self.dim
            )));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(HnsError::InvalidGrid(format!(
                "n_per_axis must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(HnsError::InvalidGrid(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(HnsError::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    /// Total number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fundamental wavenumber 2π/L.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Largest representable wavenumber along one axis, (2π/L)·n/2.
    pub fn k_max(&self) -> f64 {
        self.fundamental() * (self.n / 2) as f64
    }

    /// Largest integer mode kept by the dealiasing filter along one axis.
    pub fn dealias_mode_limit(&self) -> i64 {
        let limit = self.dealias_fraction * (self.n / 2) as f64;
        // tolerate round-off in fractions such as 2/3 * 48 = 32
        (limit + 1e-9).floor() as i64
    }

    pub fn index_to_mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    pub fn mode_to_index(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Per-axis array indices of a flat index (unused axes are 0).
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Integer modes of a flat spectral index.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0i64; 3];
        for a in 0..self.dim {
            m[a] = self.index_to_mode(idx[a]);
        }
        m
    }

    /// Flat index of the mode `-m` (mirror used by Hermitian symmetry).
    pub fn mirror(&self, flat: usize) -> usize {
        let m = self.modes(flat);
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            idx[a] = self.mode_to_index(-m[a]);
        }
        self.flatten(idx)
    }

    /// Physical wavevector of a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let m = self.modes(flat);
        let k0 = self.fundamental();
        [m[0] as f64 * k0, m[1] as f64 * k0, m[2] as f64 * k0]
    }

    /// Squared integer radius Σ m_j² of a flat spectral index.
    pub fn mode_radius_sq(&self, flat: usize) -> i64 {
        let m = self.modes(flat);
        m.iter().map(|x| x * x).sum()
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let k0 = self.fundamental();
        self.mode_radius_sq(flat) as f64 * k0 * k0
    }

    /// Physical coordinates of a flat grid-point index.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Whether a mode survives the dealiasing filter.
    pub fn is_retained(&self, flat: usize) -> bool {
        let limit = self.dealias_mode_limit();
        let m = self.modes(flat);
        m[..self.dim].iter().all(|x| x.abs() <= limit)
    }

    /// Periodic distance between two points of the torus.
    pub fn torus_distance(&self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let l = self.length;
        let mut d2 = 0.0;
        for a in 0..self.dim {
            let mut d = (x[a] - y[a]).rem_euclid(l);
            if d > 0.5 * l {
                d = l - d;
            }
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Same grid with `factor` times as many points per axis (used for padded products).
    pub fn refined(&self, n: usize) -> GridSpec {
        GridSpec { n, ..*self }
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(HnsError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1, 16, 1.0).is_err());
        assert!(GridSpec::new(2, 12, 1.0).is_err());
        assert!(GridSpec::new(2, 4, 1.0).is_err());
        assert!(GridSpec::new(3, 16, -1.0).is_err());
        assert!(GridSpec::with_dealias(2, 16, 1.0, 0.0).is_err());
        assert!(GridSpec::with_dealias(2, 16, 1.0, 1.0).is_ok());
    }

    #[test]
    fn mode_ordering_covers_half_open_range() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let modes: Vec<i64> = (0..8).map(|j| g.index_to_mode(j)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for j in 0..8 {
            assert_eq!(g.mode_to_index(g.index_to_mode(j)), j);
        }
    }

    #[test]
    fn flatten_roundtrip_and_mirror() {
        for dim in [2, 3] {
            let g = GridSpec::periodic(dim, 8).unwrap();
            for f in 0..g.len() {
                assert_eq!(g.flatten(g.unflatten(f)), f);
                assert_eq!(g.mirror(g.mirror(f)), f);
            }
        }
    }

    #[test]
    fn dealias_limit_two_thirds() {
        let g = GridSpec::periodic(2, 128).unwrap();
        assert_eq!(g.dealias_mode_limit(), 42);
        let g = GridSpec::with_dealias(2, 64, 1.0, 1.0).unwrap();
        assert_eq!(g.dealias_mode_limit(), 32);
    }

    #[test]
    fn torus_distance_wraps() {
        let g = GridSpec::new(2, 8, 10.0).unwrap();
        let d = g.torus_distance([0.5, 0.0, 0.0], [9.5, 0.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-12);
    }
}
