//! Seeded random fields used by tests, inequality verifiers and initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::field::SpectralField;
use super::grid::GridSpec;

/// Independent random stream for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mean-zero real field with Gaussian coefficients of amplitude `|m|^{-slope}`
/// on the dealiased band.
pub fn random_field(grid: GridSpec, ncomp: usize, seed: u64, slope: f64) -> SpectralField {
    let mut rng = stream_rng(seed, 0);
    random_field_with(grid, ncomp, &mut rng, slope, grid.dealias_mode_limit())
}

/// As [`random_field`] but drawing from `rng` and keeping only `|m_j| ≤ max_mode`.
pub fn random_field_with<R: Rng>(
    grid: GridSpec,
    ncomp: usize,
    rng: &mut R,
    slope: f64,
    max_mode: i64,
) -> SpectralField {
    let mut f = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        for i in 0..grid.len() {
            let m = grid.modes(i);
            let r2 = grid.mode_radius_sq(i);
            if r2 == 0 || m[..grid.dim].iter().any(|x| x.abs() > max_mode) {
                continue;
            }
            let amp = (r2 as f64).powf(-0.5 * slope);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            f.components[c][i] = Complex64::new(re, im) * amp;
        }
    }
    f.enforce_hermitian();
    f.remove_mean();
    f
}
