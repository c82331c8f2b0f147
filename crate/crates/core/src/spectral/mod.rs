//! Fourier representation of real fields on the torus and the linear operators acting on them.

mod fft;
mod field;
mod grid;
mod ops;
pub mod sampling;
pub mod snapshot;

pub use field::{to_physical, to_spectral, PhysicalField, SpectralField};
pub use grid::{GridSpec, DEFAULT_DEALIAS};
pub use ops::{
    dealias, divergence, gradient, helmholtz_project, lambda_power, laplacian, pointwise_product,
    raw_product, sobolev_norm, Projection,
};
