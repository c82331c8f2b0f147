//! Pseudo-spectral laboratory for the incompressible Navier–Stokes equations,
//! their hyperbolic (Cattaneo) perturbation and the divergence-penalized weakly
//! compressible perturbation on the periodic torus.

pub mod energies;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod solvers;
pub mod spectral;

pub use error::{HnsError, Result};
pub use spectral::{GridSpec, PhysicalField, SpectralField};
