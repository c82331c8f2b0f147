use num_complex::Complex64;

use super::field::{to_physical, to_spectral, PhysicalField, SpectralField};
use crate::error::{HnsError, Result};

/// Which Helmholtz part to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Divergence-free (Leray) part; owns the k = 0 mode.
    P,
    /// Irrotational part `∇Δ⁻¹div`.
    Q,
}

/// Gradient of every component; output component `c·dim + j` is `∂_j F_c`.
pub fn gradient(f: &SpectralField) -> SpectralField {
    let grid = f.grid;
    let mut components = Vec::with_capacity(f.ncomp() * grid.dim);
    for comp in &f.components {
        for j in 0..grid.dim {
            components.push(
                comp.iter()
                    .enumerate()
                    .map(|(i, z)| z * Complex64::new(0.0, grid.wavevector(i)[j]))
                    .collect(),
            );
        }
    }
    SpectralField { grid, components }
}

/// Divergence of a vector field (`dim` components), returned as a scalar field.
pub fn divergence(f: &SpectralField) -> SpectralField {
    let grid = f.grid;
    assert_eq!(f.ncomp(), grid.dim, "divergence needs a vector field");
    let out = (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            (0..grid.dim)
                .map(|j| f.components[j][i] * Complex64::new(0.0, k[j]))
                .sum()
        })
        .collect();
    SpectralField {
        grid,
        components: vec![out],
    }
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid;
    f.apply_multiplier(|i| -grid.k_squared(i))
}

/// `ℚF = k (k·F̂)/|k|²`, `ℙF = F − ℚF`; the mean mode stays in ℙ.
pub fn helmholtz_project(f: &SpectralField, which: Projection) -> SpectralField {
    let grid = f.grid;
    assert_eq!(f.ncomp(), grid.dim, "projection needs a vector field");
    let mut out = f.clone();
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = grid.k_squared(i);
        let mut q = [Complex64::default(); 3];
        if k2 > 0.0 {
            let dot: Complex64 = (0..grid.dim).map(|j| f.components[j][i] * k[j]).sum();
            for j in 0..grid.dim {
                q[j] = dot * (k[j] / k2);
            }
        }
        for j in 0..grid.dim {
            out.components[j][i] = match which {
                Projection::Q => q[j],
                Projection::P => f.components[j][i] - q[j],
            };
        }
    }
    out
}

/// `Λ^σ` with `Λ̂ = |k|`; the k = 0 coefficient is set to zero.
pub fn lambda_power(f: &SpectralField, sigma: f64) -> Result<SpectralField> {
    if sigma < 0.0 && !f.is_mean_zero() {
        return Err(HnsError::SingularMultiplier(format!(
            "Λ^{sigma} applied to a field with nonzero mean"
        )));
    }
    let grid = f.grid;
    Ok(f.apply_multiplier(|i| {
        let k2 = grid.k_squared(i);
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(0.5 * sigma)
        }
    }))
}

/// Homogeneous Sobolev norm `(∫ |k|^{2σ}|F̂|²)^{1/2}` normalized so σ = 0 is the L² norm.
///
/// At σ = 0 the mean mode contributes; for σ ≠ 0 it is excluded.
pub fn sobolev_norm(f: &SpectralField, sigma: f64) -> f64 {
    let grid = f.grid;
    let mut sum = 0.0;
    for i in 0..grid.len() {
        let k2 = grid.k_squared(i);
        let w = if sigma == 0.0 {
            1.0
        } else if k2 == 0.0 {
            continue;
        } else {
            k2.powf(sigma)
        };
        for c in &f.components {
            sum += w * c[i].norm_sqr();
        }
    }
    (grid.volume() * sum).sqrt()
}

/// Zero all modes with some |m_j| above the dealiasing limit.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid;
    f.apply_multiplier(|i| if grid.is_retained(i) { 1.0 } else { 0.0 })
}

fn physical_product(a: &PhysicalField, b: &PhysicalField) -> PhysicalField {
    let samples = match (a.ncomp(), b.ncomp()) {
        (x, y) if x == y => a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(p, q)| p.iter().zip(q).map(|(s, t)| s * t).collect())
            .collect(),
        (1, _) => b
            .samples
            .iter()
            .map(|q| a.samples[0].iter().zip(q).map(|(s, t)| s * t).collect())
            .collect(),
        (_, 1) => a
            .samples
            .iter()
            .map(|p| p.iter().zip(&b.samples[0]).map(|(s, t)| s * t).collect())
            .collect(),
        (x, y) => panic!("cannot multiply fields with {x} and {y} components"),
    };
    PhysicalField {
        grid: a.grid,
        samples,
    }
}

/// Pseudo-spectral product without dealiasing.
///
/// Equal component counts multiply componentwise; a scalar multiplies every component.
pub fn raw_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_grid(b)?;
    to_spectral(&physical_product(&to_physical(a), &to_physical(b)))
}

/// Pseudo-spectral product followed by dealiasing.
pub fn pointwise_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    Ok(dealias(&raw_product(a, b)?))
}
