use num_complex::Complex64;

use super::params::{Model, ModelParams};
use crate::spectral::{
    dealias, divergence, gradient, helmholtz_project, to_spectral, PhysicalField, Projection,
    SpectralField,
};

fn physical_parts(u: &SpectralField) -> (PhysicalField, Vec<f64>) {
    let phys = u.to_physical();
    let div = divergence(u).to_physical().samples.swap_remove(0);
    (phys, div)
}

fn transform(grid: crate::spectral::GridSpec, samples: Vec<f64>) -> SpectralField {
    to_spectral(&PhysicalField {
        grid,
        samples: vec![samples],
    })
    .expect("products of finite fields are finite")
}

fn mul_ik(
    f: &[Complex64],
    grid: &crate::spectral::GridSpec,
    axis: usize,
    scale: f64,
) -> Vec<Complex64> {
    f.iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::new(0.0, scale * grid.wavevector(i)[axis]))
        .collect()
}

/// `−(u·∇)u` through the conservative identity `Σ_i ∂_i(u_i u) − (div u) u`,
/// pseudo-spectral and dealiased.
pub fn nonlinear_term(u: &SpectralField) -> SpectralField {
    let grid = u.grid;
    let dim = grid.dim;
    let (phys, div) = physical_parts(u);
    let mut out = SpectralField::zeros(grid, dim);
    for i in 0..dim {
        for j in i..dim {
            let prod: Vec<f64> = phys.samples[i]
                .iter()
                .zip(&phys.samples[j])
                .map(|(a, b)| a * b)
                .collect();
            let hat = dealias(&transform(grid, prod));
            let c = &hat.components[0];
            // ∂_i(u_i u_j) feeds component j; ∂_j(u_j u_i) feeds component i
            let dj = mul_ik(c, &grid, i, -1.0);
            out.components[j]
                .iter_mut()
                .zip(&dj)
                .for_each(|(o, d)| *o += d);
            if i != j {
                let di = mul_ik(c, &grid, j, -1.0);
                out.components[i]
                    .iter_mut()
                    .zip(&di)
                    .for_each(|(o, d)| *o += d);
            }
        }
    }
    for (j, comp) in phys.samples.iter().enumerate() {
        let prod: Vec<f64> = comp.iter().zip(&div).map(|(a, b)| a * b).collect();
        let hat = dealias(&transform(grid, prod));
        out.components[j]
            .iter_mut()
            .zip(&hat.components[0])
            .for_each(|(o, d)| *o += d);
    }
    out
}

/// `−(u·∇)u = −Σ_j u_j ∂_j u`, pseudo-spectral and dealiased.
pub fn convective_direct(u: &SpectralField) -> SpectralField {
    let grid = u.grid;
    let dim = grid.dim;
    let phys = u.to_physical();
    let grad = gradient(u).to_physical();
    let mut out = SpectralField::zeros(grid, dim);
    for c in 0..dim {
        let mut acc = vec![0.0; grid.len()];
        for j in 0..dim {
            for ((a, x), y) in acc
                .iter_mut()
                .zip(&phys.samples[j])
                .zip(&grad.samples[c * dim + j])
            {
                *a -= x * y;
            }
        }
        out.components[c] = dealias(&transform(grid, acc)).components.swap_remove(0);
    }
    out
}

/// Right-hand side `f` seen by the model: `−(u·∇)u`, Leray-projected for the
/// incompressible models, zero when the nonlinearity is off.
pub fn forcing(params: &ModelParams, u: &SpectralField) -> SpectralField {
    if !params.nonlinear {
        return SpectralField::zeros(u.grid, u.ncomp());
    }
    let f = nonlinear_term(u);
    match params.model {
        Model::HnsEpsAlpha => f,
        Model::Ns | Model::HnsEps => helmholtz_project(&f, Projection::P),
    }
}

/// Pressure `p = Δ⁻¹ div((u·∇)u)` with zero mean, so that `∇p = ℚ((u·∇)u)`.
pub fn recover_pressure(u: &SpectralField) -> SpectralField {
    let grid = u.grid;
    let conv = nonlinear_term(u).scale(-1.0);
    let div = divergence(&conv);
    let mut p = div.apply_multiplier(|i| {
        let k2 = grid.k_squared(i);
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    });
    p.remove_mean();
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sampling::random_field;
    use crate::spectral::GridSpec;

    pub(crate) fn taylor_green(grid: GridSpec) -> SpectralField {
        PhysicalField::from_fn(grid, 2, |x, c| {
            if c == 0 {
                x[0].sin() * x[1].cos()
            } else {
                -x[0].cos() * x[1].sin()
            }
        })
        .to_spectral()
        .unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = GridSpec::periodic(3, 8).unwrap();
        let z = SpectralField::zeros(grid, 3);
        assert_eq!(nonlinear_term(&z).max_abs_coeff(), 0.0);
        assert_eq!(recover_pressure(&z).max_abs_coeff(), 0.0);
    }

    #[test]
    fn identity_and_direct_forms_agree_on_divergence_free_fields() {
        for dim in [2, 3] {
            let grid = GridSpec::periodic(dim, if dim == 2 { 32 } else { 16 }).unwrap();
            let u = helmholtz_project(&random_field(grid, dim, 21, 1.0), Projection::P);
            let a = nonlinear_term(&u);
            let b = convective_direct(&u);
            assert!(a.max_abs_diff(&b) <= 1e-12 * b.max_abs_coeff());
        }
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let u = taylor_green(grid);
        let n = nonlinear_term(&u);
        assert!(helmholtz_project(&n, Projection::P).max_abs_coeff() < 1e-14);
        // −(u·∇)u = −(sin 2x / 2, sin 2y / 2)
        let expected = PhysicalField::from_fn(grid, 2, |x, c| -0.5 * (2.0 * x[c]).sin());
        let got = n.to_physical();
        for (a, b) in got
            .samples
            .iter()
            .flatten()
            .zip(expected.samples.iter().flatten())
        {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn taylor_green_pressure_closed_form() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let p = recover_pressure(&taylor_green(grid)).to_physical();
        let expected = PhysicalField::from_fn(grid, 1, |x, _| {
            -0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
        });
        for (a, b) in p.samples[0].iter().zip(&expected.samples[0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pressure_gradient_is_irrotational_convective_part() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let u = helmholtz_project(&random_field(grid, 2, 8, 1.0), Projection::P);
        let gp = gradient(&recover_pressure(&u));
        let q = helmholtz_project(&nonlinear_term(&u).scale(-1.0), Projection::Q);
        assert!(gp.max_abs_diff(&q) <= 1e-10 * q.max_abs_coeff());
    }

    #[test]
    fn forcing_respects_model() {
        let grid = GridSpec::periodic(2, 16).unwrap();
        let u = random_field(grid, 2, 2, 1.0);
        let ns = forcing(&ModelParams::ns(), &u);
        assert!(divergence(&ns).max_abs_coeff() < 1e-12);
        let pen = forcing(&ModelParams::hns_eps_alpha(0.1, 0.1), &u);
        assert_eq!(pen, nonlinear_term(&u));
        assert_eq!(
            forcing(&ModelParams::ns().linear(), &u).max_abs_coeff(),
            0.0
        );
    }
}
