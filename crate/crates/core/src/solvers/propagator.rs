use num_complex::Complex64;

use super::params::{Model, ModelParams};
use crate::spectral::{helmholtz_project, Projection, SpectralField};

/// Undamped linear multipliers `A(t) = A_ℚ ℚ + A_ℙ ℙ`, `B(t) = B_ℚ ℚ + B_ℙ ℙ`
/// with `A = cos(c t |k|)` and `B = sin(c t |k|)/(c |k|)`, `c = c₁` on ℚ and
/// `c₂` on ℙ. For NS, `A` is the heat multiplier `e^{−|k|²t}` and `B = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPropagator {
    pub params: ModelParams,
    pub t: f64,
}

pub fn linear_propagator(params: &ModelParams, t: f64) -> LinearPropagator {
    assert!(t >= 0.0, "propagator time must be nonnegative");
    LinearPropagator { params: *params, t }
}

impl LinearPropagator {
    fn speed(&self, branch: Projection) -> f64 {
        match branch {
            Projection::Q => self.params.c1(),
            Projection::P => self.params.c2(),
        }
    }

    pub fn a(&self, k: f64, branch: Projection) -> f64 {
        if self.params.model == Model::Ns {
            return (-k * k * self.t).exp();
        }
        (self.speed(branch) * self.t * k).cos()
    }

    pub fn b(&self, k: f64, branch: Projection) -> f64 {
        if self.params.model == Model::Ns {
            return 0.0;
        }
        let c = self.speed(branch);
        if k == 0.0 {
            self.t
        } else {
            (c * self.t * k).sin() / (c * k)
        }
    }

    /// Time derivative of `A`, `−c|k| sin(c t|k|)`.
    pub fn a_dot(&self, k: f64, branch: Projection) -> f64 {
        if self.params.model == Model::Ns {
            return -k * k * (-k * k * self.t).exp();
        }
        let c = self.speed(branch);
        -c * k * (c * self.t * k).sin()
    }

    /// Time derivative of `B`, equal to `A` for the hyperbolic models.
    pub fn b_dot(&self, k: f64, branch: Projection) -> f64 {
        if self.params.model == Model::Ns {
            return 0.0;
        }
        self.a(k, branch)
    }

    fn apply(&self, f: &SpectralField, m: impl Fn(f64, Projection) -> f64) -> SpectralField {
        let grid = f.grid;
        let kabs = |i: usize| grid.k_squared(i).sqrt();
        if f.ncomp() != grid.dim {
            return f.apply_multiplier(|i| m(kabs(i), Projection::P));
        }
        let q = helmholtz_project(f, Projection::Q);
        let p = f.sub(&q);
        p.apply_multiplier(|i| m(kabs(i), Projection::P))
            .add(&q.apply_multiplier(|i| m(kabs(i), Projection::Q)))
    }

    pub fn apply_a(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, |k, b| self.a(k, b))
    }

    pub fn apply_b(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, |k, b| self.b(k, b))
    }

    pub fn apply_a_dot(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, |k, b| self.a_dot(k, b))
    }

    pub fn apply_b_dot(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, |k, b| self.b_dot(k, b))
    }
}

/// `φ₁(z) = (e^z − 1)/z`.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..30 {
            term *= z / n as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `φ₂(z) = (e^z − 1 − z)/z²`.
fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for n in 3..32 {
            term *= z / n as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Exact one-step weights of the per-mode system `ε λ'' + d λ' + κ λ = N(t)`
/// with `N` linear over the step.
///
/// With the kernel `G` (`εG'' + dG' + κG = 0`, `G(0) = 0`, `G'(0) = 1`):
/// `λ(h) = e_uu λ + e_uv λ' + w0u N₀ + w1u (N₁ − N₀)` and likewise for `λ'(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeWeights {
    pub e_uu: f64,
    pub e_uv: f64,
    pub e_vu: f64,
    pub e_vv: f64,
    pub w0u: f64,
    pub w0v: f64,
    pub w1u: f64,
    pub w1v: f64,
}

/// `(G, G', ∫₀ʰ G, ∫₀ʰ (h−τ) G(τ) dτ)`.
fn kernel(eps: f64, d: f64, kappa: f64, h: f64) -> (f64, f64, f64, f64) {
    let disc = d * d - 4.0 * eps * kappa;
    let (r1, r2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let r1 = if d + sq > 0.0 {
            -2.0 * kappa / (d + sq)
        } else {
            0.0
        };
        (
            Complex64::new(r1, 0.0),
            Complex64::new((-d - sq) / (2.0 * eps), 0.0),
        )
    } else {
        let sq = (-disc).sqrt();
        (
            Complex64::new(-d / (2.0 * eps), sq / (2.0 * eps)),
            Complex64::new(-d / (2.0 * eps), -sq / (2.0 * eps)),
        )
    };
    let rmax = r1.norm().max(r2.norm());
    if h * rmax <= 1.0 {
        return kernel_taylor(eps, d, kappa, h);
    }
    let delta = (r1 - r2) * h;
    let e2 = (r2 * h).exp();
    if delta.norm() < 0.5 {
        let p = phi1(delta);
        let g = (e2 * h * p).re;
        let gp = (e2 * (1.0 + r1 * h * p)).re;
        let i = (eps * (1.0 - gp) - d * g) / kappa;
        let h2 = (eps * h - eps * g - d * i) / kappa;
        return (g, gp, i, h2);
    }
    let diff = r1 - r2;
    let e1 = (r1 * h).exp();
    let g = ((e1 - e2) / diff).re;
    let gp = ((r1 * e1 - r2 * e2) / diff).re;
    let i = ((phi1(r1 * h) - phi1(r2 * h)) * h / diff).re;
    let h2 = ((phi2(r1 * h) - phi2(r2 * h)) * h * h / diff).re;
    (g, gp, i, h2)
}

fn kernel_taylor(eps: f64, d: f64, kappa: f64, h: f64) -> (f64, f64, f64, f64) {
    // derivatives g_n = G^{(n)}(0)
    let mut g = [0.0f64; 48];
    g[1] = 1.0;
    for n in 0..46 {
        g[n + 2] = -(d * g[n + 1] + kappa * g[n]) / eps;
    }
    let (mut big_g, mut gp, mut i, mut h2) = (0.0, 0.0, 0.0, 0.0);
    // p = h^n / n!
    let mut p = 1.0;
    for n in 0..44 {
        big_g += g[n] * p;
        gp += g[n + 1] * p;
        i += g[n] * p * h / (n + 1) as f64;
        h2 += g[n] * p * h * h / ((n + 1) * (n + 2)) as f64;
        p *= h / (n + 1) as f64;
    }
    (big_g, gp, i, h2)
}

impl ModeWeights {
    pub fn new(eps: f64, d: f64, kappa: f64, h: f64) -> Self {
        if kappa == 0.0 && d == 0.0 {
            // free particle: λ(h) = λ + hλ' + ∫∫N/ε
            return ModeWeights {
                e_uu: 1.0,
                e_uv: h,
                e_vu: 0.0,
                e_vv: 1.0,
                w0u: h * h / (2.0 * eps),
                w0v: h / eps,
                w1u: h * h / (6.0 * eps),
                w1v: h / (2.0 * eps),
            };
        }
        let (g, gp, i, h2) = if kappa == 0.0 {
            kernel_taylor_or_exp(eps, d, h)
        } else {
            kernel(eps, d, kappa, h)
        };
        ModeWeights {
            e_uu: gp + d * g / eps,
            e_uv: g,
            e_vu: -kappa * g / eps,
            e_vv: gp,
            w0u: i / eps,
            w0v: g / eps,
            w1u: h2 / (eps * h),
            w1v: i / (eps * h),
        }
    }

    /// Advance `(λ, λ')` with forcing values `N₀` and `N₁` at the step ends.
    pub fn apply(
        &self,
        u: Complex64,
        v: Complex64,
        n0: Complex64,
        n1: Complex64,
    ) -> (Complex64, Complex64) {
        let dn = n1 - n0;
        (
            u * self.e_uu + v * self.e_uv + n0 * self.w0u + dn * self.w1u,
            u * self.e_vu + v * self.e_vv + n0 * self.w0v + dn * self.w1v,
        )
    }
}

/// Kernel for κ = 0: `G = (ε/d)(1 − e^{−dh/ε})`.
fn kernel_taylor_or_exp(eps: f64, d: f64, h: f64) -> (f64, f64, f64, f64) {
    let r = d / eps;
    if r * h <= 1.0 {
        return kernel_taylor(eps, d, 0.0, h);
    }
    let z = Complex64::new(-r * h, 0.0);
    let g = h * phi1(z).re;
    let gp = (-r * h).exp();
    let i = (h - g) / r;
    let h2 = (0.5 * h * h - i) / r;
    (g, gp, i, h2)
}

/// Heat-type weights `e^{−κh}`, `hφ₁(−κh)`, `hφ₂(−κh)` of `λ' + κλ = N`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeatWeights {
    pub e: f64,
    pub w0: f64,
    pub w1: f64,
}

impl HeatWeights {
    pub fn new(kappa: f64, h: f64) -> Self {
        let z = Complex64::new(-kappa * h, 0.0);
        HeatWeights {
            e: (-kappa * h).exp(),
            w0: h * phi1(z).re,
            w1: h * phi2(z).re,
        }
    }
}
