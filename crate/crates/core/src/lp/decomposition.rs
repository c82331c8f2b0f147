use num_complex::Complex64;

use crate::error::{HnsError, Result};
use crate::spectral::{dealias, to_spectral, PhysicalField, SpectralField};

/// Frequency cutoff profile of the dyadic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cutoff {
    /// Indicator of `2^p ≤ |m| < 2^{p+1}`; blocks are orthogonal.
    #[default]
    Sharp,
    /// Differences of a C∞ radial bump equal to 1 on `|m| ≤ 1` and 0 on `|m| ≥ 2`.
    Smooth,
}

/// Littlewood-Paley blocks `Δ_p u`, indexed from `p_min` to `p_max` in
/// integer-mode radius `|m| = |k|·L/2π`.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub source: SpectralField,
    pub blocks: Vec<(i32, SpectralField)>,
    pub p_min: i32,
    pub p_max: i32,
    pub cutoff: Cutoff,
}

/// Block index of a nonzero mode under sharp cutoffs: largest p with 4^p ≤ m².
pub fn sharp_block_index(radius_sq: i64) -> i32 {
    debug_assert!(radius_sq > 0);
    let mut p = 0;
    while 4i64.pow(p as u32 + 1) <= radius_sq {
        p += 1;
    }
    p
}

fn smooth_step(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = g(2.0 - r);
    a / (a + g(r - 1.0))
}

/// Weight of block `p` at mode radius `r ≥ 1` for the smooth profile.
fn smooth_weight(p: i32, r: f64) -> f64 {
    let lo = smooth_step(r / 2f64.powi(p - 1));
    smooth_step(r / 2f64.powi(p)) - lo
}

pub fn decompose(f: &SpectralField) -> DyadicDecomposition {
    decompose_with(f, Cutoff::Sharp)
}

pub fn decompose_with(f: &SpectralField, cutoff: Cutoff) -> DyadicDecomposition {
    let grid = f.grid;
    let max_r2 = (grid.dim as i64) * (grid.n as i64 / 2).pow(2);
    let p_max = match cutoff {
        Cutoff::Sharp => sharp_block_index(max_r2),
        Cutoff::Smooth => ((max_r2 as f64).sqrt().log2().ceil()) as i32,
    };
    let p_min = 0;
    let mut blocks: Vec<(i32, SpectralField)> = (p_min..=p_max)
        .map(|p| (p, SpectralField::zeros(grid, f.ncomp())))
        .collect();
    for i in 1..grid.len() {
        let r2 = grid.mode_radius_sq(i);
        match cutoff {
            Cutoff::Sharp => {
                let p = sharp_block_index(r2);
                let b = &mut blocks[(p - p_min) as usize].1;
                for (c, comp) in f.components.iter().enumerate() {
                    b.components[c][i] = comp[i];
                }
            }
            Cutoff::Smooth => {
                let r = (r2 as f64).sqrt();
                for (p, b) in blocks.iter_mut() {
                    let w = smooth_weight(*p, r);
                    if w != 0.0 {
                        for (c, comp) in f.components.iter().enumerate() {
                            b.components[c][i] = comp[i] * w;
                        }
                    }
                }
            }
        }
    }
    DyadicDecomposition {
        source: f.clone(),
        blocks,
        p_min,
        p_max,
        cutoff,
    }
}

impl DyadicDecomposition {
    pub fn block(&self, p: i32) -> Option<&SpectralField> {
        if p < self.p_min || p > self.p_max {
            None
        } else {
            Some(&self.blocks[(p - self.p_min) as usize].1)
        }
    }

    /// `S_p u = Σ_{q<p} Δ_q u`.
    pub fn partial_sum(&self, p: i32) -> SpectralField {
        let mut out = SpectralField::zeros(self.source.grid, self.source.ncomp());
        for (q, b) in &self.blocks {
            if *q < p {
                out.add_assign_scaled(1.0, b);
            }
        }
        out
    }

    /// `Σ_p (2^p·2π/L)^{2σ} ‖Δ_p u‖²_{L²}`, square-rooted.
    pub fn lp_sobolev_norm(&self, sigma: f64) -> f64 {
        let k0 = self.source.grid.fundamental();
        self.blocks
            .iter()
            .map(|(p, b)| (2f64.powi(*p) * k0).powf(2.0 * sigma) * b.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn besov_norm(&self, s: f64, p: NormIndex, r: NormIndex) -> Result<f64> {
        let block_norm = |b: &SpectralField| -> f64 {
            match p {
                NormIndex::Finite(2) => b.l2_norm(),
                NormIndex::Finite(q) => b.to_physical().lp_norm(q as f64),
                NormIndex::Infinity => b.to_physical().max_abs(),
            }
        };
        match p {
            NormIndex::Finite(2 | 3 | 4 | 6) | NormIndex::Infinity => {}
            _ => {
                return Err(HnsError::UnsupportedNorm(format!(
                    "Besov integrability index {p:?}"
                )))
            }
        }
        match r {
            NormIndex::Finite(1 | 2) | NormIndex::Infinity => {}
            _ => {
                return Err(HnsError::UnsupportedNorm(format!(
                    "Besov summability index {r:?}"
                )))
            }
        }
        let k0 = self.source.grid.fundamental();
        let terms = self
            .blocks
            .iter()
            .map(|(j, b)| (2f64.powi(*j) * k0).powf(s) * block_norm(b));
        Ok(match r {
            NormIndex::Infinity => terms.fold(0.0, f64::max),
            NormIndex::Finite(1) => terms.sum(),
            NormIndex::Finite(q) => {
                let q = q as f64;
                terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
            }
        })
    }

    /// Reconstruction `Σ_p Δ_p u`.
    pub fn reconstruct(&self) -> SpectralField {
        self.partial_sum(self.p_max + 1)
    }
}

/// Lebesgue or summability exponent of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormIndex {
    Finite(u32),
    Infinity,
}

pub fn partial_sum(d: &DyadicDecomposition, p: i32) -> SpectralField {
    d.partial_sum(p)
}

pub fn lp_sobolev_norm(d: &DyadicDecomposition, sigma: f64) -> f64 {
    d.lp_sobolev_norm(sigma)
}

pub fn besov_norm(d: &DyadicDecomposition, s: f64, p: NormIndex, r: NormIndex) -> Result<f64> {
    d.besov_norm(s, p, r)
}

fn mean_field(f: &SpectralField) -> Vec<f64> {
    f.components.iter().map(|c| c[0].re).collect()
}

fn accumulate(acc: &mut PhysicalField, a: &PhysicalField, b: &PhysicalField) {
    let na = a.ncomp();
    let nb = b.ncomp();
    for (c, out) in acc.samples.iter_mut().enumerate() {
        let x = &a.samples[if na == 1 { 0 } else { c }];
        let y = &b.samples[if nb == 1 { 0 } else { c }];
        for ((o, s), t) in out.iter_mut().zip(x).zip(y) {
            *o += s * t;
        }
    }
}

/// Split `uv` into `(Σ_p Δ_p u·S_{p+1} v, Σ_q Δ_q v·S_q u)`.
///
/// Means are separated first; the cross terms with means are added to the first half.
/// Both halves are dealiased, so their sum is the dealiased pseudo-spectral product.
pub fn paraproduct_split(
    u: &SpectralField,
    v: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    u.check_grid(v)?;
    let grid = u.grid;
    let ncomp = u.ncomp().max(v.ncomp());
    if u.ncomp() != v.ncomp() && u.ncomp() != 1 && v.ncomp() != 1 {
        return Err(HnsError::RejectedInput(format!(
            "cannot multiply fields with {} and {} components",
            u.ncomp(),
            v.ncomp()
        )));
    }
    let du = decompose(&u.without_mean());
    let dv = decompose(&v.without_mean());
    let mut h1 = PhysicalField::zeros(grid, ncomp);
    let mut h2 = PhysicalField::zeros(grid, ncomp);
    for (p, b) in &du.blocks {
        if b.max_abs_coeff() == 0.0 {
            continue;
        }
        accumulate(
            &mut h1,
            &b.to_physical(),
            &dv.partial_sum(p + 1).to_physical(),
        );
    }
    for (q, b) in &dv.blocks {
        if b.max_abs_coeff() == 0.0 {
            continue;
        }
        accumulate(&mut h2, &b.to_physical(), &du.partial_sum(*q).to_physical());
    }
    let (mu, mv) = (mean_field(u), mean_field(v));
    let (pu, pv) = (du.source.to_physical(), dv.source.to_physical());
    for (c, out) in h1.samples.iter_mut().enumerate() {
        let a = mu[if mu.len() == 1 { 0 } else { c }];
        let b = mv[if mv.len() == 1 { 0 } else { c }];
        let x = &pu.samples[if pu.ncomp() == 1 { 0 } else { c }];
        let y = &pv.samples[if pv.ncomp() == 1 { 0 } else { c }];
        for ((o, s), t) in out.iter_mut().zip(x).zip(y) {
            *o += a * b + a * t + b * s;
        }
    }
    let mut h1 = dealias(&to_spectral(&h1)?);
    let mut h2 = dealias(&to_spectral(&h2)?);
    for h in [&mut h1, &mut h2] {
        for c in h.components.iter_mut() {
            c[0] = Complex64::new(c[0].re, 0.0);
        }
    }
    Ok((h1, h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sampling::random_field;
    use crate::spectral::{pointwise_product, sobolev_norm, GridSpec};
    use proptest::prelude::*;

    fn single_mode(grid: GridSpec, m: [i64; 3], amp: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid, 1);
        let mut idx = [0usize; 3];
        for a in 0..grid.dim {
            idx[a] = grid.mode_to_index(m[a]);
        }
        let i = grid.flatten(idx);
        f.components[0][i] = Complex64::new(amp, 0.0);
        f.components[0][grid.mirror(i)] = Complex64::new(amp, 0.0);
        f
    }

    #[test]
    fn block_indices() {
        assert_eq!(sharp_block_index(1), 0);
        assert_eq!(sharp_block_index(3), 0);
        assert_eq!(sharp_block_index(4), 1);
        assert_eq!(sharp_block_index(15), 1);
        assert_eq!(sharp_block_index(16), 2);
    }

    #[test]
    fn one_annulus_for_one_mode() {
        let grid = GridSpec::periodic(2, 16).unwrap();
        // |m| = sqrt(2) ≈ 1.41 lies in [1, 2)
        let d = decompose(&single_mode(grid, [1, 1, 0], 1.0));
        let nonzero: Vec<i32> = d
            .blocks
            .iter()
            .filter(|(_, b)| b.max_abs_coeff() > 0.0)
            .map(|(p, _)| *p)
            .collect();
        assert_eq!(nonzero, vec![0]);
        let z = decompose(&SpectralField::zeros(grid, 2));
        assert!(z.blocks.iter().all(|(_, b)| b.max_abs_coeff() == 0.0));
    }

    #[test]
    fn partial_sum_edges_and_filter_oracle() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let mut f = random_field(grid, 2, 2, 0.5);
        f.components[0][0] = Complex64::new(3.0, 0.0);
        let d = decompose(&f);
        assert_eq!(d.partial_sum(d.p_min).max_abs_coeff(), 0.0);
        assert_eq!(d.partial_sum(d.p_max + 1), f.without_mean());
        let p = 3;
        let direct = f.without_mean().apply_multiplier(|i| {
            let r2 = grid.mode_radius_sq(i);
            if r2 > 0 && r2 < 4i64.pow(p as u32) {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(d.partial_sum(p), direct);
    }

    #[test]
    fn single_mode_norm_bracket_at_annulus_edge() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        for m in [[4, 0, 0], [7, 0, 0], [5, 5, 0]] {
            let d = decompose(&single_mode(grid, m, 1.0));
            for sigma in [-1.0, 0.5, 1.0, 1.5] {
                let ratio = d.lp_sobolev_norm(sigma) / sobolev_norm(&d.source, sigma);
                let b = 2f64.powf(sigma.abs());
                assert!(ratio >= 1.0 / b - 1e-12 && ratio <= b + 1e-12);
            }
        }
        let d = decompose(&single_mode(grid, [4, 0, 0], 1.0));
        assert!((d.lp_sobolev_norm(1.0) - sobolev_norm(&d.source, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn besov_norms() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let d = decompose(&random_field(grid, 2, 6, 1.0));
        let two = NormIndex::Finite(2);
        assert_eq!(d.besov_norm(0.7, two, two).unwrap(), d.lp_sobolev_norm(0.7));
        let b1 = d.besov_norm(1.0, two, NormIndex::Finite(1)).unwrap();
        let b2 = d.besov_norm(1.0, two, two).unwrap();
        assert!(b1 >= b2);
        let binf = d.besov_norm(1.0, two, NormIndex::Infinity).unwrap();
        assert!(binf <= b2);
        assert!(d.besov_norm(1.0, NormIndex::Finite(4), two).unwrap() > 0.0);
        assert!(matches!(
            d.besov_norm(1.0, NormIndex::Finite(5), two),
            Err(HnsError::UnsupportedNorm(_))
        ));
        assert!(matches!(
            d.besov_norm(1.0, two, NormIndex::Finite(3)),
            Err(HnsError::UnsupportedNorm(_))
        ));
        let z = decompose(&SpectralField::zeros(grid, 1));
        assert_eq!(
            z.besov_norm(1.0, NormIndex::Infinity, NormIndex::Finite(1))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn smooth_cutoff_reconstructs() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let f = random_field(grid, 2, 12, 1.0);
        let d = decompose_with(&f, Cutoff::Smooth);
        assert!(d.reconstruct().max_abs_diff(&f) <= 1e-14 * f.max_abs_coeff());
        let ratio = d.lp_sobolev_norm(1.0) / sobolev_norm(&f, 1.0);
        assert!(ratio > 0.25 && ratio < 4.0);
    }

    #[test]
    fn paraproduct_bookkeeping() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let u = random_field(grid, 1, 1, 1.0);
        let (a, b) = paraproduct_split(&u, &SpectralField::zeros(grid, 1)).unwrap();
        assert_eq!(a.max_abs_coeff(), 0.0);
        assert_eq!(b.max_abs_coeff(), 0.0);

        let hi = single_mode(grid, [9, 0, 0], 1.0);
        let lo = single_mode(grid, [0, 1, 0], 1.0);
        let (a, b) = paraproduct_split(&hi, &lo).unwrap();
        let full = pointwise_product(&hi, &lo).unwrap();
        assert!(a.max_abs_diff(&full) < 1e-14);
        assert!(b.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn paraproduct_handles_means_and_vectors() {
        let grid = GridSpec::periodic(2, 32).unwrap();
        let mut u = random_field(grid, 2, 3, 1.0);
        let mut v = random_field(grid, 1, 4, 1.0);
        u.components[1][0] = Complex64::new(0.7, 0.0);
        v.components[0][0] = Complex64::new(-1.2, 0.0);
        let (a, b) = paraproduct_split(&u, &v).unwrap();
        let full = pointwise_product(&u, &v).unwrap();
        assert!(a.add(&b).max_abs_diff(&full) <= 1e-12 * full.max_abs_coeff());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn reconstruction_and_orthogonality(seed in any::<u64>(), dim in 2usize..=3) {
            let grid = GridSpec::periodic(dim, if dim == 2 { 32 } else { 16 }).unwrap();
            let mut f = random_field(grid, dim, seed, 0.8);
            f.components[0][0] = Complex64::new(1.5, 0.0);
            let d = decompose(&f);
            let target = f.without_mean();
            prop_assert!(d.reconstruct().max_abs_diff(&target) <= 1e-12 * target.max_abs_coeff());
            let sum: f64 = d.blocks.iter().map(|(_, b)| b.l2_norm().powi(2)).sum();
            let total = target.l2_norm().powi(2);
            prop_assert!((sum - total).abs() <= 1e-12 * total);
            for (i, (_, a)) in d.blocks.iter().enumerate() {
                for (_, b) in d.blocks.iter().skip(i + 1) {
                    prop_assert!(a.inner(b).abs() <= 1e-12 * total);
                }
            }
        }
    }
}
