//! Multi-dimensional complex FFT over the flat row-major layout.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::GridSpec;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized transform along every axis.
pub(crate) fn fft_nd(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let dim = grid.dim;
    debug_assert_eq!(data.len(), grid.len());
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });

    // last axis: contiguous lines
    fft.process(data);

    let mut buf: Vec<Complex64> = Vec::new();
    for axis in 0..dim - 1 {
        let inner = n.pow((dim - 1 - axis) as u32);
        let outer = data.len() / (n * inner);
        buf.resize(n * inner, Complex64::default());
        for o in 0..outer {
            let base = o * n * inner;
            for j in 0..n {
                let row = &data[base + j * inner..base + (j + 1) * inner];
                for (i, v) in row.iter().enumerate() {
                    buf[i * n + j] = *v;
                }
            }
            fft.process(&mut buf);
            for j in 0..n {
                let row = &mut data[base + j * inner..base + (j + 1) * inner];
                for (i, v) in row.iter_mut().enumerate() {
                    *v = buf[i * n + j];
                }
            }
        }
    }
}

/// Forward transform of real samples, normalized so coefficients are mode amplitudes.
pub(crate) fn forward_real(grid: &GridSpec, samples: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(grid, &mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
    data
}

/// Inverse transform returning the real part of the synthesized samples.
pub(crate) fn inverse_real(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    fft_nd(grid, &mut data, true);
    data.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(grid: &GridSpec, samples: &[f64]) -> Vec<Complex64> {
        let n = grid.n as f64;
        let len = grid.len();
        (0..len)
            .map(|kf| {
                let km = grid.unflatten(kf);
                let mut acc = Complex64::default();
                for (xf, &s) in samples.iter().enumerate() {
                    let xi = grid.unflatten(xf);
                    let phase: f64 = (0..grid.dim).map(|a| (km[a] * xi[a]) as f64).sum::<f64>();
                    acc += s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase / n);
                }
                acc / len as f64
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_2d_and_3d() {
        for dim in [2, 3] {
            let grid = GridSpec::periodic(dim, 8).unwrap();
            let samples: Vec<f64> = (0..grid.len())
                .map(|i| ((i * 37 + 11) % 17) as f64 - 8.0)
                .collect();
            let fast = forward_real(&grid, &samples);
            let slow = naive_dft(&grid, &samples);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
            let back = inverse_real(&grid, &fast);
            for (a, b) in back.iter().zip(samples.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
