//! FFT plumbing for cell-centered periodic grids, wrapping `rustfft`.
//!
//! Samples live at cell centers `x_i = (i + 1/2)/N` of the unit torus, so the
//! true Fourier coefficient of frequency `k` picks up a phase `e^{-i pi k/N}`
//! relative to the plain DFT of the sample array. The helpers here convert
//! between sample arrays and true Fourier coefficients (stored in DFT bin
//! order), hiding that phase.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Maps a DFT bin index to the signed integer frequency in [-N/2, N/2).
#[inline]
pub fn bin_to_freq(bin: usize, n_samples: usize) -> i64 {
    let b = bin as i64;
    let n = n_samples as i64;
    if b < n / 2 {
        b
    } else {
        b - n
    }
}

/// Maps a signed integer frequency to its DFT bin index.
#[inline]
pub fn freq_to_bin(freq: i64, n_samples: usize) -> usize {
    let n = n_samples as i64;
    debug_assert!(freq >= -n / 2 && freq < n - n / 2);
    freq.rem_euclid(n) as usize
}

/// Forward/inverse transforms between cell-center samples and Fourier
/// coefficients for an `N^dim` grid, `dim` in {1, 2}.
pub struct CenteredFft {
    n_samples: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// e^{-i pi k/N} per bin, the analysis-side cell-center phase.
    phase_fwd: Vec<Complex64>,
    phase_inv: Vec<Complex64>,
}

impl CenteredFft {
    pub fn new(n_samples: usize, dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "only dimensions 1 and 2 are supported");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_samples);
        let inverse = planner.plan_fft_inverse(n_samples);
        let phase_fwd: Vec<Complex64> = (0..n_samples)
            .map(|b| {
                let k = bin_to_freq(b, n_samples) as f64;
                Complex64::from_polar(1.0, -PI * k / n_samples as f64)
            })
            .collect();
        let phase_inv = phase_fwd.iter().map(|z| z.conj()).collect();
        CenteredFft {
            n_samples,
            dim,
            forward,
            inverse,
            phase_fwd,
            phase_inv,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.n_samples.pow(self.dim as u32)
    }

    /// Samples -> Fourier coefficients, in place. Bin order along each axis.
    pub fn coeffs_from_samples(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.apply(data, true);
        let scale = 1.0 / self.len() as f64;
        for (i, v) in data.iter_mut().enumerate() {
            *v *= scale * self.phase_at(i, &self.phase_fwd);
        }
    }

    /// Fourier coefficients -> samples, in place.
    pub fn samples_from_coeffs(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        for (i, v) in data.iter_mut().enumerate() {
            *v *= self.phase_at(i, &self.phase_inv);
        }
        self.apply(data, false);
    }

    #[inline]
    fn phase_at(&self, idx: usize, table: &[Complex64]) -> Complex64 {
        match self.dim {
            1 => table[idx],
            _ => {
                let row = idx / self.n_samples;
                let col = idx % self.n_samples;
                table[row] * table[col]
            }
        }
    }

    fn apply(&self, data: &mut [Complex64], fwd: bool) {
        let plan = if fwd { &self.forward } else { &self.inverse };
        match self.dim {
            1 => plan.process(data),
            _ => {
                let n = self.n_samples;
                // rows
                for row in data.chunks_exact_mut(n) {
                    plan.process(row);
                }
                // columns via transpose, process, transpose back
                transpose_square(data, n);
                for row in data.chunks_exact_mut(n) {
                    plan.process(row);
                }
                transpose_square(data, n);
            }
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_1d() {
        let n = 16;
        let fft = CenteredFft::new(n, 1);
        let k = 3i64;
        let mut data: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x)
            })
            .collect();
        fft.coeffs_from_samples(&mut data);
        for (b, v) in data.iter().enumerate() {
            let expect = if bin_to_freq(b, n) == k { 1.0 } else { 0.0 };
            assert!(
                (v - Complex64::new(expect, 0.0)).norm() < 1e-12,
                "bin {b}: {v}"
            );
        }
    }

    #[test]
    fn round_trip_2d() {
        let n = 8;
        let fft = CenteredFft::new(n, 2);
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i * 7 % 13) as f64, (i * 5 % 11) as f64))
            .collect();
        let orig = data.clone();
        fft.coeffs_from_samples(&mut data);
        fft.samples_from_coeffs(&mut data);
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn single_mode_2d() {
        let n = 8;
        let fft = CenteredFft::new(n, 2);
        let (k1, k2) = (2i64, -3i64);
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| {
                let x1 = ((i / n) as f64 + 0.5) / n as f64;
                let x2 = ((i % n) as f64 + 0.5) / n as f64;
                Complex64::from_polar(1.0, 2.0 * PI * (k1 as f64 * x1 + k2 as f64 * x2))
            })
            .collect();
        fft.coeffs_from_samples(&mut data);
        for (idx, v) in data.iter().enumerate() {
            let f1 = bin_to_freq(idx / n, n);
            let f2 = bin_to_freq(idx % n, n);
            let expect = if (f1, f2) == (k1, k2) { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }
}
