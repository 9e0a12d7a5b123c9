//! Deterministic band-limited inputs for experiments and tests.
//!
//! Functions are sums of lattice exponentials with componentwise standard
//! normal coefficients from a fixed-seed generator. Frequencies are distinct
//! nonzero lattice points with `|k|` at most the covered band of the target
//! system (`2^{band_j}/(4 pi)`), so the truncated homogeneous scale range
//! resolves them exactly and every analysis window stays inside the Nyquist
//! band of its cube lattice.

use crate::grid::GridFunction;
use crate::lpcore::covered_band_limit;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// A band-limited function given by an explicit frequency/coefficient list,
/// renderable on any grid at least as fine as its band.
#[derive(Debug, Clone)]
pub struct BandLimitedSpec {
    pub dim: usize,
    pub components: usize,
    /// Band parameter: frequencies satisfy `|k| <= 2^{band_j}/(4 pi)`.
    pub band_j: u32,
    pub freqs: Vec<[i64; 2]>,
    /// One coefficient vector (length `components`) per frequency.
    pub coeffs: Vec<Vec<Complex64>>,
}

fn norm_of(k: &[i64; 2], dim: usize) -> f64 {
    (k[..dim].iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt()
}

impl BandLimitedSpec {
    /// Draws `count` distinct in-band frequencies with normal coefficients.
    /// `with_dc` adds a zero-frequency term (the result is then not
    /// mean-zero).
    pub fn random(
        dim: usize,
        band_j: u32,
        components: usize,
        count: usize,
        seed: u64,
        with_dc: bool,
    ) -> Self {
        assert!(band_j >= 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_norm = covered_band_limit(band_j);
        let bound = max_norm.floor() as i64;
        let available = match dim {
            1 => 2 * bound as usize,
            _ => (0..=bound)
                .map(|k1| {
                    let reach = (max_norm * max_norm - (k1 * k1) as f64).max(0.0).sqrt() as i64;
                    (2 * reach + 1) as usize
                })
                .sum::<usize>()
                * 2,
        };
        assert!(
            count <= available,
            "asked for {count} frequencies, band holds about {available}"
        );
        let mut freqs: Vec<[i64; 2]> = Vec::new();
        if with_dc {
            freqs.push([0, 0]);
        }
        let mut attempts = 0usize;
        while freqs.len() < count + usize::from(with_dc) {
            attempts += 1;
            assert!(attempts < 1_000_000, "rejection sampling exhausted");
            let mut k = [0i64; 2];
            for slot in k.iter_mut().take(dim) {
                *slot = rng.gen_range(-bound..=bound);
            }
            let r = norm_of(&k, dim);
            if r < 1.0 || r > max_norm || freqs.contains(&k) {
                continue;
            }
            freqs.push(k);
        }
        let coeffs = freqs
            .iter()
            .map(|_| {
                (0..components)
                    .map(|_| {
                        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    })
                    .collect()
            })
            .collect();
        BandLimitedSpec {
            dim,
            components,
            band_j,
            freqs,
            coeffs,
        }
    }

    /// Renders the function on a grid with `grid_j >= band_j`.
    pub fn to_grid(&self, grid_j: u32) -> GridFunction {
        assert!(grid_j >= self.band_j);
        let mut g = GridFunction::zeros(self.dim, grid_j, self.components);
        let m = self.components;
        let cells = g.num_cells();
        let mut coords = [0.0f64; 2];
        for cell in 0..cells {
            g.cell_center(cell, &mut coords);
            for (k, c) in self.freqs.iter().zip(self.coeffs.iter()) {
                let phase: f64 = coords[..self.dim]
                    .iter()
                    .zip(k.iter())
                    .map(|(x, &ki)| 2.0 * PI * ki as f64 * x)
                    .sum();
                let e = Complex64::from_polar(1.0, phase);
                for (ci, &cv) in c.iter().enumerate() {
                    g.values_mut()[cell * m + ci] += cv * e;
                }
            }
        }
        g
    }
}

/// A single lattice exponential `e^{2 pi i k.x} e_1` on an `m`-component
/// grid.
pub fn wave(dim: usize, grid_j: u32, k: &[i64], components: usize) -> GridFunction {
    let m = components;
    GridFunction::from_fn(dim, grid_j, m, |x| {
        let phase: f64 = x
            .iter()
            .zip(k.iter())
            .map(|(xi, &ki)| 2.0 * PI * ki as f64 * xi)
            .sum();
        let mut v = vec![Complex64::default(); m];
        v[0] = Complex64::from_polar(1.0, phase);
        v
    })
}

/// Convenience: a random in-band grid function.
pub fn random_band_limited(
    dim: usize,
    grid_j: u32,
    components: usize,
    count: usize,
    seed: u64,
    with_dc: bool,
) -> GridFunction {
    BandLimitedSpec::random(dim, grid_j, components, count, seed, with_dc).to_grid(grid_j)
}

/// Seeded random coefficient sequence over a scale range, standard normal
/// per component.
pub fn random_sequence(
    dim: usize,
    components: usize,
    range: &crate::dyadic::ScaleRange,
    seed: u64,
) -> crate::coeffs::CoeffSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = crate::coeffs::CoeffSequence::zeros(dim, components, range);
    for j in range.levels() {
        for q in crate::dyadic::torus_cubes(dim, j) {
            let v: Vec<Complex64> = (0..components)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            s.set(&q, &v).expect("cube in range");
        }
    }
    s
}

/// The fixed test family: `count` specs with consecutive seeds, renderable
/// at several grid sizes for refinement comparisons.
pub fn family(
    dim: usize,
    band_j: u32,
    components: usize,
    count: usize,
    seed: u64,
) -> Vec<BandLimitedSpec> {
    (0..count)
        .map(|i| BandLimitedSpec::random(dim, band_j, components, 6, seed + i as u64, false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_functions_are_mean_zero_and_band_limited() {
        let f = random_band_limited(1, 8, 2, 10, 5, false);
        assert!(f.is_mean_zero());
        let coeffs = f.fourier_coeffs();
        let mut freq = [0i64; 2];
        let limit = covered_band_limit(8);
        for cell in 0..f.num_cells() {
            f.freq_of_cell(cell, &mut freq);
            if (freq[0].abs() as f64) > limit {
                for c in 0..2 {
                    assert!(coeffs[cell * 2 + c].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spec_renders_identically_at_two_grids() {
        let spec = BandLimitedSpec::random(1, 6, 1, 3, 9, false);
        let f6 = spec.to_grid(6);
        let f8 = spec.to_grid(8);
        // Both quadratures are exact for trigonometric polynomials.
        assert!((f6.l2_norm() - f8.l2_norm()).abs() < 1e-10 * f6.l2_norm());
    }

    #[test]
    fn determinism() {
        let a = BandLimitedSpec::random(2, 6, 2, 6, 123, true);
        let b = BandLimitedSpec::random(2, 6, 2, 6, 123, true);
        assert_eq!(a.freqs, b.freqs);
        assert_eq!(a.coeffs, b.coeffs);
    }
}
