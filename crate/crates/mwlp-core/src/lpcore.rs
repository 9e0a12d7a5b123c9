//! Admissible test-function systems and FFT-based Littlewood-Paley analysis
//! on the unit torus.
//!
//! The working representation of the homogeneous quotient is the set of
//! mean-zero grid functions: on the torus, polynomials reduce to constants,
//! and the zero frequency is annihilated by every homogeneous operator here.
//! Homogeneous scale sums are truncated to `j in [1, J-1]`; band-limited
//! inputs make the truncation exact.
//!
//! Windows are evaluated at the angular frequency `xi = 2 pi k` of the
//! lattice exponential `e^{2 pi i k.x}`, so the scale-`j` annulus
//! `1/2 <= |xi|/2^j <= 2` sits strictly inside the Nyquist band of the
//! level-`j` cube lattice (`2 < pi`). Level-`j` analysis coefficients are
//! then exact samples of the band-limited convolution at the true cube
//! corners `2^{-j} k`, obtained by folding the spectrum modulo `2^j`
//! (trigonometric interpolation), and the per-scale sampling is injective
//! on each window's support: the analysis/synthesis round trip is exact to
//! rounding, with no snapping anywhere.

use crate::coeffs::CoeffSequence;
use crate::dyadic::{DyadicCube, ScaleRange};
use crate::error::{CoreError, Result};
use crate::fft::bin_to_freq;
use crate::grid::GridFunction;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// The smooth transition bump `theta(t) = t^4 (35 - 84 t + 70 t^2 - 20 t^3)`
/// rising from 0 to 1 on `[0, 1]`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

/// `|phi_hat|^2` profile: supported on `[1/2, 2]`, rising on `[1/2, 1]`,
/// falling on `[1, 2]`, with `sum_j b(2^{-j} t) = 1` for `t != 0` by
/// construction (`b(2t) = 1 - b(t)` on the overlap).
pub fn window_sq(t: f64) -> f64 {
    if t <= 0.5 || t >= 2.0 {
        0.0
    } else if t <= 1.0 {
        smooth_step(2.0 * t - 1.0)
    } else {
        1.0 - smooth_step(t - 1.0)
    }
}

/// Radial profile `phi_hat(t) = sqrt(window_sq(t))`.
pub fn phi_hat(t: f64) -> f64 {
    window_sq(t).sqrt()
}

/// Low-pass profile `Phi_hat(t) = (1 - sum_{j>=1} window_sq(2^{-j} t))^{1/2}`:
/// equals 1 for `t <= 1`, vanishes for `t >= 2`; only the `j = 1` term is
/// active on the transition band.
pub fn phi0_hat(t: f64) -> f64 {
    if t >= 2.0 {
        0.0
    } else {
        (1.0 - window_sq(0.5 * t)).max(0.0).sqrt()
    }
}

/// Largest lattice frequency magnitude whose full dyadic window stack lies
/// inside the usable scale range `[1, J-1]`: `2^J / (4 pi)`. Frequencies
/// `1 <= |k|` up to this limit satisfy the exact truncated partition.
pub fn covered_band_limit(grid_j: u32) -> f64 {
    (2.0f64).powi(grid_j as i32) / (4.0 * PI)
}

/// Which convolution window to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Band-pass analysis window at a scale `j >= 1`.
    Phi,
    /// Band-pass synthesis window; identical to `Phi` for this system.
    Psi,
    /// Low-pass window at level 0 (inhomogeneous analysis).
    CapPhi,
    /// Low-pass synthesis window; identical to `CapPhi`.
    CapPsi,
}

/// A Meyer-type admissible system tabulated on the frequency lattice of a
/// `2^J` grid. The usable band-pass scales are `j in [1, J-1]`; the
/// partition `sum_j phi_hat_j^2 = 1` is exact on lattice frequencies `|k|`
/// in `[2, 2^{J-1}]`, and the inhomogeneous partition
/// `CapPhi^2 + sum_{j>=1} phi_hat_j^2 = 1` is exact at every lattice
/// frequency.
#[derive(Debug, Clone)]
pub struct AdmissibleSystem {
    dim: usize,
    grid_j: u32,
    /// Per usable level (index 0 is `j = 1`): the band-pass multiplier per
    /// frequency cell in DFT bin order.
    band: Vec<Vec<f64>>,
    /// The level-0 low-pass multiplier.
    lowpass: Vec<f64>,
    /// Reported lower bound of `|phi_hat|` on `[3/5, 5/3]`.
    pub annulus_lower_bound: f64,
}

impl AdmissibleSystem {
    /// Builds the system for grids of `2^J` cells per dimension; `J >= 4`.
    pub fn build(dim: usize, grid_j: u32) -> Self {
        assert!(grid_j >= 4, "need J >= 4");
        assert!(dim == 1 || dim == 2);
        let n = 1usize << grid_j;
        let cells = n.pow(dim as u32);
        let mut freq = [0i64; 2];
        let radius = |cell: usize, freq: &mut [i64; 2]| -> f64 {
            match dim {
                1 => {
                    freq[0] = bin_to_freq(cell, n);
                    freq[0].abs() as f64
                }
                _ => {
                    freq[0] = bin_to_freq(cell / n, n);
                    freq[1] = bin_to_freq(cell % n, n);
                    ((freq[0] * freq[0] + freq[1] * freq[1]) as f64).sqrt()
                }
            }
        };
        let jmax = grid_j as i32 - 1;
        let mut band = Vec::with_capacity(jmax as usize);
        for j in 1..=jmax {
            let scale = 2.0 * PI * (2.0f64).powi(-j);
            let mut table = vec![0.0f64; cells];
            for (cell, slot) in table.iter_mut().enumerate() {
                *slot = phi_hat(radius(cell, &mut freq) * scale);
            }
            band.push(table);
        }
        let mut lowpass = vec![0.0f64; cells];
        for (cell, slot) in lowpass.iter_mut().enumerate() {
            *slot = phi0_hat(radius(cell, &mut freq) * 2.0 * PI);
        }
        // Lower bound of the profile on the annulus [3/5, 5/3].
        let samples = 4096;
        let mut lb = f64::MAX;
        for i in 0..=samples {
            let t = 0.6 + (5.0 / 3.0 - 0.6) * i as f64 / samples as f64;
            lb = lb.min(phi_hat(t));
        }
        AdmissibleSystem {
            dim,
            grid_j,
            band,
            lowpass,
            annulus_lower_bound: lb,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_j(&self) -> u32 {
        self.grid_j
    }

    /// Usable band-pass scale range `[1, J-1]`.
    pub fn band_range(&self) -> ScaleRange {
        ScaleRange::homogeneous(1, self.grid_j as i32 - 1)
    }

    /// Largest lattice frequency magnitude fully covered by the truncated
    /// homogeneous partition; see [`covered_band_limit`].
    pub fn covered_band(&self) -> f64 {
        covered_band_limit(self.grid_j)
    }

    /// The multiplier table for a window at scale `j`.
    pub fn multiplier(&self, j: i32, window: Window) -> Result<&[f64]> {
        match window {
            Window::Phi | Window::Psi => {
                if j < 1 || j > self.grid_j as i32 - 1 {
                    return Err(CoreError::ScaleOutOfRange {
                        j,
                        jmin: 1,
                        jmax: self.grid_j as i32 - 1,
                    });
                }
                Ok(&self.band[(j - 1) as usize])
            }
            Window::CapPhi | Window::CapPsi => {
                if j != 0 {
                    return Err(CoreError::ScaleOutOfRange { j, jmin: 0, jmax: 0 });
                }
                Ok(&self.lowpass)
            }
        }
    }

    /// Largest residual of the homogeneous partition
    /// `|sum_j phi_hat_j^2 - 1|` over nonzero lattice frequencies in the
    /// covered band `2 <= |k| <= 2^{J-1}`.
    pub fn partition_residual(&self) -> f64 {
        let n = 1usize << self.grid_j;
        let cells = n.pow(self.dim as u32);
        let mut freq = [0i64; 2];
        let mut worst = 0.0f64;
        for cell in 0..cells {
            let r = match self.dim {
                1 => {
                    freq[0] = bin_to_freq(cell, n);
                    freq[0].abs() as f64
                }
                _ => {
                    freq[0] = bin_to_freq(cell / n, n);
                    freq[1] = bin_to_freq(cell % n, n);
                    ((freq[0] * freq[0] + freq[1] * freq[1]) as f64).sqrt()
                }
            };
            if r < 1.0 || r > covered_band_limit(self.grid_j) {
                continue;
            }
            let total: f64 = self.band.iter().map(|t| t[cell] * t[cell]).sum();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    /// Largest residual of the inhomogeneous partition
    /// `|CapPhi^2 + sum_{j >= 1} phi_hat_j^2 - 1|` over all lattice
    /// frequencies up to the covered band edge.
    pub fn inhomogeneous_partition_residual(&self) -> f64 {
        let n = 1usize << self.grid_j;
        let cells = n.pow(self.dim as u32);
        let mut freq = [0i64; 2];
        let mut worst = 0.0f64;
        for cell in 0..cells {
            let r = match self.dim {
                1 => {
                    freq[0] = bin_to_freq(cell, n);
                    freq[0].abs() as f64
                }
                _ => {
                    freq[0] = bin_to_freq(cell / n, n);
                    freq[1] = bin_to_freq(cell % n, n);
                    ((freq[0] * freq[0] + freq[1] * freq[1]) as f64).sqrt()
                }
            };
            if r > covered_band_limit(self.grid_j) {
                continue;
            }
            let total: f64 = self.lowpass[cell] * self.lowpass[cell]
                + self.band.iter().map(|t| t[cell] * t[cell]).sum::<f64>();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }
}

/// Applies a real frequency multiplier table componentwise.
fn apply_table(f: &GridFunction, table: &[f64]) -> GridFunction {
    let mut coeffs = f.fourier_coeffs();
    let m = f.components();
    for (cell, &mult) in table.iter().enumerate() {
        for c in 0..m {
            coeffs[cell * m + c] *= mult;
        }
    }
    GridFunction::from_fourier_coeffs(f.dim(), f.grid_j(), m, &coeffs)
}

/// The Littlewood-Paley piece `phi_j * f` (or the level-0 low-pass piece),
/// exact on the lattice.
pub fn lp_convolve(
    f: &GridFunction,
    sys: &AdmissibleSystem,
    j: i32,
    window: Window,
) -> Result<GridFunction> {
    assert_eq!(f.dim(), sys.dim());
    assert_eq!(f.grid_j(), sys.grid_j());
    Ok(apply_table(f, sys.multiplier(j, window)?))
}

/// Folds full-lattice Fourier coefficients modulo `2^j` per dimension and
/// returns the coarse-level samples via an M-point inverse DFT: the exact
/// values of the band-limited function at the `2^{jn}` cube corners.
pub(crate) fn fold_and_sample(
    coeffs: &[Complex64],
    dim: usize,
    grid_n: usize,
    m: usize,
    level: i32,
) -> Vec<Complex64> {
    let coarse = 1usize << level;
    let coarse_cells = coarse.pow(dim as u32);
    let mut folded = vec![Complex64::default(); coarse_cells * m];
    let cells = grid_n.pow(dim as u32);
    for cell in 0..cells {
        let target = match dim {
            1 => {
                let k = bin_to_freq(cell, grid_n);
                k.rem_euclid(coarse as i64) as usize
            }
            _ => {
                let k1 = bin_to_freq(cell / grid_n, grid_n).rem_euclid(coarse as i64) as usize;
                let k2 = bin_to_freq(cell % grid_n, grid_n).rem_euclid(coarse as i64) as usize;
                k1 * coarse + k2
            }
        };
        for c in 0..m {
            folded[target * m + c] += coeffs[cell * m + c];
        }
    }
    // M-point inverse DFT per dimension (unnormalized), componentwise.
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_inverse(coarse);
    let mut scratch = vec![Complex64::default(); coarse];
    match dim {
        1 => {
            for c in 0..m {
                for i in 0..coarse {
                    scratch[i] = folded[i * m + c];
                }
                plan.process(&mut scratch);
                for i in 0..coarse {
                    folded[i * m + c] = scratch[i];
                }
            }
        }
        _ => {
            for c in 0..m {
                let mut plane: Vec<Complex64> =
                    (0..coarse_cells).map(|i| folded[i * m + c]).collect();
                for row in plane.chunks_exact_mut(coarse) {
                    plan.process(row);
                }
                transpose(&mut plane, coarse);
                for row in plane.chunks_exact_mut(coarse) {
                    plan.process(row);
                }
                transpose(&mut plane, coarse);
                for i in 0..coarse_cells {
                    folded[i * m + c] = plane[i];
                }
            }
        }
    }
    folded
}

pub(crate) fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Analysis coefficients `s_Q = |Q|^{1/2} (phi~_j * f)(x_Q)` for all torus
/// cubes in `range`. Homogeneous ranges use band-pass windows everywhere;
/// inhomogeneous ranges (starting at level 0) use the low-pass window for
/// the level-0 cube.
pub fn phi_coeffs(
    f: &GridFunction,
    sys: &AdmissibleSystem,
    range: &ScaleRange,
) -> Result<CoeffSequence> {
    assert_eq!(f.dim(), sys.dim());
    let band = sys.band_range();
    let jmin_ok = if range.homogeneous { band.jmin } else { 0 };
    if range.jmin < jmin_ok || range.jmax > band.jmax {
        return Err(CoreError::ScaleOutOfRange {
            j: range.jmax,
            jmin: jmin_ok,
            jmax: band.jmax,
        });
    }
    let m = f.components();
    let n = f.samples_per_dim();
    let coeffs = f.fourier_coeffs();
    let mut out = CoeffSequence::new(f.dim(), m);
    let cells = f.num_cells();
    let mut filtered = vec![Complex64::default(); cells * m];
    for j in range.levels() {
        let window = if j == 0 { Window::CapPhi } else { Window::Phi };
        let table = sys.multiplier(j, window)?;
        for (cell, &mult) in table.iter().enumerate() {
            for c in 0..m {
                // phi~ has conjugate profile; profiles here are real.
                filtered[cell * m + c] = coeffs[cell * m + c] * mult;
            }
        }
        let mut level = fold_and_sample(&filtered, f.dim(), n, m, j);
        let norm = (2.0f64).powf(-(j as f64) * f.dim() as f64 / 2.0);
        level.iter_mut().for_each(|v| *v *= norm);
        out.insert_level(j, level);
    }
    Ok(out)
}

/// Synthesis `sum_Q s_Q psi_Q` evaluated on the lattice, accumulating each
/// scale in the frequency domain with exact corner phases.
pub fn synthesize(s: &CoeffSequence, sys: &AdmissibleSystem) -> Result<GridFunction> {
    let dim = s.dim();
    let m = s.components();
    let n = 1usize << sys.grid_j();
    let cells = n.pow(dim as u32);
    let mut acc = vec![Complex64::default(); cells * m];
    let mut planner = FftPlanner::new();
    for j in s.levels().collect::<Vec<_>>() {
        let window = if j == 0 { Window::CapPsi } else { Window::Psi };
        let table = sys.multiplier(j, window)?;
        let coarse = 1usize << j;
        let coarse_cells = coarse.pow(dim as u32);
        // Forward M-point DFT of the coefficient array per component.
        let data = s.level(j)?;
        let mut spec = vec![Complex64::default(); coarse_cells * m];
        let plan = planner.plan_fft_forward(coarse);
        let mut scratch = vec![Complex64::default(); coarse];
        for c in 0..m {
            match dim {
                1 => {
                    for i in 0..coarse {
                        scratch[i] = data[i * m + c];
                    }
                    plan.process(&mut scratch);
                    for i in 0..coarse {
                        spec[i * m + c] = scratch[i];
                    }
                }
                _ => {
                    let mut plane: Vec<Complex64> =
                        (0..coarse_cells).map(|i| data[i * m + c]).collect();
                    for row in plane.chunks_exact_mut(coarse) {
                        plan.process(row);
                    }
                    transpose(&mut plane, coarse);
                    for row in plane.chunks_exact_mut(coarse) {
                        plan.process(row);
                    }
                    transpose(&mut plane, coarse);
                    for (i, v) in plane.into_iter().enumerate() {
                        spec[i * m + c] = v;
                    }
                }
            }
        }
        let norm = (2.0f64).powf(-(j as f64) * dim as f64 / 2.0);
        for cell in 0..cells {
            let mult = table[cell];
            if mult == 0.0 {
                continue;
            }
            let src = match dim {
                1 => bin_to_freq(cell, n).rem_euclid(coarse as i64) as usize,
                _ => {
                    let k1 = bin_to_freq(cell / n, n).rem_euclid(coarse as i64) as usize;
                    let k2 = bin_to_freq(cell % n, n).rem_euclid(coarse as i64) as usize;
                    k1 * coarse + k2
                }
            };
            for c in 0..m {
                acc[cell * m + c] += spec[src * m + c] * (mult * norm);
            }
        }
    }
    Ok(GridFunction::from_fourier_coeffs(dim, sys.grid_j() as u32, m, &acc))
}

/// Riesz potential: multiplies the coefficient at lattice frequency `k` by
/// `|2 pi k|^{-beta}` and annihilates the zero mode.
pub fn riesz(f: &GridFunction, beta: f64) -> GridFunction {
    let m = f.components();
    let n = f.samples_per_dim();
    let mut coeffs = f.fourier_coeffs();
    let mut freq = [0i64; 2];
    for cell in 0..f.num_cells() {
        f.freq_of_cell(cell, &mut freq);
        let r2: i64 = freq[..f.dim()].iter().map(|k| k * k).sum();
        let mult = if r2 == 0 {
            0.0
        } else {
            (2.0 * PI * (r2 as f64).sqrt()).powf(-beta)
        };
        for c in 0..m {
            coeffs[cell * m + c] *= mult;
        }
    }
    let _ = n;
    GridFunction::from_fourier_coeffs(f.dim(), f.grid_j(), m, &coeffs)
}

/// Spectral partial derivative `D^beta` with multiplier
/// `prod_l (2 pi i k_l)^{beta_l}`.
pub fn derivative(f: &GridFunction, multi_index: &[u32]) -> GridFunction {
    assert_eq!(multi_index.len(), f.dim());
    if multi_index.iter().all(|&b| b == 0) {
        return f.clone();
    }
    let m = f.components();
    let mut coeffs = f.fourier_coeffs();
    let mut freq = [0i64; 2];
    for cell in 0..f.num_cells() {
        f.freq_of_cell(cell, &mut freq);
        let mut mult = Complex64::new(1.0, 0.0);
        for (l, &b) in multi_index.iter().enumerate() {
            let factor = Complex64::new(0.0, 2.0 * PI * freq[l] as f64);
            for _ in 0..b {
                mult *= factor;
            }
        }
        for c in 0..m {
            coeffs[cell * m + c] *= mult;
        }
    }
    GridFunction::from_fourier_coeffs(f.dim(), f.grid_j(), m, &coeffs)
}

/// Report of the vector-kernel size estimate: the fitted constant
/// `C = max |x|^n (sum_j |phi_j(x)|^2)^{1/2}` over the probe points.
#[derive(Debug, Clone)]
pub struct KernelSizeReport {
    pub c_phi: f64,
    /// `(|x|, |x|^n |K(x)|)` per probe point, ascending radius.
    pub profile: Vec<(f64, f64)>,
}

/// Evaluates the physical-space kernel column norm over the given scale
/// range at the probe cells. Probe cells closer to the origin than one grid
/// spacing are rejected.
pub fn kernel_size_check(
    sys: &AdmissibleSystem,
    range: &ScaleRange,
    probe_cells: &[usize],
) -> Result<KernelSizeReport> {
    let dim = sys.dim();
    let grid_j = sys.grid_j();
    let n = 1usize << grid_j;
    let h = 1.0 / n as f64;
    // Physical-space phi_j via inverse transform of the window table
    // (delta at the origin filtered by the window).
    let cells = n.pow(dim as u32);
    let mut pieces: Vec<GridFunction> = Vec::new();
    for j in range.levels() {
        let table = sys.multiplier(j, Window::Phi)?;
        let coeffs: Vec<Complex64> = table.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        pieces.push(GridFunction::from_fourier_coeffs(dim, grid_j, 1, &coeffs));
    }
    let mut profile = Vec::with_capacity(probe_cells.len());
    let mut c_phi = 0.0f64;
    let mut coords = [0.0f64; 2];
    for &cell in probe_cells {
        assert!(cell < cells);
        pieces[0].cell_center(cell, &mut coords);
        let r = coords[..dim]
            .iter()
            .map(|&x| {
                let d = x.rem_euclid(1.0);
                let d = d.min(1.0 - d);
                d * d
            })
            .sum::<f64>()
            .sqrt();
        if r < h {
            return Err(CoreError::InvalidArgument(format!(
                "probe cell {cell} is within one grid spacing of the origin"
            )));
        }
        let k: f64 = pieces
            .iter()
            .map(|p| p.values()[cell].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let weighted = r.powi(dim as i32) * k;
        profile.push((r, weighted));
        c_phi = c_phi.max(weighted);
    }
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(KernelSizeReport { c_phi, profile })
}

/// Decay and smoothness parameters `(N, K, M, delta)` of a molecule family.
#[derive(Debug, Clone, Copy)]
pub struct MoleculeParams {
    pub vanish: i32,
    pub smooth: i32,
    pub decay: f64,
    pub delta: f64,
}

/// Fitted constant of the cross-scale convolution bounds: the maximum over
/// molecules, scales, and points of `|phi_j * m_P(x)|` divided by the decay
/// envelope for the appropriate case (`j >= level(P)` or `j <= level(P)`).
pub fn molecule_decay_check(
    sys: &AdmissibleSystem,
    molecules: &[(DyadicCube, GridFunction)],
    params: MoleculeParams,
    range: &ScaleRange,
) -> Result<f64> {
    let dim = sys.dim();
    let mut fitted = 0.0f64;
    let mut coords = [0.0f64; 2];
    for (p_cube, molecule) in molecules {
        assert_eq!(molecule.components(), 1);
        let k_level = p_cube.level;
        let xp = p_cube.lower_corner();
        for j in range.levels() {
            let conv = lp_convolve(molecule, sys, j, Window::Phi)?;
            let scale_factor = (2.0f64).powf(k_level as f64 * dim as f64 / 2.0);
            let (rate, loc_scale) = if j >= k_level {
                (
                    (2.0f64).powf(-((j - k_level) as f64) * (params.smooth as f64 + params.delta)),
                    (2.0f64).powi(k_level),
                )
            } else {
                (
                    (2.0f64).powf(
                        -((k_level - j) as f64) * (params.vanish as f64 + 1.0 + dim as f64),
                    ),
                    (2.0f64).powi(j),
                )
            };
            for cell in 0..conv.num_cells() {
                conv.cell_center(cell, &mut coords);
                let dist = coords[..dim]
                    .iter()
                    .zip(xp.iter())
                    .map(|(&x, &c)| {
                        let d = (x - c).abs().rem_euclid(1.0);
                        let d = d.min(1.0 - d);
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt();
                let envelope =
                    scale_factor * rate * (1.0 + loc_scale * dist).powf(-params.decay);
                let ratio = conv.values()[cell].norm() / envelope;
                fitted = fitted.max(ratio);
            }
        }
    }
    Ok(fitted)
}

/// The synthesis atom `psi_Q` as a grid function (single-coefficient
/// synthesis), used as a molecule family generator and in tests.
pub fn psi_atom(sys: &AdmissibleSystem, q: &DyadicCube) -> Result<GridFunction> {
    let mut s = CoeffSequence::new(sys.dim(), 1);
    let coarse_cells = (1usize << q.level).pow(sys.dim() as u32);
    s.insert_level(q.level, vec![Complex64::default(); coarse_cells]);
    s.set(q, &[Complex64::new(1.0, 0.0)])?;
    synthesize(&s, sys)
}
