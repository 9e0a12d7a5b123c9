//! Matrix weight models, sampled weight fields, matrix Muckenhoupt `A_p`
//! constants for both ranges of `p`, doubling exponents, and the averaged
//! integral profiles behind the reverse-Holder estimates.
//!
//! The "sup over all cubes" in the `A_p` condition is approximated by dyadic
//! cubes plus the `2^n` half-shifted dyadic grids at each level; every cube is
//! comparable to a shifted dyadic cube. Essential suprema are taken as maxima
//! over cell centers, which never meet the singular set of the shipped
//! models. Quadrature on a single cube is capped at [`QUAD_CAP_PER_DIM`]
//! strided cells per dimension so that whole-torus cubes stay affordable in
//! two dimensions.

use crate::dyadic::{shift_patterns, torus_cubes, CubeCells, ScaleRange};
use crate::error::{CoreError, Result};
use crate::linalg::{matrix_power, SymMat};
use crate::reducing::ReducingFamily;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub use crate::linalg::PD_EPS;

/// Largest number of quadrature cells per dimension inside one cube integral
/// of the `A_p` double averages; larger cubes are sampled on a uniform
/// stride. The 1-d cap keeps every shipped grid size exact; the 2-d cap
/// bounds the quadratic cell-pair cost of whole-torus cubes.
pub fn quad_cap_per_dim(dim: usize) -> usize {
    if dim == 1 {
        4096
    } else {
        48
    }
}

/// Analytic matrix weight models. All evaluate to real symmetric positive
/// definite matrices away from the singular center, which cell-center grids
/// never sample.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixWeight {
    /// Constant symmetric positive definite matrix.
    Constant(SymMat),
    /// `w(x) = dist(x, x0)^a * I_m` with the torus minimum-image distance.
    ScalarPower { m: usize, a: f64, center: Vec<f64> },
    /// `W(x) = diag(dist(x, x0)^{a_i})`.
    DiagonalPower { a: Vec<f64>, center: Vec<f64> },
    /// `R(theta(x)) diag(dist^{a_i}) R(theta(x))^T` with a band-limited angle
    /// field `theta(x) = (pi/4) sin(2 pi f (x_1 + ... + x_n))`; `m = 2` only.
    RotatedDiagonal {
        a: Vec<f64>,
        center: Vec<f64>,
        angle_freq: i64,
    },
}

impl MatrixWeight {
    pub fn identity(m: usize) -> Self {
        MatrixWeight::Constant(SymMat::identity(m))
    }

    pub fn components(&self) -> usize {
        match self {
            MatrixWeight::Constant(c) => c.m,
            MatrixWeight::ScalarPower { m, .. } => *m,
            MatrixWeight::DiagonalPower { a, .. } => a.len(),
            MatrixWeight::RotatedDiagonal { a, .. } => a.len(),
        }
    }

    /// Short identifier embedded in reports.
    pub fn id(&self) -> String {
        match self {
            MatrixWeight::Constant(c) => {
                if *c == SymMat::identity(c.m) {
                    format!("identity(m={})", c.m)
                } else {
                    format!("constant(m={})", c.m)
                }
            }
            MatrixWeight::ScalarPower { m, a, .. } => format!("scalar-power(m={m},a={a})"),
            MatrixWeight::DiagonalPower { a, .. } => format!("diagonal-power(a={a:?})"),
            MatrixWeight::RotatedDiagonal { a, angle_freq, .. } => {
                format!("rotated-diagonal(a={a:?},f={angle_freq})")
            }
        }
    }

    fn torus_distance(x: &[f64], center: &[f64]) -> f64 {
        x.iter()
            .zip(center.iter())
            .map(|(xi, ci)| {
                let d = (xi - ci).abs().rem_euclid(1.0);
                let d = d.min(1.0 - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates the weight at a point of the torus.
    pub fn eval(&self, x: &[f64]) -> Result<SymMat> {
        match self {
            MatrixWeight::Constant(c) => Ok(*c),
            MatrixWeight::ScalarPower { m, a, center } => {
                let d = Self::torus_distance(x, center);
                if d == 0.0 && *a != 0.0 {
                    return Err(CoreError::InvalidArgument(
                        "weight evaluated at its singular center".into(),
                    ));
                }
                Ok(SymMat::identity(*m).scale(d.powf(*a)))
            }
            MatrixWeight::DiagonalPower { a, center } => {
                let d = Self::torus_distance(x, center);
                if d == 0.0 && a.iter().any(|&ai| ai != 0.0) {
                    return Err(CoreError::InvalidArgument(
                        "weight evaluated at its singular center".into(),
                    ));
                }
                let diag: Vec<f64> = a.iter().map(|&ai| d.powf(ai)).collect();
                Ok(SymMat::diagonal(&diag))
            }
            MatrixWeight::RotatedDiagonal {
                a,
                center,
                angle_freq,
            } => {
                if a.len() != 2 {
                    return Err(CoreError::InvalidArgument(
                        "rotated-diagonal weights require m = 2".into(),
                    ));
                }
                let d = Self::torus_distance(x, center);
                if d == 0.0 && a.iter().any(|&ai| ai != 0.0) {
                    return Err(CoreError::InvalidArgument(
                        "weight evaluated at its singular center".into(),
                    ));
                }
                let s: f64 = x.iter().sum();
                let theta = (PI / 4.0) * (2.0 * PI * *angle_freq as f64 * s).sin();
                let (c, sn) = (theta.cos(), theta.sin());
                let (d1, d2) = (d.powf(a[0]), d.powf(a[1]));
                let mut w = SymMat::zeros(2);
                w.set(0, 0, c * c * d1 + sn * sn * d2);
                w.set(1, 1, sn * sn * d1 + c * c * d2);
                w.set(0, 1, c * sn * (d1 - d2));
                Ok(w)
            }
        }
    }
}

/// A matrix weight sampled at the cell centers of a `2^J` grid, with cached
/// spectral powers `W^{1/p}` and `W^{-1/p}`.
#[derive(Debug, Clone)]
pub struct WeightGrid {
    dim: usize,
    grid_j: u32,
    m: usize,
    p: f64,
    w: Vec<SymMat>,
    w_pow: Vec<SymMat>,
    w_pow_inv: Vec<SymMat>,
    weight_id: String,
}

impl WeightGrid {
    /// Samples `model` on the grid and caches `W^{1/p}` and `W^{-1/p}`.
    /// Verifies the spectral round trip `(W^{1/p})^p = W` to `1e-10` relative
    /// on every sample.
    pub fn sample(model: &MatrixWeight, dim: usize, grid_j: u32, p: f64) -> Result<Self> {
        assert!(dim == 1 || dim == 2);
        if p <= 0.0 {
            return Err(CoreError::InvalidArgument("p must be positive".into()));
        }
        let m = model.components();
        let n = 1usize << grid_j;
        let cells = n.pow(dim as u32);
        let mut coords = [0.0f64; 2];
        let mut w = Vec::with_capacity(cells);
        let mut w_pow = Vec::with_capacity(cells);
        let mut w_pow_inv = Vec::with_capacity(cells);
        for cell in 0..cells {
            center_of(cell, n, dim, &mut coords);
            let wx = model.eval(&coords[..dim])?;
            let b = matrix_power(&wx, 1.0 / p)?;
            let binv = matrix_power(&wx, -1.0 / p)?;
            // Spectral round-trip guard.
            let back = matrix_power(&b, p)?;
            let scale = wx.opnorm().max(1e-300);
            let err = max_entry_diff(&back, &wx) / scale;
            if err > 1e-10 {
                return Err(CoreError::InvalidArgument(format!(
                    "spectral power round trip failed at cell {cell}: rel err {err:e}"
                )));
            }
            w.push(wx);
            w_pow.push(b);
            w_pow_inv.push(binv);
        }
        Ok(WeightGrid {
            dim,
            grid_j,
            m,
            p,
            w,
            w_pow,
            w_pow_inv,
            weight_id: model.id(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_j(&self) -> u32 {
        self.grid_j
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight_id(&self) -> &str {
        &self.weight_id
    }

    pub fn samples_per_dim(&self) -> usize {
        1usize << self.grid_j
    }

    pub fn num_cells(&self) -> usize {
        self.w.len()
    }

    /// `W(x)` at a flat cell index.
    #[inline]
    pub fn w(&self, cell: usize) -> &SymMat {
        &self.w[cell]
    }

    /// `W^{1/p}(x)` at a flat cell index.
    #[inline]
    pub fn w_pow(&self, cell: usize) -> &SymMat {
        &self.w_pow[cell]
    }

    /// `W^{-1/p}(x)` at a flat cell index.
    #[inline]
    pub fn w_pow_inv(&self, cell: usize) -> &SymMat {
        &self.w_pow_inv[cell]
    }

    /// Replaces the sampled weight by `c * W`, rescaling the cached powers
    /// consistently.
    pub fn scale_in_place(&mut self, c: f64) {
        assert!(c > 0.0);
        let cp = c.powf(1.0 / self.p);
        for mat in self.w.iter_mut() {
            *mat = mat.scale(c);
        }
        for mat in self.w_pow.iter_mut() {
            *mat = mat.scale(cp);
        }
        for mat in self.w_pow_inv.iter_mut() {
            *mat = mat.scale(1.0 / cp);
        }
        self.weight_id = format!("{}*{c}", self.weight_id);
    }
}

#[inline]
fn center_of(cell: usize, n: usize, dim: usize, out: &mut [f64]) {
    match dim {
        1 => out[0] = (cell as f64 + 0.5) / n as f64,
        _ => {
            out[0] = ((cell / n) as f64 + 0.5) / n as f64;
            out[1] = ((cell % n) as f64 + 0.5) / n as f64;
        }
    }
}

fn max_entry_diff(a: &SymMat, b: &SymMat) -> f64 {
    let mut out = 0.0f64;
    for i in 0..a.m {
        for j in 0..a.m {
            out = out.max((a.get(i, j) - b.get(i, j)).abs());
        }
    }
    out
}

/// Result of an `A_p` sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ApReport {
    /// The supremum of the defining quantity over the swept cubes; always at
    /// least 1 up to rounding.
    pub estimate: f64,
    /// Maximum per dyadic level (shifted grids folded in).
    pub per_scale: Vec<PerScaleMax>,
    /// `estimate(fine grid) / estimate(coarse grid)` when a refinement pair
    /// was run; near 1 for weights in the class, visibly greater for the
    /// divergent families.
    pub refinement_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerScaleMax {
    pub j: i32,
    pub value: f64,
}

fn check_range(grid_j: u32, cubes: &ScaleRange) -> Result<()> {
    if cubes.jmin < 0 || cubes.jmax > grid_j as i32 {
        return Err(CoreError::ScaleOutOfRange {
            j: if cubes.jmin < 0 { cubes.jmin } else { cubes.jmax },
            jmin: 0,
            jmax: grid_j as i32,
        });
    }
    Ok(())
}

/// The matrix `A_p` quantity for `p > 1`:
/// `sup_Q (1/|Q|) int_Q ((1/|Q|) int_Q ||W^{1/p}(x) W^{-1/p}(y)||^{p'} dy)^{p/p'} dx`,
/// swept over dyadic and half-shifted cubes in `cubes`.
pub fn ap_constant(w: &WeightGrid, p: f64, cubes: &ScaleRange) -> Result<ApReport> {
    if p <= 1.0 {
        return Err(CoreError::InvalidArgument(
            "ap_constant requires p > 1; use ap_constant_small_p".into(),
        ));
    }
    check_range(w.grid_j(), cubes)?;
    let p_prime = p / (p - 1.0);
    sweep_cubes(w, cubes, |w, cells| {
        let xs: Vec<usize> = cells.collect();
        let mut outer = 0.0;
        for &x in &xs {
            let bx = w.w_pow(x);
            let mut inner = 0.0;
            for &y in &xs {
                let prod = bx.mul(w.w_pow_inv(y));
                inner += prod.opnorm().powf(p_prime);
            }
            inner /= xs.len() as f64;
            outer += inner.powf(p / p_prime);
        }
        outer / xs.len() as f64
    })
}

/// The `A_p` quantity for `0 < p <= 1`:
/// `sup_Q max_{y in Q} (1/|Q|) int_Q ||W^{1/p}(x) W^{-1/p}(y)||^p dx`,
/// with the grid maximum standing in for the essential supremum.
pub fn ap_constant_small_p(w: &WeightGrid, p: f64, cubes: &ScaleRange) -> Result<ApReport> {
    if p <= 0.0 || p > 1.0 {
        return Err(CoreError::InvalidArgument(
            "ap_constant_small_p requires 0 < p <= 1".into(),
        ));
    }
    check_range(w.grid_j(), cubes)?;
    sweep_cubes(w, cubes, |w, cells| {
        let xs: Vec<usize> = cells.collect();
        let mut best = 0.0f64;
        for &y in &xs {
            let cy = w.w_pow_inv(y);
            let mut inner = 0.0;
            for &x in &xs {
                let prod = w.w_pow(x).mul(cy);
                inner += prod.opnorm().powf(p);
            }
            best = best.max(inner / xs.len() as f64);
        }
        best
    })
}

/// Runs `per_cube` over every (shifted) cube in range, reducing maxima in
/// ascending cube order for bit-reproducible results.
fn sweep_cubes<F>(w: &WeightGrid, cubes: &ScaleRange, per_cube: F) -> Result<ApReport>
where
    F: Fn(&WeightGrid, Box<dyn Iterator<Item = usize> + '_>) -> f64 + Sync,
{
    let mut per_scale = Vec::new();
    let mut estimate = f64::MIN;
    for j in cubes.levels() {
        let cube_list = torus_cubes(w.dim(), j);
        let shifts = shift_patterns(w.dim());
        let mut level_max = f64::MIN;
        for shift in &shifts {
            // Half shifts are not cell-aligned at the finest level; the
            // unshifted grid still contributes there.
            if shift.iter().any(|&s| s) && j as u32 == w.grid_j() {
                continue;
            }
            let values: Vec<f64> = cube_list
                .par_iter()
                .map(|q| {
                    let cc = CubeCells::new(w.grid_j(), q, *shift).expect("cube in range");
                    let (it, _) = cc.iter_strided(quad_cap_per_dim(w.dim()));
                    per_cube(w, Box::new(it))
                })
                .collect();
            for v in values {
                level_max = level_max.max(v);
            }
        }
        per_scale.push(PerScaleMax {
            j,
            value: level_max,
        });
        estimate = estimate.max(level_max);
    }
    Ok(ApReport {
        estimate,
        per_scale,
        refinement_ratio: None,
    })
}

/// Fitted doubling exponent: the largest `log2(w_y(2Q)/w_y(Q))` over dyadic
/// and half-shifted cubes in range and sampled directions, where
/// `w_y(E) = sum_E |W^{1/p}(x) y|^p` times the cell volume and `2Q` is
/// concentric with `Q`, wrapped on the torus. Cubes narrower than two grid
/// cells are skipped; their concentric doubles are not cell-aligned.
pub fn doubling_exponent(
    w: &WeightGrid,
    p: f64,
    cubes: &ScaleRange,
    directions: &[Vec<f64>],
) -> Result<f64> {
    check_range(w.grid_j(), cubes)?;
    let n = w.samples_per_dim();
    let mut best = f64::MIN;
    let mut vec_out = [0.0f64; 3];
    for j in cubes.levels() {
        if (w.grid_j() as i32 - j) < 1 {
            continue;
        }
        for shift in shift_patterns(w.dim()) {
            for q in torus_cubes(w.dim(), j) {
                let cc = CubeCells::new(w.grid_j(), &q, shift)?;
                let inner: Vec<usize> = cc.iter().collect();
                let doubled = doubled_cells(&cc, n, w.dim());
                for y in directions {
                    let mut mass = |cells: &[usize]| -> f64 {
                        cells
                            .iter()
                            .map(|&c| {
                                w.w_pow(c).matvec(y, &mut vec_out[..w.components()]);
                                norm(&vec_out[..w.components()]).powf(p)
                            })
                            .sum()
                    };
                    let wq = mass(&inner);
                    let w2q = mass(&doubled);
                    if wq > 0.0 {
                        best = best.max((w2q / wq).log2());
                    }
                }
            }
        }
    }
    Ok(best)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cells of the concentric double `2Q`, wrapped on the torus and capped at
/// the full domain. Requires the cube to span an even number (at least two)
/// of grid cells per dimension.
fn doubled_cells(cc: &CubeCells, grid_n: usize, dim: usize) -> Vec<usize> {
    debug_assert!(cc.len_per_dim >= 2);
    let len = (2 * cc.len_per_dim).min(grid_n);
    let back = cc.len_per_dim / 2;
    let mut start = [0usize; 2];
    for i in 0..dim {
        start[i] = (cc.start[i] + grid_n - back) % grid_n;
    }
    let mut out = Vec::with_capacity(len.pow(dim as u32));
    match dim {
        1 => {
            for i in 0..len {
                out.push((start[0] + i) % grid_n);
            }
        }
        _ => {
            for r in 0..len {
                for c in 0..len {
                    out.push(((start[0] + r) % grid_n) * grid_n + (start[1] + c) % grid_n);
                }
            }
        }
    }
    out
}

/// One row of the averaged-integral profile table.
#[derive(Debug, Clone, Serialize)]
pub struct GoldbergRow {
    pub r: f64,
    /// `sup_Q (1/|Q|) int_Q ||A_Q W^{-1/p}(x)||^r dx`
    pub equiv_ap: f64,
    /// `sup_Q (1/|Q|) int_Q ||W^{1/p}(x) A_Q^{-1}||^r dx`
    pub rev_holder: f64,
    /// The nested variant with the inner sup over dyadic `P` with
    /// `x in P ⊆ Q` inside the scale range.
    pub chgol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldbergProfile {
    pub rows: Vec<GoldbergRow>,
    /// Largest `r` in `[p, 4p]` (bisection, 40 steps) at which each quantity
    /// stays below 100x its value at `r = p`; order: equiv_ap, rev_holder,
    /// chgol.
    pub delta_hat_r: [f64; 3],
}

/// Computes the three averaged quantities for each requested `r`, plus the
/// empirical blow-up edges.
pub fn goldberg_profile(
    w: &WeightGrid,
    p: f64,
    family: &ReducingFamily,
    r_values: &[f64],
) -> Result<GoldbergProfile> {
    let range = family.range();
    check_range(w.grid_j(), &range)?;
    let cells = w.num_cells();
    let levels: Vec<i32> = range.levels().collect();
    // Per-level pointwise norm fields.
    let mut equiv_field = vec![vec![0.0f64; cells]; levels.len()];
    let mut rev_field = vec![vec![0.0f64; cells]; levels.len()];
    for (li, &j) in levels.iter().enumerate() {
        for q in torus_cubes(w.dim(), j) {
            let a_q = family.matrix(&q)?;
            let a_q_inv = a_q.inverse()?;
            let cc = CubeCells::new(w.grid_j(), &q, [false, false])?;
            for cell in cc.iter() {
                equiv_field[li][cell] = a_q.mul(w.w_pow_inv(cell)).opnorm();
                rev_field[li][cell] = w.w_pow(cell).mul(&a_q_inv).opnorm();
            }
        }
    }
    // Running max over finer levels for the nested quantity.
    let mut nested_field = rev_field.clone();
    for li in (0..levels.len().saturating_sub(1)).rev() {
        for cell in 0..cells {
            nested_field[li][cell] = nested_field[li][cell].max(nested_field[li + 1][cell]);
        }
    }

    let eval = |r: f64| -> (f64, f64, f64) {
        let mut v = (f64::MIN, f64::MIN, f64::MIN);
        for (li, &j) in levels.iter().enumerate() {
            for q in torus_cubes(w.dim(), j) {
                let cc = CubeCells::new(w.grid_j(), &q, [false, false]).expect("in range");
                let count = cc.num_cells() as f64;
                let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
                for cell in cc.iter() {
                    s0 += equiv_field[li][cell].powf(r);
                    s1 += rev_field[li][cell].powf(r);
                    s2 += nested_field[li][cell].powf(r);
                }
                v.0 = v.0.max(s0 / count);
                v.1 = v.1.max(s1 / count);
                v.2 = v.2.max(s2 / count);
            }
        }
        v
    };

    let rows: Vec<GoldbergRow> = r_values
        .iter()
        .map(|&r| {
            let (equiv_ap, rev_holder, chgol) = eval(r);
            GoldbergRow {
                r,
                equiv_ap,
                rev_holder,
                chgol,
            }
        })
        .collect();

    // Bisection for the blow-up edge of each quantity.
    let base = eval(p);
    let base = [base.0, base.1, base.2];
    let mut delta_hat_r = [p; 3];
    for qi in 0..3 {
        let threshold = 100.0 * base[qi];
        let pick = |v: (f64, f64, f64)| [v.0, v.1, v.2][qi];
        let mut lo = p;
        let mut hi = 4.0 * p;
        if pick(eval(hi)) <= threshold {
            delta_hat_r[qi] = hi;
            continue;
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if pick(eval(mid)) <= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        delta_hat_r[qi] = lo;
    }

    Ok(GoldbergProfile { rows, delta_hat_r })
}

/// Deterministic real unit-direction sample. `m = 1` yields `{1}`; `m = 2`
/// golden-angle points on the half-circle; `m = 3` a Fibonacci hemisphere.
pub fn unit_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        1 => vec![vec![1.0]],
        2 => {
            let golden = (5.0f64.sqrt() - 1.0) / 2.0;
            (0..count)
                .map(|d| {
                    let theta = PI * ((d as f64 * golden) % 1.0);
                    vec![theta.cos(), theta.sin()]
                })
                .collect()
        }
        _ => {
            let golden = (5.0f64.sqrt() - 1.0) / 2.0;
            (0..count)
                .map(|d| {
                    let z = (d as f64 + 0.5) / count as f64; // hemisphere
                    let r = (1.0 - z * z).sqrt();
                    let theta = 2.0 * PI * ((d as f64 * golden) % 1.0);
                    vec![r * theta.cos(), r * theta.sin(), z]
                })
                .collect()
        }
    }
}
