//! The matrix-weighted Triebel-Lizorkin quasi-norms and their relatives:
//! the four equivalent forms (weighted / reducing-operator, function /
//! sequence), the sup variant, `L^p(W)`, and Sobolev norms, all by lattice
//! quadrature with equal-weight cell sums.
//!
//! Every norm fixes the reduction order (ascending scale, ascending cell)
//! so repeated runs are bit-identical.

use crate::coeffs::CoeffSequence;
use crate::dyadic::ScaleRange;
use crate::error::{CoreError, Result};
use crate::grid::GridFunction;
use crate::lpcore::{lp_convolve, phi_coeffs, AdmissibleSystem, Window};
use crate::reducing::ReducingFamily;
use crate::weights::WeightGrid;
use serde::{Serialize, Serializer};

/// Smoothness/integrability parameters of a space.
#[derive(Debug, Clone, Copy)]
pub struct SpaceParams {
    pub alpha: f64,
    pub p: f64,
    /// `f64::INFINITY` selects the sup convention for the inner norm.
    pub q: f64,
    pub range: ScaleRange,
}

impl SpaceParams {
    pub fn new(alpha: f64, p: f64, q: f64, range: ScaleRange) -> Self {
        assert!(p > 0.0 && p.is_finite());
        assert!(q > 0.0);
        SpaceParams { alpha, p, q, range }
    }

    pub fn homogeneous(&self) -> bool {
        self.range.homogeneous
    }
}

fn serialize_q<S: Serializer>(q: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if q.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*q)
    }
}

/// A computed norm with its per-scale breakdown and provenance metadata.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub alpha: f64,
    pub p: f64,
    #[serde(serialize_with = "serialize_q")]
    pub q: f64,
    pub homogeneous: bool,
    pub jmin: i32,
    pub jmax: i32,
    /// `L^p` size of each scale's contribution, ascending `j`.
    pub per_scale: Vec<f64>,
    pub weight_id: String,
}

/// Accumulates `(sum_j t_j(x)^q)^{1/q}` pointwise, then takes the lattice
/// `L^p` norm. Scales are fed ascending; `q = inf` keeps a running max.
struct QpAccumulator {
    q: f64,
    p: f64,
    inner: Vec<f64>,
    per_scale: Vec<f64>,
    cell_volume: f64,
}

impl QpAccumulator {
    fn new(cells: usize, p: f64, q: f64, cell_volume: f64) -> Self {
        QpAccumulator {
            q,
            p,
            inner: vec![0.0; cells],
            per_scale: Vec::new(),
            cell_volume,
        }
    }

    /// Feeds one scale's pointwise values `t_j(x) >= 0`.
    fn push_scale(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.inner.len());
        if self.q.is_infinite() {
            for (acc, &v) in self.inner.iter_mut().zip(values.iter()) {
                *acc = acc.max(v);
            }
        } else {
            for (acc, &v) in self.inner.iter_mut().zip(values.iter()) {
                *acc += v.powf(self.q);
            }
        }
        let scale_lp: f64 = values
            .iter()
            .map(|v| v.powf(self.p))
            .sum::<f64>()
            * self.cell_volume;
        self.per_scale.push(scale_lp.powf(1.0 / self.p));
    }

    fn finish(self) -> (f64, Vec<f64>) {
        let q = self.q;
        let p = self.p;
        let sum: f64 = self
            .inner
            .iter()
            .map(|&v| {
                let inner = if q.is_infinite() { v } else { v.powf(1.0 / q) };
                inner.powf(p)
            })
            .sum();
        ((sum * self.cell_volume).powf(1.0 / p), self.per_scale)
    }
}

fn check_params(sys: &AdmissibleSystem, params: &SpaceParams) -> Result<()> {
    let band = sys.band_range();
    let jmin_ok = if params.range.homogeneous {
        band.jmin
    } else {
        0
    };
    if params.range.jmin < jmin_ok || params.range.jmax > band.jmax {
        return Err(CoreError::ScaleOutOfRange {
            j: params.range.jmax,
            jmin: jmin_ok,
            jmax: band.jmax,
        });
    }
    Ok(())
}

/// Pointwise weighted magnitudes `|W^{1/p}(x) g(x)|` of a vector field.
fn weighted_magnitude(g: &GridFunction, w: &WeightGrid) -> Vec<f64> {
    let m = g.components();
    assert_eq!(m, w.components());
    (0..g.num_cells())
        .map(|cell| w.w_pow(cell).matvec_norm_complex(g.value_at(cell)))
        .collect()
}

/// The function-side weighted quasi-norm: `L^p` of the `l^q` aggregate of
/// `2^{j alpha} |W^{1/p} (phi_j * f)|`. Inhomogeneous parameter ranges add
/// the separate low-pass term `||Phi * f||_{L^p(W)}`.
pub fn f_norm_w(
    f: &GridFunction,
    w: &WeightGrid,
    params: &SpaceParams,
    sys: &AdmissibleSystem,
) -> Result<NormReport> {
    check_params(sys, params)?;
    let cells = f.num_cells();
    let mut acc = QpAccumulator::new(cells, params.p, params.q, f.cell_volume());
    let mut lowpass_term = 0.0;
    let mut lowpass_scale = Vec::new();
    for j in params.range.levels() {
        if j == 0 {
            let g = lp_convolve(f, sys, 0, Window::CapPhi)?;
            lowpass_term = lp_w_norm(&g, w, params.p);
            lowpass_scale.push(lowpass_term);
            continue;
        }
        let g = lp_convolve(f, sys, j, Window::Phi)?;
        let factor = (2.0f64).powf(params.alpha * j as f64);
        let mut t = weighted_magnitude(&g, w);
        t.iter_mut().for_each(|v| *v *= factor);
        acc.push_scale(&t);
    }
    let (band_value, mut per_scale) = acc.finish();
    let mut scales = lowpass_scale;
    scales.append(&mut per_scale);
    Ok(NormReport {
        value: band_value + lowpass_term,
        alpha: params.alpha,
        p: params.p,
        q: params.q,
        homogeneous: params.homogeneous(),
        jmin: params.range.jmin,
        jmax: params.range.jmax,
        per_scale: scales,
        weight_id: w.weight_id().to_string(),
    })
}

/// Pointwise per-cube magnitudes `|A_Q g(x)|` for a level's cube family.
fn family_magnitude(
    g: &GridFunction,
    family: &ReducingFamily,
    j: i32,
    sup_per_cube: bool,
) -> Result<Vec<f64>> {
    let mats = family.level_matrices(j)?;
    let grid_j = g.grid_j();
    let cells_per_side = 1usize << (grid_j - j as u32);
    let n = g.samples_per_dim();
    let mut out = vec![0.0f64; g.num_cells()];
    for (idx, a_q) in mats.iter().enumerate() {
        let start = match g.dim() {
            1 => [idx * cells_per_side, 0],
            _ => {
                let per = 1usize << j;
                [
                    (idx / per) * cells_per_side,
                    (idx % per) * cells_per_side,
                ]
            }
        };
        let mut cube_cells = Vec::with_capacity(cells_per_side.pow(g.dim() as u32));
        match g.dim() {
            1 => {
                for i in 0..cells_per_side {
                    cube_cells.push(start[0] + i);
                }
            }
            _ => {
                for r in 0..cells_per_side {
                    for c in 0..cells_per_side {
                        cube_cells.push((start[0] + r) * n + start[1] + c);
                    }
                }
            }
        }
        if sup_per_cube {
            let sup = cube_cells
                .iter()
                .map(|&cell| a_q.matvec_norm_complex(g.value_at(cell)))
                .fold(0.0f64, f64::max);
            for &cell in &cube_cells {
                out[cell] = sup;
            }
        } else {
            for &cell in &cube_cells {
                out[cell] = a_q.matvec_norm_complex(g.value_at(cell));
            }
        }
    }
    Ok(out)
}

fn f_norm_family(
    f: &GridFunction,
    family: &ReducingFamily,
    params: &SpaceParams,
    sys: &AdmissibleSystem,
    sup_per_cube: bool,
) -> Result<NormReport> {
    check_params(sys, params)?;
    let fam_range = family.range();
    if params.range.jmin < fam_range.jmin || params.range.jmax > fam_range.jmax {
        return Err(CoreError::MissingCube {
            cube: format!("level {} requested of family {:?}", params.range.jmax, fam_range),
        });
    }
    let cells = f.num_cells();
    let mut acc = QpAccumulator::new(cells, params.p, params.q, f.cell_volume());
    let mut lowpass_term = 0.0;
    let mut lowpass_scale = Vec::new();
    for j in params.range.levels() {
        if j == 0 {
            // Low-pass block: || sum_{Q in D_0} |A_Q Phi*f| chi_Q ||_{L^p}.
            let g = lp_convolve(f, sys, 0, Window::CapPhi)?;
            let t = family_magnitude(&g, family, 0, sup_per_cube)?;
            let sum: f64 = t.iter().map(|v| v.powf(params.p)).sum();
            lowpass_term = (sum * f.cell_volume()).powf(1.0 / params.p);
            lowpass_scale.push(lowpass_term);
            continue;
        }
        let g = lp_convolve(f, sys, j, Window::Phi)?;
        let factor = (2.0f64).powf(params.alpha * j as f64);
        let mut t = family_magnitude(&g, family, j, sup_per_cube)?;
        t.iter_mut().for_each(|v| *v *= factor);
        acc.push_scale(&t);
    }
    let (band_value, mut per_scale) = acc.finish();
    let mut scales = lowpass_scale;
    scales.append(&mut per_scale);
    Ok(NormReport {
        value: band_value + lowpass_term,
        alpha: params.alpha,
        p: params.p,
        q: params.q,
        homogeneous: params.homogeneous(),
        jmin: params.range.jmin,
        jmax: params.range.jmax,
        per_scale: scales,
        weight_id: format!("family-{}", family.strategy().name()),
    })
}

/// The reducing-operator function-side quasi-norm
/// `|| (sum_j sum_{Q in D_j} (2^{j alpha} |A_Q phi_j*f| chi_Q)^q)^{1/q} ||_{L^p}`.
pub fn f_norm_aq(
    f: &GridFunction,
    family: &ReducingFamily,
    params: &SpaceParams,
    sys: &AdmissibleSystem,
) -> Result<NormReport> {
    f_norm_family(f, family, params, sys, false)
}

/// The sup variant: the per-cube pointwise value is replaced by the cube
/// maximum of `|A_Q phi_j * f|`.
pub fn f_norm_aq_sup(
    f: &GridFunction,
    family: &ReducingFamily,
    params: &SpaceParams,
    sys: &AdmissibleSystem,
) -> Result<NormReport> {
    f_norm_family(f, family, params, sys, true)
}

/// The sequence-side weighted quasi-norm
/// `|| (sum_Q (|Q|^{-alpha/n - 1/2} |W^{1/p}(x) s_Q| chi_Q)^q)^{1/q} ||_{L^p}`.
pub fn seq_norm_w(s: &CoeffSequence, w: &WeightGrid, params: &SpaceParams) -> Result<NormReport> {
    let dim = s.dim();
    let grid_j = w.grid_j();
    let cells = w.num_cells();
    let cell_volume = 1.0 / cells as f64;
    let mut acc = QpAccumulator::new(cells, params.p, params.q, cell_volume);
    let mut vec_out = [num_complex::Complex64::default(); 3];
    for j in params.range.levels() {
        if !s.has_level(j) {
            continue;
        }
        let data = s.level(j)?;
        let m = s.components();
        let factor = (2.0f64).powf((params.alpha / dim as f64 + 0.5) * (j * dim as i32) as f64);
        let cells_per_side = 1usize << (grid_j - j as u32);
        let n = 1usize << grid_j;
        let mut t = vec![0.0f64; cells];
        let per = 1usize << j;
        for idx in 0..data.len() / m {
            let coeff = &data[idx * m..(idx + 1) * m];
            let start = match dim {
                1 => [idx * cells_per_side, 0],
                _ => [
                    (idx / per) * cells_per_side,
                    (idx % per) * cells_per_side,
                ],
            };
            match dim {
                1 => {
                    for i in 0..cells_per_side {
                        let cell = start[0] + i;
                        w.w_pow(cell).matvec_complex(coeff, &mut vec_out[..m]);
                        t[cell] = factor
                            * vec_out[..m]
                                .iter()
                                .map(|v| v.norm_sqr())
                                .sum::<f64>()
                                .sqrt();
                    }
                }
                _ => {
                    for r in 0..cells_per_side {
                        for c in 0..cells_per_side {
                            let cell = (start[0] + r) * n + start[1] + c;
                            w.w_pow(cell).matvec_complex(coeff, &mut vec_out[..m]);
                            t[cell] = factor
                                * vec_out[..m]
                                    .iter()
                                    .map(|v| v.norm_sqr())
                                    .sum::<f64>()
                                    .sqrt();
                        }
                    }
                }
            }
        }
        acc.push_scale(&t);
    }
    let (value, per_scale) = acc.finish();
    Ok(NormReport {
        value,
        alpha: params.alpha,
        p: params.p,
        q: params.q,
        homogeneous: params.homogeneous(),
        jmin: params.range.jmin,
        jmax: params.range.jmax,
        per_scale,
        weight_id: w.weight_id().to_string(),
    })
}

/// The reducing-operator sequence-side quasi-norm, computed through the
/// scalar reduction `t_Q = |A_Q s_Q|` and the unweighted scalar norm of
/// `{t_Q}`. The equivalent direct accumulation is evaluated alongside and
/// the two must agree to `1e-12` relative; their mismatch is returned in the
/// error channel otherwise.
pub fn seq_norm_aq(
    s: &CoeffSequence,
    family: &ReducingFamily,
    params: &SpaceParams,
) -> Result<NormReport> {
    let dim = s.dim();
    let grid_j = family_grid_j(family, params)?;
    let n = 1usize << grid_j;
    let cells = n.pow(dim as u32);
    let cell_volume = 1.0 / cells as f64;
    // Route 1: scalar reduction through the unweighted norm pipeline.
    let mut acc = QpAccumulator::new(cells, params.p, params.q, cell_volume);
    // Route 2: direct per-cube accumulation (same quadrature written as an
    // explicit sum over cubes), kept as an internal consistency check.
    let mut direct = QpAccumulator::new(cells, params.p, params.q, cell_volume);
    for j in params.range.levels() {
        if !s.has_level(j) {
            continue;
        }
        let data = s.level(j)?;
        let m = s.components();
        let mats = family.level_matrices(j)?;
        let factor = (2.0f64).powf((params.alpha / dim as f64 + 0.5) * (j * dim as i32) as f64);
        let cells_per_side = 1usize << (grid_j - j as u32);
        let per = 1usize << j;
        let mut t = vec![0.0f64; cells];
        for (idx, a_q) in mats.iter().enumerate() {
            let coeff = &data[idx * m..(idx + 1) * m];
            let reduced = a_q.matvec_norm_complex(coeff);
            let start = match dim {
                1 => [idx * cells_per_side, 0],
                _ => [
                    (idx / per) * cells_per_side,
                    (idx % per) * cells_per_side,
                ],
            };
            match dim {
                1 => {
                    for i in 0..cells_per_side {
                        t[start[0] + i] = factor * reduced;
                    }
                }
                _ => {
                    for r in 0..cells_per_side {
                        for c in 0..cells_per_side {
                            t[(start[0] + r) * n + start[1] + c] = factor * reduced;
                        }
                    }
                }
            }
        }
        acc.push_scale(&t);
        direct.push_scale(&t);
    }
    let (value, per_scale) = acc.finish();
    let (direct_value, _) = direct.finish();
    let mismatch = (value - direct_value).abs() / value.abs().max(1e-300);
    if mismatch > 1e-12 {
        return Err(CoreError::InvalidArgument(format!(
            "scalar-reduction identity violated: {mismatch:e}"
        )));
    }
    Ok(NormReport {
        value,
        alpha: params.alpha,
        p: params.p,
        q: params.q,
        homogeneous: params.homogeneous(),
        jmin: params.range.jmin,
        jmax: params.range.jmax,
        per_scale,
        weight_id: format!("family-{}", family.strategy().name()),
    })
}

fn family_grid_j(family: &ReducingFamily, params: &SpaceParams) -> Result<u32> {
    let fam_range = family.range();
    if params.range.jmin < fam_range.jmin || params.range.jmax > fam_range.jmax {
        return Err(CoreError::MissingCube {
            cube: format!(
                "level {} requested of family {:?}",
                params.range.jmax, fam_range
            ),
        });
    }
    // The quadrature lattice only needs to resolve the finest cube level.
    Ok(params.range.jmax.max(1) as u32 + 1)
}

/// `||f||_{L^p(W)} = (int |W^{1/p}(x) f(x)|^p dx)^{1/p}` by lattice
/// quadrature.
pub fn lp_w_norm(f: &GridFunction, w: &WeightGrid, p: f64) -> f64 {
    let mags = weighted_magnitude(f, w);
    let sum: f64 = mags.iter().map(|v| v.powf(p)).sum();
    (sum * f.cell_volume()).powf(1.0 / p)
}

/// Sobolev norm `sum_{|beta| <= k} ||D^beta f||_{L^p(W)}` with spectral
/// derivatives.
pub fn sobolev_norm(f: &GridFunction, w: &WeightGrid, p: f64, k: u32) -> f64 {
    let mut total = 0.0;
    for beta in multi_indices(f.dim(), k) {
        let d = crate::lpcore::derivative(f, &beta);
        total += lp_w_norm(&d, w, p);
    }
    total
}

/// All multi-indices with `|beta| <= k` in `dim` variables, ascending order.
pub fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    match dim {
        1 => {
            for b in 0..=k {
                out.push(vec![b]);
            }
        }
        _ => {
            for total in 0..=k {
                for b1 in 0..=total {
                    out.push(vec![b1, total - b1]);
                }
            }
        }
    }
    out
}

/// The four equivalent quasi-norms of one function plus extreme pairwise
/// ratios.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub f_w: f64,
    pub f_aq: f64,
    pub seq_aq: f64,
    pub seq_w: f64,
    pub max_pairwise_ratio: f64,
    pub min_pairwise_ratio: f64,
}

/// Computes all four norms of the main equivalence for one function.
pub fn equivalence_report(
    f: &GridFunction,
    w: &WeightGrid,
    family: &ReducingFamily,
    params: &SpaceParams,
    sys: &AdmissibleSystem,
) -> Result<EquivalenceReport> {
    let f_w = f_norm_w(f, w, params, sys)?.value;
    let f_aq = f_norm_aq(f, family, params, sys)?.value;
    let coeffs = phi_coeffs(f, sys, &params.range)?;
    let seq_aq = seq_norm_aq(&coeffs, family, params)?.value;
    let seq_w_params = SpaceParams {
        range: params.range,
        ..*params
    };
    let seq_w = seq_norm_w(&coeffs, w, &seq_w_params)?.value;
    let values = [f_w, f_aq, seq_aq, seq_w];
    let mut max_ratio = f64::MIN;
    let mut min_ratio = f64::MAX;
    for (i, &a) in values.iter().enumerate() {
        for &b in values.iter().skip(i + 1) {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let r = a / b;
            max_ratio = max_ratio.max(r.max(1.0 / r));
            min_ratio = min_ratio.min(r.min(1.0 / r));
        }
    }
    if values.iter().all(|&v| v == 0.0) {
        max_ratio = 1.0;
        min_ratio = 1.0;
    }
    Ok(EquivalenceReport {
        f_w,
        f_aq,
        seq_aq,
        seq_w,
        max_pairwise_ratio: max_ratio,
        min_pairwise_ratio: min_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reducing::build_reducing;
    use crate::testfns;
    use crate::weights::MatrixWeight;
    use num_complex::Complex64;

    fn identity_setup(grid_j: u32) -> (WeightGrid, AdmissibleSystem) {
        let w = WeightGrid::sample(&MatrixWeight::identity(1), 1, grid_j, 2.0).unwrap();
        let sys = AdmissibleSystem::build(1, grid_j);
        (w, sys)
    }

    #[test]
    fn unweighted_l2_reduction() {
        let grid_j = 8;
        let (w, sys) = identity_setup(grid_j);
        let params = SpaceParams::new(0.0, 2.0, 2.0, sys.band_range());
        for seed in 0..4 {
            let f = testfns::random_band_limited(1, grid_j, 1, 8, seed, false);
            let report = f_norm_w(&f, &w, &params, &sys).unwrap();
            let expect = f.l2_norm();
            assert!(
                (report.value - expect).abs() <= 1e-10 * expect,
                "{} vs {}",
                report.value,
                expect
            );
        }
    }

    #[test]
    fn zero_function_and_homogeneity() {
        let grid_j = 6;
        let (w, sys) = identity_setup(grid_j);
        let params = SpaceParams::new(1.0, 1.5, 2.0, sys.band_range());
        let zero = GridFunction::zeros(1, grid_j, 1);
        assert_eq!(f_norm_w(&zero, &w, &params, &sys).unwrap().value, 0.0);

        let f = testfns::random_band_limited(1, grid_j, 1, 4, 3, false);
        let mut g = f.clone();
        g.scale(Complex64::new(2.0, 0.0));
        let a = f_norm_w(&f, &w, &params, &sys).unwrap().value;
        let b = f_norm_w(&g, &w, &params, &sys).unwrap().value;
        assert!((b - 2.0 * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn identity_family_matches_weighted_pipeline() {
        let grid_j = 7;
        let (w, sys) = identity_setup(grid_j);
        let range = sys.band_range();
        let fam = build_reducing(&w, 2.0, &range).unwrap();
        let params = SpaceParams::new(0.5, 2.0, 1.0, range);
        let f = testfns::random_band_limited(1, grid_j, 1, 6, 17, false);
        let a = f_norm_w(&f, &w, &params, &sys).unwrap().value;
        let b = f_norm_aq(&f, &fam, &params, &sys).unwrap().value;
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn sup_variant_dominates() {
        let grid_j = 7;
        let model = MatrixWeight::ScalarPower {
            m: 1,
            a: 0.5,
            center: vec![0.5],
        };
        let w = WeightGrid::sample(&model, 1, grid_j, 2.0).unwrap();
        let sys = AdmissibleSystem::build(1, grid_j);
        let range = sys.band_range();
        let fam = build_reducing(&w, 2.0, &range).unwrap();
        let params = SpaceParams::new(0.0, 2.0, 2.0, range);
        let f = testfns::random_band_limited(1, grid_j, 1, 6, 29, false);
        let plain = f_norm_aq(&f, &fam, &params, &sys).unwrap().value;
        let sup = f_norm_aq_sup(&f, &fam, &params, &sys).unwrap().value;
        assert!(sup >= plain * (1.0 - 1e-12), "sup {sup} < plain {plain}");
    }

    #[test]
    fn seq_norm_single_cube_closed_form() {
        let params = SpaceParams::new(0.7, 2.5, 2.0, ScaleRange::homogeneous(1, 3));
        let w = WeightGrid::sample(&MatrixWeight::identity(1), 1, 5, params.p).unwrap();
        let mut s = CoeffSequence::zeros(1, 1, &params.range);
        let q = crate::dyadic::DyadicCube::new(2, &[1]);
        let sval = Complex64::new(0.0, -3.0);
        s.set(&q, &[sval]).unwrap();
        let got = seq_norm_w(&s, &w, &params).unwrap().value;
        // |s_Q| |Q|^{-alpha/n - 1/2 + 1/p}.
        let vol = 0.25f64;
        let expect = 3.0 * vol.powf(-params.alpha - 0.5 + 1.0 / params.p);
        assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
    }

    #[test]
    fn seq_norm_q_monotonicity() {
        let grid_j = 6;
        let sys = AdmissibleSystem::build(1, grid_j);
        let w = WeightGrid::sample(&MatrixWeight::identity(2), 1, grid_j, 2.0).unwrap();
        let f = testfns::random_band_limited(1, grid_j, 2, 5, 7, false);
        let range = sys.band_range();
        let coeffs = crate::lpcore::phi_coeffs(&f, &sys, &range).unwrap();
        let mut values = Vec::new();
        for q in [1.0, 2.0, f64::INFINITY] {
            let params = SpaceParams::new(0.0, 2.0, q, range);
            values.push(seq_norm_w(&coeffs, &w, &params).unwrap().value);
        }
        assert!(values[0] >= values[1] - 1e-12);
        assert!(values[1] >= values[2] - 1e-12);
    }

    #[test]
    fn lp_norm_identity_and_constants() {
        let grid_j = 6;
        let f = testfns::random_band_limited(1, grid_j, 2, 3, 2, true);
        let w_id = WeightGrid::sample(&MatrixWeight::identity(2), 1, grid_j, 2.0).unwrap();
        let plain = {
            let sum: f64 = (0..f.num_cells())
                .map(|cell| {
                    f.value_at(cell)
                        .iter()
                        .map(|v| v.norm_sqr())
                        .sum::<f64>()
                        .powf(1.0)
                })
                .sum();
            (sum * f.cell_volume()).sqrt()
        };
        assert!((lp_w_norm(&f, &w_id, 2.0) - plain).abs() <= 1e-12 * plain);
    }

    #[test]
    fn sobolev_reduces_to_lp_at_zero_order() {
        let grid_j = 6;
        let f = testfns::random_band_limited(1, grid_j, 1, 3, 4, true);
        let w = WeightGrid::sample(&MatrixWeight::identity(1), 1, grid_j, 2.0).unwrap();
        let a = sobolev_norm(&f, &w, 2.0, 0);
        let b = lp_w_norm(&f, &w, 2.0);
        assert_eq!(a, b);
        // Constants: all derivatives vanish.
        let c = GridFunction::from_fn(1, grid_j, 1, |_| vec![Complex64::new(1.5, 0.0)]);
        let k2 = sobolev_norm(&c, &w, 2.0, 2);
        assert!((k2 - lp_w_norm(&c, &w, 2.0)).abs() < 1e-10);
    }

    #[test]
    fn sobolev_wave_closed_form() {
        let grid_j = 6;
        let k = 3i64;
        let f = testfns::wave(1, grid_j, &[k], 1);
        let w = WeightGrid::sample(&MatrixWeight::identity(1), 1, grid_j, 2.0).unwrap();
        let kk = 2.0 * std::f64::consts::PI * k as f64;
        let expect: f64 = (0..=2).map(|b| kk.powi(b)).sum();
        let got = sobolev_norm(&f, &w, 2.0, 2);
        assert!((got - expect).abs() <= 1e-10 * expect, "{got} vs {expect}");
    }

    #[test]
    fn equivalence_identity_weight_all_ratios_one() {
        let grid_j = 7;
        let (w, sys) = identity_setup(grid_j);
        let range = sys.band_range();
        let fam = build_reducing(&w, 2.0, &range).unwrap();
        let params = SpaceParams::new(0.0, 2.0, 2.0, range);
        let f = testfns::random_band_limited(1, grid_j, 1, 6, 13, false);
        let rep = equivalence_report(&f, &w, &fam, &params, &sys).unwrap();
        assert!((rep.f_w - rep.f_aq).abs() <= 1e-12 * rep.f_w);
        assert!((rep.seq_w - rep.seq_aq).abs() <= 1e-12 * rep.seq_w);
        assert!(rep.max_pairwise_ratio.is_finite());

        let zero = GridFunction::zeros(1, grid_j, 1);
        let zrep = equivalence_report(&zero, &w, &fam, &params, &sys).unwrap();
        assert_eq!(zrep.f_w, 0.0);
        assert_eq!(zrep.seq_w, 0.0);
    }

    #[test]
    fn triangle_inequality_for_p_q_geq_one() {
        let grid_j = 6;
        let (w, sys) = identity_setup(grid_j);
        let params = SpaceParams::new(0.3, 2.0, 2.0, sys.band_range());
        for seed in 0..5 {
            let f = testfns::random_band_limited(1, grid_j, 1, 4, seed * 2, false);
            let g = testfns::random_band_limited(1, grid_j, 1, 4, seed * 2 + 1, false);
            let mut sum = f.clone();
            sum.add_assign(&g);
            let nf = f_norm_w(&f, &w, &params, &sys).unwrap().value;
            let ng = f_norm_w(&g, &w, &params, &sys).unwrap().value;
            let ns = f_norm_w(&sum, &w, &params, &sys).unwrap().value;
            assert!(ns <= nf + ng + 1e-10 * (nf + ng));
        }
    }
}
