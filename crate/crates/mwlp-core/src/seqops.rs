//! Sequence-space operator machinery: almost-diagonal operator action,
//! dyadic averaging and maximal operators, the Carleson functional, the
//! per-scale comparison fields `gamma_j`, and the weighted-inequality
//! checkers driven by random trials.

use crate::coeffs::CoeffSequence;
use crate::dyadic::{omega, torus_cubes, CubeCells, DyadicCube, ScaleRange};
use crate::error::{CoreError, Result};
use crate::grid::RealGrid;
use crate::reducing::ReducingFamily;
use crate::weights::WeightGrid;
use num_complex::Complex64;
use serde::Serialize;

/// Almost-diagonal operator entries: either the synthetic decay weight
/// `b_QP = c * omega_QP` at fixed exponents, or explicit sparse entries.
#[derive(Debug, Clone)]
pub enum AlmostDiagonalSpec {
    Synthetic {
        a1: f64,
        a2: f64,
        r: f64,
        scale: f64,
    },
    Sparse(Vec<(DyadicCube, DyadicCube, Complex64)>),
}

/// Admissibility thresholds for exponents `(a1, a2, R)` at parameters
/// `(alpha, p, q, beta)` in dimension `n`: the synthetic operator is
/// almost diagonal precisely when each exponent strictly exceeds its
/// threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityThresholds {
    pub a1: f64,
    pub a2: f64,
    pub r: f64,
}

pub fn admissibility_thresholds(
    alpha: f64,
    p: f64,
    q: f64,
    beta: f64,
    dim: usize,
) -> AdmissibilityThresholds {
    let n = dim as f64;
    let min_pq = p.min(q).min(1.0);
    AdmissibilityThresholds {
        a1: -alpha - n / 2.0 + (beta - n) / p + n / min_pq,
        a2: alpha + n / 2.0 + n / p,
        r: n / min_pq + beta / p,
    }
}

/// Applies `t_Q = sum_P b_QP s_P` over all cubes of `range`.
pub fn almost_diag_apply(
    spec: &AlmostDiagonalSpec,
    s: &CoeffSequence,
    range: &ScaleRange,
) -> Result<CoeffSequence> {
    let dim = s.dim();
    let m = s.components();
    let mut out = CoeffSequence::zeros(dim, m, range);
    match spec {
        AlmostDiagonalSpec::Sparse(entries) => {
            for (q, p, b) in entries {
                let sp = s.get(p)?;
                let mut acc = out.get(q)?.to_vec();
                for (a, v) in acc.iter_mut().zip(sp.iter()) {
                    *a += b * v;
                }
                out.set(q, &acc)?;
            }
        }
        AlmostDiagonalSpec::Synthetic { a1, a2, r, scale } => {
            let mut acc = vec![Complex64::default(); m];
            for jq in range.levels() {
                for q in torus_cubes(dim, jq) {
                    acc.iter_mut().for_each(|v| *v = Complex64::default());
                    for jp in range.levels() {
                        if !s.has_level(jp) {
                            continue;
                        }
                        for p in torus_cubes(dim, jp) {
                            let w = scale * omega(&q, &p, *a1, *a2, *r, true);
                            let sp = s.get(&p)?;
                            for (a, v) in acc.iter_mut().zip(sp.iter()) {
                                *a += w * v;
                            }
                        }
                    }
                    out.set(&q, &acc)?;
                }
            }
        }
    }
    Ok(out)
}

/// Pairwise sum of a power-of-two-length slice; exact on constant input, so
/// the dyadic averaging below is bitwise idempotent.
fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            tree_sum(a) + tree_sum(b)
        }
    }
}

/// The dyadic averaging operator at level `j`: replaces the field on each
/// level-`j` cube by its cell average. Mean-preserving and bitwise
/// idempotent (pairwise summation over the power-of-two cell count).
pub fn averaging(f: &RealGrid, j: i32) -> Result<RealGrid> {
    if j < 0 || j as u32 > f.grid_j {
        return Err(CoreError::ScaleOutOfRange {
            j,
            jmin: 0,
            jmax: f.grid_j as i32,
        });
    }
    let mut out = RealGrid::zeros(f.dim, f.grid_j);
    let mut buf = Vec::new();
    for q in torus_cubes(f.dim, j) {
        let cc = CubeCells::new(f.grid_j, &q, [false, false])?;
        buf.clear();
        buf.extend(cc.iter().map(|c| f.values[c]));
        let avg = tree_sum(&buf) / cc.num_cells() as f64;
        for c in cc.iter() {
            out.values[c] = avg;
        }
    }
    Ok(out)
}

/// Componentwise complex averaging, for vector grid functions.
pub fn averaging_complex(
    f: &crate::grid::GridFunction,
    j: i32,
) -> Result<crate::grid::GridFunction> {
    if j < 0 || j as u32 > f.grid_j() {
        return Err(CoreError::ScaleOutOfRange {
            j,
            jmin: 0,
            jmax: f.grid_j() as i32,
        });
    }
    let m = f.components();
    let mut out = crate::grid::GridFunction::zeros(f.dim(), f.grid_j(), m);
    for q in torus_cubes(f.dim(), j) {
        let cc = CubeCells::new(f.grid_j(), &q, [false, false])?;
        let count = cc.num_cells() as f64;
        let mut avg = vec![Complex64::default(); m];
        for cell in cc.iter() {
            for (a, v) in avg.iter_mut().zip(f.value_at(cell)) {
                *a += v;
            }
        }
        avg.iter_mut().for_each(|v| *v /= count);
        for cell in cc.iter() {
            out.values_mut()[cell * m..(cell + 1) * m].copy_from_slice(&avg);
        }
    }
    Ok(out)
}

/// Dyadic maximal function: `Mf(x) = max_j avg over the level-j cube
/// containing x of |f|`, over levels in `range`.
pub fn dyadic_maximal(f: &RealGrid, range: &ScaleRange) -> Result<RealGrid> {
    let mut out = RealGrid::zeros(f.dim, f.grid_j);
    let abs = RealGrid {
        dim: f.dim,
        grid_j: f.grid_j,
        values: f.values.iter().map(|v| v.abs()).collect(),
    };
    for j in range.levels() {
        let avg = averaging(&abs, j)?;
        for (o, a) in out.values.iter_mut().zip(avg.values.iter()) {
            *o = o.max(*a);
        }
    }
    Ok(out)
}

/// The Carleson functional
/// `sup_Q (1/|Q|) int_Q sup_{j >= level(Q)} alpha_j` over dyadic cubes with
/// levels in `range`; the scale sup also runs over `range` only.
pub fn carleson_norm(alpha: &[(i32, RealGrid)], range: &ScaleRange) -> Result<f64> {
    if alpha.is_empty() {
        return Ok(0.0);
    }
    let dim = alpha[0].1.dim;
    let grid_j = alpha[0].1.grid_j;
    let cells = alpha[0].1.num_cells();
    for (_, g) in alpha {
        assert!(g.values.iter().all(|&v| v >= 0.0), "alpha_j must be >= 0");
        assert_eq!(g.num_cells(), cells);
    }
    // running_max[x] for levels >= j, built descending.
    let mut best = 0.0f64;
    let mut running = vec![0.0f64; cells];
    let mut levels: Vec<i32> = range.levels().collect();
    levels.reverse();
    for &j in &levels {
        for (lev, g) in alpha {
            if *lev == j {
                for (r, v) in running.iter_mut().zip(g.values.iter()) {
                    *r = r.max(*v);
                }
            }
        }
        if j as u32 > grid_j {
            continue;
        }
        for q in torus_cubes(dim, j) {
            let cc = CubeCells::new(grid_j, &q, [false, false])?;
            let avg: f64 =
                cc.iter().map(|c| running[c]).sum::<f64>() / cc.num_cells() as f64;
            best = best.max(avg);
        }
    }
    Ok(best)
}

/// The per-scale comparison fields
/// `gamma_j(x) = sum_{Q in D_j} ||W^{1/p}(x) A_Q^{-1}|| chi_Q(x)`.
pub fn gamma_fields(
    w: &WeightGrid,
    family: &ReducingFamily,
    range: &ScaleRange,
) -> Result<Vec<(i32, RealGrid)>> {
    let mut out = Vec::new();
    for j in range.levels() {
        let mut field = RealGrid::zeros(w.dim(), w.grid_j());
        for q in torus_cubes(w.dim(), j) {
            let aq_inv = family.matrix(&q)?.inverse()?;
            let cc = CubeCells::new(w.grid_j(), &q, [false, false])?;
            for cell in cc.iter() {
                field.values[cell] = w.w_pow(cell).mul(&aq_inv).opnorm();
            }
        }
        out.push((j, field));
    }
    Ok(out)
}

/// `L^p(l^q)` lattice norm of a per-scale family of scalar fields.
pub fn lp_lq_norm(fields: &[RealGrid], p: f64, q: f64) -> f64 {
    if fields.is_empty() {
        return 0.0;
    }
    let cells = fields[0].num_cells();
    let cell_volume = fields[0].cell_volume();
    let mut sum = 0.0;
    for cell in 0..cells {
        let inner = if q.is_infinite() {
            fields
                .iter()
                .map(|f| f.values[cell].abs())
                .fold(0.0f64, f64::max)
        } else {
            fields
                .iter()
                .map(|f| f.values[cell].abs().powf(q))
                .sum::<f64>()
                .powf(1.0 / q)
        };
        sum += inner.powf(p);
    }
    (sum * cell_volume).powf(1.0 / p)
}

/// Which of the two inequality regimes to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GammaMode {
    /// `0 < q <= p < infty` with the per-level hypothesis; compares
    /// `{gamma_j E_j f_j}` against `{E_j f_j}`.
    PerLevel,
    /// `1 < p < infty, 1 <= q <= infty` with the Carleson-type hypothesis;
    /// compares `{gamma_j E_j f_j}` against `{f_j}`.
    Nested,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaCheckReport {
    pub mode: GammaMode,
    pub p: f64,
    pub q: f64,
    /// The hypothesis quantity at probe exponent `p (1 + delta)`.
    pub hypothesis_value: f64,
    pub delta: f64,
    /// Largest LHS/RHS over the trials.
    pub max_ratio: f64,
    /// One `(lhs, rhs, ratio)` per trial.
    pub trials: Vec<(f64, f64, f64)>,
}

/// Evaluates the selected inequality over the supplied trial fields. The
/// hypothesis quantity is computed at exponent `p (1 + delta)` and checked
/// against `blowup_threshold`.
pub fn gamma_check(
    gammas: &[(i32, RealGrid)],
    trials: &[Vec<RealGrid>],
    p: f64,
    q: f64,
    mode: GammaMode,
    delta: f64,
    blowup_threshold: f64,
) -> Result<GammaCheckReport> {
    assert!(!gammas.is_empty());
    let grid_j = gammas[0].1.grid_j;
    let hypothesis_value = match mode {
        GammaMode::PerLevel => {
            // sup_j sup_{Q in D_j} avg_Q gamma_j^{p(1+delta)}.
            let mut worst = 0.0f64;
            for (j, g) in gammas {
                let powed = RealGrid {
                    dim: g.dim,
                    grid_j: g.grid_j,
                    values: g.values.iter().map(|v| v.powf(p * (1.0 + delta))).collect(),
                };
                let avg = averaging(&powed, *j)?;
                worst = worst.max(avg.values.iter().fold(0.0f64, |a, &v| a.max(v)));
            }
            worst
        }
        GammaMode::Nested => {
            let powed: Vec<(i32, RealGrid)> = gammas
                .iter()
                .map(|(j, g)| {
                    (
                        *j,
                        RealGrid {
                            dim: g.dim,
                            grid_j: g.grid_j,
                            values: g
                                .values
                                .iter()
                                .map(|v| v.powf(p * (1.0 + delta)))
                                .collect(),
                        },
                    )
                })
                .collect();
            let jmin = gammas.iter().map(|(j, _)| *j).min().unwrap();
            let jmax = gammas.iter().map(|(j, _)| *j).max().unwrap();
            carleson_norm(&powed, &ScaleRange::homogeneous(jmin, jmax))?
        }
    };
    if hypothesis_value > blowup_threshold {
        return Err(CoreError::HypothesisUnverifiable {
            value: hypothesis_value,
            threshold: blowup_threshold,
        });
    }
    let mut max_ratio = 0.0f64;
    let mut trial_rows = Vec::with_capacity(trials.len());
    for fields in trials {
        assert_eq!(fields.len(), gammas.len());
        let mut averaged = Vec::with_capacity(fields.len());
        let mut weighted = Vec::with_capacity(fields.len());
        for ((j, g), f) in gammas.iter().zip(fields.iter()) {
            let ef = averaging(f, *j)?;
            let wf = RealGrid {
                dim: ef.dim,
                grid_j: ef.grid_j,
                values: ef
                    .values
                    .iter()
                    .zip(g.values.iter())
                    .map(|(e, gv)| e * gv)
                    .collect(),
            };
            averaged.push(ef);
            weighted.push(wf);
        }
        let lhs = lp_lq_norm(&weighted, p, q);
        let rhs = match mode {
            GammaMode::PerLevel => lp_lq_norm(&averaged, p, q),
            GammaMode::Nested => lp_lq_norm(fields, p, q),
        };
        let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
        max_ratio = max_ratio.max(ratio);
        trial_rows.push((lhs, rhs, ratio));
    }
    let _ = grid_j;
    Ok(GammaCheckReport {
        mode,
        p,
        q,
        hypothesis_value,
        delta,
        max_ratio,
        trials: trial_rows,
    })
}
