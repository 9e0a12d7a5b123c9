//! Reducing operators `A_Q` for a sampled matrix weight, with verified
//! comparison constants and fitted doubling constants.
//!
//! Three constructions are used, keyed on `(p, m)`:
//!
//! - `scalar` (`m = 1`): `A_Q = (avg_Q w)^{1/p}`, exact;
//! - `gram2` (`p = 2`): `A_Q = (avg_Q W)^{1/2}`, exact because
//!   `rho_Q(y)^2 = y^T (avg_Q W) y`;
//! - `mvee` (otherwise): directions are pushed to the `rho_Q` unit sphere and
//!   the minimum-volume origin-centered ellipsoid enclosing the point set is
//!   computed by a Khachiyan-style exchange iteration with away steps; `A_Q`
//!   is the square root of the defining matrix.
//!
//! For `p < 1` the `rho_Q` unit ball may be non-convex and the ellipsoid of
//! the sampled points is only verified empirically; `verify_reducing` reports
//! the achieved `(c1, c2)` and nothing downstream assumes more.

use crate::dyadic::{torus_cubes, CubeCells, DyadicCube, ScaleRange};
use crate::error::{CoreError, Result};
use crate::linalg::{Mat, SymMat};
use crate::weights::{unit_directions, WeightGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Construction strategy tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducingStrategy {
    Gram2,
    Mvee,
    Scalar,
}

impl ReducingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ReducingStrategy::Gram2 => "gram2",
            ReducingStrategy::Mvee => "mvee",
            ReducingStrategy::Scalar => "scalar",
        }
    }
}

/// A family `Q -> A_Q` of positive definite matrices over a scale range.
#[derive(Debug, Clone)]
pub struct ReducingFamily {
    p: f64,
    dim: usize,
    m: usize,
    range: ScaleRange,
    strategy: ReducingStrategy,
    /// Per level: matrices in ascending cube index order.
    levels: BTreeMap<i32, Vec<SymMat>>,
    /// Verified sandwich constants, when `verify_reducing` has run.
    pub verified: Option<(f64, f64)>,
}

impl ReducingFamily {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn range(&self) -> ScaleRange {
        self.range
    }

    pub fn strategy(&self) -> ReducingStrategy {
        self.strategy
    }

    fn linear_index(&self, q: &DyadicCube) -> usize {
        let per_dim = 1i64 << q.level;
        match self.dim {
            1 => q.index[0].rem_euclid(per_dim) as usize,
            _ => {
                (q.index[0].rem_euclid(per_dim) * per_dim + q.index[1].rem_euclid(per_dim))
                    as usize
            }
        }
    }

    /// The matrix for a cube, or `MissingCube`.
    pub fn matrix(&self, q: &DyadicCube) -> Result<&SymMat> {
        self.levels
            .get(&q.level)
            .and_then(|v| v.get(self.linear_index(q)))
            .ok_or_else(|| CoreError::MissingCube {
                cube: q.to_string(),
            })
    }

    /// All matrices at one level in ascending cube index order.
    pub fn level_matrices(&self, j: i32) -> Result<&[SymMat]> {
        self.levels
            .get(&j)
            .map(|v| v.as_slice())
            .ok_or_else(|| CoreError::MissingCube {
                cube: format!("{j}:*"),
            })
    }

    /// CSV rows `(j, k1[, k2], entries row-major)` for export.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (&j, mats) in &self.levels {
            for (idx, q) in torus_cubes(self.dim, j).iter().enumerate() {
                let mut fields: Vec<String> = vec![j.to_string()];
                fields.extend(q.index[..self.dim].iter().map(|k| k.to_string()));
                fields.extend(mats[idx].rows().iter().map(|v| format!("{v:.17e}")));
                out.push(fields.join(","));
            }
        }
        out
    }
}

/// The averaged weight norm
/// `rho_Q(y) = ((1/|Q|) int_Q |W^{1/p}(x) y|^p dx)^{1/p}`.
pub fn average_norm(w: &WeightGrid, p: f64, q: &DyadicCube, y: &[Complex64]) -> Result<f64> {
    let cc = CubeCells::new(w.grid_j(), q, [false, false]).map_err(|_| CoreError::EmptyCube {
        cube: q.to_string(),
        grid_j: w.grid_j(),
    })?;
    let mut sum = 0.0;
    for cell in cc.iter() {
        sum += w.w_pow(cell).matvec_norm_complex(y).powf(p);
    }
    Ok((sum / cc.num_cells() as f64).powf(1.0 / p))
}

fn real_to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Builds the reducing family for `(w, p)` over a scale range.
pub fn build_reducing(w: &WeightGrid, p: f64, cubes: &ScaleRange) -> Result<ReducingFamily> {
    if cubes.jmin < 0 || cubes.jmax > w.grid_j() as i32 {
        return Err(CoreError::ScaleOutOfRange {
            j: cubes.jmax,
            jmin: 0,
            jmax: w.grid_j() as i32,
        });
    }
    let m = w.components();
    let strategy = if m == 1 {
        ReducingStrategy::Scalar
    } else if p == 2.0 {
        ReducingStrategy::Gram2
    } else {
        ReducingStrategy::Mvee
    };
    let n_dirs = if m == 2 { 64 } else { 256 };
    let dirs = unit_directions(m, n_dirs);

    let mut levels = BTreeMap::new();
    for j in cubes.levels() {
        let cube_list = torus_cubes(w.dim(), j);
        let mats: Vec<Result<SymMat>> = cube_list
            .par_iter()
            .map(|q| -> Result<SymMat> {
                match strategy {
                    ReducingStrategy::Scalar => {
                        let cc = CubeCells::new(w.grid_j(), q, [false, false])?;
                        let avg = cc.iter().map(|c| w.w(c).get(0, 0)).sum::<f64>()
                            / cc.num_cells() as f64;
                        Ok(SymMat::scalar(avg.powf(1.0 / p)))
                    }
                    ReducingStrategy::Gram2 => {
                        let cc = CubeCells::new(w.grid_j(), q, [false, false])?;
                        let mut avg = SymMat::zeros(m);
                        for c in cc.iter() {
                            avg = avg.add(w.w(c));
                        }
                        avg = avg.scale(1.0 / cc.num_cells() as f64);
                        avg.power(0.5)
                    }
                    ReducingStrategy::Mvee => {
                        let mut points = Vec::with_capacity(dirs.len());
                        for d in &dirs {
                            let rho = average_norm(w, p, q, &real_to_complex(d))?;
                            points.push(d.iter().map(|&v| v / rho).collect::<Vec<f64>>());
                        }
                        let e = khachiyan_mvee(m, &points, 1e-8, 100_000)?;
                        e.power(0.5)
                    }
                }
            })
            .collect();
        let mats: Result<Vec<SymMat>> = mats.into_iter().collect();
        levels.insert(j, mats?);
    }
    Ok(ReducingFamily {
        p,
        dim: w.dim(),
        m,
        range: *cubes,
        strategy,
        levels,
        verified: None,
    })
}

/// Minimum-volume origin-centered ellipsoid `{z : z^T E z <= 1}` enclosing a
/// symmetric point set, by Khachiyan-style ascent on the dual design weights:
/// exact-line-search exchange steps (add / Wolfe-Atwood away), interleaved
/// with damped KKT-Newton shots on the active support once the exchange phase
/// slows down. Terminates when the dual gap `kappa_max/m - 1` falls below
/// `tol`, or when the enclosing ellipsoid matrix has stabilized to `tol`
/// relative change (point sets sampled from nearly constant weights are
/// near-ellipsoidal, which makes the support selection degenerate while the
/// ellipsoid itself is already converged). The returned matrix is
/// `X^{-1} / kappa_max`, so every input point satisfies `z^T E z <= 1`
/// exactly.
pub fn khachiyan_mvee(
    m: usize,
    points: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<SymMat> {
    let d_count = points.len();
    assert!(d_count > m);
    let mf = m as f64;
    let mut u = vec![1.0 / d_count as f64; d_count];

    let x_of = |u: &[f64]| -> SymMat {
        let mut x = SymMat::zeros(m);
        for (ud, z) in u.iter().zip(points.iter()) {
            if *ud == 0.0 {
                continue;
            }
            for i in 0..m {
                for j in i..m {
                    x.set(i, j, x.get(i, j) + ud * z[i] * z[j]);
                }
            }
        }
        x
    };
    let kap = |xinv: &SymMat, a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += a[i] * xinv.get(i, j) * b[j];
            }
        }
        s
    };
    let ellipsoid = |xinv: &SymMat, kmax: f64| xinv.scale(1.0 / kmax.max(mf));

    let mut gap;
    let mut iters = 0usize;
    let mut best_gap = f64::MAX;
    let mut best_u = u.clone();
    let mut next_polish = POLISH_AFTER.min(max_iter);
    while iters < max_iter {
        // Exchange block.
        for _ in 0..50 {
            iters += 1;
            let xinv = x_of(&u).inverse()?;
            let kappa: Vec<f64> = points.iter().map(|z| kap(&xinv, z, z)).collect();
            let (mut ai, mut av) = (0usize, f64::MIN);
            let (mut wi, mut wv) = (0usize, f64::MAX);
            for d in 0..d_count {
                if kappa[d] > av {
                    av = kappa[d];
                    ai = d;
                }
                if u[d] > 0.0 && kappa[d] < wv {
                    wv = kappa[d];
                    wi = d;
                }
            }
            gap = av / mf - 1.0;
            if gap <= tol {
                return Ok(ellipsoid(&xinv, av));
            }
            let away_gap = 1.0 - wv / mf;
            if gap >= away_gap {
                let lambda = (av - mf) / (mf * (av - 1.0));
                for v in u.iter_mut() {
                    *v *= 1.0 - lambda;
                }
                u[ai] += lambda;
            } else {
                // Away step; for kappa <= 1 the objective improves all the
                // way to dropping the point.
                let full_drop = -u[wi] / (1.0 - u[wi]);
                let lambda = if wv > 1.0 {
                    ((wv - mf) / (mf * (wv - 1.0))).max(full_drop)
                } else {
                    full_drop
                };
                for v in u.iter_mut() {
                    *v *= 1.0 - lambda;
                }
                u[wi] += lambda;
                if u[wi] < 1e-300 {
                    u[wi] = 0.0;
                }
            }
        }

        // Newton shots on the active support.
        for _round in 0..20 {
            iters += 1;
            let xinv = x_of(&u).inverse()?;
            let kappa: Vec<f64> = points.iter().map(|z| kap(&xinv, z, z)).collect();
            let av = kappa.iter().cloned().fold(f64::MIN, f64::max);
            gap = av / mf - 1.0;
            if gap <= tol {
                return Ok(ellipsoid(&xinv, av));
            }
            let support: Vec<usize> = (0..d_count).filter(|&d| u[d] > 1e-8).collect();
            let s = support.len();
            if s <= m {
                break;
            }
            // Bordered KKT system [K.K, 1; 1^T, 0], Tikhonov-regularized.
            let mut sys = nalgebra::DMatrix::zeros(s + 1, s + 1);
            let mut rhs = nalgebra::DVector::zeros(s + 1);
            for (r, &dr) in support.iter().enumerate() {
                rhs[r] = kappa[dr] - mf;
                for (c, &dcl) in support.iter().enumerate() {
                    let k = kap(&xinv, &points[dr], &points[dcl]);
                    sys[(r, c)] = k * k;
                }
                sys[(r, s)] = 1.0;
                sys[(s, r)] = 1.0;
            }
            let trace: f64 = (0..s).map(|r| sys[(r, r)]).sum();
            for r in 0..s {
                sys[(r, r)] += 1e-12 * trace / s as f64;
            }
            let delta = match sys.lu().solve(&rhs) {
                Some(d) => d,
                None => break,
            };
            let residual = |u: &[f64]| -> f64 {
                let xinv = match x_of(u).inverse() {
                    Ok(v) => v,
                    Err(_) => return f64::MAX,
                };
                let mut r = 0.0f64;
                for (d, z) in points.iter().enumerate() {
                    let k = kap(&xinv, z, z);
                    r = r.max(k - mf);
                    if u[d] > 1e-8 {
                        r = r.max((k - mf).abs());
                    }
                }
                r
            };
            let res0 = residual(&u);
            let mut t = 1.0f64;
            let mut accepted = false;
            for _bt in 0..30 {
                let mut cand = u.clone();
                let mut feasible = true;
                for (r, &dr) in support.iter().enumerate() {
                    cand[dr] = u[dr] + t * delta[r];
                    if cand[dr] < 0.0 {
                        feasible = false;
                        break;
                    }
                }
                if feasible {
                    let total: f64 = cand.iter().sum();
                    for v in cand.iter_mut() {
                        *v /= total;
                    }
                    if residual(&cand) < res0 * (1.0 - 0.25 * t) {
                        u = cand;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        // Track the best enclosure seen so far.
        let xinv = x_of(&u).inverse()?;
        let kmax = points
            .iter()
            .map(|z| kap(&xinv, z, z))
            .fold(f64::MIN, f64::max);
        gap = kmax / mf - 1.0;
        if gap < best_gap {
            best_gap = gap;
            best_u = u.clone();
        }
        if best_gap <= tol {
            let xinv = x_of(&best_u).inverse()?;
            let kmax = points
                .iter()
                .map(|z| kap(&xinv, z, z))
                .fold(f64::MIN, f64::max);
            return Ok(ellipsoid(&xinv, kmax));
        }
        if iters < next_polish {
            continue;
        }
        next_polish = (iters + POLISH_AFTER / 4).min(max_iter);

        // Contact-set polish. Point sets sampled from nearly constant
        // weights are near-ellipsoidal, which makes the optimal support
        // combinatorially degenerate and the exchange phase arbitrarily
        // slow, while the ellipsoid itself is long since determined.
        // Solving the stationarity system in least squares over the whole
        // near-contact set is a smooth, deterministic function of the
        // points, so it does not depend on how the exchange phase resolved
        // the ties. If the polished gap is still open, the outer loop
        // resumes exchange steps from the polished weights.
        u = best_u.clone();
        for _round in 0..12 {
            let xinv = x_of(&u).inverse()?;
            let kappa: Vec<f64> = points.iter().map(|z| kap(&xinv, z, z)).collect();
            let contact: Vec<usize> = (0..d_count)
                .filter(|&d| kappa[d] >= mf * (1.0 - 1e-3))
                .collect();
            let s = contact.len();
            if s < m {
                break;
            }
            let mut sys = nalgebra::DMatrix::zeros(s + 1, s + 1);
            let mut rhs = nalgebra::DVector::zeros(s + 1);
            for (r, &dr) in contact.iter().enumerate() {
                rhs[r] = kappa[dr] - mf;
                for (c, &dcl) in contact.iter().enumerate() {
                    let k = kap(&xinv, &points[dr], &points[dcl]);
                    sys[(r, c)] = k * k;
                }
                sys[(r, s)] = 1.0;
                sys[(s, r)] = 1.0;
            }
            let trace: f64 = (0..s).map(|r| sys[(r, r)]).sum();
            for r in 0..s {
                sys[(r, r)] += 1e-10 * trace / s as f64;
            }
            let delta = match sys.lu().solve(&rhs) {
                Some(d) => d,
                None => break,
            };
        // Damped step, accepted on the contact-set residual.
            let residual = |u: &[f64]| -> f64 {
                let xinv = match x_of(u).inverse() {
                    Ok(v) => v,
                    Err(_) => return f64::MAX,
                };
                let mut out = 0.0f64;
                for (d, z) in points.iter().enumerate() {
                    let k = kap(&xinv, z, z);
                    out = out.max(k - mf);
                    if contact.binary_search(&d).is_ok() {
                        out = out.max((k - mf).abs());
                    }
                }
                out
            };
            let res0 = residual(&u);
            let mut t = 1.0f64;
            let mut moved = false;
            for _bt in 0..24 {
                let mut cand = u.clone();
                for (r, &dr) in contact.iter().enumerate() {
                    cand[dr] = (u[dr] + t * delta[r]).max(0.0);
                }
                let total: f64 = cand.iter().sum();
                for v in cand.iter_mut() {
                    *v /= total;
                }
                if residual(&cand) < res0 {
                    u = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let xinv = x_of(&u).inverse()?;
        let kmax = points
            .iter()
            .map(|z| kap(&xinv, z, z))
            .fold(f64::MIN, f64::max);
        gap = kmax / mf - 1.0;
        if gap <= PLATEAU_GAP {
            return Ok(ellipsoid(&xinv, kmax));
        }
        if gap < best_gap {
            best_gap = gap;
            best_u = u.clone();
        }
    }
    Err(CoreError::MveeNonConvergence {
        iterations: max_iter,
        gap: best_gap,
    })
}

/// Exchange/Newton iterations spent before handing a still-open gap to the
/// deterministic contact-set polish.
const POLISH_AFTER: usize = 20_000;

/// Largest dual gap accepted from the polished solution; the volume of the
/// returned ellipsoid is then within `(1 + PLATEAU_GAP)^{m/2}` of optimal,
/// far inside the sampling slack of any comparison made with it.
const PLATEAU_GAP: f64 = 1e-4;

/// Complex direction sample: the real Fibonacci directions plus variants with
/// deterministic componentwise phase rotations, so the verified constants see
/// genuinely complex vectors for `m >= 2`.
pub fn complex_directions(m: usize, count: usize) -> Vec<Vec<Complex64>> {
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let real = unit_directions(m, count);
    let mut out: Vec<Vec<Complex64>> = real.iter().map(|d| real_to_complex(d)).collect();
    if m >= 2 {
        for (di, d) in real.iter().enumerate() {
            let y: Vec<Complex64> = d
                .iter()
                .enumerate()
                .map(|(l, &v)| {
                    Complex64::from_polar(v, 2.0 * PI * ((di as f64 * golden + 0.25 * l as f64) % 1.0))
                })
                .collect();
            out.push(y);
        }
    }
    out
}

/// Measures the sandwich constants
/// `c1 = min rho_Q(y)/|A_Q y|`, `c2 = max rho_Q(y)/|A_Q y|`
/// over every cube in the family's range and the given directions.
pub fn verify_reducing(
    w: &WeightGrid,
    p: f64,
    family: &ReducingFamily,
    directions: &[Vec<Complex64>],
) -> Result<(f64, f64)> {
    let mut c1 = f64::MAX;
    let mut c2 = f64::MIN;
    for j in family.range().levels() {
        let cubes = torus_cubes(family.dim(), j);
        let ratios: Vec<Result<(f64, f64)>> = cubes
            .par_iter()
            .map(|q| -> Result<(f64, f64)> {
                let a_q = family.matrix(q)?;
                let mut lo = f64::MAX;
                let mut hi = f64::MIN;
                for y in directions {
                    let rho = average_norm(w, p, q, y)?;
                    let ay = a_q.matvec_norm_complex(y);
                    let ratio = rho / ay;
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
                Ok((lo, hi))
            })
            .collect();
        for r in ratios {
            let (lo, hi) = r?;
            c1 = c1.min(lo);
            c2 = c2.max(hi);
        }
    }
    Ok((c1, c2))
}

/// Fitted strong and weak doubling constants of a family.
#[derive(Debug, Clone, Copy)]
pub struct DoublingConstants {
    pub beta_strong: f64,
    pub c_strong: f64,
    pub r_weak: f64,
    pub c_weak: f64,
}

/// Fits the smallest exponent on a 0.1-step grid at which the fitted constant
/// plateaus (within 5% of its minimum over the grid), then reports that
/// constant.
pub fn doubling_constants(family: &ReducingFamily) -> Result<DoublingConstants> {
    let range = family.range();
    if range.num_levels() < 2 {
        return Err(CoreError::InvalidArgument(
            "doubling constants need at least two levels".into(),
        ));
    }
    let n = family.dim() as f64;
    let p = family.p();

    // Collect all (Q, P) data once: level pair, distance factor, norm.
    struct PairDatum {
        lq: f64,
        lp: f64,
        dist_factor: f64,
        norm_p: f64,
        same_level_sep: Option<f64>,
    }
    // Inverses cached per cube; norms are then evaluated per pair.
    let mut inverses: std::collections::BTreeMap<i32, Vec<SymMat>> = std::collections::BTreeMap::new();
    for j in range.levels() {
        let mats = family.level_matrices(j)?;
        let inv: Result<Vec<SymMat>> = mats.iter().map(|a| a.inverse()).collect();
        inverses.insert(j, inv?);
    }
    let mut pairs = Vec::new();
    for jq in range.levels() {
        for jp in range.levels() {
            let qs = torus_cubes(family.dim(), jq);
            let ps = torus_cubes(family.dim(), jp);
            for q in &qs {
                let aq = family.matrix(q)?;
                for (pidx, pcube) in ps.iter().enumerate() {
                    let ap_inv = &inverses[&jp][pidx];
                    let norm = aq.mul(ap_inv).opnorm();
                    let df = crate::dyadic::distance_factor(q, pcube, true)?;
                    let same_level_sep = if jq == jp {
                        let sep: f64 = (0..family.dim())
                            .map(|i| {
                                let per = 1i64 << jq;
                                let d = (q.index[i] - pcube.index[i]).rem_euclid(per);
                                let d = d.min(per - d) as f64;
                                d * d
                            })
                            .sum::<f64>()
                            .sqrt();
                        Some(sep)
                    } else {
                        None
                    };
                    pairs.push(PairDatum {
                        lq: q.side_length(),
                        lp: pcube.side_length(),
                        dist_factor: df,
                        norm_p: norm.powf(p),
                        same_level_sep,
                    });
                }
            }
        }
    }

    // Strong doubling: c(beta) = max over pairs of LHS / RHS(beta).
    let c_of_beta = |beta: f64| -> f64 {
        pairs
            .iter()
            .map(|d| {
                let scale = (d.lp / d.lq).powf(n).max((d.lq / d.lp).powf(beta - n));
                d.norm_p / (scale * d.dist_factor.powf(beta))
            })
            .fold(f64::MIN, f64::max)
    };
    let beta_grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.1).collect();
    let cs: Vec<f64> = beta_grid.iter().map(|&b| c_of_beta(b)).collect();
    let c_min = cs.iter().fold(f64::MAX, |a, &v| a.min(v));
    let pick = cs
        .iter()
        .position(|&c| c <= 1.05 * c_min)
        .unwrap_or(cs.len() - 1);
    let beta_strong = beta_grid[pick];
    let c_strong = cs[pick];

    // Weak doubling over same-level pairs: ||A_Q A_P^{-1}|| <= c (1+|k-l|)^r.
    let c_of_r = |r: f64| -> f64 {
        pairs
            .iter()
            .filter_map(|d| {
                d.same_level_sep
                    .map(|sep| d.norm_p.powf(1.0 / p) / (1.0 + sep).powf(r))
            })
            .fold(f64::MIN, f64::max)
    };
    let r_grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.1).collect();
    let cw: Vec<f64> = r_grid.iter().map(|&r| c_of_r(r)).collect();
    let cw_min = cw.iter().fold(f64::MAX, |a, &v| a.min(v));
    let pick_w = cw
        .iter()
        .position(|&c| c <= 1.05 * cw_min)
        .unwrap_or(cw.len() - 1);

    Ok(DoublingConstants {
        beta_strong,
        c_strong,
        r_weak: r_grid[pick_w],
        c_weak: cw[pick_w],
    })
}

/// Operator-norm of `A B` for two family matrices; exposed for tests.
pub fn product_norm(a: &SymMat, b: &SymMat) -> f64 {
    let prod: Mat = a.mul(b);
    prod.opnorm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::MatrixWeight;

    #[test]
    fn scalar_family_is_exact() {
        let model = MatrixWeight::ScalarPower {
            m: 1,
            a: 0.5,
            center: vec![0.5],
        };
        let w = WeightGrid::sample(&model, 1, 6, 3.0).unwrap();
        let fam = build_reducing(&w, 3.0, &ScaleRange::homogeneous(0, 5)).unwrap();
        assert_eq!(fam.strategy(), ReducingStrategy::Scalar);
        let dirs = complex_directions(1, 4);
        let (c1, c2) = verify_reducing(&w, 3.0, &fam, &dirs).unwrap();
        assert!(c1 >= 1.0 - 1e-12 && c2 <= 1.0 + 1e-12, "c1={c1} c2={c2}");
    }

    #[test]
    fn gram2_family_is_exact() {
        let model = MatrixWeight::RotatedDiagonal {
            a: vec![0.5, -0.25],
            center: vec![0.5],
            angle_freq: 1,
        };
        let w = WeightGrid::sample(&model, 1, 6, 2.0).unwrap();
        let fam = build_reducing(&w, 2.0, &ScaleRange::homogeneous(0, 5)).unwrap();
        assert_eq!(fam.strategy(), ReducingStrategy::Gram2);
        let dirs = complex_directions(2, 16);
        let (c1, c2) = verify_reducing(&w, 2.0, &fam, &dirs).unwrap();
        assert!(c1 >= 1.0 - 1e-9 && c2 <= 1.0 + 1e-9, "c1={c1} c2={c2}");
    }

    #[test]
    fn mvee_recovers_constant_weight() {
        let c = SymMat::from_rows(2, &[2.0, 0.4, 0.4, 1.0]);
        let w = WeightGrid::sample(&MatrixWeight::Constant(c), 1, 4, 1.0).unwrap();
        let fam = build_reducing(&w, 1.0, &ScaleRange::homogeneous(0, 3)).unwrap();
        assert_eq!(fam.strategy(), ReducingStrategy::Mvee);
        // C^{1/p} with p = 1 is C itself.
        let expect = c;
        let got = fam.matrix(&DyadicCube::new(2, &[1])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (got.get(i, j) - expect.get(i, j)).abs() < 5e-3,
                    "entry ({i},{j}): {} vs {}",
                    got.get(i, j),
                    expect.get(i, j)
                );
            }
        }
    }

    #[test]
    fn mvee_direction_permutation_invariance() {
        let dirs = unit_directions(2, 48);
        let points: Vec<Vec<f64>> = dirs
            .iter()
            .map(|d| vec![d[0] / 1.3, d[1] / 0.7])
            .collect();
        let e1 = khachiyan_mvee(2, &points, 1e-8, 100_000).unwrap();
        let mut permuted = points.clone();
        permuted.rotate_left(17);
        permuted.reverse();
        let e2 = khachiyan_mvee(2, &permuted, 1e-8, 100_000).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((e1.get(i, j) - e2.get(i, j)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn scaling_equivariance() {
        let model = MatrixWeight::DiagonalPower {
            a: vec![0.3, -0.2],
            center: vec![0.5],
        };
        let p = 3.0;
        let w = WeightGrid::sample(&model, 1, 5, p).unwrap();
        // Coarse cubes see strong weight variation, so the enclosing
        // ellipsoid is sharply determined and the solver resolves it fully;
        // equivariance then holds to solver precision.
        let range = ScaleRange::homogeneous(1, 2);
        let fam = build_reducing(&w, p, &range).unwrap();

        // Replacing W by c*W multiplies every A_Q by c^{1/p}. The ellipsoid
        // solver resolves ties between mirror-symmetric directions at the
        // dual-gap scale, so the mvee strategy is compared at 1e-5; the
        // closed-form strategies are exactly equivariant (see below).
        let c: f64 = 5.0;
        let mut ws = w.clone();
        ws.scale_in_place(c);
        let fam_s = build_reducing(&ws, p, &range).unwrap();
        for j in range.levels() {
            let a = fam.level_matrices(j).unwrap();
            let b = fam_s.level_matrices(j).unwrap();
            for (ma, mb) in a.iter().zip(b.iter()) {
                for i in 0..2 {
                    for k in 0..2 {
                        let expect = ma.get(i, k) * c.powf(1.0 / p);
                        assert!(
                            (mb.get(i, k) - expect).abs() <= 1e-5 * expect.abs().max(1.0),
                            "{} vs {}",
                            mb.get(i, k),
                            expect
                        );
                    }
                }
            }
        }

        // Scalar strategy: exact equivariance.
        let model1 = MatrixWeight::ScalarPower {
            m: 1,
            a: 0.5,
            center: vec![0.5],
        };
        let w1 = WeightGrid::sample(&model1, 1, 5, p).unwrap();
        let fam1 = build_reducing(&w1, p, &range).unwrap();
        let mut w1s = w1.clone();
        w1s.scale_in_place(c);
        let fam1s = build_reducing(&w1s, p, &range).unwrap();
        for j in range.levels() {
            for (ma, mb) in fam1
                .level_matrices(j)
                .unwrap()
                .iter()
                .zip(fam1s.level_matrices(j).unwrap())
            {
                let expect = ma.get(0, 0) * c.powf(1.0 / p);
                assert!((mb.get(0, 0) - expect).abs() <= 1e-8 * expect.abs());
            }
        }
    }

    #[test]
    fn weak_doubling_follows_from_strong() {
        // On shipped families the weak constants are dominated by the
        // strong ones (the weak estimate is the same-level restriction).
        let models = [
            MatrixWeight::ScalarPower {
                m: 1,
                a: 0.5,
                center: vec![0.5],
            },
            MatrixWeight::ScalarPower {
                m: 2,
                a: 0.5,
                center: vec![0.5],
            },
        ];
        for model in models {
            let p = 2.0;
            let w = WeightGrid::sample(&model, 1, 7, p).unwrap();
            let fam = build_reducing(&w, p, &ScaleRange::homogeneous(1, 5)).unwrap();
            let d = doubling_constants(&fam).unwrap();
            // The weak estimate is the p-th root of the same-level strong
            // estimate, so its ideal constant is c_strong^{1/p}; the fitted
            // values carry the 5% plateau slack of the exponent grid.
            let bound = d.c_strong.max(d.c_strong.powf(1.0 / p)) * 1.05 + 1e-12;
            assert!(d.c_weak <= bound, "{d:?}");
            assert!(d.r_weak <= d.beta_strong / p + 0.1, "{d:?}");
        }
    }

    #[test]
    fn identity_family_doubling() {
        let w = WeightGrid::sample(&MatrixWeight::identity(2), 1, 5, 2.0).unwrap();
        let fam = build_reducing(&w, 2.0, &ScaleRange::homogeneous(0, 4)).unwrap();
        let d = doubling_constants(&fam).unwrap();
        assert!((d.beta_strong - 1.0).abs() < 1e-9, "beta = {}", d.beta_strong);
        assert!((d.c_strong - 1.0).abs() < 1e-12);
        assert!(d.r_weak.abs() < 1e-9);
        assert!((d.c_weak - 1.0).abs() < 1e-12);
    }
}
