//! Dyadic cube indexing and geometry, and the almost-diagonal decay weight.
//!
//! A cube `Q_{j,k}` has side `2^{-j}` and lower corner `2^{-j} k`. Cubes carry
//! closed-interval semantics for containment, decided in exact integer
//! arithmetic on the `(j, k)` indices so no floating-point boundary
//! misclassification can occur. Distances between cubes restricted to the
//! unit torus use the minimum-image convention.

use crate::error::{CoreError, Result};
use std::fmt;
use std::str::FromStr;

pub const MAX_DIM: usize = 2;

/// The dyadic cube `Q_{j,k}` in dimension `n` (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    /// Scale: side length is `2^{-j}`. Negative levels are legal for
    /// geometry, but torus enumerations only produce `j >= 0`.
    pub level: i32,
    /// Lower-corner index, `n` components used.
    pub index: [i64; MAX_DIM],
    pub dim: usize,
}

impl DyadicCube {
    pub fn new(level: i32, index: &[i64]) -> Self {
        assert!(!index.is_empty() && index.len() <= MAX_DIM);
        let mut k = [0i64; MAX_DIM];
        k[..index.len()].copy_from_slice(index);
        DyadicCube {
            level,
            index: k,
            dim: index.len(),
        }
    }

    /// Side length `2^{-j}`, exact in f64 for |j| < 1023.
    pub fn side_length(&self) -> f64 {
        (2.0f64).powi(-self.level)
    }

    /// Lower corner `2^{-j} k`, exact in f64 for moderate indices.
    pub fn lower_corner(&self) -> Vec<f64> {
        let s = self.side_length();
        self.index[..self.dim].iter().map(|&k| k as f64 * s).collect()
    }

    /// Volume `|Q| = 2^{-jn}`.
    pub fn volume(&self) -> f64 {
        (2.0f64).powi(-self.level * self.dim as i32)
    }

    /// Closed-interval containment `self ⊆ other`, exact integer test.
    pub fn contained_in(&self, other: &DyadicCube) -> bool {
        assert_eq!(self.dim, other.dim);
        if self.level < other.level {
            return false;
        }
        let shift = (self.level - other.level) as u32;
        if shift >= 63 {
            return false;
        }
        let scale = 1i64 << shift;
        (0..self.dim).all(|i| {
            let lo_ok = self.index[i] >= other.index[i] * scale;
            let hi_ok = self.index[i] + 1 <= (other.index[i] + 1) * scale;
            lo_ok && hi_ok
        })
    }

    /// Parent cube one level up.
    pub fn parent(&self) -> DyadicCube {
        let mut k = [0i64; MAX_DIM];
        for i in 0..self.dim {
            k[i] = self.index[i].div_euclid(2);
        }
        DyadicCube {
            level: self.level - 1,
            index: k,
            dim: self.dim,
        }
    }

    /// The level-`j` dyadic cube containing a point of `[0,1)^n`.
    pub fn containing(point: &[f64], level: i32) -> DyadicCube {
        let s = (2.0f64).powi(level);
        let mut k = [0i64; MAX_DIM];
        for (i, &x) in point.iter().enumerate() {
            k[i] = (x * s).floor() as i64;
        }
        DyadicCube {
            level,
            index: k,
            dim: point.len(),
        }
    }
}

impl fmt::Display for DyadicCube {
    /// Text form used in reports: `j:k1,...,kn`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, k) in self.index[..self.dim].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for DyadicCube {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let (j, ks) = s
            .split_once(':')
            .ok_or_else(|| CoreError::Parse(format!("bad cube {s:?}")))?;
        let level: i32 = j
            .parse()
            .map_err(|_| CoreError::Parse(format!("bad cube level in {s:?}")))?;
        let index: Vec<i64> = ks
            .split(',')
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| CoreError::Parse(format!("bad cube index in {s:?}")))
            })
            .collect::<Result<_>>()?;
        if index.is_empty() || index.len() > MAX_DIM {
            return Err(CoreError::Parse(format!("bad cube dimension in {s:?}")));
        }
        Ok(DyadicCube::new(level, &index))
    }
}

/// An inclusive range of dyadic levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleRange {
    pub jmin: i32,
    pub jmax: i32,
    /// Homogeneous ranges may start anywhere; inhomogeneous ranges follow the
    /// `ell(Q) <= 1` convention and must start at level 0.
    pub homogeneous: bool,
}

impl ScaleRange {
    pub fn homogeneous(jmin: i32, jmax: i32) -> Self {
        assert!(jmin <= jmax);
        ScaleRange {
            jmin,
            jmax,
            homogeneous: true,
        }
    }

    pub fn inhomogeneous(jmax: i32) -> Self {
        assert!(jmax >= 0);
        ScaleRange {
            jmin: 0,
            jmax,
            homogeneous: false,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> {
        self.jmin..=self.jmax
    }

    pub fn contains(&self, j: i32) -> bool {
        self.jmin <= j && j <= self.jmax
    }

    pub fn num_levels(&self) -> usize {
        (self.jmax - self.jmin + 1) as usize
    }
}

/// Geometry of a cube: `(side length, lower corner)`, both exact.
pub fn cube_geometry(q: &DyadicCube) -> (f64, Vec<f64>) {
    (q.side_length(), q.lower_corner())
}

/// Distance between cube corners; minimum-image on the torus.
fn corner_distance(q: &DyadicCube, p: &DyadicCube, periodic: bool) -> f64 {
    let xq = q.lower_corner();
    let xp = p.lower_corner();
    let mut sum = 0.0;
    for i in 0..q.dim {
        let mut d = (xq[i] - xp[i]).abs();
        if periodic {
            d = d.rem_euclid(1.0);
            d = d.min(1.0 - d);
        }
        sum += d * d;
    }
    sum.sqrt()
}

/// The decay factor `1 + |x_Q - x_P| / max(ell(Q), ell(P))`.
pub fn distance_factor(q: &DyadicCube, p: &DyadicCube, periodic: bool) -> Result<f64> {
    if q.dim != p.dim {
        return Err(CoreError::DimensionMismatch {
            left: q.dim,
            right: p.dim,
        });
    }
    let l = q.side_length().max(p.side_length());
    Ok(1.0 + corner_distance(q, p, periodic) / l)
}

/// Almost-diagonal weight
/// `omega_QP = min{(ell(P)/ell(Q))^{a1}, (ell(Q)/ell(P))^{a2}} * distance_factor^{-R}`.
pub fn omega(q: &DyadicCube, p: &DyadicCube, a1: f64, a2: f64, r: f64, periodic: bool) -> f64 {
    debug_assert!(r >= 0.0);
    let ratio = p.side_length() / q.side_length();
    let scale = ratio.powf(a1).min(ratio.powf(-a2));
    let df = distance_factor(q, p, periodic).expect("dimension mismatch in omega");
    scale * df.powf(-r)
}

/// Least nonnegative `j` with `Q ⊆ 2^j P`, where `2^j P` is the cube
/// concentric with `P` of side `2^j ell(P)`. Exact rational comparison with
/// denominators `2^{max(level)+1}`. `cap` bounds the search (torus use caps
/// at the level where the dilate covers the domain).
pub fn covering_level(q: &DyadicCube, p: &DyadicCube, cap: u32) -> Result<u32> {
    assert_eq!(q.dim, p.dim);
    // Common denominator 2^(d+1) where d = max(level_q, level_p).
    let d = q.level.max(p.level);
    // Q endpoints: index * 2^(d-level_q) scaled by 2; P center: (2k+1) * 2^(d-level_p).
    let sq = 1i128 << ((d - q.level) as u32 + 1);
    let sp = 1i128 << ((d - p.level) as u32);
    for j in 0..=cap {
        // Half-side of 2^j P in denominator-2^(d+1) units.
        let half = (1i128 << j) * sp;
        let fits = (0..q.dim).all(|i| {
            let center = (2 * p.index[i] as i128 + 1) * sp;
            let qlo = q.index[i] as i128 * sq;
            let qhi = (q.index[i] as i128 + 1) * sq;
            qlo >= center - half && qhi <= center + half
        });
        if fits {
            return Ok(j);
        }
    }
    Err(CoreError::InvalidArgument(format!(
        "no covering dilate of {p} contains {q} within cap 2^{cap}"
    )))
}

/// Empirical constant of the covering estimate: the largest
/// `2^{covering_level(Q, P)} / (max{1, ell(Q)/ell(P)} (1 + dist_factor))`
/// over all cube pairs drawn from the given levels (non-periodic geometry).
/// The dilation constant is implicit in the estimate, so it is fitted and
/// reported rather than assumed.
pub fn covering_constant_fit(dim: usize, levels: std::ops::RangeInclusive<i32>) -> f64 {
    let mut cubes = Vec::new();
    for j in levels {
        for k in -2i64..=2 {
            match dim {
                1 => cubes.push(DyadicCube::new(j, &[k])),
                _ => {
                    for k2 in -2i64..=2 {
                        cubes.push(DyadicCube::new(j, &[k, k2]));
                    }
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for q in &cubes {
        for p in &cubes {
            let j = covering_level(q, p, 40).expect("unbounded lattice");
            let scale = (q.side_length() / p.side_length()).max(1.0);
            let dist = distance_factor(q, p, false).expect("same dimension");
            worst = worst.max((2.0f64).powi(j as i32) / (scale * dist));
        }
    }
    worst
}

/// All torus cubes at one level (`j >= 0`), ascending row-major index order.
pub fn torus_cubes(dim: usize, level: i32) -> Vec<DyadicCube> {
    assert!(level >= 0, "torus enumeration requires j >= 0");
    let per_dim = 1i64 << level;
    let mut out = Vec::new();
    match dim {
        1 => {
            for k in 0..per_dim {
                out.push(DyadicCube::new(level, &[k]));
            }
        }
        _ => {
            for k1 in 0..per_dim {
                for k2 in 0..per_dim {
                    out.push(DyadicCube::new(level, &[k1, k2]));
                }
            }
        }
    }
    out
}

/// Describes the grid cells covered by a (possibly half-shifted) torus cube:
/// for each dimension, the starting cell and the cell count, wrapping
/// cyclically. Valid for cube level `j` with `0 <= j <= grid_j`.
#[derive(Debug, Clone, Copy)]
pub struct CubeCells {
    pub start: [usize; MAX_DIM],
    pub len_per_dim: usize,
    pub dim: usize,
    grid_n: usize,
}

impl CubeCells {
    /// Cells of `Q_{j,k}`; with `half_shift[i]` the cube is translated by
    /// half a side in dimension `i` (the shifted dyadic grid).
    pub fn new(grid_j: u32, cube: &DyadicCube, half_shift: [bool; MAX_DIM]) -> Result<Self> {
        let j = cube.level;
        if j < 0 || j as u32 > grid_j {
            return Err(CoreError::EmptyCube {
                cube: cube.to_string(),
                grid_j,
            });
        }
        let cells_per_side = 1usize << (grid_j - j as u32);
        let grid_n = 1usize << grid_j;
        let mut start = [0usize; MAX_DIM];
        for i in 0..cube.dim {
            let mut s = (cube.index[i].rem_euclid(1 << j) as usize) * cells_per_side;
            if half_shift[i] {
                if cells_per_side == 1 {
                    return Err(CoreError::InvalidArgument(
                        "half shift is not cell-aligned at the finest level".into(),
                    ));
                }
                s = (s + cells_per_side / 2) % grid_n;
            }
            start[i] = s;
        }
        Ok(CubeCells {
            start,
            len_per_dim: cells_per_side,
            dim: cube.dim,
            grid_n,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.len_per_dim.pow(self.dim as u32)
    }

    /// Iterates flat cell indices in ascending (row-major within the cube)
    /// order, wrapping around the torus.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.grid_n;
        let len = self.len_per_dim;
        let dim = self.dim;
        let start = self.start;
        (0..self.num_cells()).map(move |i| match dim {
            1 => (start[0] + i) % n,
            _ => {
                let r = (start[0] + i / len) % n;
                let c = (start[1] + i % len) % n;
                r * n + c
            }
        })
    }

    /// Iterates with a stride so at most `max_per_dim` cells are visited per
    /// dimension; used to cap quadrature cost on very large cubes. The
    /// returned weight is the number of grid cells each visited cell stands
    /// for.
    pub fn iter_strided(&self, max_per_dim: usize) -> (impl Iterator<Item = usize> + '_, f64) {
        let stride = (self.len_per_dim / max_per_dim.min(self.len_per_dim)).max(1);
        let eff = self.len_per_dim / stride;
        let weight = (stride as f64).powi(self.dim as i32);
        let n = self.grid_n;
        let dim = self.dim;
        let start = self.start;
        let it = (0..eff.pow(dim as u32)).map(move |i| match dim {
            1 => (start[0] + (i * stride) % (eff * stride)) % n,
            _ => {
                let r = (start[0] + (i / eff) * stride) % n;
                let c = (start[1] + (i % eff) * stride) % n;
                r * n + c
            }
        });
        (it, weight)
    }
}

/// The half-shift patterns for a dimension: `2^n` grids per level including
/// the unshifted one.
pub fn shift_patterns(dim: usize) -> Vec<[bool; MAX_DIM]> {
    match dim {
        1 => vec![[false, false], [true, false]],
        _ => vec![
            [false, false],
            [true, false],
            [false, true],
            [true, true],
        ],
    }
}
