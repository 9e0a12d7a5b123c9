//! Cube-indexed coefficient sequences.
//!
//! A [`CoeffSequence`] maps dyadic torus cubes within a scale range to `C^m`
//! vectors, stored densely per level in ascending cube index order (the
//! linear index is row-major over the corner index `k`).

use crate::dyadic::{DyadicCube, ScaleRange};
use crate::error::{CoreError, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    dim: usize,
    components: usize,
    levels: BTreeMap<i32, Vec<Complex64>>,
}

impl CoeffSequence {
    pub fn new(dim: usize, components: usize) -> Self {
        assert!(dim == 1 || dim == 2);
        assert!(components >= 1);
        CoeffSequence {
            dim,
            components,
            levels: BTreeMap::new(),
        }
    }

    /// Allocates zero coefficients for every torus cube in `range`.
    pub fn zeros(dim: usize, components: usize, range: &ScaleRange) -> Self {
        let mut s = Self::new(dim, components);
        for j in range.levels() {
            s.insert_level(j, vec![Complex64::default(); s.level_len(j) * components]);
        }
        s
    }

    fn level_len(&self, j: i32) -> usize {
        assert!(j >= 0);
        1usize << (j as u32 * self.dim as u32)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Inclusive level span currently stored, or `None` when empty.
    pub fn level_span(&self) -> Option<(i32, i32)> {
        let lo = self.levels.keys().next()?;
        let hi = self.levels.keys().last()?;
        Some((*lo, *hi))
    }

    pub fn has_level(&self, j: i32) -> bool {
        self.levels.contains_key(&j)
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.levels.keys().copied()
    }

    /// Installs the dense coefficient block for one level; the data holds
    /// `2^{jn}` cube slots of `m` components in ascending cube order.
    pub fn insert_level(&mut self, j: i32, data: Vec<Complex64>) {
        assert_eq!(data.len(), self.level_len(j) * self.components);
        self.levels.insert(j, data);
    }

    pub fn level(&self, j: i32) -> Result<&[Complex64]> {
        self.levels
            .get(&j)
            .map(|v| v.as_slice())
            .ok_or(CoreError::ScaleOutOfRange {
                j,
                jmin: self.levels.keys().next().copied().unwrap_or(0),
                jmax: self.levels.keys().last().copied().unwrap_or(0),
            })
    }

    pub fn level_mut(&mut self, j: i32) -> Result<&mut [Complex64]> {
        let (jmin, jmax) = self.level_span().unwrap_or((0, 0));
        self.levels
            .get_mut(&j)
            .map(|v| v.as_mut_slice())
            .ok_or(CoreError::ScaleOutOfRange { j, jmin, jmax })
    }

    fn linear_index(&self, q: &DyadicCube) -> usize {
        let per_dim = 1i64 << q.level;
        match self.dim {
            1 => q.index[0].rem_euclid(per_dim) as usize,
            _ => (q.index[0].rem_euclid(per_dim) * per_dim + q.index[1].rem_euclid(per_dim))
                as usize,
        }
    }

    /// Coefficient vector of one cube.
    pub fn get(&self, q: &DyadicCube) -> Result<&[Complex64]> {
        let data = self.level(q.level)?;
        let idx = self.linear_index(q);
        Ok(&data[idx * self.components..(idx + 1) * self.components])
    }

    pub fn set(&mut self, q: &DyadicCube, value: &[Complex64]) -> Result<()> {
        assert_eq!(value.len(), self.components);
        let idx = self.linear_index(q);
        let m = self.components;
        let data = self.level_mut(q.level)?;
        data[idx * m..(idx + 1) * m].copy_from_slice(value);
        Ok(())
    }

    /// Euclidean norm of the coefficient at a linear cube index.
    pub fn norm_at(&self, j: i32, idx: usize) -> Result<f64> {
        let data = self.level(j)?;
        let m = self.components;
        Ok(data[idx * m..(idx + 1) * m]
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn scale(&mut self, c: Complex64) {
        for data in self.levels.values_mut() {
            data.iter_mut().for_each(|v| *v *= c);
        }
    }

    pub fn add(&self, other: &CoeffSequence) -> CoeffSequence {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.components, other.components);
        let mut out = self.clone();
        for (j, data) in &other.levels {
            match out.levels.get_mut(j) {
                Some(mine) => {
                    for (a, b) in mine.iter_mut().zip(data.iter()) {
                        *a += b;
                    }
                }
                None => {
                    out.levels.insert(*j, data.clone());
                }
            }
        }
        out
    }

    /// Sum of squared moduli over all stored coefficients.
    pub fn energy(&self) -> f64 {
        self.levels
            .values()
            .map(|d| d.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// CSV rows `(j, k1[, k2], re1, im1, ..., rem, imm)`.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (&j, data) in &self.levels {
            let per_dim = 1i64 << j;
            for idx in 0..self.level_len(j) {
                let mut fields = vec![j.to_string()];
                match self.dim {
                    1 => fields.push((idx as i64).to_string()),
                    _ => {
                        fields.push((idx as i64 / per_dim).to_string());
                        fields.push((idx as i64 % per_dim).to_string());
                    }
                }
                let m = self.components;
                for v in &data[idx * m..(idx + 1) * m] {
                    fields.push(format!("{:.17e}", v.re));
                    fields.push(format!("{:.17e}", v.im));
                }
                out.push(fields.join(","));
            }
        }
        out
    }
}
