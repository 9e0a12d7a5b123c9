//! Small dense matrices for weight fields, `m <= 3`.
//!
//! Hot paths (A_p sweeps, norm pipelines) evaluate operator norms of products
//! of symmetric matrices millions of times, so operator norms use closed-form
//! eigenvalue formulas for 2x2 and 3x3 symmetric matrices; spectral powers go
//! through `nalgebra`'s symmetric eigendecomposition, which only runs at
//! field-construction time.

use crate::error::{CoreError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const MAX_M: usize = 3;

/// Relative positive-definiteness tolerance: eigenvalues at or below
/// `PD_EPS * max_eigenvalue` are rejected.
pub const PD_EPS: f64 = 1e-12;

/// A real symmetric `m x m` matrix, `m <= 3`, stored row-major in a fixed
/// array. All shipped weight models are real symmetric; complex vectors are
/// handled by acting on real and imaginary parts separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    pub m: usize,
    e: [f64; 9],
}

impl SymMat {
    pub fn zeros(m: usize) -> Self {
        assert!(m >= 1 && m <= MAX_M);
        SymMat { m, e: [0.0; 9] }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Self::zeros(m);
        for i in 0..m {
            a.e[i * 3 + i] = 1.0;
        }
        a
    }

    pub fn scalar(v: f64) -> Self {
        let mut a = Self::zeros(1);
        a.e[0] = v;
        a
    }

    pub fn from_rows(m: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), m * m);
        let mut a = Self::zeros(m);
        for i in 0..m {
            for j in 0..m {
                a.e[i * 3 + j] = rows[i * m + j];
            }
        }
        debug_assert!(a.is_symmetric(1e-12));
        a
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut a = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            a.e[i * 3 + i] = v;
        }
        a
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.e[i * 3 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.e[i * 3 + j] = v;
        self.e[j * 3 + i] = v;
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.e.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> SymMat {
        let mut a = *self;
        a.e.iter_mut().for_each(|v| *v *= c);
        a
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.m, other.m);
        let mut a = *self;
        for (x, y) in a.e.iter_mut().zip(other.e.iter()) {
            *x += y;
        }
        a
    }

    /// General (not necessarily symmetric) product `self * other`.
    pub fn mul(&self, other: &SymMat) -> Mat {
        assert_eq!(self.m, other.m);
        let m = self.m;
        let mut out = Mat::zeros(m);
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += self.get(i, k) * other.get(k, j);
                }
                out.e[i * 3 + j] = s;
            }
        }
        out
    }

    /// `self * v` for a real vector.
    #[inline]
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += self.e[i * 3 + j] * v[j];
            }
            out[i] = s;
        }
    }

    /// Euclidean norm of `self * y` for a complex vector `y`.
    #[inline]
    pub fn matvec_norm_complex(&self, y: &[Complex64]) -> f64 {
        let m = self.m;
        let mut sum = 0.0;
        for i in 0..m {
            let mut re = 0.0;
            let mut im = 0.0;
            for j in 0..m {
                let a = self.e[i * 3 + j];
                re += a * y[j].re;
                im += a * y[j].im;
            }
            sum += re * re + im * im;
        }
        sum.sqrt()
    }

    /// `self * y` for a complex vector.
    #[inline]
    pub fn matvec_complex(&self, y: &[Complex64], out: &mut [Complex64]) {
        let m = self.m;
        for i in 0..m {
            let mut acc = Complex64::default();
            for j in 0..m {
                acc += self.e[i * 3 + j] * y[j];
            }
            out[i] = acc;
        }
    }

    /// Eigenvalues in ascending order (closed form, symmetric input).
    pub fn eigenvalues(&self) -> [f64; 3] {
        match self.m {
            1 => [self.e[0], 0.0, 0.0],
            2 => {
                let (a, b, c) = (self.e[0], self.e[1], self.e[4]);
                let tr_half = 0.5 * (a + c);
                let disc = (0.5 * (a - c)).hypot(b);
                [tr_half - disc, tr_half + disc, 0.0]
            }
            _ => {
                let a = self;
                let p1 = a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2);
                let q = (a.get(0, 0) + a.get(1, 1) + a.get(2, 2)) / 3.0;
                let p2 = (a.get(0, 0) - q).powi(2)
                    + (a.get(1, 1) - q).powi(2)
                    + (a.get(2, 2) - q).powi(2)
                    + 2.0 * p1;
                if p2 <= 0.0 {
                    return [q, q, q];
                }
                let p = (p2 / 6.0).sqrt();
                let det_b = {
                    let b = |i: usize, j: usize| {
                        (a.get(i, j) - if i == j { q } else { 0.0 }) / p
                    };
                    b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
                };
                let r = (det_b / 2.0).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
                let e2 = 3.0 * q - e1 - e3;
                [e3, e2, e1]
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[self.m - 1]
    }

    /// Operator (spectral) norm.
    pub fn opnorm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[..self.m].iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Spectral power `U diag(lambda^t) U^T`. Fails when the matrix is not
    /// positive definite relative to [`PD_EPS`].
    pub fn power(&self, t: f64) -> Result<SymMat> {
        matrix_power(self, t)
    }

    /// Inverse via the spectral decomposition; PD required.
    pub fn inverse(&self) -> Result<SymMat> {
        matrix_power(self, -1.0)
    }

    fn to_dmatrix(self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.get(i, j))
    }
}

/// A general real `m x m` matrix, used for products like `A_Q W^{-1/p}(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub m: usize,
    e: [f64; 9],
}

impl Mat {
    pub fn zeros(m: usize) -> Self {
        assert!(m >= 1 && m <= MAX_M);
        Mat { m, e: [0.0; 9] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.e[i * 3 + j]
    }

    /// Operator norm: largest singular value, from the closed-form
    /// eigenvalues of `M^T M`.
    pub fn opnorm(&self) -> f64 {
        let m = self.m;
        if m == 1 {
            return self.e[0].abs();
        }
        let mut g = SymMat::zeros(m);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += self.get(k, i) * self.get(k, j);
                }
                g.set(i, j, s);
            }
        }
        g.max_eigenvalue().max(0.0).sqrt()
    }
}

/// Spectral power of a symmetric positive-definite matrix:
/// `U diag(lambda_i^t) U^T`. Symmetric by construction; errors with
/// [`CoreError::NotPositiveDefinite`] when the smallest eigenvalue is at or
/// below `PD_EPS` times the largest.
pub fn matrix_power(a: &SymMat, t: f64) -> Result<SymMat> {
    if a.m == 1 {
        let v = a.e[0];
        if v <= PD_EPS * v.abs().max(1e-300) || v <= 0.0 {
            return Err(CoreError::NotPositiveDefinite {
                min_eig: v,
                threshold: 0.0,
            });
        }
        return Ok(SymMat::scalar(v.powf(t)));
    }
    let eig = nalgebra::SymmetricEigen::new(a.to_dmatrix());
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let threshold = PD_EPS * max_eig.max(1e-300);
    let min_eig = eig.eigenvalues.iter().fold(f64::MAX, |acc, &v| acc.min(v));
    if min_eig <= threshold {
        return Err(CoreError::NotPositiveDefinite { min_eig, threshold });
    }
    let m = a.m;
    let mut out = SymMat::zeros(m);
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for k in 0..m {
                s += eig.eigenvectors[(i, k)] * eig.eigenvalues[k].powf(t) * eig.eigenvectors[(j, k)];
            }
            out.set(i, j, s);
        }
    }
    Ok(out)
}
