//! Vector-valued periodic grid functions.
//!
//! A [`GridFunction`] holds `C^m`-valued samples at the cell centers
//! `x_i = (i + 1/2)/N` of `[0,1)^n`, with `N = 2^J` samples per dimension and
//! `n` in {1, 2}. Storage is row-major over the spatial index, components
//! interleaved: sample `i` occupies `values[i*m .. (i+1)*m]`.

use crate::error::{CoreError, Result};
use crate::fft::{bin_to_freq, CenteredFft};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};

/// A sampled function on the unit torus with values in `C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    grid_j: u32,
    components: usize,
    values: Vec<Complex64>,
}

impl GridFunction {
    /// Zero function on an `N = 2^grid_j` per-dimension grid.
    pub fn zeros(dim: usize, grid_j: u32, components: usize) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        assert!(components >= 1);
        let n = 1usize << grid_j;
        GridFunction {
            dim,
            grid_j,
            components,
            values: vec![Complex64::default(); n.pow(dim as u32) * components],
        }
    }

    pub fn from_values(dim: usize, grid_j: u32, components: usize, values: Vec<Complex64>) -> Self {
        let n = 1usize << grid_j;
        assert_eq!(values.len(), n.pow(dim as u32) * components);
        GridFunction {
            dim,
            grid_j,
            components,
            values,
        }
    }

    /// Builds a function from a closure of the cell-center coordinates.
    pub fn from_fn(
        dim: usize,
        grid_j: u32,
        components: usize,
        mut f: impl FnMut(&[f64]) -> Vec<Complex64>,
    ) -> Self {
        let mut g = Self::zeros(dim, grid_j, components);
        let n = g.samples_per_dim();
        let mut coords = [0.0f64; 2];
        for cell in 0..g.num_cells() {
            g.cell_center(cell, &mut coords);
            let v = f(&coords[..dim]);
            assert_eq!(v.len(), components);
            g.values[cell * components..(cell + 1) * components].copy_from_slice(&v);
        }
        debug_assert_eq!(g.num_cells(), n.pow(dim as u32));
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_j(&self) -> u32 {
        self.grid_j
    }

    /// Samples per dimension, `N = 2^J`.
    pub fn samples_per_dim(&self) -> usize {
        1usize << self.grid_j
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Total number of spatial cells, `N^n`.
    pub fn num_cells(&self) -> usize {
        self.samples_per_dim().pow(self.dim as u32)
    }

    /// Volume of one grid cell, `N^{-n}`.
    pub fn cell_volume(&self) -> f64 {
        1.0 / self.num_cells() as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// The `C^m` value at a flat cell index.
    pub fn value_at(&self, cell: usize) -> &[Complex64] {
        &self.values[cell * self.components..(cell + 1) * self.components]
    }

    /// Writes the center coordinates of `cell` into `out[..dim]`.
    pub fn cell_center(&self, cell: usize, out: &mut [f64]) {
        let n = self.samples_per_dim();
        match self.dim {
            1 => out[0] = (cell as f64 + 0.5) / n as f64,
            _ => {
                out[0] = ((cell / n) as f64 + 0.5) / n as f64;
                out[1] = ((cell % n) as f64 + 0.5) / n as f64;
            }
        }
    }

    /// Flat cell index from per-dimension cell indices.
    pub fn cell_index(&self, idx: &[usize]) -> usize {
        let n = self.samples_per_dim();
        match self.dim {
            1 => idx[0],
            _ => idx[0] * n + idx[1],
        }
    }

    /// Fourier coefficients (true torus coefficients, DFT bin order).
    pub fn fourier_coeffs(&self) -> Vec<Complex64> {
        let fft = CenteredFft::new(self.samples_per_dim(), self.dim);
        let cells = self.num_cells();
        let mut coeffs = vec![Complex64::default(); cells * self.components];
        let mut scratch = vec![Complex64::default(); cells];
        for c in 0..self.components {
            for cell in 0..cells {
                scratch[cell] = self.values[cell * self.components + c];
            }
            fft.coeffs_from_samples(&mut scratch);
            for cell in 0..cells {
                coeffs[cell * self.components + c] = scratch[cell];
            }
        }
        coeffs
    }

    /// Rebuilds samples from Fourier coefficients in the layout produced by
    /// [`GridFunction::fourier_coeffs`].
    pub fn from_fourier_coeffs(
        dim: usize,
        grid_j: u32,
        components: usize,
        coeffs: &[Complex64],
    ) -> Self {
        let mut g = Self::zeros(dim, grid_j, components);
        let fft = CenteredFft::new(g.samples_per_dim(), dim);
        let cells = g.num_cells();
        assert_eq!(coeffs.len(), cells * components);
        let mut scratch = vec![Complex64::default(); cells];
        for c in 0..components {
            for cell in 0..cells {
                scratch[cell] = coeffs[cell * components + c];
            }
            fft.samples_from_coeffs(&mut scratch);
            for cell in 0..cells {
                g.values[cell * components + c] = scratch[cell];
            }
        }
        g
    }

    /// Signed frequency vector of a flat coefficient cell index.
    pub fn freq_of_cell(&self, cell: usize, out: &mut [i64]) {
        let n = self.samples_per_dim();
        match self.dim {
            1 => out[0] = bin_to_freq(cell, n),
            _ => {
                out[0] = bin_to_freq(cell / n, n);
                out[1] = bin_to_freq(cell % n, n);
            }
        }
    }

    /// Per-component sample means.
    pub fn mean(&self) -> Vec<Complex64> {
        let mut mean = vec![Complex64::default(); self.components];
        for cell in 0..self.num_cells() {
            for c in 0..self.components {
                mean[c] += self.values[cell * self.components + c];
            }
        }
        let scale = 1.0 / self.num_cells() as f64;
        mean.iter_mut().for_each(|v| *v *= scale);
        mean
    }

    /// True when every component's mean is below `1e-12 * max|f|`.
    pub fn is_mean_zero(&self) -> bool {
        let maxabs = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        self.mean().iter().all(|m| m.norm() <= 1e-12 * maxabs.max(1e-300))
    }

    /// Discrete L2 norm: `(sum |f(x)|^2 cellVol)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.cell_volume()).sqrt()
    }

    /// Largest pointwise vector norm over the grid.
    pub fn max_norm(&self) -> f64 {
        (0..self.num_cells())
            .map(|cell| {
                self.value_at(cell)
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Relative L2 distance to another grid function.
    pub fn rel_l2_error(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let num: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        (num / den.max(1e-300)).sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn add_assign(&mut self, other: &GridFunction) {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter_mut()
            .zip(other.values.iter())
            .for_each(|(a, b)| *a += b);
    }

    /// Writes the text format: header `n N m`, then one line per sample in
    /// row-major order with `2m` fields (re, im per component).
    pub fn write_text<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{} {} {}", self.dim, self.samples_per_dim(), self.components)?;
        for cell in 0..self.num_cells() {
            let vals = self.value_at(cell);
            let mut line = String::new();
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{:.17e} {:.17e}", v.re, v.im));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::Parse("empty grid file".into()))??;
        let (dim, n, m) = parse_header(&header)?;
        let grid_j = grid_j_of(n)?;
        let mut g = GridFunction::zeros(dim, grid_j, m);
        for cell in 0..g.num_cells() {
            let line = lines
                .next()
                .ok_or_else(|| CoreError::Parse(format!("missing sample line {cell}")))??;
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| CoreError::Parse(format!("bad float {t:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if fields.len() != 2 * m {
                return Err(CoreError::Parse(format!(
                    "line {cell}: expected {} fields, got {}",
                    2 * m,
                    fields.len()
                )));
            }
            for c in 0..m {
                g.values[cell * m + c] = Complex64::new(fields[2 * c], fields[2 * c + 1]);
            }
        }
        Ok(g)
    }

    /// Binary variant: same header line, then little-endian IEEE f64 pairs.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{} {} {}", self.dim, self.samples_per_dim(), self.components)?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut header = Vec::new();
        loop {
            let mut byte = [0u8; 1];
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            header.push(byte[0]);
        }
        let header = String::from_utf8(header).map_err(|e| CoreError::Parse(e.to_string()))?;
        let (dim, n, m) = parse_header(&header)?;
        let grid_j = grid_j_of(n)?;
        let mut g = GridFunction::zeros(dim, grid_j, m);
        let mut buf = [0u8; 8];
        for v in g.values.iter_mut() {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            *v = Complex64::new(re, im);
        }
        Ok(g)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(CoreError::Parse(format!("bad header {header:?}")));
    }
    let dim: usize = parts[0]
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad n field {:?}", parts[0])))?;
    let n: usize = parts[1]
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad N field {:?}", parts[1])))?;
    let m: usize = parts[2]
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad m field {:?}", parts[2])))?;
    if dim != 1 && dim != 2 {
        return Err(CoreError::Parse(format!("unsupported dimension {dim}")));
    }
    Ok((dim, n, m))
}

fn grid_j_of(n: usize) -> Result<u32> {
    if !n.is_power_of_two() {
        return Err(CoreError::Parse(format!("N={n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// A real scalar field on the same cell-center lattice, used by the dyadic
/// averaging, maximal, and Carleson operators.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub dim: usize,
    pub grid_j: u32,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(dim: usize, grid_j: u32) -> Self {
        assert!(dim == 1 || dim == 2);
        let n = 1usize << grid_j;
        RealGrid {
            dim,
            grid_j,
            values: vec![0.0; n.pow(dim as u32)],
        }
    }

    pub fn from_values(dim: usize, grid_j: u32, values: Vec<f64>) -> Self {
        let n = 1usize << grid_j;
        assert_eq!(values.len(), n.pow(dim as u32));
        RealGrid { dim, grid_j, values }
    }

    pub fn samples_per_dim(&self) -> usize {
        1usize << self.grid_j
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_volume(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// Lattice L^p quasi-norm with equal-weight cell quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        }
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (sum * self.cell_volume()).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wave(dim: usize, grid_j: u32, k: [i64; 2]) -> GridFunction {
        GridFunction::from_fn(dim, grid_j, 1, |x| {
            let phase: f64 = x
                .iter()
                .zip(k.iter())
                .map(|(xi, ki)| 2.0 * PI * *ki as f64 * xi)
                .sum();
            vec![Complex64::from_polar(1.0, phase)]
        })
    }

    #[test]
    fn parseval_on_samples() {
        let g = wave(1, 5, [3, 0]);
        let coeffs = g.fourier_coeffs();
        let sample_energy: f64 = g.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
            / g.num_cells() as f64;
        let coeff_energy: f64 = coeffs.iter().map(|v| v.norm_sqr()).sum();
        assert!((sample_energy - coeff_energy).abs() < 1e-10 * sample_energy);
    }

    #[test]
    fn text_round_trip() {
        let g = wave(2, 3, [1, -2]);
        let mut buf = Vec::new();
        g.write_text(&mut buf).unwrap();
        let h = GridFunction::read_text(&buf[..]).unwrap();
        assert!(g.rel_l2_error(&h) < 1e-15);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let g = wave(1, 4, [5, 0]);
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        let h = GridFunction::read_binary(&buf[..]).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn mean_zero_flag() {
        let g = wave(1, 5, [2, 0]);
        assert!(g.is_mean_zero());
        let c = GridFunction::from_fn(1, 5, 1, |_| vec![Complex64::new(1.0, 0.0)]);
        assert!(!c.is_mean_zero());
    }
}
