//! Matrix-weighted Littlewood-Paley analysis on periodic grids.
//!
//! The crate implements, over cell-centered grids on the unit torus:
//!
//! - dyadic cube indexing and the almost-diagonal decay weight ([`dyadic`]);
//! - matrix weight models, fractional matrix powers, matrix Muckenhoupt
//!   `A_p` constants for both ranges of `p`, doubling exponents, and
//!   averaged-norm integral profiles ([`weights`]);
//! - reducing operators for a weight, with verified comparison and doubling
//!   constants ([`reducing`]);
//! - admissible Littlewood-Paley systems, the phi-transform and its inverse,
//!   Riesz potentials, and spectral derivatives ([`lpcore`]);
//! - frequency-exact Meyer and filter-bank Daubechies wavelet systems
//!   ([`wavelets`]);
//! - the four equivalent matrix-weighted Triebel-Lizorkin quasi-norms,
//!   `L^p(W)`, and Sobolev norms ([`spaces`]);
//! - sequence-space machinery: almost-diagonal operators, dyadic averaging
//!   and maximal operators, Carleson functionals, and weighted-inequality
//!   checkers ([`seqops`]).

pub mod coeffs;
pub mod dyadic;
pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod lpcore;
pub mod reducing;
pub mod seqops;
pub mod spaces;
pub mod testfns;
pub mod wavelets;
pub mod weights;

pub use error::{CoreError, Result};
pub use grid::{GridFunction, RealGrid};
