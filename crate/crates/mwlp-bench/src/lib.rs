//! Shared fixtures for the benchmark targets.

use mwlp_core::testfns;
use mwlp_core::weights::{MatrixWeight, WeightGrid};

pub fn power_weight(grid_j: u32, p: f64) -> WeightGrid {
    let model = MatrixWeight::ScalarPower {
        m: 2,
        a: 0.5,
        center: vec![0.5],
    };
    WeightGrid::sample(&model, 1, grid_j, p).expect("weight samples")
}

pub fn test_function(grid_j: u32) -> mwlp_core::grid::GridFunction {
    testfns::random_band_limited(1, grid_j, 2, 8, 11, false)
}
