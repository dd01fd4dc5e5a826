#![allow(dead_code)]

use std::sync::Arc;

use dsc::grid::{ChebParams, FreqGrid, GridParams, HierParams};
use dsc::Complex64;

pub const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

pub fn hier(dim: usize, coarse_band: usize, levels: usize, nodes: usize) -> Arc<FreqGrid<f64>> {
    Arc::new(
        GridParams::Hier(HierParams {
            dim,
            coarse_band,
            levels,
            nodes,
        })
        .build()
        .unwrap(),
    )
}

pub fn cheb(dim: usize, n_theta: usize, n_r: usize, map_scale: f64) -> Arc<FreqGrid<f64>> {
    Arc::new(
        GridParams::Cheb(ChebParams {
            dim,
            n_theta,
            n_r,
            map_scale,
        })
        .build()
        .unwrap(),
    )
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn japanese(xi: [f64; 2]) -> f64 {
    (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}
