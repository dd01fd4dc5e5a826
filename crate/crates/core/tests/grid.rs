mod common;

use common::{cheb, hier};
use dsc::grid::{ChebParams, GridParams, HierFreqGrid, HierParams, Region, SpatialGrid};
use proptest::prelude::*;

#[test]
fn spatial_grid_sizes_and_spacing() {
    let g = SpatialGrid::<f64>::new(1, 1).unwrap();
    let xs: Vec<f64> = g.points().iter().map(|p| p[0]).collect();
    assert_eq!(xs, vec![0.0, 0.5]);
    assert_eq!(SpatialGrid::<f64>::new(2, 16).unwrap().len(), 1024);
    let g = SpatialGrid::<f64>::new(1, 32).unwrap();
    assert_eq!(g.len(), 64);
    for w in g.points().windows(2) {
        assert!((w[1][0] - w[0][0] - 1.0 / 64.0).abs() < 1e-15);
    }
    assert!(g.points().iter().all(|p| (0.0..1.0).contains(&p[0])));
    assert!(SpatialGrid::<f64>::new(2, 0).is_err());
}

#[test]
fn hierarchical_grid_geometry() {
    let g = HierFreqGrid::<f64>::new(HierParams {
        dim: 2,
        coarse_band: 6,
        levels: 4,
        nodes: 4,
    })
    .unwrap();
    assert_eq!(g.outer_bandlimit(), 486);
    assert_eq!(g.blocks().len(), 32);
    assert_eq!(g.core_len(), 121);
    assert_eq!(g.points().len(), 121 + 8 * 4 * 16);
    for b in g.blocks() {
        let want = 2.0 * 3f64.powi(b.level as i32 - 1) * 6.0;
        assert_eq!(b.side, want, "block side at level {}", b.level);
    }
    // Paper-scale grid: the count follows |core| + 8 L K² without dedup.
    assert_eq!(hier(2, 6, 6, 5).len(), 121 + 8 * 6 * 25);
    assert_eq!(hier(1, 6, 6, 5).len(), 11 + 2 * 6 * 5);
}

#[test]
fn invalid_hierarchical_parameters_are_rejected() {
    for (b, k) in [(1, 5), (6, 1)] {
        let p = GridParams::Hier(HierParams {
            dim: 2,
            coarse_band: b,
            levels: 2,
            nodes: k,
        });
        assert!(p.build::<f64>().is_err(), "B = {b}, K = {k}");
    }
}

#[test]
fn every_stored_node_interpolates_to_its_own_value() {
    // Hierarchical grids hit their nodes bit-exactly; the Chebyshev map
    // round trip r -> s -> r costs a few ulps.
    for (g, tol) in [
        (hier(2, 6, 3, 5), 0.0),
        (hier(1, 4, 2, 4), 0.0),
        (cheb(2, 9, 12, 10.0), 1e-12),
        (cheb(1, 2, 10, 6.0), 1e-12),
    ] {
        // Values depend on position only: shared block corners are stored twice.
        let vals: Vec<f64> = g.points().iter().map(|p| (0.37 * p[0] + 1.1 * p[1]).sin()).collect();
        for (i, &xi) in g.points().iter().enumerate() {
            let (st, clamped) = g.stencil(xi);
            assert!(!clamped);
            let got = st.apply(&vals);
            assert!((got - vals[i]).abs() <= tol, "node {i} at {xi:?}: {got} vs {}", vals[i]);
        }
    }
}

#[test]
fn block_interpolation_reproduces_low_degree_polynomials() {
    let g = hier(2, 6, 3, 5);
    let poly = |xi: [f64; 2]| 1.0 + 0.3 * xi[0] - 0.01 * xi[0] * xi[1] + 1e-5 * xi[1].powi(3) + 1e-7 * xi[0].powi(4);
    let vals: Vec<f64> = g.points().iter().map(|&p| poly(p)).collect();
    for &xi in &[[100.5, -3.25], [-60.1, 20.7], [7.3, 150.0], [-161.0, -161.0]] {
        let (st, _) = g.stencil(xi);
        let got = st.apply(&vals);
        assert!((got - poly(xi)).abs() <= 1e-9 * poly(xi).abs().max(1.0), "{xi:?}: {got} vs {}", poly(xi));
    }
}

#[test]
fn stencil_clamps_outside_the_outer_bandlimit() {
    let g = hier(2, 6, 2, 5);
    let (_, clamped) = g.stencil([60.0, 0.0]);
    assert!(clamped);
    let (_, clamped) = g.stencil([53.0, -53.0]);
    assert!(!clamped);
}

#[test]
fn chebyshev_grid_invariants() {
    let p = ChebParams {
        dim: 2,
        n_theta: 8,
        n_r: 16,
        map_scale: 8.0,
    };
    let g = dsc::grid::ChebFreqGrid::<f64>::new(p).unwrap();
    let s = g.s_nodes();
    assert!(s.windows(2).all(|w| w[0] < w[1]));
    assert!(s.iter().all(|&v| v > -1.0 && v < 1.0));
    for &r in &[0.0f64, 0.5, 8.0, 1e3, 1e6] {
        let back = dsc::grid::algebraic_map(dsc::grid::algebraic_map_inv(r, 8.0), 8.0);
        assert!((back - r).abs() <= 1e-9 * r.max(1.0));
    }
    assert_eq!(g.points().len(), 8 * 16);
    assert!(g.points().iter().all(|xi| xi[0].is_finite() && xi[1].is_finite()));
}

#[test]
fn chebyshev_interpolation_of_a_smooth_radial_function() {
    let g = cheb(2, 16, 32, 8.0);
    let f = |xi: [f64; 2]| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        (1.0 + 0.5 * xi[0] / (1.0 + r2).sqrt()) * r2 / (1.0 + r2)
    };
    let vals: Vec<f64> = g.points().iter().map(|&p| f(p)).collect();
    for &xi in &[[3.0, 4.0], [-20.0, 7.0], [100.0, -250.0], [0.5, 0.1]] {
        let (st, _) = g.stencil(xi);
        let got = st.apply(&vals);
        assert!((got - f(xi)).abs() < 1e-4, "{xi:?}: {got} vs {}", f(xi));
    }
}

proptest! {
    #[test]
    fn every_frequency_belongs_to_exactly_one_region(x in -161.9f64..161.9, y in -161.9f64..161.9) {
        let g = HierFreqGrid::<f64>::new(HierParams { dim: 2, coarse_band: 6, levels: 3, nodes: 5 }).unwrap();
        let region = g.locate([x, y]).unwrap();
        let inside = |lo: [f64; 2], side: f64| {
            x >= lo[0] && x <= lo[0] + side && y >= lo[1] && y <= lo[1] + side
        };
        let in_core = x.abs() < 6.0 && y.abs() < 6.0;
        match region {
            Region::Core => prop_assert!(in_core),
            Region::Block { level, index } => {
                prop_assert!(!in_core);
                let b = g.blocks().iter().find(|b| b.level == level && b.index == index).unwrap();
                prop_assert!(inside(b.lo, b.side));
            }
        }
        // Interpolation weights always form a partition of unity.
        let (st, _) = g.stencil([x, y]);
        let sum: f64 = st.entries().iter().map(|e| e.1).sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }
}
