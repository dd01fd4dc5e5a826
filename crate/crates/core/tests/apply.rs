mod common;

use common::{hier, japanese, re, FOUR_PI2};
use dsc::apply::{apply, apply_compressed, compress, WindowedSymbol};
use dsc::apps::{elliptic_symbol, MediumField, Profile, SymbolSetup};
use dsc::calculus::IterOptions;
use dsc::oracle::densify;
use dsc::symbol::{GridFunction, Symbol};
use dsc::Complex64;

fn sinusoid_symbol(dim: usize) -> Symbol<f64> {
    let alpha = MediumField::new(dim, Profile::Sinusoid { mean: 1.0, amplitude: 0.4 }, 1.0);
    let setup = SymbolSetup {
        band: 3,
        grid: if dim == 1 { hier(1, 8, 2, 5) } else { hier(2, 6, 2, 5) },
        iter: IterOptions::default(),
    };
    elliptic_symbol(&alpha, FOUR_PI2, &setup).unwrap()
}

#[test]
fn fast_apply_matches_dense_matrix() {
    for (dim, n) in [(1, 64), (2, 16)] {
        let a = sinusoid_symbol(dim);
        let u = GridFunction::random_bandlimited(dim, n, n / 2, 3).unwrap();
        let fast = apply(&a, &u).unwrap();
        let dense = densify(&a, n).unwrap().apply(&u).unwrap();
        let err = fast.relative_error(&dense);
        assert!(err <= 1e-10, "{dim}D apply error {err:e}");
    }
}

#[test]
fn windowed_symbol_is_reusable() {
    let a = sinusoid_symbol(2);
    let w = WindowedSymbol::new(&a, 16).unwrap();
    for seed in 0..3 {
        let u = GridFunction::random_bandlimited(2, 16, 8, seed).unwrap();
        let err = w.apply(&u).unwrap().relative_error(&apply(&a, &u).unwrap());
        assert!(err <= 1e-14, "{err:e}");
    }
}

#[test]
fn identity_returns_input_unchanged() {
    let id = Symbol::<f64>::identity(3, hier(2, 6, 1, 5));
    let u = GridFunction::random_bandlimited(2, 32, 16, 1).unwrap();
    let v = apply(&id, &u).unwrap();
    assert_eq!(v.values(), u.values());
}

#[test]
fn multiplier_acts_diagonally_on_plane_waves() {
    let grid = hier(1, 8, 3, 5);
    let a = Symbol::multiplier(2.0, 1, grid, |xi| re(japanese(xi).powi(2))).unwrap();
    let n = 64;
    let k = 5.0;
    let tp = 2.0 * std::f64::consts::PI;
    let u = GridFunction::from_fn(1, n, |x: [f64; 2]| Complex64::from_polar(1.0, tp * k * x[0])).unwrap();
    let want = u.scaled(re(1.0 + k * k));
    assert!(apply(&a, &u).unwrap().relative_error(&want) <= 1e-12);
}

#[test]
fn odd_sizes_and_dimension_mismatch_are_rejected() {
    let a = sinusoid_symbol(1);
    assert!(apply(&a, &GridFunction::zeros(1, 15).unwrap()).is_err());
    assert!(apply(&a, &GridFunction::zeros(2, 16).unwrap()).is_err());
}

#[test]
fn multipliers_compress_to_rank_one() {
    let grid = hier(2, 6, 2, 5);
    let a = Symbol::multiplier(2.0, 3, grid, |xi| re(FOUR_PI2 * japanese(xi).powi(2))).unwrap();
    let f = compress(&a, 32, 1e-10).unwrap();
    assert_eq!(f.rank(), 1);
    let u = GridFunction::random_bandlimited(2, 32, 16, 7).unwrap();
    let err = apply_compressed(&f, &u).unwrap().relative_error(&apply(&a, &u).unwrap());
    assert!(err <= 1e-12, "{err:e}");
}

#[test]
fn compression_error_follows_tolerance() {
    let a = sinusoid_symbol(2);
    let u = GridFunction::random_bandlimited(2, 32, 16, 9).unwrap();
    let exact = apply(&a, &u).unwrap();
    let full = compress(&a, 32, 1e-10).unwrap();
    let coarse = compress(&a, 32, 0.012).unwrap();
    assert_eq!((coarse.rank(), full.rank()), (3, 4));
    let sv = full.singular_values();
    assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    assert!(apply_compressed(&full, &u).unwrap().relative_error(&exact) <= 1e-10);
    let err = apply_compressed(&coarse, &u).unwrap().relative_error(&exact);
    assert!(err <= 2e-2, "{err:e}");
}
