//! Symbol algebra: linear combinations, the twisted product, adjoints,
//! Kohn–Nirenberg/Weyl conversion, and the iterative functions in [`iter`].
//!
//! Every operation works column by column: for each `ξ ∈ Ω` the needed
//! shifted frequencies are turned into interpolation stencils once and then
//! reused for all Fourier modes. Columns are independent and run in parallel;
//! results are assembled in a fixed order so output is deterministic.

mod iter;

pub use iter::{exponential, inverse, sqrt_invsqrt, IterOptions, IterationReport};

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::Result;
use crate::grid::Freq;
use crate::scalar::{japanese, Real, C};
use crate::symbol::Symbol;

/// Direction of a Moyal transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoyalDirection {
    ToWeyl,
    FromWeyl,
}

/// `c · A`.
pub fn scale<T: Real>(c: C<T>, a: &Symbol<T>) -> Symbol<T> {
    let mut out = a.clone();
    if c == C::new(T::one(), T::zero()) {
        return out;
    }
    for v in out.table_mut() {
        *v = *v * c;
    }
    out
}

/// `A + B` with order `max(d_a, d_b)`.
pub fn add<T: Real>(a: &Symbol<T>, b: &Symbol<T>) -> Result<Symbol<T>> {
    let one = C::new(T::one(), T::zero());
    lin_comb(one, a, one, b)
}

/// `α A + β B` with order `max(d_a, d_b)`.
pub fn lin_comb<T: Real>(alpha: C<T>, a: &Symbol<T>, beta: C<T>, b: &Symbol<T>) -> Result<Symbol<T>> {
    a.check_compatible(b)?;
    let order = a.order().max(b.order());
    let pts = a.grid().points();
    let np = pts.len();
    let fa: Vec<T> = pts.iter().map(|&xi| japanese(xi).powf(a.order() - order)).collect();
    let fb: Vec<T> = pts.iter().map(|&xi| japanese(xi).powf(b.order() - order)).collect();
    let h = a
        .table()
        .iter()
        .zip(b.table())
        .enumerate()
        .map(|(i, (&x, &y))| {
            let p = i % np;
            x * alpha * fa[p] + y * beta * fb[p]
        })
        .collect();
    let out = Symbol::from_table(order, a.band(), a.grid().clone(), h)?;
    debug_assert!(out.order() == a.order().max(b.order()));
    Ok(out)
}

/// Entry-wise complex conjugate of the table (the symbol `conj(a(x, ξ))`
/// re-expanded, i.e. `h_λ ↦ conj(h_{−λ})`).
pub fn conjugate<T: Real>(a: &Symbol<T>) -> Symbol<T> {
    let modes = a.modes();
    let np = a.grid().len();
    let mut out = a.clone();
    let src = a.table();
    for (i, v) in out.table_mut().iter_mut().enumerate() {
        let (mode, p) = (i / np, i % np);
        *v = src[modes.negated(mode) * np + p].conj();
    }
    out
}

fn shift<T: Real>(xi: Freq<T>, lam: [i64; 2], factor: T) -> Freq<T> {
    [
        xi[0] + factor * T::of_i64(lam[0]),
        xi[1] + factor * T::of_i64(lam[1]),
    ]
}

/// Table transposed to Ω-major layout, so one stencil node reads all modes
/// contiguously.
fn omega_major<T: Real>(a: &Symbol<T>) -> Vec<C<T>> {
    let m = a.modes().len();
    let np = a.grid().len();
    let mut t = vec![C::zero(); m * np];
    for (i, &v) in a.table().iter().enumerate() {
        t[(i % np) * m + i / np] = v;
    }
    t
}

/// Assembles per-column results into a λ-major table.
fn assemble<T: Real>(columns: Vec<Vec<C<T>>>, m: usize) -> Vec<C<T>> {
    let np = columns.len();
    let mut h = vec![C::zero(); m * np];
    for (p, col) in columns.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            h[i * np + p] = v;
        }
    }
    h
}

/// Twisted product `A ♯ B`, the symbol of the composition `A B`.
///
/// `ĉ_λ(ξ) = Σ_{k+l=λ} â_k(ξ + l) b̂_l(ξ)`, truncated to the band of the
/// operands, with `â_k(ξ + l)` obtained by interpolating `A`'s table.
pub fn compose<T: Real>(a: &Symbol<T>, b: &Symbol<T>) -> Result<Symbol<T>> {
    a.check_compatible(b)?;
    let modes = a.modes();
    let m = modes.len();
    let side = modes.side();
    let dim = modes.dim();
    let bx = modes.band() as i64;
    let grid = a.grid().clone();
    let pts = grid.points();
    let np = pts.len();
    let at = omega_major(a);
    let bt = b.table();
    let da = a.order();

    let results: Vec<(Vec<C<T>>, u64)> = (0..np)
        .into_par_iter()
        .map(|p| {
            let xi = pts[p];
            let jx = japanese(xi);
            let mut out: Vec<C<T>> = vec![C::zero(); m];
            let mut acc: Vec<C<T>> = vec![C::zero(); m];
            let mut clamps = 0u64;
            for li in 0..m {
                let bl = bt[li * np + p];
                if bl.is_zero() {
                    continue;
                }
                let l = modes.mode(li);
                let shifted = shift(xi, l, T::one());
                let (st, clamped) = grid.stencil(shifted);
                clamps += clamped as u64;
                let coef = bl * (japanese(shifted) / jx).powf(da);
                // Valid k per axis: both k and k + l inside (−B_x, B_x).
                let range = |lc: i64| {
                    let lo = (-(bx - 1)).max(-(bx - 1) - lc);
                    let hi = (bx - 1).min(bx - 1 - lc);
                    ((lo + bx - 1) as usize, (hi + bx - 1) as usize)
                };
                // Row-major rectangle of valid k; 1D is a single row.
                let (r_lo, r_hi, c_lo, c_hi, stride, offset) = if dim == 1 {
                    let (lo, hi) = range(l[0]);
                    (0, 0, lo, hi, 0, l[0])
                } else {
                    let (r0, r1) = range(l[0]);
                    let (c0, c1) = range(l[1]);
                    (r0, r1, c0, c1, side, l[0] * side as i64 + l[1])
                };
                for r in r_lo..=r_hi {
                    let (lo, hi) = (r * stride + c_lo, r * stride + c_hi);
                    let acc = &mut acc[lo..=hi];
                    acc.fill(C::zero());
                    for &(idx, w) in st.entries() {
                        let row = &at[idx * m + lo..=idx * m + hi];
                        for (a, &v) in acc.iter_mut().zip(row) {
                            *a = *a + v * w;
                        }
                    }
                    let target = (lo as i64 + offset) as usize;
                    for (o, &a) in out[target..=target + (hi - lo)].iter_mut().zip(acc.iter()) {
                        *o = *o + a * coef;
                    }
                }
            }
            (out, clamps)
        })
        .collect();

    let clamps: u64 = results.iter().map(|r| r.1).sum();
    a.count_clamp(clamps);
    let h = assemble(results.into_iter().map(|r| r.0).collect(), m);
    let out = Symbol::from_table(da + b.order(), a.band(), grid, h)?;
    debug_assert!(out.order() == a.order() + b.order());
    Ok(out)
}

/// Symbol of the adjoint operator: `ĉ_λ(ξ) = conj(â_{−λ}(ξ + λ))`.
pub fn adjoint<T: Real>(a: &Symbol<T>) -> Result<Symbol<T>> {
    let modes = a.modes();
    let d = a.order();
    shifted_map(a, |xi, lam, i, st| {
        let shifted = shift(xi, lam, T::one());
        let v = a.eval_stencil(modes.negated(i), st).conj();
        v * (japanese(shifted) / japanese(xi)).powf(d)
    }, T::one())
}

/// Kohn–Nirenberg ↔ Weyl conversion: `â^W_λ(ξ) = â_λ(ξ − λ/2)` and back.
pub fn moyal<T: Real>(a: &Symbol<T>, direction: MoyalDirection) -> Result<Symbol<T>> {
    let factor = match direction {
        MoyalDirection::ToWeyl => -T::lit(0.5),
        MoyalDirection::FromWeyl => T::lit(0.5),
    };
    let d = a.order();
    shifted_map(a, |xi, lam, i, st| {
        let shifted = shift(xi, lam, factor);
        a.eval_stencil(i, st) * (japanese(shifted) / japanese(xi)).powf(d)
    }, factor)
}

pub fn to_weyl<T: Real>(a: &Symbol<T>) -> Result<Symbol<T>> {
    moyal(a, MoyalDirection::ToWeyl)
}

pub fn from_weyl<T: Real>(a: &Symbol<T>) -> Result<Symbol<T>> {
    moyal(a, MoyalDirection::FromWeyl)
}

/// Builds a symbol whose `(λ, ξ)` entry depends on `A` evaluated at
/// `ξ + factor·λ`. The closure receives `(ξ, λ, mode index, stencil)`.
fn shifted_map<T, F>(a: &Symbol<T>, f: F, factor: T) -> Result<Symbol<T>>
where
    T: Real,
    F: Fn(Freq<T>, [i64; 2], usize, &crate::grid::Stencil<T>) -> C<T> + Sync,
{
    let modes = a.modes();
    let m = modes.len();
    let grid = a.grid().clone();
    let pts = grid.points();
    let results: Vec<(Vec<C<T>>, u64)> = pts
        .par_iter()
        .map(|&xi| {
            let mut clamps = 0u64;
            let col = (0..m)
                .map(|i| {
                    let lam = modes.mode(i);
                    let (st, clamped) = grid.stencil(shift(xi, lam, factor));
                    clamps += clamped as u64;
                    f(xi, lam, i, &st)
                })
                .collect();
            (col, clamps)
        })
        .collect();
    a.count_clamp(results.iter().map(|r| r.1).sum());
    let h = assemble(results.into_iter().map(|r| r.0).collect(), m);
    Symbol::from_table(a.order(), a.band(), grid, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FreqGrid, GridParams, HierParams};
    use std::sync::Arc;

    fn grid(dim: usize) -> Arc<FreqGrid<f64>> {
        Arc::new(
            GridParams::Hier(HierParams {
                dim,
                coarse_band: 6,
                levels: 2,
                nodes: 5,
            })
            .build()
            .unwrap(),
        )
    }

    fn c(re: f64) -> C<f64> {
        C::new(re, 0.0)
    }

    #[test]
    fn scale_by_one_and_zero() {
        let a = Symbol::multiplier(1.0, 3, grid(2), |xi| c(xi[0] + 2.0)).unwrap();
        assert_eq!(scale(c(1.0), &a).table(), a.table());
        assert!(scale(c(0.0), &a).table().iter().all(|z| z.is_zero()));
    }

    #[test]
    fn add_is_commutative_and_takes_max_order() {
        let g = grid(1);
        let a = Symbol::multiplier(2.0, 2, g.clone(), |xi| c(1.0 + xi[0] * xi[0])).unwrap();
        let one = Symbol::identity(2, g);
        let s = add(&a, &one).unwrap();
        let t = add(&one, &a).unwrap();
        assert_eq!(s.table(), t.table());
        assert_eq!(s.order(), 2.0);
        let v = s.eval_symbol([0.2, 0.0], [5.0, 0.0]);
        assert!((v - c(27.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_is_neutral() {
        let g = grid(2);
        let b = Symbol::from_h_fn(1.0, 3, g.clone(), |l, xi| {
            C::new(1.0 / (1.0 + (l[0] * l[0] + l[1] * l[1]) as f64), 0.01 * xi[0])
                / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt().max(1.0)
        })
        .unwrap();
        let i = Symbol::identity(3, g);
        let left = compose(&i, &b).unwrap();
        let right = compose(&b, &i).unwrap();
        for (x, y) in left.table().iter().zip(b.table()) {
            assert!((x - y).norm() <= 1e-12);
        }
        for (x, y) in right.table().iter().zip(b.table()) {
            assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn multipliers_compose_pointwise() {
        let g = grid(2);
        let a = Symbol::multiplier(2.0, 2, g.clone(), |xi| c(1.0 + xi[0] * xi[0] + xi[1] * xi[1])).unwrap();
        let b = Symbol::multiplier(-1.0, 2, g.clone(), |xi| c(1.0 / (2.0 + xi[1].abs()))).unwrap();
        let p = compose(&a, &b).unwrap();
        assert_eq!(p.order(), 1.0);
        for &xi in g.points() {
            let want = (1.0 + xi[0] * xi[0] + xi[1] * xi[1]) / (2.0 + xi[1].abs());
            let got = p.eval_symbol([0.3, 0.1], xi);
            assert!((got - c(want)).norm() <= 1e-12 * want);
        }
    }

    #[test]
    fn multiplication_operator_adjoint_conjugates() {
        let g = grid(1);
        let m = Symbol::from_h_fn(0.0, 3, g.clone(), |l, _| match l[0] {
            0 => C::new(1.0, 0.5),
            1 => C::new(0.0, 0.25),
            -2 => C::new(0.1, -0.3),
            _ => C::zero(),
        })
        .unwrap();
        let adj = adjoint(&m).unwrap();
        for &x in &[0.0, 0.37, 0.81] {
            for &xi in &[[0.0, 0.0], [3.0, 0.0], [-17.0, 0.0]] {
                let want = m.eval_symbol([x, 0.0], xi).conj();
                let got = adj.eval_symbol([x, 0.0], xi);
                assert!((got - want).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn moyal_leaves_multipliers_unchanged() {
        let g = grid(2);
        let a = Symbol::multiplier(1.0, 2, g, |xi| c((1.0 + xi[0] * xi[0]).sqrt() + xi[1])).unwrap();
        let w = to_weyl(&a).unwrap();
        assert_eq!(w.table(), a.table());
    }

    #[test]
    fn conjugate_is_an_involution() {
        let g = grid(1);
        let a = Symbol::from_h_fn(0.0, 3, g, |l, xi| C::new(l[0] as f64 + xi[0], 2.0 * l[0] as f64)).unwrap();
        let cc = conjugate(&conjugate(&a));
        assert_eq!(cc.table(), a.table());
    }
}
