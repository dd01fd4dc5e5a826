//! Symbols in separated form `a(x, ξ) = Σ_λ e_λ(x) h_λ(ξ) ⟨ξ⟩^{d_a}`.
//!
//! A [`Symbol`] stores the normalized coefficients `h_λ(ξ)` for every Fourier
//! mode `λ ∈ (−B_x, B_x)^d` at every grid frequency `ξ ∈ Ω`. The table is
//! λ-major: row `λ` is a contiguous slice over `Ω`.

mod gridfn;
mod io;

pub use gridfn::GridFunction;
pub use io::{read_symbol, write_symbol};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{invalid, DscError, Result};
use crate::fft::{bin_of, FftNd};
use crate::grid::{check_dim, Freq, FreqGrid, SpatialGrid, Stencil};
use crate::scalar::{japanese, Real, C};

/// The centred box of Fourier modes `(−B_x, B_x)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeSet {
    dim: usize,
    band: usize,
}

impl ModeSet {
    pub fn new(dim: usize, band: usize) -> Self {
        Self { dim, band }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// Modes per axis, `2 B_x − 1`.
    pub fn side(&self) -> usize {
        2 * self.band - 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.band == 0
    }

    /// Position of mode `λ` in the table, or `None` outside the band.
    #[inline]
    pub fn index(&self, lambda: [i64; 2]) -> Option<usize> {
        let b = self.band as i64;
        let m = self.side();
        let ok = |v: i64| v > -b && v < b;
        if self.dim == 1 {
            (ok(lambda[0]) && lambda[1] == 0).then(|| (lambda[0] + b - 1) as usize)
        } else {
            (ok(lambda[0]) && ok(lambda[1]))
                .then(|| (lambda[0] + b - 1) as usize * m + (lambda[1] + b - 1) as usize)
        }
    }

    /// Mode stored at table position `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> [i64; 2] {
        let b = self.band as i64;
        if self.dim == 1 {
            [i as i64 - b + 1, 0]
        } else {
            let m = self.side();
            [(i / m) as i64 - b + 1, (i % m) as i64 - b + 1]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Index of `−λ` for the mode at position `i`.
    #[inline]
    pub fn negated(&self, i: usize) -> usize {
        self.len() - 1 - i
    }
}

/// Operator symbol sampled on a frequency grid.
#[derive(Debug)]
pub struct Symbol<T: Real> {
    order: T,
    modes: ModeSet,
    grid: Arc<FreqGrid<T>>,
    h: Vec<C<T>>,
    clamps: AtomicU64,
}

impl<T: Real> Clone for Symbol<T> {
    fn clone(&self) -> Self {
        Self {
            order: self.order,
            modes: self.modes,
            grid: Arc::clone(&self.grid),
            h: self.h.clone(),
            clamps: AtomicU64::new(self.clamps.load(Ordering::Relaxed)),
        }
    }
}

impl<T: Real> Symbol<T> {
    /// Wraps an existing λ-major table.
    pub fn from_table(order: T, band: usize, grid: Arc<FreqGrid<T>>, h: Vec<C<T>>) -> Result<Self> {
        let dim = grid.dim();
        if band == 0 {
            return Err(invalid("spatial band B_x must be at least 1"));
        }
        let modes = ModeSet::new(dim, band);
        let expected = modes.len() * grid.len();
        if h.len() != expected {
            return Err(invalid(format!(
                "symbol table has {} entries, expected {} x {}",
                h.len(),
                modes.len(),
                grid.len()
            )));
        }
        if let Some(pos) = h.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(DscError::Numerical(format!(
                "non-finite table entry at mode {:?}, frequency {:?}",
                modes.mode(pos / grid.len()),
                grid.points()[pos % grid.len()]
            )));
        }
        Ok(Self {
            order,
            modes,
            grid,
            h,
            clamps: AtomicU64::new(0),
        })
    }

    /// Builds a symbol from its normalized coefficients `h(λ, ξ)`.
    pub fn from_h_fn<F>(order: T, band: usize, grid: Arc<FreqGrid<T>>, h: F) -> Result<Self>
    where
        F: Fn([i64; 2], Freq<T>) -> C<T>,
    {
        let modes = ModeSet::new(grid.dim(), band);
        let table = (0..modes.len())
            .flat_map(|i| {
                let lam = modes.mode(i);
                grid.points().iter().map(move |&xi| (lam, xi))
            })
            .map(|(lam, xi)| h(lam, xi))
            .collect();
        Self::from_table(order, band, grid, table)
    }

    /// The identity symbol `a ≡ 1` of order 0.
    pub fn identity(band: usize, grid: Arc<FreqGrid<T>>) -> Self {
        let modes = ModeSet::new(grid.dim(), band);
        let np = grid.len();
        let mut h = vec![C::zero(); modes.len() * np];
        let zero = modes.index([0, 0]).expect("zero mode");
        for v in &mut h[zero * np..(zero + 1) * np] {
            *v = C::new(T::one(), T::zero());
        }
        Self {
            order: T::zero(),
            modes,
            grid,
            h,
            clamps: AtomicU64::new(0),
        }
    }

    /// The zero symbol of the given order.
    pub fn zero(order: T, band: usize, grid: Arc<FreqGrid<T>>) -> Self {
        let modes = ModeSet::new(grid.dim(), band);
        let h = vec![C::zero(); modes.len() * grid.len()];
        Self {
            order,
            modes,
            grid,
            h,
            clamps: AtomicU64::new(0),
        }
    }

    /// An x-independent symbol `a(ξ)` (a Fourier multiplier).
    pub fn multiplier<F>(order: T, band: usize, grid: Arc<FreqGrid<T>>, a: F) -> Result<Self>
    where
        F: Fn(Freq<T>) -> C<T>,
    {
        Self::from_h_fn(order, band, grid, |lam, xi| {
            if lam == [0, 0] {
                a(xi) / japanese(xi).powf(order)
            } else {
                C::zero()
            }
        })
    }

    pub fn order(&self) -> T {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.modes.dim()
    }

    /// `B_x`.
    pub fn band(&self) -> usize {
        self.modes.band()
    }

    pub fn modes(&self) -> ModeSet {
        self.modes
    }

    pub fn grid(&self) -> &Arc<FreqGrid<T>> {
        &self.grid
    }

    /// The λ-major table of `h_λ(ξ)`.
    pub fn table(&self) -> &[C<T>] {
        &self.h
    }

    pub(crate) fn table_mut(&mut self) -> &mut [C<T>] {
        &mut self.h
    }

    pub fn into_table(self) -> Vec<C<T>> {
        self.h
    }

    /// Row of the table for the mode at position `i`.
    pub fn row(&self, i: usize) -> &[C<T>] {
        let np = self.grid.len();
        &self.h[i * np..(i + 1) * np]
    }

    /// Number of evaluations that had to clamp `ξ` onto the grid domain.
    pub fn clamp_events(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    pub(crate) fn count_clamp(&self, n: u64) {
        if n > 0 {
            self.clamps.fetch_add(n, Ordering::Relaxed);
        }
    }

    /// The same operator, renormalized to declared order `d`.
    pub fn with_order(&self, d: T) -> Self {
        if d == self.order {
            return self.clone();
        }
        let np = self.grid.len();
        let factors: Vec<T> = self
            .grid
            .points()
            .iter()
            .map(|&xi| japanese(xi).powf(self.order - d))
            .collect();
        let h = self
            .h
            .iter()
            .enumerate()
            .map(|(i, &v)| v * factors[i % np])
            .collect();
        Self {
            order: d,
            modes: self.modes,
            grid: Arc::clone(&self.grid),
            h,
            clamps: AtomicU64::new(self.clamp_events()),
        }
    }

    /// Checks that two symbols share a frequency grid and band.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.params() != other.grid.params() {
            return Err(DscError::Incompatible(format!(
                "frequency grids differ: {:?} vs {:?}",
                self.grid.params(),
                other.grid.params()
            )));
        }
        if self.modes != other.modes {
            return Err(DscError::Incompatible(format!(
                "spatial bands differ: {} vs {}",
                self.band(),
                other.band()
            )));
        }
        Ok(())
    }

    /// Interpolation stencil at `ξ`, counting clamps against this symbol.
    pub fn stencil(&self, xi: Freq<T>) -> Stencil<T> {
        let (st, clamped) = self.grid.stencil(xi);
        self.count_clamp(clamped as u64);
        st
    }

    /// `h̃_λ` for the mode at table position `i`, evaluated through a stencil.
    #[inline]
    pub fn eval_stencil(&self, i: usize, st: &Stencil<T>) -> C<T> {
        st.apply(self.row(i))
    }

    /// `h̃_λ(ξ)`; zero for `λ` outside the band.
    pub fn eval_h(&self, lambda: [i64; 2], xi: Freq<T>) -> C<T> {
        match self.modes.index(lambda) {
            Some(i) => self.eval_stencil(i, &self.stencil(xi)),
            None => C::zero(),
        }
    }

    /// `h̃_λ(ξ)` for every mode, in table order.
    pub fn eval_column(&self, xi: Freq<T>) -> Vec<C<T>> {
        let st = self.stencil(xi);
        (0..self.modes.len()).map(|i| self.eval_stencil(i, &st)).collect()
    }

    /// `a(x, ξ) = Σ_λ e^{2πiλ·x} h̃_λ(ξ) ⟨ξ⟩^{d_a}`.
    pub fn eval_symbol(&self, x: [T; 2], xi: Freq<T>) -> C<T> {
        let col = self.eval_column(xi);
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let sum = col.iter().enumerate().fold(C::zero(), |acc, (i, &h)| {
            let lam = self.modes.mode(i);
            let phase = two_pi * (T::of_i64(lam[0]) * x[0] + T::of_i64(lam[1]) * x[1]);
            acc + h * C::new(phase.cos(), phase.sin())
        });
        sum * japanese(xi).powf(self.order)
    }

    /// `a(x_p, ξ)` for every `x_p` of the `(2B_x)^d` grid at grid node `p`.
    fn spatial_values_at_node(&self, p: usize, fft: &FftNd<T>) -> Vec<C<T>> {
        let n = 2 * self.band();
        let mut buf = vec![C::zero(); fft.len()];
        let np = self.grid.len();
        for i in 0..self.modes.len() {
            let lam = self.modes.mode(i);
            let bin = if self.dim() == 1 {
                bin_of(lam[0], n)
            } else {
                bin_of(lam[0], n) * n + bin_of(lam[1], n)
            };
            buf[bin] = self.h[i * np + p];
        }
        fft.inverse(&mut buf);
        buf
    }

    /// `max |a(x, ξ)|` over the sampling grid `X × Ω`.
    pub fn max_abs_on_samples(&self) -> T {
        let fft = FftNd::new(2 * self.band(), self.dim());
        let pts = self.grid.points();
        (0..pts.len())
            .into_par_iter()
            .map(|p| {
                let scale = japanese(pts[p]).powf(self.order);
                self.spatial_values_at_node(p, &fft)
                    .iter()
                    .fold(T::zero(), |m, z| m.max(z.norm()))
                    * scale
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(T::zero(), T::max)
    }

    /// True when this is exactly the identity symbol.
    pub fn is_identity(&self) -> bool {
        if self.order != T::zero() {
            return false;
        }
        let zero = self.modes.index([0, 0]).unwrap();
        let np = self.grid.len();
        self.h.iter().enumerate().all(|(i, v)| {
            if i / np == zero {
                *v == C::new(T::one(), T::zero())
            } else {
                v.is_zero()
            }
        })
    }

    /// Largest table entry magnitude.
    pub fn max_abs_h(&self) -> T {
        self.h.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// Samples `a(x, ξ)` on `X × Ω` and returns its separated representation.
///
/// For each `ξ ∈ Ω` the values over `X` are transformed with one FFT; the
/// coefficients in `(−B_x, B_x)^d` are kept and divided by `⟨ξ⟩^{d_a}`.
pub fn sample_symbol<T, F>(
    a: F,
    order: T,
    x_grid: &SpatialGrid<T>,
    grid: Arc<FreqGrid<T>>,
) -> Result<Symbol<T>>
where
    T: Real,
    F: Fn([T; 2], Freq<T>) -> C<T> + Sync,
{
    let dim = x_grid.dim();
    check_dim(dim)?;
    if grid.dim() != dim {
        return Err(invalid(format!(
            "spatial grid is {dim}D but frequency grid is {}D",
            grid.dim()
        )));
    }
    let band = x_grid.band();
    let modes = ModeSet::new(dim, band);
    let n = x_grid.side();
    let fft = FftNd::new(n, dim);
    let norm = T::one() / T::of_usize(x_grid.len());
    let xs = x_grid.points();
    let pts = grid.points();

    let columns: Vec<Vec<C<T>>> = pts
        .par_iter()
        .map(|&xi| {
            let mut buf = Vec::with_capacity(xs.len());
            for &x in xs {
                let v = a(x, xi);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(DscError::Numerical(format!(
                        "symbol is not finite at x = ({}, {}), xi = ({}, {})",
                        x[0], x[1], xi[0], xi[1]
                    )));
                }
                buf.push(v);
            }
            fft.forward(&mut buf);
            let scale = norm / japanese(xi).powf(order);
            Ok((0..modes.len())
                .map(|i| {
                    let lam = modes.mode(i);
                    let bin = if dim == 1 {
                        bin_of(lam[0], n)
                    } else {
                        bin_of(lam[0], n) * n + bin_of(lam[1], n)
                    };
                    buf[bin] * scale
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let np = pts.len();
    let mut h = vec![C::zero(); modes.len() * np];
    for (p, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            h[i * np + p] = v;
        }
    }
    Symbol::from_table(order, band, grid, h)
}

/// Relative Frobenius distance `‖A − B‖ / ‖B‖` between two tables.
pub fn relative_table_change<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    let (mut num, mut den) = (T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        num = num + (*x - *y).norm_sqr();
        den = den + y.norm_sqr();
    }
    if den == T::zero() {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridParams, HierParams};

    fn hier(dim: usize, b: usize, l: usize, k: usize) -> Arc<FreqGrid<f64>> {
        Arc::new(
            GridParams::Hier(HierParams {
                dim,
                coarse_band: b,
                levels: l,
                nodes: k,
            })
            .build()
            .unwrap(),
        )
    }

    #[test]
    fn mode_set_round_trip() {
        for dim in 1..=2 {
            let m = ModeSet::new(dim, 4);
            for i in 0..m.len() {
                assert_eq!(m.index(m.mode(i)), Some(i));
                let lam = m.mode(i);
                assert_eq!(m.mode(m.negated(i)), [-lam[0], -lam[1]]);
            }
            assert_eq!(m.index([4, 0]), None);
        }
    }

    #[test]
    fn constant_symbol() {
        let g = hier(2, 3, 1, 4);
        let x = SpatialGrid::new(2, 3).unwrap();
        let s = sample_symbol(|_, _| C::new(1.0, 0.0), 0.0, &x, g).unwrap();
        let zero = s.modes().index([0, 0]).unwrap();
        for i in 0..s.modes().len() {
            for &v in s.row(i) {
                let want = if i == zero { 1.0 } else { 0.0 };
                assert!((v - C::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bracket_squared_normalizes_to_one() {
        let g = hier(2, 3, 2, 4);
        let x = SpatialGrid::new(2, 2).unwrap();
        let s = sample_symbol(
            |_, xi| C::new(1.0 + xi[0] * xi[0] + xi[1] * xi[1], 0.0),
            2.0,
            &x,
            g,
        )
        .unwrap();
        let v = s.eval_symbol([0.3, 0.9], [3.0, 4.0]);
        assert!((v - C::new(26.0, 0.0)).norm() < 1e-12);
        let off = s.eval_h([0, 0], [17.3, -40.2]);
        assert!((off - C::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let g = hier(1, 3, 0, 4);
        let x = SpatialGrid::new(1, 2).unwrap();
        let err = sample_symbol(|_, xi| C::new(1.0 / xi[0], 0.0), 0.0, &x, g).unwrap_err();
        assert!(err.to_string().contains("not finite"));
    }

    #[test]
    fn with_order_preserves_values() {
        let g = hier(1, 4, 2, 5);
        let s = Symbol::multiplier(2.0, 2, g, |xi| C::new(1.0 + xi[0] * xi[0], 0.0)).unwrap();
        let t = s.with_order(0.5);
        for &xi in &[[0.0, 0.0], [8.0, 0.0], [-30.0, 0.0]] {
            let a = s.eval_symbol([0.1, 0.0], xi);
            let b = t.eval_symbol([0.1, 0.0], xi);
            assert!((a - b).norm() <= 1e-12 * a.norm());
        }
    }
}
