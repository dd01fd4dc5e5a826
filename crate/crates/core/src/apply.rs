//! Applying symbols to grid functions.
//!
//! `(Au)(x) = Σ_λ e_λ(x) · IFFT[h̃_λ(ξ) ⟨ξ⟩^{d_a} û(ξ)](x)`, with `ξ` ranging
//! over the centred window `[−n/2, n/2)^d` (the Nyquist bin is `−n/2`).
//! [`compress`] replaces the sum over `λ` by a short sum of separated terms.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::fft::{roots_of_unity, signed_freq, FftNd};
use crate::grid::{check_dim, Freq};
use crate::scalar::{from_c64, japanese, to_c64, Real, C};
use crate::symbol::{GridFunction, ModeSet, Symbol};

/// Frequencies of an `n^d` FFT array in natural bin order.
pub fn window_freqs<T: Real>(dim: usize, n: usize) -> Vec<Freq<T>> {
    if dim == 1 {
        (0..n)
            .map(|k| [T::of_i64(signed_freq(k, n)), T::zero()])
            .collect()
    } else {
        let mut v = Vec::with_capacity(n * n);
        for k0 in 0..n {
            for k1 in 0..n {
                v.push([
                    T::of_i64(signed_freq(k0, n)),
                    T::of_i64(signed_freq(k1, n)),
                ]);
            }
        }
        v
    }
}

/// `û = FFT(u) / n^d`.
fn spectrum<T: Real>(u: &GridFunction<T>, fft: &FftNd<T>) -> Vec<C<T>> {
    let mut buf = u.values().to_vec();
    fft.forward(&mut buf);
    let norm = T::one() / T::of_usize(buf.len());
    for v in &mut buf {
        *v = *v * norm;
    }
    buf
}

/// Multiplies `buf` by `e^{2πi λ·x_p}` on the `n^d` grid.
fn modulate<T: Real>(buf: &mut [C<T>], lam: [i64; 2], n: usize, dim: usize, roots: &[C<T>]) {
    let nn = n as i64;
    if lam == [0, 0] {
        return;
    }
    if dim == 1 {
        for (p, v) in buf.iter_mut().enumerate() {
            *v = *v * roots[(lam[0] * p as i64).rem_euclid(nn) as usize];
        }
    } else {
        for p0 in 0..n {
            let base = lam[0] * p0 as i64;
            for p1 in 0..n {
                let v = &mut buf[p0 * n + p1];
                *v = *v * roots[(base + lam[1] * p1 as i64).rem_euclid(nn) as usize];
            }
        }
    }
}

/// Sums per-term buffers in a fixed order.
fn ordered_sum<T: Real>(parts: Vec<Vec<C<T>>>, len: usize) -> Vec<C<T>> {
    let mut out = vec![C::zero(); len];
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o = *o + v;
        }
    }
    out
}

/// A symbol sampled on the dense window of one resolution, ready to apply
/// repeatedly.
#[derive(Clone, Debug)]
pub struct WindowedSymbol<T: Real> {
    dim: usize,
    n: usize,
    modes: ModeSet,
    /// `h̃_λ(ξ) ⟨ξ⟩^{d_a}` per mode, in FFT bin order.
    table: Vec<C<T>>,
}

impl<T: Real> WindowedSymbol<T> {
    pub fn new(a: &Symbol<T>, n: usize) -> Result<Self> {
        let dim = a.dim();
        check_dim(dim)?;
        if n == 0 || !n.is_multiple_of(2) {
            return Err(invalid(format!("application grid size must be even, got {n}")));
        }
        let freqs = window_freqs::<T>(dim, n);
        let m = a.modes().len();
        let len = freqs.len();
        let columns: Vec<Vec<C<T>>> = freqs
            .par_iter()
            .map(|&xi| {
                let scale = japanese(xi).powf(a.order());
                let st = a.stencil(xi);
                (0..m).map(|i| a.eval_stencil(i, &st) * scale).collect()
            })
            .collect();
        let mut table = vec![C::zero(); m * len];
        for (k, col) in columns.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                table[i * len + k] = v;
            }
        }
        Ok(Self {
            dim,
            n,
            modes: a.modes(),
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `h̃_λ ⟨ξ⟩^{d_a}` on the window for mode index `i`, in FFT bin order.
    pub fn row(&self, i: usize) -> &[C<T>] {
        let len = self.n.pow(self.dim as u32);
        &self.table[i * len..(i + 1) * len]
    }

    pub fn apply(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        if u.dim() != self.dim || u.n() != self.n {
            return Err(invalid(format!(
                "grid function is {}D with n = {}, operator expects {}D with n = {}",
                u.dim(),
                u.n(),
                self.dim,
                self.n
            )));
        }
        let fft = FftNd::new(self.n, self.dim);
        let roots = roots_of_unity::<T>(self.n);
        let u_hat = spectrum(u, &fft);
        let parts: Vec<Vec<C<T>>> = (0..self.modes.len())
            .into_par_iter()
            .filter_map(|i| {
                let row = self.row(i);
                if row.iter().all(|v| v.is_zero()) {
                    return None;
                }
                let mut buf: Vec<C<T>> = row.iter().zip(&u_hat).map(|(&h, &c)| h * c).collect();
                fft.inverse(&mut buf);
                modulate(&mut buf, self.modes.mode(i), self.n, self.dim, &roots);
                Some(buf)
            })
            .collect();
        GridFunction::from_values(self.dim, self.n, ordered_sum(parts, u.len()))
    }
}

/// `A u` for a symbol `A` and a grid function `u` with even `n`.
pub fn apply<T: Real>(a: &Symbol<T>, u: &GridFunction<T>) -> Result<GridFunction<T>> {
    if u.dim() != a.dim() {
        return Err(invalid(format!(
            "symbol is {}D but grid function is {}D",
            a.dim(),
            u.dim()
        )));
    }
    if a.is_identity() {
        if !u.n().is_multiple_of(2) {
            return Err(invalid(format!("application grid size must be even, got {}", u.n())));
        }
        return Ok(u.clone());
    }
    WindowedSymbol::new(a, u.n())?.apply(u)
}

/// Rank-`T` separated approximation `h̃_λ(ξ) ≈ Σ_t u_{λt} v_t(ξ)` on one
/// application window.
#[derive(Clone, Debug)]
pub struct LowRankSymbol<T: Real> {
    dim: usize,
    n: usize,
    order: T,
    singular_values: Vec<f64>,
    /// `Σ_λ e_λ(x_p) u_{λt}` on the `n^d` grid, one vector per term.
    spatial: Vec<Vec<C<T>>>,
    /// `v_t(ξ) ⟨ξ⟩^{d_a}` on the window, FFT bin order.
    spectral: Vec<Vec<C<T>>>,
}

impl<T: Real> LowRankSymbol<T> {
    pub fn rank(&self) -> usize {
        self.spatial.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> T {
        self.order
    }

    /// All singular values of the sampled table, largest first.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }
}

/// Samples `h̃` on `λ × [−n/2, n/2)^d` and keeps the singular triplets with
/// `σ > tol · σ_max`.
pub fn compress<T: Real>(a: &Symbol<T>, n: usize, tol: f64) -> Result<LowRankSymbol<T>> {
    if !(tol >= 0.0) {
        return Err(invalid("compression tolerance must be non-negative"));
    }
    let dim = a.dim();
    let w = WindowedSymbol::new(a, n)?;
    let modes = a.modes();
    let m = modes.len();
    let len = n.pow(dim as u32);
    let freqs = window_freqs::<T>(dim, n);
    let scale: Vec<T> = freqs.iter().map(|&xi| japanese(xi).powf(a.order())).collect();
    // Factor the normalized table h̃ (without ⟨ξ⟩^{d_a}).
    let h = DMatrix::<Complex<f64>>::from_fn(m, len, |i, k| to_c64(w.row(i)[k] / scale[k]));
    let svd = h.svd(true, true);
    let u = svd.u.expect("left factor requested");
    let v_t = svd.v_t.expect("right factor requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order_idx: Vec<usize> = (0..sigma.len()).collect();
    order_idx.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let smax = order_idx.first().map(|&i| sigma[i]).unwrap_or(0.0);
    let keep: Vec<usize> = order_idx
        .iter()
        .copied()
        .filter(|&i| sigma[i] > tol * smax && sigma[i] > 0.0)
        .collect();

    let fft = FftNd::<T>::new(n, dim);
    let mut spatial = Vec::with_capacity(keep.len());
    let mut spectral = Vec::with_capacity(keep.len());
    for &t in &keep {
        let mut coeffs = vec![C::zero(); len];
        for i in 0..m {
            let lam = modes.mode(i);
            let bin = if dim == 1 {
                crate::fft::bin_of(lam[0], n)
            } else {
                crate::fft::bin_of(lam[0], n) * n + crate::fft::bin_of(lam[1], n)
            };
            coeffs[bin] = coeffs[bin] + from_c64::<T>(u[(i, t)] * sigma[t]);
        }
        fft.inverse(&mut coeffs);
        spatial.push(coeffs);
        spectral.push(
            (0..len)
                .map(|k| from_c64::<T>(v_t[(t, k)]) * scale[k])
                .collect(),
        );
    }
    Ok(LowRankSymbol {
        dim,
        n,
        order: a.order(),
        singular_values: order_idx.iter().map(|&i| sigma[i]).collect(),
        spatial,
        spectral,
    })
}

/// `A u` through the separated factors: one inverse FFT per retained term.
pub fn apply_compressed<T: Real>(f: &LowRankSymbol<T>, u: &GridFunction<T>) -> Result<GridFunction<T>> {
    if u.dim() != f.dim || u.n() != f.n {
        return Err(invalid(format!(
            "compressed operator built for {}D n = {}, got {}D n = {}",
            f.dim,
            f.n,
            u.dim(),
            u.n()
        )));
    }
    let fft = FftNd::new(f.n, f.dim);
    let u_hat = spectrum(u, &fft);
    let parts: Vec<Vec<C<T>>> = (0..f.rank())
        .into_par_iter()
        .map(|t| {
            let mut buf: Vec<C<T>> = f.spectral[t].iter().zip(&u_hat).map(|(&v, &c)| v * c).collect();
            fft.inverse(&mut buf);
            for (b, &s) in buf.iter_mut().zip(&f.spatial[t]) {
                *b = *b * s;
            }
            buf
        })
        .collect();
    GridFunction::from_values(f.dim, f.n, ordered_sum(parts, u.len()))
}
