//! Thin wrapper over `rustfft` for the 1D and 2D periodic transforms used by
//! sampling and application.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::scalar::{Real, C};

/// Unnormalized forward and inverse FFT on an `n^d` row-major array.
pub(crate) struct FftNd<T: Real> {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> FftNd<T> {
    pub(crate) fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// `û_k = Σ_p u_p e^{-2πi k·p/n}`.
    pub(crate) fn forward(&self, buf: &mut [C<T>]) {
        self.run(buf, &self.fwd);
    }

    /// `u_p = Σ_k û_k e^{+2πi k·p/n}`.
    pub(crate) fn inverse(&self, buf: &mut [C<T>]) {
        self.run(buf, &self.inv);
    }

    fn run(&self, buf: &mut [C<T>], plan: &Arc<dyn Fft<T>>) {
        debug_assert_eq!(buf.len(), self.len());
        plan.process(buf);
        if self.dim == 2 {
            transpose_square(buf, self.n);
            plan.process(buf);
            transpose_square(buf, self.n);
        }
    }
}

fn transpose_square<T: Copy>(buf: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Signed frequency of FFT bin `k` on a length-`n` grid, in `[-n/2, n/2)`.
#[inline]
pub fn signed_freq(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT bin holding signed frequency `f` on a length-`n` grid.
#[inline]
pub fn bin_of(f: i64, n: usize) -> usize {
    f.rem_euclid(n as i64) as usize
}

/// Table of `e^{2πi k/n}` for `k = 0..n`.
pub(crate) fn roots_of_unity<T: Real>(n: usize) -> Vec<C<T>> {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            C::new(T::lit(t.cos()), T::lit(t.sin()))
        })
        .collect()
}
