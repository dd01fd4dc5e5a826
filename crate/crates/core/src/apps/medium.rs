//! Smooth periodic media `c(x)` or `α(x)` and the symbols built from them.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::IterOptions;
use crate::error::{invalid, Result};
use crate::fft::{signed_freq, FftNd};
use crate::grid::{FreqGrid, SpatialGrid};
use crate::scalar::{Real, C};
use crate::symbol::{sample_symbol, GridFunction, Symbol};

/// Spatial profile of a medium.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile<T> {
    Constant(T),
    /// `mean + amplitude · sin(2πx₁) sin(2πx₂)` (1D: `sin(2πx)`).
    Sinusoid { mean: T, amplitude: T },
    /// Real trigonometric polynomial `mean + Σ_k c_k e^{2πi k·x}`; the terms
    /// must come in conjugate pairs.
    Fourier { mean: T, terms: Vec<([i64; 2], C<T>)> },
    /// `background − dip · exp(−|x − centre|² / (2 width²))`, centred at ½.
    GaussianWaveguide { background: T, dip: T, width: T },
}

/// A medium with its wave frequency, optionally varying linearly in depth.
#[derive(Clone, Debug, PartialEq)]
pub struct MediumField<T> {
    pub dim: usize,
    pub profile: Profile<T>,
    /// `ω / 2π`.
    pub frequency: T,
    /// The medium at depth `z` is `value(x) · (1 + depth_gradient · z)`.
    pub depth_gradient: T,
}

fn two_pi<T: Real>() -> T {
    T::lit(2.0 * std::f64::consts::PI)
}

impl<T: Real> MediumField<T> {
    pub fn new(dim: usize, profile: Profile<T>, frequency: T) -> Self {
        Self {
            dim,
            profile,
            frequency,
            depth_gradient: T::zero(),
        }
    }

    pub fn homogeneous(dim: usize, value: T, frequency: T) -> Self {
        Self::new(dim, Profile::Constant(value), frequency)
    }

    /// `ω`.
    pub fn omega(&self) -> T {
        two_pi::<T>() * self.frequency
    }

    /// Random band-limited field `mean + δ(x)` with `max |δ| = amplitude`,
    /// built from Fourier modes `0 < |k|∞ < band`.
    pub fn random_bandlimited(
        dim: usize,
        seed: u64,
        band: usize,
        mean: T,
        amplitude: T,
        frequency: T,
    ) -> Result<Self> {
        if band < 2 {
            return Err(invalid("random medium needs band >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = band as i64;
        let mut terms = Vec::new();
        let range2 = if dim == 1 { 0..1 } else { -(b - 1)..b };
        for k0 in 0..b {
            for k1 in range2.clone() {
                // One representative per conjugate pair.
                if k0 == 0 && k1 <= 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (k0 * k0 + k1 * k1) as f64);
                let re: f64 = rng.gen_range(-1.0..1.0) * decay;
                let im: f64 = rng.gen_range(-1.0..1.0) * decay;
                let c = C::new(T::lit(re), T::lit(im));
                terms.push(([k0, k1], c));
                terms.push(([-k0, -k1], c.conj()));
            }
        }
        let raw = Profile::Fourier {
            mean: T::zero(),
            terms,
        };
        let probe = Self::new(dim, raw.clone(), frequency);
        let n = 8 * band;
        let peak = GridFunction::from_fn(dim, n, |x| C::new(probe.value(x), T::zero()))?
            .values()
            .iter()
            .fold(T::zero(), |m, z| m.max(z.re.abs()));
        let s = amplitude / peak;
        let terms = match raw {
            Profile::Fourier { terms, .. } => terms.into_iter().map(|(k, c)| (k, c * s)).collect(),
            _ => unreachable!(),
        };
        Ok(Self::new(dim, Profile::Fourier { mean, terms }, frequency))
    }

    /// Trigonometric interpolant of real samples on an `n^d` grid.
    pub fn from_samples(samples: &GridFunction<T>, frequency: T) -> Result<Self> {
        let dim = samples.dim();
        let n = samples.n();
        if !n.is_multiple_of(2) {
            return Err(invalid("medium samples need an even grid size"));
        }
        let fft = FftNd::new(n, dim);
        let mut buf: Vec<C<T>> = samples.values().iter().map(|z| C::new(z.re, T::zero())).collect();
        fft.forward(&mut buf);
        let norm = T::one() / T::of_usize(buf.len());
        let mut terms = Vec::new();
        let mut mean = T::zero();
        for (i, &v) in buf.iter().enumerate() {
            let (k0, k1) = if dim == 1 {
                (signed_freq(i, n), 0)
            } else {
                (signed_freq(i / n, n), signed_freq(i % n, n))
            };
            // Nyquist modes are dropped so the interpolant stays real.
            let nyq = -(n as i64) / 2;
            if k0 == nyq || k1 == nyq {
                continue;
            }
            let c = v * norm;
            if k0 == 0 && k1 == 0 {
                mean = c.re;
            } else if c.norm() > T::zero() {
                terms.push(([k0, k1], c));
            }
        }
        Ok(Self::new(dim, Profile::Fourier { mean, terms }, frequency))
    }

    /// Medium value at `x` and depth 0.
    pub fn value(&self, x: [T; 2]) -> T {
        let tp = two_pi::<T>();
        match &self.profile {
            Profile::Constant(c) => *c,
            Profile::Sinusoid { mean, amplitude } => {
                let s = (tp * x[0]).sin();
                if self.dim == 1 {
                    *mean + *amplitude * s
                } else {
                    *mean + *amplitude * s * (tp * x[1]).sin()
                }
            }
            Profile::Fourier { mean, terms } => {
                *mean
                    + terms.iter().fold(T::zero(), |acc, (k, c)| {
                        let ph = tp * (T::of_i64(k[0]) * x[0] + T::of_i64(k[1]) * x[1]);
                        acc + c.re * ph.cos() - c.im * ph.sin()
                    })
            }
            Profile::GaussianWaveguide {
                background,
                dip,
                width,
            } => *background - *dip * self.gaussian(x, *width),
        }
    }

    fn gaussian(&self, x: [T; 2], width: T) -> T {
        let h = T::lit(0.5);
        let d0 = x[0] - h;
        let d1 = if self.dim == 1 { T::zero() } else { x[1] - h };
        (-(d0 * d0 + d1 * d1) / (T::lit(2.0) * width * width)).exp()
    }

    /// Spatial gradient at `x` and depth 0 (second entry zero in 1D).
    pub fn gradient(&self, x: [T; 2]) -> [T; 2] {
        let tp = two_pi::<T>();
        match &self.profile {
            Profile::Constant(_) => [T::zero(); 2],
            Profile::Sinusoid { amplitude, .. } => {
                if self.dim == 1 {
                    [*amplitude * tp * (tp * x[0]).cos(), T::zero()]
                } else {
                    let (s0, c0) = (tp * x[0]).sin_cos();
                    let (s1, c1) = (tp * x[1]).sin_cos();
                    [*amplitude * tp * c0 * s1, *amplitude * tp * s0 * c1]
                }
            }
            Profile::Fourier { terms, .. } => terms.iter().fold([T::zero(); 2], |acc, (k, c)| {
                let ph = tp * (T::of_i64(k[0]) * x[0] + T::of_i64(k[1]) * x[1]);
                // d/dx Re(c e^{iφ}) = −Re(c) sin φ · φ' − Im(c) cos φ · φ'
                let dv = -(c.re * ph.sin() + c.im * ph.cos()) * tp;
                [acc[0] + dv * T::of_i64(k[0]), acc[1] + dv * T::of_i64(k[1])]
            }),
            Profile::GaussianWaveguide { dip, width, .. } => {
                let g = self.gaussian(x, *width);
                let h = T::lit(0.5);
                let w2 = *width * *width;
                let d1 = if self.dim == 1 { T::zero() } else { x[1] - h };
                [*dip * g * (x[0] - h) / w2, *dip * g * d1 / w2]
            }
        }
    }

    /// Medium value at `x` and depth `z`.
    pub fn value_at(&self, x: [T; 2], z: T) -> T {
        self.value(x) * (T::one() + self.depth_gradient * z)
    }

    /// Minimum over a sampling grid; used to validate positivity.
    pub fn min_on_grid(&self, n: usize) -> Result<T> {
        let g = GridFunction::from_fn(self.dim, n, |x| C::new(self.value(x), T::zero()))?;
        Ok(g.values().iter().fold(T::infinity(), |m, z| m.min(z.re)))
    }

    /// Errors unless the medium is positive on a fine grid.
    pub fn check_positive(&self, what: &str) -> Result<()> {
        let m = self.min_on_grid(64)?;
        if m > T::zero() {
            Ok(())
        } else {
            Err(invalid(format!("{what} must be positive everywhere (min {m})")))
        }
    }

    /// Samples on an `n^d` grid as a real grid function.
    pub fn sampled(&self, n: usize) -> Result<GridFunction<T>> {
        GridFunction::from_fn(self.dim, n, |x| C::new(self.value(x), T::zero()))
    }
}

/// Grid, band and iteration settings shared by every symbol an application
/// builds.
#[derive(Clone, Debug)]
pub struct SymbolSetup<T> {
    /// Spatial half-bandwidth `B_x`.
    pub band: usize,
    pub grid: Arc<FreqGrid<T>>,
    pub iter: IterOptions,
}

impl<T: Real> SymbolSetup<T> {
    pub fn spatial_grid(&self) -> Result<SpatialGrid<T>> {
        SpatialGrid::new(self.grid.dim(), self.band)
    }

    /// Samples `a(x, ξ)` of the given order on this setup.
    pub fn sample<F>(&self, order: T, a: F) -> Result<Symbol<T>>
    where
        F: Fn([T; 2], [T; 2]) -> C<T> + Sync,
    {
        sample_symbol(a, order, &self.spatial_grid()?, self.grid.clone())
    }
}

/// `mass + 4π² α(x)|ξ|² − 2πi ∇α(x)·ξ`, the symbol of `mass − div(α∇)`.
pub fn elliptic_symbol<T: Real>(alpha: &MediumField<T>, mass: T, setup: &SymbolSetup<T>) -> Result<Symbol<T>> {
    let tp = two_pi::<T>();
    let fp2 = tp * tp;
    setup.sample(T::lit(2.0), |x, xi| {
        let a = alpha.value(x);
        let g = alpha.gradient(x);
        let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
        C::new(mass + fp2 * a * xi2, -tp * (g[0] * xi[0] + g[1] * xi[1]))
    })
}
