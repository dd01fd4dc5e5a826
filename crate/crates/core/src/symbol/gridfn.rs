//! Complex samples of a periodic function on the uniform grid `{p/n}^d`.

use std::io::{Read, Write};

use num_traits::Zero;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, DscError, Result};
use crate::fft::{signed_freq, FftNd};
use crate::grid::check_dim;
use crate::scalar::{Real, C};

const MAGIC: &[u8; 4] = b"DSCF";

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    dim: usize,
    n: usize,
    values: Vec<C<T>>,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n == 0 {
            return Err(invalid("grid function needs n >= 1"));
        }
        Ok(Self {
            dim,
            n,
            values: vec![C::zero(); n.pow(dim as u32)],
        })
    }

    pub fn from_values(dim: usize, n: usize, values: Vec<C<T>>) -> Result<Self> {
        check_dim(dim)?;
        if values.len() != n.pow(dim as u32) {
            return Err(invalid(format!(
                "grid function of size {n}^{dim} given {} values",
                values.len()
            )));
        }
        Ok(Self { dim, n, values })
    }

    /// Samples `f` at `x_p = p / n`.
    pub fn from_fn(dim: usize, n: usize, mut f: impl FnMut([T; 2]) -> C<T>) -> Result<Self> {
        let mut g = Self::zeros(dim, n)?;
        for p in 0..g.values.len() {
            g.values[p] = f(g.point(p));
        }
        Ok(g)
    }

    /// Real noise with uniform samples in `[-1, 1]`, then low-passed to the
    /// Fourier modes `|k|∞ < limit`. The same seed gives the same field.
    pub fn random_bandlimited(dim: usize, n: usize, limit: usize, seed: u64) -> Result<Self> {
        if limit == 0 || 2 * limit > n {
            return Err(invalid(format!("noise band limit {limit} must lie in 1..={}", n / 2)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Self::from_fn(dim, n, |_| C::new(T::lit(rng.gen_range(-1.0..1.0)), T::zero()))?;
        let fft = FftNd::new(n, dim);
        fft.forward(&mut g.values);
        let lim = limit as i64;
        let inv_len = T::one() / T::of_usize(g.values.len());
        for (p, v) in g.values.iter_mut().enumerate() {
            let keep = if dim == 1 {
                signed_freq(p, n).abs() < lim
            } else {
                signed_freq(p / n, n).abs() < lim && signed_freq(p % n, n).abs() < lim
            };
            *v = if keep { *v * inv_len } else { C::zero() };
        }
        fft.inverse(&mut g.values);
        for v in g.values.iter_mut() {
            v.im = T::zero();
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C<T>> {
        self.values
    }

    /// Coordinates of sample `p` (row-major, first axis slowest).
    pub fn point(&self, p: usize) -> [T; 2] {
        let n = T::of_usize(self.n);
        if self.dim == 1 {
            [T::of_usize(p) / n, T::zero()]
        } else {
            [T::of_usize(p / self.n) / n, T::of_usize(p % self.n) / n]
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }

    /// Euclidean norm of the sample vector.
    pub fn norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |s, z| s + z.norm_sqr())
            .sqrt()
    }

    /// `Σ conj(self_p) · other_p`.
    pub fn dot(&self, other: &Self) -> C<T> {
        self.values
            .iter()
            .zip(&other.values)
            .fold(C::zero(), |s, (a, b)| s + a.conj() * b)
    }

    pub fn mean(&self) -> C<T> {
        let s = self.values.iter().fold(C::zero(), |s, &z| s + z);
        s / T::of_usize(self.values.len())
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            dim: self.dim,
            n: self.n,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: C<T>, other: &Self) -> Self {
        debug_assert!(self.same_shape(other));
        Self {
            dim: self.dim,
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b * c)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(C::new(-T::one(), T::zero()), other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(C::new(T::one(), T::zero()), other)
    }

    /// `‖self − other‖ / ‖other‖`.
    pub fn relative_error(&self, reference: &Self) -> T {
        let r = reference.norm();
        let d = self.sub(reference).norm();
        if r == T::zero() {
            d
        } else {
            d / r
        }
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == T::zero())
    }

    /// Writes the binary `DSCF` format: magic, `d: u32`, `n: u64`,
    /// `complex: u32`, then little-endian `f64` samples (pairs when complex).
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let complex = !self.is_real();
        w.write_all(MAGIC)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(complex as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for z in &self.values {
            buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
            if complex {
                buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(DscError::Format("grid function file must start with DSCF".into()));
        }
        let dim = read_u32(&mut r)? as usize;
        let n = read_u64(&mut r)? as usize;
        let complex = match read_u32(&mut r)? {
            0 => false,
            1 => true,
            f => return Err(DscError::Format(format!("complex flag must be 0 or 1, got {f}"))),
        };
        check_dim(dim).map_err(|_| DscError::Format(format!("bad dimension {dim}")))?;
        let len = n
            .checked_pow(dim as u32)
            .filter(|&l| l > 0 && l < 1 << 34)
            .ok_or_else(|| DscError::Format(format!("bad size n = {n}")))?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            let re = read_f64(&mut r)?;
            let im = if complex { read_f64(&mut r)? } else { 0.0 };
            values.push(C::new(T::lit(re), T::lit(im)));
        }
        Ok(Self { dim, n, values })
    }

    /// 8-bit binary PGM of `|u|` scaled to `[0, 255]`. 1D data is written as a
    /// single row.
    pub fn write_pgm(&self, mut w: impl Write) -> Result<()> {
        let (width, height) = if self.dim == 1 {
            (self.n, 1)
        } else {
            (self.n, self.n)
        };
        let mags: Vec<f64> = self.values.iter().map(|z| z.norm().as_f64()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        write!(w, "P5\n{width} {height}\n255\n")?;
        let bytes: Vec<u8> = mags
            .iter()
            .map(|&m| {
                if max > 0.0 {
                    (m / max * 255.0).round() as u8
                } else {
                    0
                }
            })
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip_complex_and_real() {
        let u = GridFunction::<f64>::from_fn(2, 4, |x| C::new(x[0], -x[1])).unwrap();
        let mut buf = Vec::new();
        u.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 4 + 16 * 16);
        assert_eq!(GridFunction::read_from(&buf[..]).unwrap(), u);

        let r = GridFunction::<f64>::from_fn(1, 8, |x| C::new(x[0], 0.0)).unwrap();
        let mut buf = Vec::new();
        r.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 20 + 8 * 8);
        assert_eq!(GridFunction::read_from(&buf[..]).unwrap(), r);
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(GridFunction::<f64>::read_from(&b"NOPE...."[..]).is_err());
    }

    #[test]
    fn pgm_header_and_scaling() {
        let u = GridFunction::<f64>::from_fn(2, 2, |x| C::new(x[0] + x[1], 0.0)).unwrap();
        let mut buf = Vec::new();
        u.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&buf[buf.len() - 4..], &[0, 128, 128, 255]);
    }
}
