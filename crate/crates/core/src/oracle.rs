//! Dense brute-force reference operators.
//!
//! [`densify`] builds the full `n^d × n^d` matrix of a symbol by direct
//! summation over the frequency window, without touching the FFT code path.
//! [`dense_reference`] then performs the matching matrix operation (product,
//! inverse, square root, exponential) in double precision, giving ground
//! truth for the symbol calculus at small sizes.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::apply::window_freqs;
use crate::error::{invalid, numerical, Result};
use crate::scalar::{from_c64, to_c64, Real};
use crate::symbol::{GridFunction, Symbol};

type Mat = DMatrix<Complex<f64>>;

/// Largest supported `n^d`.
pub const MAX_ROWS: usize = 4096;

/// Explicit matrix of an operator on the `n^d` periodic grid.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub dim: usize,
    pub n: usize,
    pub matrix: Mat,
}

/// Which dense operation [`dense_reference`] performs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DenseKind {
    Compose,
    Inverse,
    Sqrt,
    InvSqrt,
    /// `exp(t A)`.
    Exp(f64),
}

fn grid_points(dim: usize, n: usize) -> Vec<[f64; 2]> {
    let nf = n as f64;
    if dim == 1 {
        (0..n).map(|p| [p as f64 / nf, 0.0]).collect()
    } else {
        (0..n * n)
            .map(|p| [(p / n) as f64 / nf, (p % n) as f64 / nf])
            .collect()
    }
}

fn phase(x: [f64; 2], xi: [f64; 2]) -> Complex<f64> {
    let t = 2.0 * std::f64::consts::PI * (x[0] * xi[0] + x[1] * xi[1]);
    Complex::new(t.cos(), t.sin())
}

/// `M[p, q] = n^{-d} Σ_ξ e^{2πi x_p·ξ} a(x_p, ξ) e^{−2πi x_q·ξ}`.
pub fn densify<T: Real>(a: &Symbol<T>, n: usize) -> Result<DenseOperator> {
    let dim = a.dim();
    let rows = n.pow(dim as u32);
    if rows == 0 || rows > MAX_ROWS {
        return Err(invalid(format!(
            "dense oracle limited to {MAX_ROWS} rows, requested {rows}"
        )));
    }
    let xs = grid_points(dim, n);
    let freqs: Vec<[f64; 2]> = window_freqs::<T>(dim, n)
        .iter()
        .map(|f| [f[0].as_f64(), f[1].as_f64()])
        .collect();
    let nd = rows as f64;
    // S[p, k] = e^{2πi x_p·ξ_k} a(x_p, ξ_k) / n^d, built column by column.
    let cols: Vec<Vec<Complex<f64>>> = freqs
        .par_iter()
        .map(|&xi| {
            let xi_t = [T::lit(xi[0]), T::lit(xi[1])];
            xs.iter()
                .map(|&x| {
                    let v = to_c64(a.eval_symbol([T::lit(x[0]), T::lit(x[1])], xi_t));
                    v * phase(x, xi) / nd
                })
                .collect()
        })
        .collect();
    let s = Mat::from_fn(rows, rows, |p, k| cols[k][p]);
    let f = Mat::from_fn(rows, rows, |k, q| phase(xs[q], freqs[k]).conj());
    Ok(DenseOperator {
        dim,
        n,
        matrix: s * f,
    })
}

impl DenseOperator {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(dim: usize, n: usize) -> Self {
        let rows = n.pow(dim as u32);
        Self {
            dim,
            n,
            matrix: Mat::identity(rows, rows),
        }
    }

    pub fn apply<T: Real>(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        if u.len() != self.rows() {
            return Err(invalid("grid function size does not match dense operator"));
        }
        let v = nalgebra::DVector::from_iterator(u.len(), u.values().iter().map(|&z| to_c64(z)));
        let w = &self.matrix * v;
        GridFunction::from_values(u.dim(), u.n(), w.iter().map(|&z| from_c64(z)).collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    /// The matrix in the Fourier basis, `F M F^{-1}`, with rows and columns in
    /// FFT bin order.
    pub fn fourier_matrix(&self) -> Mat {
        let xs = grid_points(self.dim, self.n);
        let freqs: Vec<[f64; 2]> = window_freqs::<f64>(self.dim, self.n);
        let rows = self.rows();
        let nd = rows as f64;
        let f = Mat::from_fn(rows, rows, |k, q| phase(xs[q], freqs[k]).conj());
        let finv = Mat::from_fn(rows, rows, |q, k| phase(xs[q], freqs[k]) / nd);
        f * &self.matrix * finv
    }
}

/// Ground-truth matrix for a calculus operation.
pub fn dense_reference(kind: DenseKind, a: &DenseOperator, b: Option<&DenseOperator>) -> Result<DenseOperator> {
    let m = &a.matrix;
    let matrix = match kind {
        DenseKind::Compose => {
            let b = b.ok_or_else(|| invalid("compose reference needs two operands"))?;
            m * &b.matrix
        }
        DenseKind::Inverse => inverse(m)?,
        DenseKind::Sqrt => denman_beavers(m)?.0,
        DenseKind::InvSqrt => denman_beavers(m)?.1,
        DenseKind::Exp(t) => expm(&(m * Complex::new(t, 0.0))),
    };
    Ok(DenseOperator {
        dim: a.dim,
        n: a.n,
        matrix,
    })
}

fn inverse(m: &Mat) -> Result<Mat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| numerical("dense matrix is singular"))
}

/// Principal square root and its inverse by the Denman–Beavers iteration.
fn denman_beavers(m: &Mat) -> Result<(Mat, Mat)> {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = Mat::identity(n, n);
    for _ in 0..100 {
        let yi = inverse(&y).map_err(|_| numerical("square root oracle hit a singular iterate"))?;
        let zi = inverse(&z).map_err(|_| numerical("square root oracle hit a singular iterate"))?;
        let y_next = (&y + zi) * Complex::new(0.5, 0.0);
        let z_next = (&z + yi) * Complex::new(0.5, 0.0);
        let change = (&y_next - &y).norm() / y_next.norm();
        y = y_next;
        z = z_next;
        if change < 1e-14 {
            return Ok((y, z));
        }
    }
    Err(numerical(
        "square root oracle did not converge; spectrum may touch the negative real axis",
    ))
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
fn expm(m: &Mat) -> Mat {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm1 / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = m * Complex::new(1.0 / 2f64.powi(s), 0.0);
    let mut term = Mat::identity(n, n);
    let mut sum = Mat::identity(n, n);
    for k in 1..=18 {
        term = &term * &a * Complex::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Relative spectral-norm distance `‖A − B‖₂ / ‖B‖₂` on the central Fourier
/// band `|ξ|∞ < n/4`.
///
/// Both operands are compared as maps from and to the low-frequency subspace,
/// which is where a band-truncated symbol and a periodically wrapped dense
/// matrix are expected to agree.
pub fn central_band_error(a: &DenseOperator, reference: &DenseOperator) -> f64 {
    let fa = a.fourier_matrix();
    let fb = reference.fourier_matrix();
    let freqs = window_freqs::<f64>(a.dim, a.n);
    let limit = a.n as f64 / 4.0;
    let keep: Vec<usize> = freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| f[0].abs() < limit && f[1].abs() < limit)
        .map(|(i, _)| i)
        .collect();
    let sub = |m: &Mat| Mat::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])]);
    let (sa, sb) = (sub(&fa), sub(&fb));
    spectral_norm(&(sa - &sb)) / spectral_norm(&sb)
}

/// Relative spectral-norm distance over the full matrices.
pub fn full_error(a: &DenseOperator, reference: &DenseOperator) -> f64 {
    spectral_norm(&(&a.matrix - &reference.matrix)) / spectral_norm(&reference.matrix)
}
