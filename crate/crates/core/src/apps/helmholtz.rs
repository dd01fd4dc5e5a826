//! Helmholtz operator `L u = −Δu − (ω²/c²) u`, complex-shifted Laplace
//! preconditioners built with the symbol calculus, and BiCGStab.

use crate::apply::{compress, LowRankSymbol};
use crate::calculus::{inverse, IterationReport};
use crate::error::{invalid, numerical, Result};
use crate::fft::{signed_freq, FftNd};
use crate::scalar::{Real, C};
use crate::symbol::{GridFunction, Symbol};

use super::medium::{MediumField, SymbolSetup};

/// Shift applied to `ω²/c²` in the preconditioner `M = −Δ + s ω²/c²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreconditionerVariant {
    /// `s = 1`.
    M1,
    /// `s = 1 + i`.
    M2,
}

impl PreconditionerVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::M1 => "m1",
            Self::M2 => "m2",
        }
    }

    fn shift<T: Real>(self) -> C<T> {
        match self {
            Self::M1 => C::new(T::one(), T::zero()),
            Self::M2 => C::new(T::one(), T::one()),
        }
    }
}

fn four_pi2<T: Real>() -> T {
    T::lit(4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// `−Δu − (ω²/c²) u` with the Laplacian applied exactly in Fourier space.
pub fn helmholtz_apply<T: Real>(c: &MediumField<T>, u: &GridFunction<T>) -> Result<GridFunction<T>> {
    if c.dim != u.dim() {
        return Err(invalid("medium and grid function dimensions differ"));
    }
    let n = u.n();
    let dim = u.dim();
    let fft = FftNd::new(n, dim);
    let mut buf = u.values().to_vec();
    fft.forward(&mut buf);
    let norm = T::one() / T::of_usize(buf.len());
    for (i, v) in buf.iter_mut().enumerate() {
        let (k0, k1) = if dim == 1 {
            (signed_freq(i, n), 0)
        } else {
            (signed_freq(i / n, n), signed_freq(i % n, n))
        };
        let k2 = T::of_i64(k0 * k0 + k1 * k1);
        *v = *v * (four_pi2::<T>() * k2 * norm);
    }
    fft.inverse(&mut buf);
    let w2 = c.omega() * c.omega();
    for (p, v) in buf.iter_mut().enumerate() {
        let cv = c.value(u.point(p));
        *v = *v - u.values()[p] * (w2 / (cv * cv));
    }
    GridFunction::from_values(dim, n, buf)
}

/// Symbol `4π²|ξ|² + s ω²/c²(x)` of the shifted Laplacian, order 2.
pub fn preconditioner_symbol<T: Real>(
    c: &MediumField<T>,
    variant: PreconditionerVariant,
    setup: &SymbolSetup<T>,
) -> Result<Symbol<T>> {
    c.check_positive("sound speed")?;
    let w2 = c.omega() * c.omega();
    let s = variant.shift::<T>();
    setup.sample(T::lit(2.0), |x, xi| {
        let cv = c.value(x);
        C::new(four_pi2::<T>() * (xi[0] * xi[0] + xi[1] * xi[1]), T::zero()) + s * (w2 / (cv * cv))
    })
}

/// Inverse of the preconditioner symbol and its compressed form on the
/// `n^d` application grid.
pub struct Preconditioner<T: Real> {
    pub symbol: Symbol<T>,
    pub compressed: LowRankSymbol<T>,
    pub report: IterationReport,
}

pub fn build_preconditioner<T: Real>(
    c: &MediumField<T>,
    variant: PreconditionerVariant,
    setup: &SymbolSetup<T>,
    n: usize,
    compress_tol: f64,
) -> Result<Preconditioner<T>> {
    let m = preconditioner_symbol(c, variant, setup)?;
    let (inv, report) = inverse(&m, setup.iter)?;
    if !report.converged {
        return Err(numerical(format!(
            "preconditioner inversion did not converge in {} iterations",
            report.iterations
        )));
    }
    let compressed = compress(&inv, n, compress_tol)?;
    Ok(Preconditioner {
        symbol: inv,
        compressed,
        report,
    })
}

/// Outcome of [`bicgstab`].
#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub solution: GridFunction<T>,
    /// Iterations performed; a half step counts as 0.5.
    pub iterations: f64,
    /// Final true relative residual `‖L u − f‖ / ‖f‖`.
    pub residual: f64,
    pub converged: bool,
    pub restarts: usize,
}

/// Right-preconditioned BiCGStab from a zero initial guess: solves
/// `L P y = f` and returns `u = P y`.
pub fn bicgstab<T, L, P>(l_apply: L, p_apply: P, f: &GridFunction<T>, rtol: f64, max_iter: usize) -> Result<SolveReport<T>>
where
    T: Real,
    L: Fn(&GridFunction<T>) -> Result<GridFunction<T>>,
    P: Fn(&GridFunction<T>) -> Result<GridFunction<T>>,
{
    let f_norm = f.norm().as_f64();
    let mut x = GridFunction::zeros(f.dim(), f.n())?;
    if f_norm == 0.0 {
        return Ok(SolveReport {
            solution: x,
            iterations: 0.0,
            residual: 0.0,
            converged: true,
            restarts: 0,
        });
    }
    let rtol_t = T::lit(rtol);
    let one = C::new(T::one(), T::zero());
    let tiny = T::lit(1e-300).max(T::min_positive_value());
    let true_residual = |x: &GridFunction<T>| -> Result<f64> {
        Ok(l_apply(x)?.sub(f).norm().as_f64() / f_norm)
    };

    let mut restarts = 0;
    let mut iter = 0usize;
    'restart: loop {
        let mut r = f.sub(&l_apply(&x)?);
        let r_hat = r.clone();
        let mut rho = one;
        let mut alpha = one;
        let mut omega = one;
        let mut v = GridFunction::zeros(f.dim(), f.n())?;
        let mut p = GridFunction::zeros(f.dim(), f.n())?;
        while iter < max_iter {
            iter += 1;
            let rho_next = r_hat.dot(&r);
            if rho_next.norm() < tiny * r_hat.norm() * r.norm() || rho_next.norm() == T::zero() {
                if restarts == 0 {
                    restarts += 1;
                    continue 'restart;
                }
                return Err(numerical(format!("BiCGStab breakdown (rho = 0) at iteration {iter}")));
            }
            let beta = (rho_next / rho) * (alpha / omega);
            p = r.axpy(beta, &p.axpy(-omega, &v));
            let y = p_apply(&p)?;
            v = l_apply(&y)?;
            let denom = r_hat.dot(&v);
            if denom.norm() == T::zero() {
                return Err(numerical(format!("BiCGStab breakdown (r̂·v = 0) at iteration {iter}")));
            }
            alpha = rho_next / denom;
            let s = r.axpy(-alpha, &v);
            let x_half = x.axpy(alpha, &y);
            if s.norm() <= rtol_t * T::lit(f_norm) {
                let res = true_residual(&x_half)?;
                if res < rtol {
                    return Ok(SolveReport {
                        solution: x_half,
                        iterations: iter as f64 - 0.5,
                        residual: res,
                        converged: true,
                        restarts,
                    });
                }
            }
            let z = p_apply(&s)?;
            let t = l_apply(&z)?;
            let tt = t.dot(&t);
            omega = if tt.norm() == T::zero() { C::new(T::zero(), T::zero()) } else { t.dot(&s) / tt };
            x = x_half.axpy(omega, &z);
            r = s.axpy(-omega, &t);
            rho = rho_next;
            if r.norm() <= rtol_t * T::lit(f_norm) {
                let res = true_residual(&x)?;
                if res < rtol {
                    return Ok(SolveReport {
                        solution: x,
                        iterations: iter as f64,
                        residual: res,
                        converged: true,
                        restarts,
                    });
                }
            }
            if omega.norm() == T::zero() {
                if restarts == 0 {
                    restarts += 1;
                    continue 'restart;
                }
                return Err(numerical(format!("BiCGStab breakdown (omega = 0) at iteration {iter}")));
            }
        }
        let res = true_residual(&x)?;
        return Ok(SolveReport {
            solution: x,
            iterations: iter as f64,
            residual: res,
            converged: false,
            restarts,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
        Ok(u.clone())
    }

    #[test]
    fn identity_system_converges_immediately() {
        let f = GridFunction::from_fn(1, 16, |x: [f64; 2]| C::new(x[0].cos(), 1.0)).unwrap();
        let r = bicgstab(id, id, &f, 1e-10, 10).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 1.0);
        assert!(r.solution.relative_error(&f) < 1e-14);
    }

    #[test]
    fn diagonal_spd_system_matches_direct_solve() {
        let n = 32;
        let d: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.37).collect();
        let dd = d.clone();
        let l = move |u: &GridFunction<f64>| {
            GridFunction::from_values(1, n, u.values().iter().zip(&dd).map(|(z, &w)| z * w).collect())
        };
        let f = GridFunction::from_fn(1, n, |x: [f64; 2]| C::new((7.0 * x[0]).sin() + 0.5, x[0])).unwrap();
        let r = bicgstab(l, id, &f, 1e-12, 200).unwrap();
        let exact = GridFunction::from_values(1, n, f.values().iter().zip(&d).map(|(z, &w)| z / w).collect()).unwrap();
        assert!(r.converged);
        assert!(r.solution.relative_error(&exact) <= 1e-9);
    }

    #[test]
    fn helmholtz_on_plane_wave() {
        let c = MediumField::homogeneous(2, 1.0, 3.0);
        let k = [2.0, -1.0];
        let tau = 2.0 * std::f64::consts::PI;
        let u = GridFunction::from_fn(2, 16, |x| crate::scalar::cis(tau * (k[0] * x[0] + k[1] * x[1]))).unwrap();
        let lu = helmholtz_apply(&c, &u).unwrap();
        let w = c.omega();
        let want = u.scaled(C::new(tau * tau * 5.0 - w * w, 0.0));
        assert!(lu.relative_error(&want) < 1e-12);
        let zero = GridFunction::zeros(2, 16).unwrap();
        assert_eq!(helmholtz_apply(&c, &zero).unwrap().norm(), 0.0);
    }
}
