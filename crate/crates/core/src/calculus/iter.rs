//! Newton–Schulz type iterations and the scaling-and-squaring exponential.

use std::fmt;

use super::{compose, lin_comb, scale};
use crate::error::{invalid, numerical, Result};
use crate::scalar::{Real, C};
use crate::symbol::{relative_table_change, Symbol};

/// Stopping rule for the symbol iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterOptions {
    /// Stop once the relative Frobenius change of the table drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Convergence record of an iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    /// Relative table change after each iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Normalization constant `α` applied to the operand.
    pub alpha: f64,
}

impl fmt::Display for IterationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# alpha = {:.6e}", self.alpha)?;
        for (k, r) in self.residual_history.iter().enumerate() {
            writeln!(f, "iter {:4}  change {:.6e}", k + 1, r)?;
        }
        write!(
            f,
            "# iterations = {}, converged = {}",
            self.iterations, self.converged
        )
    }
}

fn re<T: Real>(x: f64) -> C<T> {
    C::new(T::lit(x), T::zero())
}

fn check_change<T: Real>(change: T, k: usize) -> Result<f64> {
    let c = change.as_f64();
    if c.is_finite() {
        Ok(c)
    } else {
        Err(numerical(format!("iterate {k} is not finite")))
    }
}

fn normalization<T: Real>(a: &Symbol<T>) -> Result<T> {
    let m = a.max_abs_on_samples();
    if !(m > T::zero()) || !m.is_finite() {
        return Err(numerical(format!(
            "cannot normalize a symbol with max |a| = {m}"
        )));
    }
    Ok(T::one() / (T::lit(2.0) * m))
}

/// Schulz iteration for `A^{-1}`.
///
/// With `α = 1 / (2 max |a|)` and `X₀ = I`, iterate
/// `X_{k+1} = 2 X_k − X_k ♯ (αA) ♯ X_k` and return `α X` of order `−d_a`.
pub fn inverse<T: Real>(a: &Symbol<T>, opts: IterOptions) -> Result<(Symbol<T>, IterationReport)> {
    let alpha = normalization(a)?;
    let aa = scale(C::new(alpha, T::zero()), a);
    let mut x = Symbol::identity(a.band(), a.grid().clone()).with_order(-a.order());
    let mut report = IterationReport {
        alpha: alpha.as_f64(),
        ..Default::default()
    };
    for k in 1..=opts.max_iter {
        let ax = compose(&aa, &x)?;
        let xax = compose(&x, &ax)?;
        let next = lin_comb(re(2.0), &x, re(-1.0), &xax)?;
        let change = check_change(relative_table_change(next.table(), x.table()), k)?;
        x = next;
        report.iterations = k;
        report.residual_history.push(change);
        if change < opts.tol {
            report.converged = true;
            break;
        }
    }
    let out = scale(C::new(alpha, T::zero()), &x);
    debug_assert!(out.order() == -a.order());
    Ok((out, report))
}

/// Coupled Schulz–Higham iteration for `A^{1/2}` and `A^{-1/2}`.
///
/// `Y₀ = αA`, `Z₀ = I`, `Y ← ½ Y (3I − ZY)`, `Z ← ½ (3I − ZY) Z`. Returns
/// `C = α^{-1/2} Y` (order `d_a/2`) and `D = α^{1/2} Z` (order `−d_a/2`).
pub fn sqrt_invsqrt<T: Real>(
    a: &Symbol<T>,
    opts: IterOptions,
) -> Result<(Symbol<T>, Symbol<T>, IterationReport)> {
    let alpha = normalization(a)?;
    let half = a.order() / T::lit(2.0);
    let identity = Symbol::identity(a.band(), a.grid().clone());
    let mut y = scale(C::new(alpha, T::zero()), a).with_order(half);
    let mut z = identity.with_order(-half);
    let mut report = IterationReport {
        alpha: alpha.as_f64(),
        ..Default::default()
    };
    for k in 1..=opts.max_iter {
        let zy = compose(&z, &y)?;
        let w = lin_comb(re(3.0), &identity, re(-1.0), &zy)?;
        let y_next = scale(re(0.5), &compose(&y, &w)?);
        let z_next = scale(re(0.5), &compose(&w, &z)?);
        let change_y = relative_table_change(y_next.table(), y.table());
        let change_z = relative_table_change(z_next.table(), z.table());
        let change = check_change(change_y.max(change_z), k)?;
        y = y_next;
        z = z_next;
        report.iterations = k;
        report.residual_history.push(change);
        if change < opts.tol {
            report.converged = true;
            break;
        }
    }
    let c = scale(C::new(alpha.sqrt().recip(), T::zero()), &y);
    let d = scale(C::new(alpha.sqrt(), T::zero()), &z);
    debug_assert!(c.order() == half && d.order() == -half);
    Ok((c, d, report))
}

/// `exp(t A)` by scaling and squaring.
///
/// Picks `K ≥ k_min` with `δ = t / 2^K` and `|δ| max |a| ≤ 1/8`, forms the
/// degree-4 Taylor polynomial of `δA`, and squares it `K` times. The result
/// has order 0.
pub fn exponential<T: Real>(a: &Symbol<T>, t: T, k_min: usize) -> Result<Symbol<T>> {
    let identity = Symbol::identity(a.band(), a.grid().clone());
    if t == T::zero() {
        return Ok(identity);
    }
    if !t.is_finite() {
        return Err(invalid("exponential time must be finite"));
    }
    let m = a.max_abs_on_samples().as_f64();
    let target = 8.0 * t.abs().as_f64() * m;
    let mut k = k_min;
    while (k as f64) < target.log2().ceil() {
        k += 1;
    }
    if k > 200 {
        return Err(invalid(format!(
            "exponential needs 2^{k} squarings; t * max|a| = {} is too large",
            target / 8.0
        )));
    }
    let delta = t / T::lit(2f64.powi(k as i32));
    let d = scale(C::new(delta, T::zero()), &a.with_order(T::zero()));

    let mut y = lin_comb(re(1.0), &identity, re(0.25), &d)?;
    for c in [1.0 / 3.0, 0.5, 1.0] {
        let dy = compose(&d, &y)?;
        y = lin_comb(re(1.0), &identity, re(c), &dy)?;
    }
    for step in 0..k {
        y = compose(&y, &y).map_err(|e| {
            numerical(format!("squaring step {} of {k} failed: {e}", step + 1))
        })?;
        if y.max_abs_h().as_f64() > 1e150 {
            return Err(numerical(format!(
                "squaring step {} of {k} overflowed",
                step + 1
            )));
        }
    }
    Ok(y)
}
