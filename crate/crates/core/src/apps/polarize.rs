//! Splitting wave initial data `(u₀, u₁)` into components travelling with
//! `e^{±itP}`, where `P = L^{1/2}` and `L = −div(α∇)`.

use crate::apply::apply;
use crate::calculus::{sqrt_invsqrt, IterationReport};
use crate::error::{invalid, numerical, Result};
use crate::scalar::{Real, C};
use crate::symbol::{GridFunction, Symbol};

use super::medium::{elliptic_symbol, MediumField, SymbolSetup};

pub struct Polarization<T: Real> {
    pub plus: GridFunction<T>,
    pub minus: GridFunction<T>,
    /// `P`, the square root of the shifted operator.
    pub sqrt: Symbol<T>,
    /// `P^{-1}`.
    pub inv_sqrt: Symbol<T>,
    pub report: IterationReport,
}

/// `u_± = (u₀ ∓ i P^{-1} u₁) / 2` with `P^{-1}` the inverse square root of
/// `L_ε = 4π²ε − div(α∇)`. The mean of `u₁` is removed first.
pub fn polarize<T: Real>(
    alpha: &MediumField<T>,
    u0: &GridFunction<T>,
    u1: &GridFunction<T>,
    eps: T,
    setup: &SymbolSetup<T>,
) -> Result<Polarization<T>> {
    if !u0.same_shape(u1) {
        return Err(invalid("u0 and u1 must live on the same grid"));
    }
    if !(eps > T::zero()) {
        return Err(invalid("polarization shift epsilon must be positive"));
    }
    alpha.check_positive("alpha")?;
    let tp = T::lit(2.0 * std::f64::consts::PI);
    let l = elliptic_symbol(alpha, tp * tp * eps, setup)?;
    let (p, p_inv, report) = sqrt_invsqrt(&l, setup.iter)?;
    if !report.converged {
        return Err(numerical(format!(
            "square root iteration did not converge in {} iterations",
            report.iterations
        )));
    }
    let mean = u1.mean();
    let u1c = u1.map(|z| z - mean);
    let w = apply(&p_inv, &u1c)?;
    let half = T::lit(0.5);
    let i = C::new(T::zero(), T::one());
    let plus = u0.axpy(-i, &w).map(|z| z * half);
    let minus = u0.axpy(i, &w).map(|z| z * half);
    Ok(Polarization {
        plus,
        minus,
        sqrt: p,
        inv_sqrt: p_inv,
        report,
    })
}
