//! One-way ("single square root") depth extrapolation.
//!
//! The generator is a regularized square root of `−Δ⊥ − ω²/c²`: the symbol
//! `a = g(4π²|ξ|², M) − ω²/c²` with `g` a smooth `min(·, M)` is negative, so
//! `b = i (−a)^{1/2}` is well defined. A directional taper `X` removes
//! near-horizontal and evanescent content, the generator is `X ♯ b ♯ X`, and
//! each depth step applies `exp(Δz · average generator)`.

use crate::apply::WindowedSymbol;
use crate::calculus::{compose, exponential, from_weyl, lin_comb, scale, sqrt_invsqrt, IterationReport};
use crate::error::{invalid, numerical, Result};
use crate::scalar::{Real, C};
use crate::symbol::{GridFunction, Symbol};

use super::medium::{MediumField, SymbolSetup};

/// Parameters of the regularized generator and the depth stepping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsrConfig<T> {
    /// Cap `M` of the smooth minimum as a fraction of `ω²/c²`.
    pub cap_fraction: T,
    /// Start of the blend of `g` as a fraction of `M`.
    pub blend_start: T,
    /// End of the blend of `g` as a fraction of `M`.
    pub blend_end: T,
    /// Taper equals 1 for `p ≤ p_keep`, with `p = 4π²|ξ|² c²/ω² − 1`.
    pub p_keep: T,
    /// Taper equals 0 for `p ≥ p_kill`.
    pub p_kill: T,
    /// Depth step `Δz`.
    pub dz: T,
    /// Quadrature nodes per step: 1 midpoint, 2 trapezoid, 3 Simpson.
    pub quad_nodes: usize,
}

impl<T: Real> Default for SsrConfig<T> {
    fn default() -> Self {
        Self {
            cap_fraction: T::lit(0.5),
            blend_start: T::lit(0.75),
            blend_end: T::lit(1.25),
            p_keep: T::lit(-0.65),
            p_kill: T::lit(-0.5),
            dz: T::lit(0.01),
            quad_nodes: 3,
        }
    }
}

impl<T: Real> SsrConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_keep < self.p_kill && self.p_kill <= T::zero()) {
            return Err(invalid("SSR thresholds need p_keep < p_kill <= 0"));
        }
        if !(self.dz > T::zero()) {
            return Err(invalid("SSR depth step dz must be positive"));
        }
        if !(self.blend_start >= T::zero() && self.blend_start < self.blend_end) {
            return Err(invalid("SSR blend window needs 0 <= blend_start < blend_end"));
        }
        if !(self.cap_fraction > T::zero() && self.cap_fraction * self.blend_end < T::one()) {
            return Err(invalid(
                "SSR cap_fraction * blend_end must lie in (0, 1) so the regularized symbol stays negative",
            ));
        }
        if !(1..=3).contains(&self.quad_nodes) {
            return Err(invalid("SSR quadrature supports 1, 2 or 3 nodes"));
        }
        Ok(())
    }

    fn quadrature(&self) -> Vec<(T, T)> {
        let h = T::lit(0.5);
        match self.quad_nodes {
            1 => vec![(h, T::one())],
            2 => vec![(T::zero(), h), (T::one(), h)],
            _ => vec![
                (T::zero(), T::lit(1.0 / 6.0)),
                (h, T::lit(4.0 / 6.0)),
                (T::one(), T::lit(1.0 / 6.0)),
            ],
        }
    }
}

/// Quintic smoothstep clamped to `[0, 1]`; `C²` at both seams.
fn smoothstep<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else if t >= T::one() {
        T::one()
    } else {
        t * t * t * (t * (t * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
    }
}

/// Smooth `min(x, M)`: equal to `x` below `blend_start·M`, to `M` above
/// `blend_end·M`, and a smoothstep blend of the two in between.
pub fn smooth_min<T: Real>(x: T, m: T, cfg: &SsrConfig<T>) -> T {
    let lo = cfg.blend_start * m;
    let width = (cfg.blend_end - cfg.blend_start) * m;
    let s = smoothstep((x - lo) / width);
    x * (T::one() - s) + m * s
}

/// `C^∞` taper: 1 for `p ≤ keep`, 0 for `p ≥ kill`.
pub fn directional_taper<T: Real>(p: T, keep: T, kill: T) -> T {
    if p <= keep {
        return T::one();
    }
    if p >= kill {
        return T::zero();
    }
    let t = (p - keep) / (kill - keep);
    let f = |s: T| if s > T::zero() { (-T::one() / s).exp() } else { T::zero() };
    let a = f(T::one() - t);
    a / (a + f(t))
}

fn omega_over_c2<T: Real>(c: &MediumField<T>, x: [T; 2], z: T) -> T {
    let cv = c.value_at(x, z);
    let w = c.omega();
    w * w / (cv * cv)
}

/// `g(4π²|ξ|², cap·ω²/c²) − ω²/c²` read as a Weyl symbol, so the operator is
/// self-adjoint; returned in Kohn–Nirenberg form, order 0.
pub fn regularized_symbol<T: Real>(c: &MediumField<T>, z: T, cfg: &SsrConfig<T>, setup: &SymbolSetup<T>) -> Result<Symbol<T>> {
    let fp2 = T::lit(4.0 * std::f64::consts::PI * std::f64::consts::PI);
    setup.sample(T::zero(), |x, xi| {
        let k2 = omega_over_c2(c, x, z);
        let v = smooth_min(fp2 * (xi[0] * xi[0] + xi[1] * xi[1]), cfg.cap_fraction * k2, cfg) - k2;
        C::new(v, T::zero())
    })
    .and_then(|w| from_weyl(&w))
}

/// The taper `χ(p(x, ξ))`, quantized like [`regularized_symbol`]; order 0.
pub fn cutoff_symbol<T: Real>(c: &MediumField<T>, z: T, cfg: &SsrConfig<T>, setup: &SymbolSetup<T>) -> Result<Symbol<T>> {
    let fp2 = T::lit(4.0 * std::f64::consts::PI * std::f64::consts::PI);
    setup.sample(T::zero(), |x, xi| {
        let p = fp2 * (xi[0] * xi[0] + xi[1] * xi[1]) / omega_over_c2(c, x, z) - T::one();
        C::new(directional_taper(p, cfg.p_keep, cfg.p_kill), T::zero())
    })
    .and_then(|w| from_weyl(&w))
}

/// The generator `X ♯ b ♯ X` at depth `z`, with `b = i (−a)^{1/2}`.
pub struct SsrGenerator<T: Real> {
    pub generator: Symbol<T>,
    pub cutoff: Symbol<T>,
    pub report: IterationReport,
}

pub fn build_ssr_generator<T: Real>(
    c: &MediumField<T>,
    z: T,
    cfg: &SsrConfig<T>,
    setup: &SymbolSetup<T>,
) -> Result<SsrGenerator<T>> {
    cfg.validate()?;
    c.check_positive("sound speed")?;
    let a = regularized_symbol(c, z, cfg, setup)?;
    let neg = scale(C::new(-T::one(), T::zero()), &a);
    let (root, _, report) = sqrt_invsqrt(&neg, setup.iter)?;
    if !report.converged {
        return Err(numerical(format!(
            "generator square root did not converge in {} iterations",
            report.iterations
        )));
    }
    let b = scale(C::new(T::zero(), T::one()), &root);
    let cutoff = cutoff_symbol(c, z, cfg, setup)?;
    let generator = compose(&compose(&cutoff, &b)?, &cutoff)?;
    Ok(SsrGenerator {
        generator,
        cutoff,
        report,
    })
}

/// Field at every depth `z = k Δz`, `k = 0..=steps`, plus the per-step
/// generator iteration reports.
pub struct Migration<T> {
    pub slices: Vec<GridFunction<T>>,
    pub reports: Vec<IterationReport>,
    pub steps: usize,
}

/// Symbol of one depth step from `z` to `z + Δz`: `exp(Δz Ḡ) ♯ X(z + Δz/2)`,
/// where `Ḡ` is the quadrature average of the generator over the step.
pub fn step_symbol<T: Real>(
    c: &MediumField<T>,
    z: T,
    cfg: &SsrConfig<T>,
    setup: &SymbolSetup<T>,
) -> Result<(Symbol<T>, Vec<IterationReport>)> {
    let mut avg: Option<Symbol<T>> = None;
    let mut reports = Vec::new();
    let one = C::new(T::one(), T::zero());
    let mut mid_cutoff = None;
    for (frac, w) in cfg.quadrature() {
        let gen = build_ssr_generator(c, z + frac * cfg.dz, cfg, setup)?;
        reports.push(gen.report);
        let wc = C::new(w, T::zero());
        avg = Some(match avg {
            None => scale(wc, &gen.generator),
            Some(acc) => lin_comb(one, &acc, wc, &gen.generator)?,
        });
        if frac == T::lit(0.5) {
            mid_cutoff = Some(gen.cutoff);
        }
    }
    let avg = avg.expect("at least one quadrature node");
    let e = exponential(&avg, cfg.dz, 0)?;
    let mid = match mid_cutoff {
        Some(x) => x,
        None => cutoff_symbol(c, z + cfg.dz * T::lit(0.5), cfg, setup)?,
    };
    Ok((compose(&e, &mid)?, reports))
}

/// Marches `u0` from depth 0 to `z_max` in steps of `cfg.dz`.
pub fn migrate<T: Real>(
    c: &MediumField<T>,
    u0: &GridFunction<T>,
    z_max: T,
    cfg: &SsrConfig<T>,
    setup: &SymbolSetup<T>,
) -> Result<Migration<T>> {
    cfg.validate()?;
    if u0.dim() != c.dim {
        return Err(invalid("initial field and medium dimensions differ"));
    }
    if !(z_max >= T::zero()) {
        return Err(invalid("z_max must be non-negative"));
    }
    let steps = (z_max / cfg.dz).round().to_usize().unwrap_or(0);
    let mut slices = vec![u0.clone()];
    let mut reports = Vec::new();
    let mut cached: Option<WindowedSymbol<T>> = None;
    for k in 0..steps {
        let z = T::of_usize(k) * cfg.dz;
        let op = match (&cached, c.depth_gradient == T::zero()) {
            (Some(op), true) => op.clone(),
            _ => {
                let (s, r) = step_symbol(c, z, cfg, setup)?;
                reports.extend(r);
                let w = WindowedSymbol::new(&s, u0.n())?;
                if c.depth_gradient == T::zero() {
                    cached = Some(w.clone());
                }
                w
            }
        };
        let next = op.apply(slices.last().expect("initial slice"))?;
        slices.push(next);
    }
    Ok(Migration {
        slices,
        reports,
        steps,
    })
}
