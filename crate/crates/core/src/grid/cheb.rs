//! Polar rational-Chebyshev frequency grid.
//!
//! Radii are images of Chebyshev–Gauss points under the algebraic map
//! `A_L(s) = L (1 + s) / (1 − s)`, which sends `(−1, 1)` onto `(0, ∞)`.
//! Angles are uniform. Interpolation is barycentric in both variables:
//! Chebyshev weights in `s` and trigonometric weights in `θ`. In 1D the angle
//! degenerates to the sign of `ξ`, so the grid holds a `+` and a `−` ray.

use smallvec::SmallVec;

use super::{check_dim, Freq, Stencil};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Construction parameters of a [`ChebFreqGrid`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebParams {
    pub dim: usize,
    /// `N_θ` (forced to 2 in 1D).
    pub n_theta: usize,
    /// `N_r`.
    pub n_r: usize,
    /// Map scale `L`.
    pub map_scale: f64,
}

#[derive(Clone, Debug)]
pub struct ChebFreqGrid<T> {
    params: ChebParams,
    map_scale: T,
    s_nodes: Vec<T>,
    s_weights: Vec<T>,
    theta: Vec<T>,
    points: Vec<Freq<T>>,
}

/// `A_L(s) = L (1 + s) / (1 − s)`.
pub fn algebraic_map<T: Real>(s: T, scale: T) -> T {
    scale * (T::one() + s) / (T::one() - s)
}

/// `A_L^{-1}(r) = (r − L) / (r + L)`.
pub fn algebraic_map_inv<T: Real>(r: T, scale: T) -> T {
    (r - scale) / (r + scale)
}

impl<T: Real> ChebFreqGrid<T> {
    pub fn new(mut params: ChebParams) -> Result<Self> {
        check_dim(params.dim)?;
        if params.dim == 1 {
            params.n_theta = 2;
        }
        if params.n_theta == 0 || params.n_r == 0 {
            return Err(invalid("Chebyshev grid needs N_theta >= 1 and N_r >= 1"));
        }
        if !(params.map_scale > 0.0 && params.map_scale.is_finite()) {
            return Err(invalid("Chebyshev map scale L must be positive"));
        }
        let nr = params.n_r;
        let map_scale = T::lit(params.map_scale);
        let pi = std::f64::consts::PI;
        let mut s_nodes = Vec::with_capacity(nr);
        let mut s_weights = Vec::with_capacity(nr);
        for q in 0..nr {
            let angle = pi * (q as f64 + 0.5) / nr as f64;
            // Increasing order: s_q = -cos(π(q+½)/N_r).
            s_nodes.push(T::lit(-angle.cos()));
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            s_weights.push(T::lit(sign * angle.sin()));
        }
        let nt = params.n_theta;
        let theta: Vec<T> = (0..nt)
            .map(|m| T::lit(2.0 * pi * m as f64 / nt as f64))
            .collect();
        let mut points = Vec::with_capacity(nt * nr);
        for &th in &theta {
            for &s in &s_nodes {
                let r = algebraic_map(s, map_scale);
                if params.dim == 1 {
                    let sign = if th == T::zero() { T::one() } else { -T::one() };
                    points.push([sign * r, T::zero()]);
                } else {
                    points.push([r * th.cos(), r * th.sin()]);
                }
            }
        }
        Ok(Self {
            params,
            map_scale,
            s_nodes,
            s_weights,
            theta,
            points,
        })
    }

    pub fn params(&self) -> ChebParams {
        self.params
    }

    pub fn points(&self) -> &[Freq<T>] {
        &self.points
    }

    /// Chebyshev–Gauss nodes in `s`, increasing.
    pub fn s_nodes(&self) -> &[T] {
        &self.s_nodes
    }

    /// Radii `A_L(s_q)`.
    pub fn radii(&self) -> Vec<T> {
        self.s_nodes
            .iter()
            .map(|&s| algebraic_map(s, self.map_scale))
            .collect()
    }

    pub fn stencil(&self, xi: Freq<T>) -> Stencil<T> {
        let (r, angle_w): (T, SmallVec<[(usize, T); 16]>) = if self.params.dim == 1 {
            let branch = if xi[0] >= T::zero() { 0 } else { 1 };
            (xi[0].abs(), smallvec::smallvec![(branch, T::one())])
        } else {
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let th = xi[1].atan2(xi[0]);
            (r, self.theta_weights(th))
        };
        let s = algebraic_map_inv(r, self.map_scale);
        let radial_w = barycentric(&self.s_nodes, &self.s_weights, s, |x, y| x - y);
        let nr = self.params.n_r;
        let mut st = Stencil::default();
        for &(m, wm) in &angle_w {
            for &(q, wq) in &radial_w {
                st.entries.push((m * nr + q, wm * wq));
            }
        }
        st
    }

    fn theta_weights(&self, th: T) -> SmallVec<[(usize, T); 16]> {
        let nt = self.params.n_theta;
        if nt == 1 {
            return smallvec::smallvec![(0, T::one())];
        }
        let half = T::lit(0.5);
        let weights: Vec<T> = (0..nt)
            .map(|m| if m % 2 == 0 { T::one() } else { -T::one() })
            .collect();
        let odd = nt % 2 == 1;
        let kernel = move |x: T, y: T| {
            let d = (x - y) * half;
            if odd {
                d.sin()
            } else {
                d.tan()
            }
        };
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let mut t = th % two_pi;
        if t < T::zero() {
            t = t + two_pi;
        }
        barycentric(&self.theta, &weights, t, kernel)
    }
}

/// Second-form barycentric weights at `x` for nodes `nodes` with weights `w`
/// and kernel `1 / k(x, x_j)`. Exact node hits return a single unit weight.
fn barycentric<T: Real>(
    nodes: &[T],
    w: &[T],
    x: T,
    kernel: impl Fn(T, T) -> T,
) -> SmallVec<[(usize, T); 16]> {
    if let Some(j) = nodes.iter().position(|&n| n == x) {
        return smallvec::smallvec![(j, T::one())];
    }
    let mut out: SmallVec<[(usize, T); 16]> = SmallVec::with_capacity(nodes.len());
    let mut total = T::zero();
    for (j, (&n, &wj)) in nodes.iter().zip(w).enumerate() {
        let k = kernel(x, n);
        if k == T::zero() {
            return smallvec::smallvec![(j, T::one())];
        }
        let c = wj / k;
        total = total + c;
        out.push((j, c));
    }
    for e in out.iter_mut() {
        e.1 = e.1 / total;
    }
    out
}
