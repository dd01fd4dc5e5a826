//! Spatial sample grids and frequency sample sets.
//!
//! A frequency grid owns a list of points `Ω` and knows how to turn an
//! arbitrary frequency `ξ` into a [`Stencil`]: a short list of
//! `(node index, weight)` pairs whose weighted sum of nodal values is the
//! interpolant at `ξ`. Stencils are computed once and reused across every
//! Fourier mode of a symbol table, which is what makes the calculus cheap.

mod cheb;
mod hier;

pub use cheb::{algebraic_map, algebraic_map_inv, ChebFreqGrid, ChebParams};
pub use hier::{Block, HierFreqGrid, HierParams, Region};

use smallvec::SmallVec;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// A frequency point. In 1D the second coordinate is always zero.
pub type Freq<T> = [T; 2];

/// Checks that a spatial dimension is supported.
pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(invalid(format!("dimension must be 1 or 2, got {dim}")))
    }
}

/// Uniform quadrature grid `X = {p / (2 B_x)}^d` on the periodic unit cube.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid<T> {
    dim: usize,
    band: usize,
    points: Vec<[T; 2]>,
}

impl<T: Real> SpatialGrid<T> {
    /// Builds the grid for half-bandwidth `band` (`B_x ≥ 1`).
    pub fn new(dim: usize, band: usize) -> Result<Self> {
        check_dim(dim)?;
        if band == 0 {
            return Err(invalid("spatial half-bandwidth B_x must be at least 1"));
        }
        let side = 2 * band;
        let coord = |p: usize| T::of_usize(p) / T::of_usize(side);
        let points = if dim == 1 {
            (0..side).map(|p| [coord(p), T::zero()]).collect()
        } else {
            let mut pts = Vec::with_capacity(side * side);
            for p1 in 0..side {
                for p2 in 0..side {
                    pts.push([coord(p1), coord(p2)]);
                }
            }
            pts
        };
        Ok(Self { dim, band, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `B_x`.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Samples per axis, `2 B_x`.
    pub fn side(&self) -> usize {
        2 * self.band
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in row-major order (first coordinate slowest).
    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }
}

/// Interpolation stencil: the value at a frequency is `Σ w · h[node]`.
#[derive(Clone, Debug, Default)]
pub struct Stencil<T> {
    pub(crate) entries: SmallVec<[(usize, T); 32]>,
}

impl<T: Real> Stencil<T> {
    pub(crate) fn single(index: usize) -> Self {
        let mut entries = SmallVec::new();
        entries.push((index, T::one()));
        Self { entries }
    }

    /// `(node index, weight)` pairs.
    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    /// Applies the stencil to nodal values.
    #[inline]
    pub fn apply<V>(&self, values: &[V]) -> V
    where
        V: Copy + std::ops::Mul<T, Output = V> + std::ops::Add<Output = V> + num_traits::Zero,
    {
        self.entries
            .iter()
            .fold(V::zero(), |acc, &(i, w)| acc + values[i] * w)
    }
}

/// Parameters from which a frequency grid is rebuilt deterministically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridParams {
    Hier(HierParams),
    Cheb(ChebParams),
}

impl GridParams {
    pub fn dim(&self) -> usize {
        match self {
            GridParams::Hier(p) => p.dim,
            GridParams::Cheb(p) => p.dim,
        }
    }

    /// Builds the grid described by these parameters.
    pub fn build<T: Real>(&self) -> Result<FreqGrid<T>> {
        Ok(match *self {
            GridParams::Hier(p) => FreqGrid::Hier(HierFreqGrid::new(p)?),
            GridParams::Cheb(p) => FreqGrid::Cheb(ChebFreqGrid::new(p)?),
        })
    }
}

/// The frequency sample set `Ω` with its interpolation structure.
#[derive(Clone, Debug)]
pub enum FreqGrid<T> {
    Hier(HierFreqGrid<T>),
    Cheb(ChebFreqGrid<T>),
}

impl<T: Real> FreqGrid<T> {
    pub fn params(&self) -> GridParams {
        match self {
            FreqGrid::Hier(g) => GridParams::Hier(g.params()),
            FreqGrid::Cheb(g) => GridParams::Cheb(g.params()),
        }
    }

    pub fn dim(&self) -> usize {
        self.params().dim()
    }

    /// The sample points `Ω`.
    pub fn points(&self) -> &[Freq<T>] {
        match self {
            FreqGrid::Hier(g) => g.points(),
            FreqGrid::Cheb(g) => g.points(),
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    /// Largest representable `|ξ|∞`; `None` when the grid covers all of `R^d`.
    pub fn outer_limit(&self) -> Option<T> {
        match self {
            FreqGrid::Hier(g) => Some(T::of_usize(g.outer_bandlimit())),
            FreqGrid::Cheb(_) => None,
        }
    }

    /// Interpolation stencil at `xi`. The flag reports whether `xi` had to be
    /// clamped onto the grid domain.
    pub fn stencil(&self, xi: Freq<T>) -> (Stencil<T>, bool) {
        match self {
            FreqGrid::Hier(g) => g.stencil(xi),
            FreqGrid::Cheb(g) => (g.stencil(xi), false),
        }
    }
}

/// Barycentric-free Lagrange weights for nodes `0, 1, …, m-1` at position `t`.
pub(crate) fn lagrange_uniform<T: Real>(t: T, m: usize, out: &mut SmallVec<[T; 16]>) {
    out.clear();
    for i in 0..m {
        let ti = T::of_usize(i);
        let mut w = T::one();
        for j in 0..m {
            if j != i {
                let tj = T::of_usize(j);
                w = w * (t - tj) / (ti - tj);
            }
        }
        out.push(w);
    }
}
