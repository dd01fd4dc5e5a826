//! Hierarchical spline frequency grid: an exactly sampled integer core
//! surrounded by `L` rings of coarse uniform blocks whose size triples per level.

use smallvec::SmallVec;

use super::{check_dim, lagrange_uniform, Freq, Stencil};
use crate::error::{invalid, DscError, Result};
use crate::scalar::Real;

/// Construction parameters of a [`HierFreqGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierParams {
    pub dim: usize,
    /// `B_ξ`, half-width of the exactly stored core.
    pub coarse_band: usize,
    /// `L`, number of refinement levels.
    pub levels: usize,
    /// `K`, nodes per axis inside each block (corners included).
    pub nodes: usize,
}

/// One block `D_{j,i}` of the partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block<T> {
    /// Level `j ≥ 1`.
    pub level: usize,
    /// Position inside the level, lexicographic over the 3×3 (or 3) partition
    /// with the centre removed.
    pub index: usize,
    /// Lower-left corner.
    pub lo: Freq<T>,
    /// Side length `2·3^{j-1}·B_ξ`.
    pub side: T,
    /// Offset of this block's first node in the point list.
    pub offset: usize,
}

/// Region of the frequency domain returned by [`HierFreqGrid::locate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Core,
    Block { level: usize, index: usize },
}

/// Hierarchical grid `Ω = D₀ ∪ ⋃ G_{j,i}`.
#[derive(Clone, Debug)]
pub struct HierFreqGrid<T> {
    params: HierParams,
    points: Vec<Freq<T>>,
    core_side: usize,
    blocks: Vec<Block<T>>,
}

impl<T: Real> HierFreqGrid<T> {
    pub fn new(params: HierParams) -> Result<Self> {
        check_dim(params.dim)?;
        if params.coarse_band < 2 {
            return Err(invalid("hierarchical grid needs B_xi >= 2"));
        }
        if params.nodes < 2 {
            return Err(invalid("hierarchical grid needs K >= 2"));
        }
        let outer = params
            .coarse_band
            .checked_mul(3usize.checked_pow(params.levels as u32).unwrap_or(usize::MAX))
            .ok_or_else(|| invalid("outer bandlimit B_xi * 3^L overflows"))?;
        if outer > 1 << 40 {
            return Err(invalid("outer bandlimit B_xi * 3^L is unreasonably large"));
        }

        let b = params.coarse_band as i64;
        let core_side = 2 * params.coarse_band - 1;
        let mut points = Vec::new();
        if params.dim == 1 {
            for i in -(b - 1)..b {
                points.push([T::of_i64(i), T::zero()]);
            }
        } else {
            for i in -(b - 1)..b {
                for j in -(b - 1)..b {
                    points.push([T::of_i64(i), T::of_i64(j)]);
                }
            }
        }

        let k = params.nodes;
        let mut blocks = Vec::new();
        let mut radius = params.coarse_band;
        for level in 1..=params.levels {
            let side_int = 2 * radius;
            radius *= 3;
            let side = T::of_usize(side_int);
            let start = -T::of_usize(radius);
            let offsets: &[[usize; 2]] = if params.dim == 1 {
                &[[0, 0], [2, 0]]
            } else {
                &[
                    [0, 0],
                    [0, 1],
                    [0, 2],
                    [1, 0],
                    [1, 2],
                    [2, 0],
                    [2, 1],
                    [2, 2],
                ]
            };
            for (index, &[a, c]) in offsets.iter().enumerate() {
                let lo0 = start + side * T::of_usize(a);
                let lo1 = if params.dim == 1 {
                    T::zero()
                } else {
                    start + side * T::of_usize(c)
                };
                let block = Block {
                    level,
                    index,
                    lo: [lo0, lo1],
                    side,
                    offset: points.len(),
                };
                if params.dim == 1 {
                    for i in 0..k {
                        points.push([node_coord(lo0, side, i, k), T::zero()]);
                    }
                } else {
                    for i in 0..k {
                        for j in 0..k {
                            points.push([node_coord(lo0, side, i, k), node_coord(lo1, side, j, k)]);
                        }
                    }
                }
                blocks.push(block);
            }
        }

        Ok(Self {
            params,
            points,
            core_side,
            blocks,
        })
    }

    pub fn params(&self) -> HierParams {
        self.params
    }

    pub fn points(&self) -> &[Freq<T>] {
        &self.points
    }

    pub fn blocks(&self) -> &[Block<T>] {
        &self.blocks
    }

    /// Number of core lattice points `(2B_ξ − 1)^d`.
    pub fn core_len(&self) -> usize {
        self.core_side.pow(self.params.dim as u32)
    }

    /// `N = B_ξ · 3^L`.
    pub fn outer_bandlimit(&self) -> usize {
        self.params.coarse_band * 3usize.pow(self.params.levels as u32)
    }

    /// Region whose closure contains `xi`. Ties go to the lower level, then to
    /// the smaller block index. The core is open.
    pub fn locate(&self, xi: Freq<T>) -> Result<Region> {
        let n = T::of_usize(self.outer_bandlimit());
        let dims = self.params.dim;
        let outside = (0..dims).any(|a| !(xi[a].abs() <= n));
        if outside {
            return Err(DscError::OutOfDomain {
                xi0: xi[0].as_f64(),
                xi1: xi[1].as_f64(),
                limit: n.as_f64(),
            });
        }
        Ok(self.locate_unchecked(xi).0)
    }

    fn locate_unchecked(&self, xi: Freq<T>) -> (Region, Option<&Block<T>>) {
        let dims = self.params.dim;
        let b = T::of_usize(self.params.coarse_band);
        if (0..dims).all(|a| xi[a].abs() < b) {
            return (Region::Core, None);
        }
        for blk in &self.blocks {
            let inside = (0..dims).all(|a| xi[a] >= blk.lo[a] && xi[a] <= blk.lo[a] + blk.side);
            if inside {
                return (
                    Region::Block {
                        level: blk.level,
                        index: blk.index,
                    },
                    Some(blk),
                );
            }
        }
        unreachable!("point inside [-N, N]^d not covered by the tiling")
    }

    /// Interpolation stencil; `xi` outside `[-N, N]^d` is clamped first.
    pub fn stencil(&self, xi: Freq<T>) -> (Stencil<T>, bool) {
        let n = T::of_usize(self.outer_bandlimit());
        let dims = self.params.dim;
        let mut q = xi;
        let mut clamped = false;
        for c in q.iter_mut().take(dims) {
            if *c > n {
                *c = n;
                clamped = true;
            } else if *c < -n {
                *c = -n;
                clamped = true;
            }
        }
        match self.locate_unchecked(q) {
            (Region::Core, _) => (self.core_stencil(q), clamped),
            (_, Some(blk)) => {
                // A node on a level boundary is stored by the outer block but
                // located in the inner one; return the stored value in that case.
                let hit = self
                    .blocks
                    .iter()
                    .filter(|b| b.level >= blk.level && b.level <= blk.level + 1)
                    .find_map(|b| self.node_hit(q, b));
                match hit {
                    Some(i) => (Stencil::single(i), clamped),
                    None => (self.block_stencil(q, blk), clamped),
                }
            }
            _ => unreachable!(),
        }
    }

    fn node_hit(&self, xi: Freq<T>, blk: &Block<T>) -> Option<usize> {
        let k = self.params.nodes;
        let km1 = T::of_usize(k - 1);
        let mut idx = 0;
        for a in 0..self.params.dim {
            let t = ((xi[a] - blk.lo[a]) / blk.side * km1).round();
            if t < T::zero() || t > km1 {
                return None;
            }
            let i = t.to_usize()?;
            if node_coord(blk.lo[a], blk.side, i, k) != xi[a] {
                return None;
            }
            idx = idx * k + i;
        }
        Some(blk.offset + idx)
    }

    fn core_stencil(&self, xi: Freq<T>) -> Stencil<T> {
        let m = self.core_side;
        let shift = T::of_usize(self.params.coarse_band - 1);
        let deg = 3.min(m - 1);
        let mut axes: [(usize, SmallVec<[T; 16]>); 2] = Default::default();
        for (a, axis) in axes.iter_mut().enumerate().take(self.params.dim) {
            let c = xi[a] + shift;
            let r = c.round();
            if r == c {
                axis.0 = r.to_usize().expect("core index");
                axis.1.push(T::one());
            } else {
                let base = (c.floor().to_i64().unwrap() - 1).clamp(0, (m - 1 - deg) as i64) as usize;
                lagrange_uniform(c - T::of_usize(base), deg + 1, &mut axis.1);
                axis.0 = base;
            }
        }
        let mut st = Stencil::default();
        if self.params.dim == 1 {
            for (i, &w) in axes[0].1.iter().enumerate() {
                st.entries.push((axes[0].0 + i, w));
            }
        } else {
            for (i, &wi) in axes[0].1.iter().enumerate() {
                for (j, &wj) in axes[1].1.iter().enumerate() {
                    st.entries.push(((axes[0].0 + i) * m + axes[1].0 + j, wi * wj));
                }
            }
        }
        st
    }

    fn block_stencil(&self, xi: Freq<T>, blk: &Block<T>) -> Stencil<T> {
        let k = self.params.nodes;
        let km1 = T::of_usize(k - 1);
        let mut axes: [(Option<usize>, SmallVec<[T; 16]>); 2] = Default::default();
        for (a, axis) in axes.iter_mut().enumerate().take(self.params.dim) {
            let t = (xi[a] - blk.lo[a]) / blk.side * km1;
            let r = t.round();
            let hit = r >= T::zero()
                && r <= km1
                && node_coord(blk.lo[a], blk.side, r.to_usize().unwrap(), k) == xi[a];
            if hit {
                axis.0 = Some(r.to_usize().unwrap());
            } else {
                lagrange_uniform(t, k, &mut axis.1);
            }
        }
        let weights = |axis: &(Option<usize>, SmallVec<[T; 16]>)| -> SmallVec<[(usize, T); 16]> {
            match axis.0 {
                Some(i) => smallvec::smallvec![(i, T::one())],
                None => axis.1.iter().copied().enumerate().collect(),
            }
        };
        let mut st = Stencil::default();
        let w0 = weights(&axes[0]);
        if self.params.dim == 1 {
            for (i, w) in w0 {
                st.entries.push((blk.offset + i, w));
            }
        } else {
            let w1 = weights(&axes[1]);
            for &(i, wi) in &w0 {
                for &(j, wj) in &w1 {
                    st.entries.push((blk.offset + i * k + j, wi * wj));
                }
            }
        }
        st
    }
}

/// Coordinate of node `i` of `k` along a block edge.
#[inline]
fn node_coord<T: Real>(lo: T, side: T, i: usize, k: usize) -> T {
    lo + side * T::of_usize(i) / T::of_usize(k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, b: usize, l: usize, k: usize) -> HierFreqGrid<f64> {
        HierFreqGrid::new(HierParams {
            dim,
            coarse_band: b,
            levels: l,
            nodes: k,
        })
        .unwrap()
    }

    #[test]
    fn figure_grid_geometry() {
        let g = grid(2, 6, 4, 4);
        assert_eq!(g.outer_bandlimit(), 486);
        assert_eq!(g.blocks().len(), 32);
        for blk in g.blocks() {
            assert_eq!(blk.side, 2.0 * 3f64.powi(blk.level as i32 - 1) * 6.0);
        }
        assert_eq!(g.points().len(), 11 * 11 + 32 * 16);
    }

    #[test]
    fn no_levels_is_core_only() {
        let g = grid(2, 4, 0, 4);
        assert_eq!(g.outer_bandlimit(), 4);
        assert_eq!(g.points().len(), 49);
        assert!(g.points().iter().all(|p| p[0].abs() < 4.0 && p[1].abs() < 4.0));
    }

    #[test]
    fn large_grid_count_is_affine_in_levels() {
        let g = grid(2, 6, 6, 5);
        assert_eq!(g.outer_bandlimit(), 4374);
        assert_eq!(g.points().len(), 121 + 6 * 8 * 25);
        let g1 = grid(1, 6, 6, 5);
        assert_eq!(g1.points().len(), 11 + 6 * 2 * 5);
    }

    #[test]
    fn blocks_tile_each_ring() {
        let g = grid(2, 3, 3, 4);
        for level in 1..=3usize {
            let area: f64 = g
                .blocks()
                .iter()
                .filter(|b| b.level == level)
                .map(|b| b.side * b.side)
                .sum();
            let r = 3.0 * 3f64.powi(level as i32);
            let inner = r / 3.0;
            assert_eq!(area, 4.0 * (r * r - inner * inner));
        }
    }

    #[test]
    fn locate_examples() {
        let g = grid(2, 6, 2, 5);
        assert_eq!(g.locate([0.0, 0.0]).unwrap(), Region::Core);
        assert!(matches!(
            g.locate([10.0, 0.0]).unwrap(),
            Region::Block { level: 1, .. }
        ));
        assert!(matches!(
            g.locate([-6.0, 0.0]).unwrap(),
            Region::Block { level: 1, .. }
        ));
        // Shared edge between levels 1 and 2 belongs to level 1.
        assert!(matches!(
            g.locate([18.0, 3.0]).unwrap(),
            Region::Block { level: 1, .. }
        ));
        // Shared edge between blocks 0 and 1 of level 1 goes to block 0.
        assert_eq!(
            g.locate([-10.0, -6.0]).unwrap(),
            Region::Block { level: 1, index: 0 }
        );
        assert!(g.locate([55.0, 0.0]).is_err());
    }

    #[test]
    fn stencil_hits_nodes_exactly() {
        let g = grid(2, 4, 2, 5);
        for (i, &p) in g.points().iter().enumerate() {
            let (st, clamped) = g.stencil(p);
            assert!(!clamped);
            let idx: Vec<_> = st.entries().iter().filter(|e| e.1 != 0.0).collect();
            // Shared block edges appear in several blocks; any copy is acceptable.
            assert_eq!(idx.len(), 1, "node {i} at {p:?}");
            assert_eq!(idx[0].1, 1.0);
            assert_eq!(g.points()[idx[0].0], p);
        }
    }

    #[test]
    fn stencil_reproduces_low_degree_polynomials() {
        let g = grid(2, 5, 3, 5);
        let f = |p: [f64; 2]| 1.0 + 0.3 * p[0] - 0.01 * p[1] * p[0] + 1e-4 * p[1] * p[1] * p[1];
        let vals: Vec<f64> = g.points().iter().map(|&p| f(p)).collect();
        for &xi in &[[0.3, -2.7], [4.5, 0.2], [-30.1, 77.7], [100.0, -134.9]] {
            let (st, _) = g.stencil(xi);
            assert!((st.apply(&vals) - f(xi)).abs() < 1e-9, "{xi:?}");
        }
    }

    #[test]
    fn clamping_is_reported() {
        let g = grid(1, 3, 1, 4);
        let (st, clamped) = g.stencil([20.0, 0.0]);
        assert!(clamped);
        let (st9, _) = g.stencil([9.0, 0.0]);
        assert_eq!(st.entries(), st9.entries());
    }
}
