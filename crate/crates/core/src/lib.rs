//! Discrete symbol calculus for pseudodifferential operators on the periodic
//! unit square (or interval).
//!
//! An operator `A u(x) = Σ_ξ e^{2πi x·ξ} a(x, ξ) û(ξ)` is stored through its
//! symbol in the separated form `a(x, ξ) = Σ_λ e^{2πi λ·x} h_λ(ξ) ⟨ξ⟩^{d_a}`,
//! with `h_λ` sampled on a sparse frequency grid. Composition, adjoints,
//! inverses, square roots and exponentials then cost time proportional to the
//! grid size rather than to the resolution of the functions they act on.
//!
//! The crate is generic over the real scalar (`f32` or `f64`); the aliases
//! below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod apply;
pub mod apps;
pub mod calculus;
pub mod cli;
pub mod error;
mod fft;
pub mod grid;
pub mod oracle;
pub mod scalar;
pub mod symbol;

pub use error::{DscError, Result};
pub use fft::{bin_of, signed_freq};
pub use scalar::Real;

pub type Symbol64 = symbol::Symbol<f64>;
pub type Symbol32 = symbol::Symbol<f32>;
pub type GridFunction64 = symbol::GridFunction<f64>;
pub type GridFunction32 = symbol::GridFunction<f32>;
pub type FreqGrid64 = grid::FreqGrid<f64>;

pub type LowRankSymbol64 = apply::LowRankSymbol<f64>;
pub type Complex64 = num_complex::Complex<f64>;
