//! The three applications of the calculus: Helmholtz preconditioning, wave
//! polarization, and one-way depth migration.

pub mod helmholtz;
pub mod medium;
pub mod polarize;
pub mod ssr;

pub use helmholtz::{
    bicgstab, build_preconditioner, helmholtz_apply, preconditioner_symbol, Preconditioner,
    PreconditionerVariant, SolveReport,
};
pub use medium::{elliptic_symbol, MediumField, Profile, SymbolSetup};
pub use polarize::{polarize, Polarization};
pub use ssr::{
    build_ssr_generator, cutoff_symbol, directional_taper, migrate, regularized_symbol,
    smooth_min, step_symbol, Migration, SsrConfig, SsrGenerator,
};
