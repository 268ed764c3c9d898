//! Scattering resonances of the one-dimensional Helmholtz equation
//! `u'' + omega^2 n(x)^2 u = 0` with outgoing conditions, for piecewise-constant
//! refractive indices supported on `[0, L]`.
//!
//! The crate provides a transfer-matrix resonance solver with
//! argument-principle certification, adjoint derivatives of resonances with
//! respect to the index, a projected-gradient optimizer that minimizes the
//! resonance width under material bounds, executable versions of the width
//! bounds and variational identities, periodic-medium band analysis, and
//! radially symmetric benchmark cavities in two and three dimensions.

pub mod analysis;
pub mod bragg;
pub mod error;
pub mod forward;
pub mod gradient;
pub mod mode;
pub mod optimizer;
pub mod radial;
pub mod specfun;
pub mod structure;

pub use error::{Error, Result};
pub use forward::{
    count_zeros, evaluate_mode, find_resonances, min_width, newton_resonance, propagate,
    reconstruct_mode, resonance_residual, transmission, BoundaryState, ResonanceSet,
};
pub use mode::{Mode, ResonancePair, SearchRect};
pub use structure::{
    project_to_admissible, validate_structure, AdmissibleSet, Cell, MembershipReport,
    PiecewiseConstantStructure,
};
