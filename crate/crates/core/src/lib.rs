//! Phase-space simulation of pulsed torsional optomechanics.

// Negated float comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod coupling;
pub mod error;
pub mod fock_oracle;
pub mod measurement;
pub mod mode_solver;
pub mod params;
pub mod phase_space;
pub mod protocols;
pub mod quadrature;
pub mod special;
pub mod symplectic;

pub use error::{Error, Result};
pub use phase_space::{Axis, GaussianState, GridWigner, WignerFunction};
pub use symplectic::SymplecticMatrix;
