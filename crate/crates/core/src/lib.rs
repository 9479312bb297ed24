//! Numerics for Gabor frames of the Gaussian on square lattices near the
//! critical density: frame-bound estimates, Fock-space sampling, the dual
//! window chain, an explicit extremal function and Weierstrass sigma checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bargmann;
pub mod error;
pub mod extremal;
pub mod frame_bounds;
pub mod linalg;
pub mod numeric;
pub mod oracle;
pub mod phase_space;
pub mod sigma;

pub use error::{Error, Result};
