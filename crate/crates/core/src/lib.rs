//! Numerical laboratory for real-analytic Eisenstein series, the amplified
//! pre-trace inequality and hyperbolic lattice-point counts.

pub mod amplifier;
pub mod counting;
pub mod eisenstein;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod harness;
pub mod levelq;
pub mod modgroup;
pub mod specfun;

pub use error::{EislabError, Result};
