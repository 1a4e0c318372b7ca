//! End-to-end assemblies: the amplified pre-trace inequality, the Fourier and
//! integral bounds for `E(z, 1/2 + iT)`, the sup-norm scans and the
//! acceptance battery.

pub mod acceptance;
pub mod baselines;
pub mod bounds;
pub mod pretrace;
pub mod scan;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
