//! Waiting times of an Ornstein–Uhlenbeck internal state killed by a
//! state-dependent Poisson clock.
//!
//! The waiting-time law is reachable three independent ways:
//!
//! * [`sde`]: Euler–Maruyama Monte Carlo with an integrated-rate clock and
//!   reproducible counter-based random streams,
//! * [`pde`]: a finite-volume Fokker–Planck solver with a killing sink,
//! * [`analytic`]: the exact Laplace-domain density `n̂(s)` for the step rate,
//!   its asymptotic regimes and numerical Laplace inversion.
//!
//! [`stats`] turns datasets into histograms, survival curves and tail fits.
//! [`specfun`] holds the special functions the Laplace-domain formulas need.

pub mod analytic;
pub mod dd;
pub mod error;
pub mod output;
pub mod pde;
pub mod rate;
pub mod sde;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};

/// Version string embedded in every artifact.
pub const TOOL_VERSION: &str = concat!("kol ", env!("CARGO_PKG_VERSION"));
