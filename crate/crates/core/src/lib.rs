//! Pseudo-spectral solver and bifurcation toolkit for the Swift-Hohenberg
//! equation
//!
//! ```text
//! u_t = -(I + Delta)^2 u + lambda u + mu u^2 - u^3
//! ```
//!
//! on boxes with Dirichlet (1-d), odd-periodic or periodic boundary
//! conditions. The crate covers the linear spectrum about `u = 0`, exponential
//! time differencing, Newton-Krylov steady states with matrix-free stability,
//! amplitude-level reduced systems and a reproducible verification harness.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linear;
pub mod reduced;
pub mod spectral;
pub mod steady;

pub use dynamics::{Params, RunReport, Scheme, StepperConfig};
pub use error::{Error, Result};
pub use linear::EigenSummary;
pub use spectral::{Boundary, Domain, GridField, ModeIndex, Parity, SpectralField};
pub use steady::SteadyState;
