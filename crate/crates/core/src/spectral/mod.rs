//! Representation layer: domains, mode lattices, transforms and dealiased
//! nonlinear products.

mod domain;
mod export;
mod field;
mod products;
mod transform;

pub use domain::{Boundary, Domain, DomainSpec, ModeIndex, Parity};
pub use field::{GridField, SpectralField};
pub(crate) use field::dot;
pub use products::GridMultiplier;
pub use transform::Symmetry;
