//! Simulation and verification toolkit for the one-dimensional nonlinear
//! Klein-Gordon transmission problem: two half-axes with different dispersion
//! coefficients joined at a node where the field is continuous and the
//! one-sided fluxes balance.
//!
//! The crate provides
//!
//! * closed-form spectral evaluation of the linear problem in two independent
//!   representations ([`spectral`]),
//! * reflection/transmission coefficients with their band structure and
//!   bounds ([`dispersion`]),
//! * an explicit leapfrog and an energy-conserving finite-difference solver
//!   for the nonlinear problem ([`nlsolver`]),
//! * verification instruments for energy, causality, admissibility, the
//!   composition-operator Lipschitz bound, and exponential-type estimates
//!   ([`analysis`]).

pub mod analysis;
pub mod branch_cut;
pub mod dispersion;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod nlsolver;
pub mod params;
pub mod profile;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{BranchField, BranchGrid};
pub use params::{Branch, PhysicsParams};
pub use profile::{BumpProfile, InitialDatum, Profile};
