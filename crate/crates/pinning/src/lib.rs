//! Heat-bath dynamics of the 1+1-dimensional pinning model and the PDEs of
//! its diffusive scaling limits.
//!
//! * [`lattice`]: paths, discretisation of profiles, excursions.
//! * [`dynamics`]: exact event-driven simulation and couplings.
//! * [`observables`]: area, contacts, Fourier mode, generator drift.
//! * [`equilibrium`]: partition functions and exact sampling.
//! * [`fbp`]: heat equation and Stefan problem solvers with diagnostics.
//! * [`harness`]: declarative experiments and result tables.

// NaN must fail the parameter guards, hence the negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fbp;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod profile;
pub mod scalar;

pub use dynamics::{DynamicsConfig, PinningParameter, TrajectoryRecord};
pub use error::{Error, Result};
pub use lattice::LatticePath;
pub use profile::{sup_distance, Profile};
pub use scalar::{Real, Weight};

pub type Profile64 = Profile<f64>;
pub type Profile32 = Profile<f32>;
/// Exact arithmetic for partition functions and rate identities.
pub type ExactWeight = num_rational::BigRational;
