//! Numerical laboratory for the cohomogeneity-one Einstein flow on sphere
//! bundles over quaternionic projective space.
//!
//! The second-order Einstein system for the metric coefficients (a, b, c) is
//! studied through its first-order polynomial form on the 6-dimensional phase
//! space (X1, X2, X3, Y1, Y2, Y3). The crate provides:
//!
//! - the vector field, curvature scalars, analytic Jacobian and constraint
//!   defects ([`model`]);
//! - the catalog of critical points with closed-form spectra ([`catalog`])
//!   and numeric eigen-decomposition with constraint-tangency classification
//!   ([`spectrum`]);
//! - signed defect functions and flow-invariance audits for the named
//!   invariant sets, including the trapping region ([`invariants`]);
//! - unstable-manifold shooting with adaptive integration, boundary
//!   renormalization and limit classification ([`shooting`], [`integrate`]);
//! - metric reconstruction, initial-condition verification and AC/ALC/AH
//!   asymptotics ([`geometry`]);
//! - deterministic parameter sweeps ([`sweep`]).

pub mod catalog;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod invariants;
pub mod model;
pub mod shooting;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{LambdaMode, ModelParams, PhaseState};
