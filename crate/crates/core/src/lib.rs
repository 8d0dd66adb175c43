//! Curvature invariants of slant submanifolds of quaternionic space forms,
//! and numerical verification of the sharp delta-Casorati curvature bounds
//! together with their equality cases.
//!
//! Everything works pointwise: an instance is the tangent/normal dimension
//! data, the curvature constant of the ambient space form, the slant angle,
//! and the components of the second fundamental form in an adapted frame.

pub mod ambient;
pub mod casorati_delta;
pub mod error;
pub mod invariants;
pub mod slant_model;
pub mod verifier;

pub use casorati_delta::{
    delta_casorati, DeltaConvention, DeltaReport, ExtremizeConfig, ExtremumKind, HyperplaneExtremum,
};
pub use error::{CasoratiError, Result};
pub use invariants::{Hyperplane, InvariantReport};
pub use slant_model::{random_instance, SecondFundamentalForm, SlantInstance};
pub use verifier::{
    build_equality_case, check_inequality, BoundKind, BoundRequest, VerificationReport,
};
