//! Metric fields on a chart, causal classification, cone-nesting audits and
//! the catalog of Lipschitz model spacetimes.

pub mod catalog;
pub mod causal;
mod field;
mod mat;

pub use catalog::{catalog, ModelParams, SpacetimeModel};
pub use causal::{
    build_audit_set, causal_character, cones_narrower, cones_narrower_on, orthonormal_frame, random_points,
    AuditConfig, AuditSet, CausalCharacter, ConeReport,
};
pub use field::{christoffel_from, Kink, MetricDerivFn, MetricField, MetricFn, ScalarFn};
pub use mat::{Mat, MAX_DIM};
