//! Closed-form comparison constants, the second-variation identity, the
//! segment-type inequality and the end-to-end singularity-bound experiment.

mod constants;
mod hawking;
mod segment;

pub use constants::{const_alpha, const_ca_minus, const_k, index_form, ComparisonParams, HChoice};
pub use hawking::{hawking_experiment, Check, ExperimentReport, FloorRow, HawkingConfig, MeanAudit, ProbeRow};
pub use segment::{segment_check, SegmentConfig, SegmentReport};
