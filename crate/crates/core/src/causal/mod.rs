//! Filippov geodesics, the normal exponential map of Σ, broken-path
//! estimates of τ and τ_Σ, cut function, orthogonality and Ω-volumes.

mod geodesic;
mod sigma;
mod tau;

pub use geodesic::{
    geodesic, normal_exponential, normal_geodesic, proxy_endpoint_gaps, sigma_frame, GeodesicOptions, GeodesicResult,
    GeodesicSample, GeodesicStatus,
};
pub use sigma::{
    comoving_offset_pairs, cut_function, defect_degrees, defect_trace, omega_integral, omega_volume, orthogonality_check,
    tau_monotonicity_check, witness_defect, CutConfig, CutResult, MonotonicityReport, MonotonicityRow, OmegaConfig,
    OmegaIntegral, OmegaLine, OrthogonalityReport,
};
pub use tau::{tau, tau_seeded, tau_sigma, tau_sigma_seeded, CausalPath, RefinementStep, TauEstimate, TauSearch};
