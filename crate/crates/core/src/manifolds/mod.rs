//! Embedded patches, mixture measures on their union, sampling, principal
//! angles and the bandwidth admissibility rule.

mod density;
mod geometry;
mod mixture;
mod patch;

pub use density::DensitySpec;
pub use geometry::{
    bandwidth_ok, bandwidth_rule, ell_n, flat_intersection, principal_angle, AffineSubspace, BandwidthReport,
};
pub use mixture::{
    component_seed, sample_mixture, sample_with_counts, splitmix64, Component, MixtureModel, SampleCloud,
};
pub use patch::Patch;
