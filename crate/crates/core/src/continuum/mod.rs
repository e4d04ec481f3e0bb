//! Continuum objects: reference spectra of the limit problems, limit and
//! nonlocal energies, and the interpolating recovery construction.

mod energy;
mod functions;
mod metric_graph;
mod nonlocal;
mod recovery;
mod reference;

pub use energy::{integrate_patch, limit_energy, log_layer_energy, LogLayerEnergy};
pub use functions::{DegreeCorrected, LocalFunction, ModelFunction, NodeContext, SmoothFunctionSpec};
pub use metric_graph::metric_graph_spectrum_fd;
pub use nonlocal::{nonlocal_energy, NonlocalEnergy, NonlocalMethod, NonlocalOptions, Window};
pub use recovery::{build_recovery, RecoveryFunction, Region};
pub use reference::{
    intersection_dim, merged_union_spectrum, reference_spectrum_component, LimitKind, ModeShape, ReferenceEntry,
    ReferenceSpectrum, Source, CLUSTER_TOL,
};
