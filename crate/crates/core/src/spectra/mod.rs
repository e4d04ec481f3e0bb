//! Smallest eigenpairs of graph Laplacians and their alignment with
//! continuum reference spectra.

mod align;
mod lanczos;
mod solve;

pub use align::{
    align_spectra, mode_correlation, pair_eigenvalues, principal_angles, separation_score, shape_values, within_variance_fraction,
    AlignmentReport, ClusterAngle, EigenPair, Separation, SEPARATION_CAP,
};
pub use lanczos::{lanczos_smallest, DenseOperator, LanczosOptions, LanczosOutput, SymmetricOperator};
pub use solve::{smallest_eigenpairs, smallest_eigenpairs_with, SolverMethod, SolverOptions, SpectralResult, DENSE_MAX};
