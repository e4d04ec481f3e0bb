//! Graph Laplacians on samples from unions of intersecting manifolds of
//! different dimensions, with the continuum objects they approximate.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod continuum;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod manifolds;
pub mod presets;
pub mod quadrature;
pub mod scalar;
pub mod spectra;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Model = manifolds::MixtureModel<f64>;
pub type Cloud = manifolds::SampleCloud<f64>;
pub type Kernel = kernels::KernelProfile<f64>;
pub type WeightedGraph = graph::Graph<f64>;
pub type Spectrum = spectra::SpectralResult<f64>;
pub type Reference = continuum::ReferenceSpectrum<f64>;
pub type FunctionSpec = continuum::SmoothFunctionSpec<f64>;
