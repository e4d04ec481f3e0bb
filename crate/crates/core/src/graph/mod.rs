//! ε-neighborhood graphs, weighted degrees, discrete Dirichlet energies and
//! graph Laplacians.

mod build;
mod io;
mod operators;

pub(crate) use build::PointGrid;
pub use build::{build_graph, build_graph_from_points, Graph, NeighborSearch, ALL_PAIRS_BELOW};
pub use operators::{empirical_inner, LaplacianKind};
