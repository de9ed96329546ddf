//! Path homology, Laplacians and Dirac operators of digraphs and
//! path-connected hypergraphs, with persistent variants over filtrations.

pub mod chain;
pub mod checks;
pub mod error;
pub mod graph;
pub mod io;
pub mod molecular;
pub mod persistence;
pub mod rational;
pub mod report;
pub mod spectral;
pub mod svg;

pub use chain::{betti_numbers, compute_omega, BettiVector, ChainComplexRep};
pub use error::{Error, Result};
pub use graph::{Digraph, ElementaryPath, Hypergraph, VertexId};
pub use persistence::{feature_grid, FeatureGrid, Filtration, GridOptions};
pub use spectral::{dirac, eigen_spectrum, features, laplacian, Feature, FeatureSet, Spectrum};
