//! Dimensionality reduction for hyperspectral imagery by spatial-spectral
//! manifold reconstruction preserving embedding (SSMRPE).
//!
//! The pipeline: weighted mean filtering ([`wmf`]), neighbor selection by
//! the spatial-spectral combined distance ([`metrics`], [`ssgraph`]),
//! reconstruction weights scaled by spatial coordinate distance, and a
//! linear projection from a generalized eigenproblem ([`embed`]).
//! [`eval`] runs the 1-NN classification protocol and [`io`] holds the file
//! formats and the command line front end.

pub mod cube;
pub mod embed;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod ssgraph;
pub mod wmf;

pub use cube::{FeatureMatrix, HyperCube, LabelRaster, PixelCoord};
pub use error::{HsiError, Result};
