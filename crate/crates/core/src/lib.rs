//! Topological summaries of residential demographics.
//!
//! City bundles are rasterized per group into binary majority masks or
//! percentage rasters. Masks grow outward by level-set front propagation and
//! are triangulated; percentage rasters become superlevel cubical complexes.
//! Both feed a Z/2 persistence reduction whose H0/H1 diagrams are turned into
//! persistence images, concatenated per city and clustered with k-medoids.
//! Segregation indices and Z-score tables describe the resulting clusters.

pub mod cluster;
pub mod cubical;
pub mod error;
pub mod geo;
pub mod homology;
pub mod levelset;
pub mod pimage;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod segstats;
pub mod synthetic;

pub use error::{Error, Result};
