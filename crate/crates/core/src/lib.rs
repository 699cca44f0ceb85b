//! Quality-diversity search over agent-based line drawings.
//!
//! The pipeline: [`drawgen`] renders a 14-gene genome into a drawing,
//! [`metrics`] scores it by structural complexity, [`embedding`] places it on a
//! normalised 2-D map learned from a corpus, and [`qd`] keeps the fittest
//! drawing found in each of `k` k-means niches of that map.

pub mod app;
pub mod drawgen;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod qd;
pub mod raster;
pub mod seed;

pub use error::{Error, ErrorKind, Result};
pub use raster::Raster;
