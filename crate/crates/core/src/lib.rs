//! Truncated-SVD graph embeddings for node classification on heterophilous
//! graphs, with the sparse kernels, data loaders, classifier and
//! experiment harness around them.

pub mod classifier;
pub mod dense;
pub mod error;
pub mod graph;
pub mod harness;
pub mod models;
pub mod sparse;
pub mod tsvd;

pub use error::{Error, Result};
