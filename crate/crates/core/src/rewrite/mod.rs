//! Symbolic normalization of graph sums.

pub mod normal;
pub mod ops;
pub mod relations;
pub mod surgery;

pub use normal::{normalize, Normalizer, RewriteTrace};
pub use relations::Rule;
