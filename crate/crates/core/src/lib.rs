//! Article similarity multiplexes: layer construction, Similarity Network
//! Fusion, Louvain clustering and association statistics.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parsing and
//! the command-line pipeline live in the `multifuse` crate.

#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod assoc;
pub mod cluster;
pub mod counts;
pub mod error;
pub mod fusion;
pub mod matrix;
pub mod model;
pub mod similarity;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{BipartiteIncidence, DistributionMatrix, MultiplexBundle, Partition, SimilarityMatrix};
