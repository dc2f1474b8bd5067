//! Two-step hybrid density- and partition-based clustering for data with
//! mixed continuous and categorical variables.
//!
//! Step 1 looks at the space spanned by the continuous variables and decides
//! whether it holds natural clusters (OPTICS troughs), can be partitioned
//! stably (consensus K-means), or is homogeneous. The structure drives
//! variable selection. Step 2 clusters the selected variables with PAM on a
//! pairwise-sum-standardized Gower dissimilarity, or with the usual
//! continuous methods when only continuous variables survive.
//!
//! The crate also ships the comparator methods (PAM with Gower or FAMD
//! distance, K-prototypes, a Gaussian x multinomial finite mixture model) and
//! a generator for the benchmark simulation settings.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature enables
//! rayon-backed parallelism; results do not depend on the worker count.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod consensus;
pub mod dataset;
pub mod density;
pub mod dissimilarity;
mod error;
pub mod math;
pub mod metrics;
pub mod mixture;
mod par;
pub mod partition;
pub mod pipeline;
pub mod rng;
pub mod simgen;

pub use dataset::{MixedDataset, RowMatrix, StandardizedView, VarKind, VariableMeta};
pub use dissimilarity::{DissimMatrix, Measure};
pub use error::{Error, Result};
pub use partition::ClusterResult;
