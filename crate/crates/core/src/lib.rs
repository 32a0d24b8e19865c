//! k-means clustering toolkit: d²-sampling and greedy seeding, Lloyd's
//! algorithm, single-swap local search (LS++) and local search with foresight
//! (FLS++), plus an experiment harness for comparing them.
//!
//! ```
//! use fls_core::{pipelines::{run, AlgoConfig, Algorithm}, synth};
//!
//! let ds = synth::gaussian_mixture(500, 2, 5, 100.0, 1.0, 7);
//! let out = run(&ds, &AlgoConfig::new(Algorithm::Gfls, 5, 10, 42)).unwrap();
//! assert!(out.record.final_cost > 0.0);
//! ```

pub mod bench;
pub mod dataset;
pub mod error;
pub mod lloyd;
pub mod localsearch;
pub mod pipelines;
pub mod sampling;
pub mod state;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use state::{Centers, ClusteringState};
