//! Rotation forest and friends.
//!
//! The crate covers dataset ingestion and resampling ([`data`]), the base
//! learners ([`trees`]), the group-wise PCA transform ([`rotation`]), the
//! ensemble builders ([`forests`]), build-time prediction and contract
//! training ([`budget`]), evaluation ([`eval`]) and classifier comparison
//! statistics ([`stats`]). The `rotforge` binary wires them together
//! ([`cli`]).

pub mod budget;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod forests;
pub mod linalg;
pub mod rng;
pub mod rotation;
pub mod stats;
pub mod synth;
pub mod trees;

pub use data::{Dataset, ResamplePlan};
pub use error::{Error, Result};
pub use forests::{ForestConfig, ForestModel};
pub use trees::{Tree, TreeConfig, TreeKind};
