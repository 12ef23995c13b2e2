//! Dynamic regression and classification trees.
//!
//! A dynamic tree is a partition tree whose structure is a state that evolves
//! with every arriving observation through local *stay*, *prune* and *grow*
//! moves around the leaf that receives the new point. Posterior filtering over
//! trees is done by particle learning: particles carry only split rules and
//! conjugate leaf sufficient statistics, are resampled by their one-step
//! predictive fit, and are then propagated through the local moves.
//!
//! The crate is organized as
//!
//! - [`data`]: the append-only observation store, CSV ingestion and one-hot
//!   encoding of categorical inputs.
//! - [`tree`]: the partition tree arena, the depth-penalizing tree prior and
//!   the structural edits.
//! - [`leaf`]: constant, linear and multinomial conjugate leaf models.
//! - [`particle`]: the particle cloud, resampling, propagation, marginal
//!   likelihood estimation and mixture prediction.
//! - [`design`]: expected improvement, ALM/ALC/entropy heuristics, Latin
//!   hypercube candidates and the sequential optimize / active-learn loops.
//! - [`harness`]: test functions, metrics, the benchmark experiments and the
//!   command line front end.
//!
//! Runnable walkthroughs for each capability live in this crate's
//! `examples/` directory (`cargo run --release --example <name>`).

pub mod data;
pub mod design;
pub mod error;
pub mod harness;
pub mod leaf;
pub mod particle;
pub mod rng;
pub mod tree;

pub use data::{Covariates, DataStore, Response, ResponseKind};
pub use error::{Error, Result};
pub use leaf::{LeafModel, LeafStats, StudentT};
pub use particle::{Cloud, FilterConfig, PredictiveSummary};
pub use tree::{NodeId, SplitRule, Tree, TreePrior};
