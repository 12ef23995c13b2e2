//! Test functions, metrics, benchmark experiments and the command line.

pub mod cli;
pub mod experiments;
mod metrics;
mod testfn;

pub use metrics::{mean_sd, misclassification, rmse};
pub use testfn::TestFunction;
