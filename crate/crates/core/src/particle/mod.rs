//! Particle learning over dynamic trees.

mod cloud;
mod predict;
mod propagate;
pub mod resample;

pub use cloud::{bayes_factor, posterior_probability, Cloud, FilterConfig};
pub use predict::{argmax, class_summary, entropy, Mixture, PredictiveSummary};
pub use propagate::{Candidates, Chosen, LeafState, Particle};
pub use resample::residual_resample;

#[cfg(test)]
mod tests;
