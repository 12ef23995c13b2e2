//! Sequential design: candidate generation, acquisition criteria and the
//! optimize / active-learn loops.

mod criteria;
mod lhs;
mod loops;

pub use criteria::{
    alc_statistic, alc_surface, alm_statistic, argmax_defined, entropy_statistic, expected_improvement,
    expected_improvement_t, g_statistic, mean_sd, y_min_hat,
};
pub use lhs::{lhs, Bounds};
pub use loops::{
    active_learn_loop, design_loop, initial_design, optimize_loop, DesignConfig, DesignRun, DesignTrace, Heuristic,
    Objective, RoundRecord,
};
