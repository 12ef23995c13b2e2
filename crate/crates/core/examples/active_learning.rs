//! Active learning on the sin/Cauchy function with linear leaves, comparing
//! ALM (largest predictive variance) against ALC (largest expected reduction
//! in variance over the candidates).
//!
//!     cargo run --release --example active_learning [reps]

use dyntree::design::Heuristic;
use dyntree::harness::experiments::{active_learning_experiment, DesignSizes, RunSettings};
use dyntree::harness::{mean_sd, TestFunction};
use dyntree::LeafModel;

fn main() -> dyntree::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let sizes = DesignSizes { init: 10, rounds: 40, candidates: 20, phi: 1.0 };
    for h in [Heuristic::Alm, Heuristic::Alc] {
        let rmse = active_learning_experiment(
            TestFunction::SinCauchy,
            LeafModel::Linear,
            h,
            reps,
            sizes,
            200,
            RunSettings::new(1000, 11),
        )?;
        let (m, sd) = mean_sd(&rmse);
        println!("{h:?}: holdout RMSE {m:.4} (sd {sd:.4}) over {reps} runs");
    }
    Ok(())
}
