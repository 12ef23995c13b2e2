//! Linear versus constant leaves on the parabola by sequential Bayes factors
//! over random reorderings of the same data.
//!
//!     cargo run --release --example bayes_factor [reps]

use dyntree::harness::experiments::{bayes_factor_experiment, parabola_data, RunSettings};
use dyntree::harness::TestFunction;
use dyntree::particle::posterior_probability;
use dyntree::LeafModel;

fn main() -> dyntree::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let data = parabola_data(100, 1);
    let f = TestFunction::Parabola;
    let grid = f.grid(200);
    let truth: Vec<f64> = grid.iter().map(|x| f.mean(x)).collect::<dyntree::Result<_>>()?;

    let runs = bayes_factor_experiment(
        &data,
        LeafModel::Linear,
        LeafModel::Constant,
        reps,
        5,
        RunSettings::new(1000, 1),
        Some((&grid, &truth)),
    )?;
    for r in &runs {
        println!(
            "rep {:>2}: log BF {:>7.2}  P(linear) {:.4}  RMSE linear {:.3} constant {:.3}",
            r.rep,
            r.log_bf,
            posterior_probability(r.log_bf),
            r.rmse_a.unwrap_or(f64::NAN),
            r.rmse_b.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
