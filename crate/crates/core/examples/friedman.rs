//! Out-of-sample RMSE of linear and constant leaf dynamic trees on the
//! Friedman function, 200 training and 1000 test points per repetition.
//!
//!     cargo run --release --example friedman [reps] [particles]

use dyntree::harness::experiments::{friedman_experiment, RunSettings};
use dyntree::harness::mean_sd;

fn main() -> dyntree::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let reps = args.next().flatten().unwrap_or(5);
    let particles = args.next().flatten().unwrap_or(1000);

    let runs = friedman_experiment(reps, 200, 1000, RunSettings::new(particles, 2024))?;
    for r in &runs {
        println!("rep {:>2}: linear {:.3}  constant {:.3}", r.rep, r.rmse_linear, r.rmse_constant);
    }
    let (ml, sl) = mean_sd(&runs.iter().map(|r| r.rmse_linear).collect::<Vec<_>>());
    let (mc, sc) = mean_sd(&runs.iter().map(|r| r.rmse_constant).collect::<Vec<_>>());
    println!("linear {ml:.3} ({sl:.3})  constant {mc:.3} ({sc:.3})");
    Ok(())
}
