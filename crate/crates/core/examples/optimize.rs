//! Minimize the 2-d exponential `x1 exp(-x1^2 - x2^2)` on `[-2, 6]^2` with
//! the expected improvement statistic `G(x; phi)` and constant leaves.
//!
//!     cargo run --release --example optimize

use dyntree::data::ResponseKind;
use dyntree::design::{initial_design, optimize_loop, DesignConfig, Heuristic};
use dyntree::harness::TestFunction;
use dyntree::rng::substream;
use dyntree::{FilterConfig, LeafModel, Response};

fn main() -> dyntree::Result<()> {
    let f = TestFunction::Exp2d;
    let bounds = f.bounds();
    let mut noise = substream(5, "noise", &[]);
    let mut objective = |x: &[f64]| f.sample(x, &mut noise).map(Response::Real).map_err(Into::into);

    let initial = initial_design(&mut objective, &bounds, 10, ResponseKind::Real, 5)?;
    let cfg = DesignConfig {
        candidates: 200,
        phi: 1.0,
        heuristic: Heuristic::Ei,
        rounds: 15,
        filter: FilterConfig::new(LeafModel::Constant).particles(1000).seed(5),
    };
    let run = optimize_loop(&mut objective, initial, &bounds, &cfg)?;
    for r in &run.trace.rounds {
        println!(
            "round {:>2}: x* = ({:>6.3}, {:>6.3})  y = {:>8.4}  G = {:.4}",
            r.round,
            r.x_star[0],
            r.x_star[1],
            r.y_observed,
            r.criterion.unwrap_or(f64::NAN)
        );
    }
    let best = run.trace.best_x.expect("observed inputs");
    println!("best input {best:?}: true value {:.4} (global minimum -0.4289)", f.mean(&best)?);
    Ok(())
}
