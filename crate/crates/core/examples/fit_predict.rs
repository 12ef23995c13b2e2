//! Fit linear-leaf dynamic trees to the parabola sample and print the
//! posterior predictive on a few inputs.
//!
//!     cargo run --release --example fit_predict

use dyntree::harness::experiments::parabola_data;
use dyntree::{Cloud, FilterConfig, LeafModel, PredictiveSummary};

fn main() -> dyntree::Result<()> {
    let data = parabola_data(100, 7);
    let cloud = Cloud::fit(FilterConfig::new(LeafModel::Linear).particles(500).seed(7), &data)?;

    println!("{} rows, {:.2} leaves per particle", cloud.t(), cloud.mean_leaves());
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "x", "truth", "mean", "q05", "q95");
    for x in [-3.0, -1.5, -0.5, 0.0, 1.0, 2.5] {
        if let PredictiveSummary::Real { mean, lower, upper, .. } = cloud.predict(&[x])? {
            println!("{x:>6.2} {:>9.4} {mean:>9.4} {lower:>9.4} {upper:>9.4}", x + x * x);
        }
    }
    Ok(())
}
