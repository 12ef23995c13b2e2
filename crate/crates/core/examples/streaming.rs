//! Feed observations one at a time, watching the tree grow and the running
//! log marginal likelihood.
//!
//!     cargo run --release --example streaming

use dyntree::harness::TestFunction;
use dyntree::rng::substream;
use dyntree::{Cloud, DataStore, FilterConfig, LeafModel, Response};

fn main() -> dyntree::Result<()> {
    let f = TestFunction::SinCauchy;
    let data = f.dataset(150, &mut substream(3, "stream", &[]));

    // five rows to get the root leaf going, then one step per arrival
    let mut cloud = Cloud::init(FilterConfig::new(LeafModel::Constant).particles(300).seed(3), data.prefix(5))?;
    for i in 5..data.len() {
        let inc = cloud.step(data.x(i), data.y(i))?;
        if (i + 1) % 25 == 0 {
            println!(
                "t={:>3}  log p(y_t | past)={inc:>8.3}  log marginal={:>9.3}  leaves={:.2}",
                i + 1,
                cloud.log_marginal_estimate(),
                cloud.mean_leaves()
            );
        }
    }

    // points can also be appended without a prepared store
    let mut extra = DataStore::real(1);
    extra.append(&[1.6], Response::Real(f.mean(&[1.6])?))?;
    cloud.step(extra.x(0), extra.y(0))?;
    println!("posterior mean at the well: {:.4}", cloud.posterior_mean(&[1.6]).unwrap_or(f64::NAN));
    Ok(())
}
