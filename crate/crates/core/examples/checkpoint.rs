//! Save a cloud mid-stream, restore it, and check that continuing from the
//! checkpoint matches an uninterrupted run exactly.
//!
//!     cargo run --release --example checkpoint

use dyntree::harness::TestFunction;
use dyntree::rng::substream;
use dyntree::{Cloud, FilterConfig, LeafModel};

fn main() -> dyntree::Result<()> {
    let data = TestFunction::Exp2d.dataset(80, &mut substream(4, "data", &[]));
    let cfg = FilterConfig::new(LeafModel::Linear).particles(200).seed(4);

    let whole = Cloud::fit(cfg.clone(), &data)?;

    let first = Cloud::fit(cfg, &data.prefix(40))?;
    let path = std::env::temp_dir().join("dyntree-checkpoint.json");
    first.save(&path)?;
    let mut resumed = Cloud::load(&path)?;
    for i in 40..data.len() {
        resumed.step(data.x(i), data.y(i))?;
    }
    println!("checkpoint: {} ({} bytes)", path.display(), std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0));
    println!("log marginal, uninterrupted {:.9}, resumed {:.9}", whole.log_marginal_estimate(), resumed.log_marginal_estimate());
    println!("identical: {}", whole == resumed);
    Ok(())
}
