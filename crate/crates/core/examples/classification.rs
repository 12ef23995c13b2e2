//! Three classes on the unit square with 5% label noise: held-out error and
//! the entropy surface of the multinomial-leaf filter, drawn as a character
//! map.
//!
//!     cargo run --release --example classification

use dyntree::design::entropy_statistic;
use dyntree::harness::experiments::{three_class_data, three_class_label};
use dyntree::harness::misclassification;
use dyntree::rng::substream;
use dyntree::{Cloud, FilterConfig, LeafModel, PredictiveSummary};

fn main() -> dyntree::Result<()> {
    let (train, _) = three_class_data(500, 0.05, &mut substream(9, "train", &[]));
    let cloud = Cloud::fit(FilterConfig::new(LeafModel::Multinomial).particles(1000).seed(9), &train)?;

    let (test, clean) = three_class_data(1000, 0.0, &mut substream(9, "test", &[]));
    let mut pred = Vec::new();
    for i in 0..test.len() {
        if let PredictiveSummary::Class { class, .. } = cloud.predict(test.x(i))? {
            pred.push(class);
        }
    }
    println!("error against the noise-free classes: {:.4}", misclassification(&pred, &clean)?);

    // entropy map, '#' high to ' ' low; the top row is x2 = 1
    let shades = [' ', '.', ':', '+', '#'];
    let n = 24;
    for r in (0..n).rev() {
        let line: String = (0..n)
            .map(|c| {
                let x = [(c as f64 + 0.5) / n as f64, (r as f64 + 0.5) / n as f64];
                let e = entropy_statistic(&cloud, &x).unwrap_or(0.0) / 3f64.ln();
                shades[((e * shades.len() as f64) as usize).min(shades.len() - 1)]
            })
            .collect();
        println!("|{line}|");
    }
    println!("class at (0.2, 0.5): {}, at (0.8, 0.2): {}", three_class_label(&[0.2, 0.5]), three_class_label(&[0.8, 0.2]));
    Ok(())
}
