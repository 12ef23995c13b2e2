//! Read a CSV with a categorical input, one-hot encode it and fit a
//! classifier on the encoded columns.
//!
//!     cargo run --release --example csv_one_hot

use dyntree::data::{one_hot_encode, CsvSchema, Table};
use dyntree::rng::substream;
use dyntree::{Cloud, FilterConfig, LeafModel};
use rand::Rng;

fn main() -> dyntree::Result<()> {
    // approval depends on a numeric score and on the applicant's region
    let mut rng = substream(8, "csv", &[]);
    let mut text = String::from("score,region,approved\n");
    for _ in 0..300 {
        let score: f64 = rng.random();
        let region = ["north", "south", "east"][rng.random_range(0..3)];
        let cut = if region == "south" { 0.7 } else { 0.4 };
        text += &format!("{score:.4},{region},{}\n", u8::from(score > cut));
    }

    let table = Table::from_reader(text.as_bytes())?;
    let (store, columns) = one_hot_encode(&table, &["region"], &CsvSchema::class("approved"))?;
    let names: Vec<String> = columns.iter().map(|c| c.name()).collect();
    println!("encoded columns: {names:?}");

    let cloud = Cloud::fit(FilterConfig::new(LeafModel::Multinomial).particles(500).seed(8), &store)?;
    // columns are score, then region=east, region=north, region=south
    for (score, region) in [(0.55, "north"), (0.55, "south"), (0.9, "south")] {
        let mut x = vec![score];
        x.extend(["east", "north", "south"].map(|r| f64::from(u8::from(r == region))));
        let p = cloud.class_probabilities(&x).unwrap_or_default();
        println!("score {score}, {region}: P(approved) = {:.3}", p.get(1).copied().unwrap_or(f64::NAN));
    }
    Ok(())
}
