//! Write a dataset as CSV and JSON lines, read both back and cut it into
//! seeded bags.
//!
//! ```text
//! cargo run --example dataset_io -- [dir]
//! ```

use std::path::PathBuf;

use llp_forge::bagging::{gen_blobs, make_bags, BagPlan};
use llp_forge::dataset::LabeledDataset;
use llp_forge::simplex::RngSeed;

fn main() -> llp_forge::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let data = gen_blobs(5, 3, 2, 4.0, RngSeed(0))?;

    let csv = dir.join("llp_blobs.csv");
    let jsonl = dir.join("llp_blobs.jsonl");
    data.write_csv(&csv)?;
    data.write_jsonl(&jsonl)?;
    println!("{}", std::fs::read_to_string(&csv)?.lines().take(3).collect::<Vec<_>>().join("\n"));
    println!("{}", std::fs::read_to_string(&jsonl)?.lines().next().unwrap_or(""));
    assert_eq!(LabeledDataset::load(&csv, None)?, data);
    assert_eq!(LabeledDataset::load(&jsonl, None)?, data);

    let run = RngSeed(42);
    for epoch in 0..2 {
        let bags = make_bags(&data, &BagPlan::new(4, run.derive(epoch))?)?;
        println!("epoch {epoch}:");
        for bag in &bags {
            println!("  {:?} -> {:?}", bag.indices(), bag.proportion().as_slice());
        }
    }

    match LabeledDataset::load(&dir.join("missing.csv"), None) {
        Err(e) => println!("expected error: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
