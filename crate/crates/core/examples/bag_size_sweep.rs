//! Mean test W-F1 as bags grow, for the bounded loss and for the KL loss.
//!
//! ```text
//! cargo run --release --example bag_size_sweep
//! ```

use llp_forge::bagging::gen_blobs;
use llp_forge::dataset::LabeledDataset;
use llp_forge::losses::LossKind;
use llp_forge::simplex::RngSeed;
use llp_forge::sweep::{mean_f1_by_value, rows_to_csv, sweep, SweepAxis};
use llp_forge::trainer::TrainConfig;

fn main() -> llp_forge::Result<()> {
    let train_set = gen_blobs(1000, 2, 2, 2.0, RngSeed(61))?;
    let test_set = gen_blobs(1000, 2, 2, 2.0, RngSeed(62))?;
    let none = LabeledDataset::empty(2)?;
    let sizes = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

    let mut table = Vec::new();
    for loss in [LossKind::TvStar, LossKind::Dllp] {
        let base = TrainConfig { epochs: 10, loss, timing: false, ..Default::default() };
        let rows = sweep(&train_set, &none, &test_set, &base, SweepAxis::BagSize, &sizes, 5, 0)?;
        if loss == LossKind::TvStar {
            print!("{}", rows_to_csv(&rows).lines().take(6).collect::<Vec<_>>().join("\n"));
            println!("\n...");
        }
        table.push(mean_f1_by_value(&rows));
    }
    println!("{:>8} {:>8} {:>8}", "bag", "tvstar", "dllp");
    for ((size, tv), (_, kl)) in table[0].iter().zip(&table[1]) {
        println!("{size:>8} {tv:>8.4} {kl:>8.4}");
    }
    Ok(())
}
