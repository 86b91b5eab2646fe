//! Train a linear classifier from bag proportions only, then score it with
//! instance labels it never saw.
//!
//! ```text
//! cargo run --release --example train_blobs -- [bag_size] [loss]
//! ```

use llp_forge::bagging::gen_blobs;
use llp_forge::checkpoint::Checkpoint;
use llp_forge::losses::LossKind;
use llp_forge::metrics::evaluate;
use llp_forge::simplex::RngSeed;
use llp_forge::trainer::{train, validation_score, TrainConfig, DEFAULT_LAST_K};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let bag_size = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let loss: LossKind = args.next().map(|s| s.parse()).transpose()?.unwrap_or(LossKind::TvStar);

    let train_set = gen_blobs(800, 3, 3, 4.0, RngSeed(1))?;
    let val_set = gen_blobs(100, 3, 3, 4.0, RngSeed(2))?;
    let test_set = gen_blobs(300, 3, 3, 4.0, RngSeed(3))?;

    let config = TrainConfig { bag_size, epochs: 25, loss, timing: false, ..Default::default() };
    let (params, history) = train(&train_set, &val_set, &config)?;
    for (epoch, (t, v)) in history.train_loss.iter().zip(&history.val_loss).enumerate() {
        if epoch % 5 == 4 {
            println!("epoch {:>2}  train {t:.4}  val {:.4}", epoch + 1, v.unwrap_or(f64::NAN));
        }
    }
    println!("validation score (last {DEFAULT_LAST_K}): {:.4}", validation_score(&history, DEFAULT_LAST_K)?);

    let report = evaluate(&params, &test_set)?;
    println!("test W-P {:.4}  W-R {:.4}  W-F1 {:.4}", report.w_precision, report.w_recall, report.w_f1);
    for row in report.confusion.counts() {
        println!("  {row:?}");
    }

    let json = Checkpoint::new(&params, &config).to_json()?;
    let restored = serde_json::from_str::<Checkpoint>(&json)?.params()?;
    assert_eq!(evaluate(&restored, &test_set)?, report);
    println!("checkpoint round trip reproduces the metrics ({} bytes)", json.len());
    Ok(())
}
