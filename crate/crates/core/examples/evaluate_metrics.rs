//! Support-weighted precision, recall and F1 from a confusion matrix.
//!
//! ```text
//! cargo run --example evaluate_metrics
//! ```

use llp_forge::metrics::{confusion, weighted_prf, ConfusionMatrix};

fn main() -> llp_forge::Result<()> {
    let cm = ConfusionMatrix::from_counts(vec![vec![2, 1], vec![0, 3]])?;
    let (p, r, f1) = weighted_prf(&cm)?;
    println!("rows = true class, columns = predicted: {:?}", cm.counts());
    println!("W-P {p:.4}  W-R {r:.4}  W-F1 {f1:.4}");

    // A class that is never predicted contributes zero precision.
    let y_true = [0, 0, 1, 1, 2, 2, 2];
    let y_pred = [0, 0, 1, 0, 1, 1, 1];
    let cm = confusion(&y_true, &y_pred, 3)?;
    let (p, r, f1) = weighted_prf(&cm)?;
    println!("{:?}\nW-P {p:.4}  W-R {r:.4}  W-F1 {f1:.4}", cm.counts());
    Ok(())
}
