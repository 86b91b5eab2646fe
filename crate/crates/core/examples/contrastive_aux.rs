//! The self-supervised term on its own, then added to training of a
//! one-hidden-layer model.
//!
//! ```text
//! cargo run --release --example contrastive_aux
//! ```

use llp_forge::bagging::gen_blobs;
use llp_forge::dataset::LabeledDataset;
use llp_forge::losses::{combined_loss, ssc_loss, EmbeddingBatch, LossKind, LossParams};
use llp_forge::metrics::evaluate;
use llp_forge::model::Architecture;
use llp_forge::simplex::{make_simplex, RngSeed};
use llp_forge::trainer::{train, TrainConfig};

fn main() -> llp_forge::Result<()> {
    let aligned = EmbeddingBatch::new(vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.5, 0.0]])?;
    let spread = EmbeddingBatch::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])?;
    println!("ssc aligned {:.4}, spread {:.4}", ssc_loss(&aligned), ssc_loss(&spread));

    let rho = make_simplex(&[0.5, 0.5])?;
    let rho_tilde = make_simplex(&[0.8, 0.2])?;
    let combined = combined_loss(&rho, &rho_tilde, &spread, LossParams::new(1.0, 0.5)?)?;
    println!("tv* + 0.5 * ssc = {combined:.4}");

    let train_set = gen_blobs(400, 3, 4, 3.0, RngSeed(5))?;
    let test_set = gen_blobs(200, 3, 4, 3.0, RngSeed(6))?;
    let none = LabeledDataset::empty(3)?;
    for lambda in [0.0, 0.1, 0.5] {
        let config = TrainConfig {
            loss: LossKind::Combined,
            arch: Architecture::Mlp1,
            hidden: 8,
            lambda,
            epochs: 15,
            timing: false,
            ..Default::default()
        };
        let (params, history) = train(&train_set, &none, &config)?;
        let f1 = evaluate(&params, &test_set)?.w_f1;
        println!("lambda {lambda:<4} final proportion loss {:.4}  test W-F1 {f1:.4}", history.train_loss.last().unwrap());
    }
    Ok(())
}
