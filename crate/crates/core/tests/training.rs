use llp_forge::bagging::{gen_blobs, make_bags, BagPlan};
use llp_forge::dataset::LabeledDataset;
use llp_forge::gradcheck::descent_trials;
use llp_forge::losses::{kl_proportion_loss, tv_star_loss, LossKind};
use llp_forge::metrics::evaluate;
use llp_forge::model::{aggregate_predictions, forward, Architecture};
use llp_forge::simplex::{RngSeed, SimplexVector};
use llp_forge::theory::aggregate_concentration;
use llp_forge::trainer::{train, validation_score, TrainConfig};

fn none() -> LabeledDataset {
    LabeledDataset::empty(2).unwrap()
}

fn config(loss: LossKind) -> TrainConfig {
    TrainConfig { epochs: 5, loss, seed: 3, timing: false, ..Default::default() }
}

/// Blobs with every `k`-th label flipped, so a confident model meets bags it
/// must get badly wrong.
fn noisy_blobs(k: usize) -> LabeledDataset {
    let d = gen_blobs(200, 2, 2, 8.0, RngSeed(71)).unwrap();
    let labels = d.labels().iter().enumerate().map(|(i, &l)| if i % k == 0 { 1 - l } else { l }).collect();
    LabeledDataset::new(d.features().to_vec(), labels, 2).unwrap()
}

#[test]
fn single_bag_prediction_tracks_global_proportion() {
    let data = gen_blobs(300, 2, 2, 8.0, RngSeed(1)).unwrap();
    let cfg = TrainConfig { bag_size: data.len(), epochs: 200, learning_rate: 0.05, ..config(LossKind::TvStar) };
    let (params, _) = train(&data, &none(), &cfg).unwrap();
    let traces: Vec<_> = data.features().iter().map(|x| forward(&params, x).unwrap()).collect();
    let rho_tilde = aggregate_predictions(&traces).unwrap();
    assert!((rho_tilde.as_slice()[0] - 0.5).abs() <= 0.05, "{rho_tilde:?}");
}

#[test]
fn same_seed_same_model() {
    let data = gen_blobs(100, 3, 3, 3.0, RngSeed(2)).unwrap();
    let cfg = TrainConfig { arch: Architecture::Mlp1, ..config(LossKind::Combined) };
    let (a, ha) = train(&data, &none(), &cfg).unwrap();
    let (b, hb) = train(&data, &none(), &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha.to_csv(), hb.to_csv());
    let (c, _) = train(&data, &none(), &TrainConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn lambda_has_no_effect_on_linear_models() {
    let data = gen_blobs(100, 2, 2, 2.0, RngSeed(3)).unwrap();
    let test = gen_blobs(100, 2, 2, 2.0, RngSeed(4)).unwrap();
    let reports: Vec<_> = [0.0, 0.1, 1.0]
        .iter()
        .map(|&lambda| {
            let cfg = TrainConfig { lambda, ..config(LossKind::Combined) };
            evaluate(&train(&data, &none(), &cfg).unwrap().0, &test).unwrap()
        })
        .collect();
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bounded_loss_stays_bounded_where_kl_blows_up() {
    let data = noisy_blobs(10);
    let cfg = TrainConfig { bag_size: 1, epochs: 40, learning_rate: 0.05, ..config(LossKind::TvStar) };
    let (params, history) = train(&data, &none(), &cfg).unwrap();
    assert!(history.bag_loss_min.iter().all(|&l| l >= 0.0));
    assert!(history.bag_loss_max.iter().all(|&l| l <= 2.0), "{:?}", history.bag_loss_max);
    let (mut worst_kl, mut worst_tv) = (0.0f64, 0.0f64);
    for (x, &label) in data.features().iter().zip(data.labels()) {
        let rho = SimplexVector::vertex(label, 2).unwrap();
        let rho_tilde = forward(&params, x).unwrap().distribution;
        worst_kl = worst_kl.max(kl_proportion_loss(&rho, &rho_tilde).unwrap());
        worst_tv = worst_tv.max(tv_star_loss(&rho, &rho_tilde, 1.0).unwrap());
    }
    assert!(worst_kl > 10.0, "largest DLLP bag loss {worst_kl}");
    assert!(worst_tv <= 2.0, "largest TV* bag loss {worst_tv}");
}

#[test]
fn validation_history_and_score() {
    let data = gen_blobs(100, 2, 2, 4.0, RngSeed(5)).unwrap();
    let val = gen_blobs(50, 2, 2, 4.0, RngSeed(6)).unwrap();
    let (_, history) = train(&data, &val, &config(LossKind::TvStar)).unwrap();
    assert_eq!(history.len(), 5);
    assert!(history.val_loss.iter().all(Option::is_some));
    assert!(history.seconds.iter().all(|&s| s == 0.0));
    let score = validation_score(&history, 3).unwrap();
    assert!(score.is_finite() && score >= 0.0);
    assert!(validation_score(&history, 6).is_err());
}

#[test]
fn dropping_partial_bags_uses_whole_bags_only() {
    let data = gen_blobs(25, 2, 2, 4.0, RngSeed(7)).unwrap();
    let plan = BagPlan::new(8, RngSeed(1)).unwrap().keep_partial(false);
    let bags = make_bags(&data, &plan).unwrap();
    assert_eq!(bags.len(), 6);
    let cfg = TrainConfig { bag_size: 8, keep_partial: false, ..config(LossKind::TvStar) };
    assert!(train(&data, &none(), &cfg).is_ok());
}

#[test]
fn small_gradient_steps_never_increase_the_loss() {
    assert_eq!(descent_trials(100, 1e-4, RngSeed(8)).unwrap(), 0);
}

#[test]
fn empirical_aggregates_concentrate_for_large_samples() {
    let fraction = aggregate_concentration(100_000, 200, 100, 0.01, RngSeed(9));
    assert!(fraction >= 0.99, "{fraction}");
}
