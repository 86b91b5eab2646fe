use proptest::prelude::*;

use llp_forge::bagging::{make_bags, BagPlan};
use llp_forge::dataset::LabeledDataset;
use llp_forge::losses::{raw, ssc_loss, EmbeddingBatch};
use llp_forge::metrics::{confusion, weighted_prf};
use llp_forge::model::{aggregate_predictions, forward, Architecture, ModelParams};
use llp_forge::simplex::{RngSeed, SimplexVector};

fn simplex(c: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, c).prop_filter_map("all-zero weights", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn simplex_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=8).prop_flat_map(|c| (simplex(c), simplex(c)))
}

fn labeled(n_max: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
    (2usize..=5, 1usize..=n_max).prop_flat_map(|(c, n)| {
        (prop::collection::vec(0..c, n), prop::collection::vec(0..c, n), Just(c))
    })
}

proptest! {
    #[test]
    fn simplex_json_round_trip(v in (2usize..=8).prop_flat_map(simplex)) {
        let s = SimplexVector::new(v).unwrap();
        let back: SimplexVector = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn tv_star_symmetric_and_bounded((p, q) in simplex_pair(), alpha in 0.25f64..4.0) {
        let a = raw::tv_star(&p, &q, alpha);
        prop_assert_eq!(a.to_bits(), raw::tv_star(&q, &p, alpha).to_bits());
        prop_assert!(a >= 0.0);
        if alpha >= 1.0 {
            prop_assert!(a <= 2.0 + 1e-12);
        }
        prop_assert!(raw::tv_star(&p, &p, alpha) == 0.0);
    }

    #[test]
    fn tv_star_monotone_in_alpha((p, q) in simplex_pair(), a in 0.25f64..4.0, b in 0.25f64..4.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(raw::tv_star(&p, &q, hi) <= raw::tv_star(&p, &q, lo) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn pinsker_holds((p, q) in simplex_pair()) {
        let tv = raw::tv_distance(&p, &q);
        prop_assert!(tv <= (raw::kl(&p, &q) / 2.0).sqrt() + 1e-12);
    }

    #[test]
    fn ssc_is_non_negative(rows in prop::collection::vec(prop::collection::vec(0.1f64..3.0, 4), 1..8)) {
        let loss = ssc_loss(&EmbeddingBatch::new(rows).unwrap());
        prop_assert!(loss >= -1e-12);
    }

    #[test]
    fn bags_partition_the_dataset(
        n in 1usize..200,
        bag_size in 1usize..40,
        seed in any::<u64>(),
        keep in any::<bool>(),
    ) {
        let data = LabeledDataset::new((0..n).map(|i| vec![i as f64]).collect(), (0..n).map(|i| i % 3).collect(), 3)
            .unwrap();
        let plan = BagPlan::new(bag_size, RngSeed(seed)).unwrap().keep_partial(keep);
        let bags = match make_bags(&data, &plan) {
            Ok(b) => b,
            Err(_) => { prop_assert!(!keep && n < bag_size); return Ok(()); }
        };
        let mut seen = vec![false; n];
        for bag in &bags {
            prop_assert!(bag.proportion_matches(&data));
            prop_assert!(keep || bag.len() == bag_size);
            for &i in bag.indices() {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        let covered = seen.iter().filter(|s| **s).count();
        if keep {
            prop_assert_eq!(covered, n);
        } else {
            prop_assert_eq!(covered, n / bag_size * bag_size);
        }
    }

    #[test]
    fn metrics_ignore_instance_order((y, p, c) in labeled(60), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.shuffle(&mut RngSeed(seed).rng());
        let y2: Vec<usize> = order.iter().map(|&i| y[i]).collect();
        let p2: Vec<usize> = order.iter().map(|&i| p[i]).collect();
        let a = weighted_prf(&confusion(&y, &p, c).unwrap()).unwrap();
        let b = weighted_prf(&confusion(&y2, &p2, c).unwrap()).unwrap();
        prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12);
        for m in [a.0, a.1, a.2] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn metrics_ignore_class_relabeling((y, p, c) in labeled(60), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..c).collect();
        perm.shuffle(&mut RngSeed(seed).rng());
        let y2: Vec<usize> = y.iter().map(|&l| perm[l]).collect();
        let p2: Vec<usize> = p.iter().map(|&l| perm[l]).collect();
        let a = weighted_prf(&confusion(&y, &p, c).unwrap()).unwrap();
        let b = weighted_prf(&confusion(&y2, &p2, c).unwrap()).unwrap();
        prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12);
    }

    #[test]
    fn aggregate_stays_on_simplex(
        seed in any::<u64>(),
        xs in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 1..16),
        mlp in any::<bool>(),
    ) {
        let arch = if mlp { Architecture::Mlp1 } else { Architecture::Linear };
        let params = ModelParams::init(arch, 3, 4, 4, RngSeed(seed)).unwrap();
        let traces: Vec<_> = xs.iter().map(|x| forward(&params, x).unwrap()).collect();
        let agg = aggregate_predictions(&traces).unwrap();
        let sum: f64 = agg.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(agg.as_slice().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn distinct_epoch_seeds_give_distinct_partitions() {
    let n = 64;
    let data = LabeledDataset::new((0..n).map(|i| vec![i as f64]).collect(), vec![0; n], 2).unwrap();
    let run = RngSeed(5);
    let mut distinct = 0;
    for pair in 0..1000u64 {
        let a = make_bags(&data, &BagPlan::new(8, run.derive(2 * pair)).unwrap()).unwrap();
        let b = make_bags(&data, &BagPlan::new(8, run.derive(2 * pair + 1)).unwrap()).unwrap();
        let sets = |bags: &[llp_forge::dataset::Bag]| {
            let mut v: Vec<Vec<usize>> = bags
                .iter()
                .map(|b| {
                    let mut i = b.indices().to_vec();
                    i.sort_unstable();
                    i
                })
                .collect();
            v.sort();
            v
        };
        if sets(&a) != sets(&b) {
            distinct += 1;
        }
    }
    assert!(distinct >= 990, "only {distinct} of 1000 pairs distinct");
}
