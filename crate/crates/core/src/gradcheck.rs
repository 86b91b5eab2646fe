//! Central finite-difference checks of the analytic gradients.
//!
//! Each suite samples random configurations, evaluates only loss values for
//! the numerical side, and reports the worst relative error
//! `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)` (Euclidean norms
//! over the whole gradient).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::losses::{raw, ssc_gradient, ssc_loss, EmbeddingBatch, LossKind, LossParams};
use crate::model::{backward, bag_loss, Architecture, ModelParams, Objective};
use crate::simplex::{sample_uniform_simplex, RngSeed, SimplexVector};

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Points with some `|rho~_c - rho_c|` below this are in the subgradient
/// neighbourhood and skipped.
pub const SUBGRADIENT_MARGIN: f64 = 1e-3;

const NORM_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub name: String,
    pub configs: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error <= tolerance
    }
}

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(analytic).max(norm(numeric)).max(NORM_FLOOR)
}

fn in_subgradient_region(rho: &[f64], rho_tilde: &[f64]) -> bool {
    rho.iter().zip(rho_tilde).any(|(a, b)| (a - b).abs() < SUBGRADIENT_MARGIN)
}

/// TV* gradient in the predicted argument over `n_configs` accepted random
/// pairs with 2 to 6 classes.
pub fn tv_star_gradcheck(alpha: f64, n_configs: usize, seed: RngSeed) -> GradCheckReport {
    let mut rng = seed.rng();
    let mut max_rel_error: f64 = 0.0;
    let mut skipped = 0;
    let mut accepted = 0;
    while accepted < n_configs {
        let c = rng.random_range(2..=6);
        let rho = sample_uniform_simplex(&mut rng, c);
        let q = sample_uniform_simplex(&mut rng, c);
        if in_subgradient_region(&rho, &q) {
            skipped += 1;
            continue;
        }
        let analytic = raw::tv_star_grad(&rho, &q, alpha);
        let numeric = central_difference(|x| raw::tv_star(&rho, x, alpha), &q, FD_STEP);
        max_rel_error = max_rel_error.max(relative_error(&analytic, &numeric));
        accepted += 1;
    }
    GradCheckReport { name: format!("tv_star alpha={alpha}"), configs: accepted, skipped, max_rel_error }
}

/// Random embedding batch with row norms in `[0.5, 2]`.
pub fn random_embeddings<R: Rng + ?Sized>(rng: &mut R, rows: usize, width: usize) -> EmbeddingBatch {
    let data = (0..rows)
        .map(|_| {
            let v: Vec<f64> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let target = rng.random_range(0.5..=2.0);
            v.into_iter().map(|x| x * target / n).collect()
        })
        .collect();
    EmbeddingBatch::new(data).expect("random rows are non-zero")
}

pub fn ssc_gradcheck(n_configs: usize, seed: RngSeed) -> GradCheckReport {
    let mut rng = seed.rng();
    let mut max_rel_error: f64 = 0.0;
    for _ in 0..n_configs {
        let rows = rng.random_range(2..=8);
        let width = rng.random_range(2..=8);
        let batch = random_embeddings(&mut rng, rows, width);
        let analytic: Vec<f64> = ssc_gradient(&batch).into_iter().flatten().collect();
        let flat: Vec<f64> = batch.rows().iter().flatten().copied().collect();
        let numeric = central_difference(
            |x| {
                let rows = x.chunks(width).map(<[f64]>::to_vec).collect();
                ssc_loss(&EmbeddingBatch::new(rows).expect("perturbed rows stay non-zero"))
            },
            &flat,
            FD_STEP,
        );
        max_rel_error = max_rel_error.max(relative_error(&analytic, &numeric));
    }
    GradCheckReport { name: "ssc".into(), configs: n_configs, skipped: 0, max_rel_error }
}

/// Full-parameter check of [`backward`] on random models and bags.
pub fn backward_gradcheck(
    arch: Architecture,
    kind: LossKind,
    alpha: f64,
    lambda: f64,
    n_configs: usize,
    seed: RngSeed,
) -> Result<GradCheckReport> {
    let mut rng = seed.rng();
    let objective = Objective::new(kind, LossParams::new(alpha, lambda)?);
    let mut max_rel_error: f64 = 0.0;
    let mut skipped = 0;
    let mut accepted = 0;
    while accepted < n_configs {
        let dim = rng.random_range(2..=5);
        let hidden = rng.random_range(2..=6);
        let classes = rng.random_range(2..=4);
        let bag_size = rng.random_range(1..=8);
        let mut params = ModelParams::init(arch, dim, hidden, classes, RngSeed(rng.random()))?;
        for b in params.b_out_mut() {
            *b = rng.random_range(-0.5..0.5);
        }
        for b in params.b_hidden_mut() {
            *b = rng.random_range(-0.5..0.5);
        }
        let xs: Vec<Vec<f64>> = (0..bag_size).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let instances: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let labels: Vec<usize> = (0..bag_size).map(|_| rng.random_range(0..classes)).collect();
        let rho = crate::bagging::bag_proportions(&labels, classes)?;
        let out = backward(&params, &instances, &rho, &objective)?;
        if in_subgradient_region(rho.as_slice(), out.rho_tilde.as_slice()) {
            skipped += 1;
            continue;
        }
        let numeric = central_difference(
            |theta| {
                let mut p = params.clone();
                p.as_mut_slice().copy_from_slice(theta);
                bag_loss(&p, &instances, &rho, &objective).expect("finite perturbation")
            },
            params.as_slice(),
            FD_STEP,
        );
        max_rel_error = max_rel_error.max(relative_error(out.grad.as_slice(), &numeric));
        accepted += 1;
    }
    Ok(GradCheckReport {
        name: format!("backward {arch} {kind} alpha={alpha} lambda={lambda}"),
        configs: accepted,
        skipped,
        max_rel_error,
    })
}

/// Check that a tiny gradient step does not raise the bag objective.
pub fn descent_trials(n_trials: usize, rate: f64, seed: RngSeed) -> Result<usize> {
    let mut rng = seed.rng();
    let mut increases = 0;
    for _ in 0..n_trials {
        let arch = if rng.random_bool(0.5) { Architecture::Mlp1 } else { Architecture::Linear };
        let alpha = [1.0, 2.0, 3.5][rng.random_range(0..3)];
        let lambda = [0.0, 0.5][rng.random_range(0..2)];
        let objective = Objective::new(LossKind::Combined, LossParams::new(alpha, lambda)?);
        let params = ModelParams::init(arch, 3, 4, 3, RngSeed(rng.random()))?;
        let xs: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let instances: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let rho = SimplexVector::new(sample_uniform_simplex(&mut rng, 3))?;
        let out = backward(&params, &instances, &rho, &objective)?;
        let mut stepped = params.clone();
        for (p, g) in stepped.as_mut_slice().iter_mut().zip(out.grad.as_slice()) {
            *p -= rate * g;
        }
        let after = bag_loss(&stepped, &instances, &rho, &objective)?;
        if after > out.loss + 1e-9 {
            increases += 1;
        }
    }
    Ok(increases)
}
