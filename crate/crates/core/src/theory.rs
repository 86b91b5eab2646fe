//! Executable audits of the TV* loss properties and of the uniform
//! generalization bound for proportion matching.
//!
//! Randomized audits draw simplex pairs from Dirichlet(1, ..., 1). The bound
//! audit uses threshold classifiers `f_t(x) = 1[x >= t]` on `[0, 1]` under
//! the uniform measure, a class of VC dimension 1 whose population
//! aggregate `rho_f = 1 - t` is known in closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};
use crate::losses::raw;
use crate::simplex::{sample_uniform_simplex, RngSeed};

/// Slack tolerated by the inequality audits.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinskerReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `KL - 2 TV^2`.
    pub min_slack: f64,
}

/// `KL(rho || rho~) - 2 TV(rho, rho~)^2`, non-negative by Pinsker.
pub fn pinsker_slack(rho: &[f64], rho_tilde: &[f64]) -> f64 {
    let tv = raw::tv_distance(rho, rho_tilde);
    raw::kl(rho, rho_tilde) - 2.0 * tv * tv
}

/// Count Dirichlet pairs with `KL < 2 TV^2 - 1e-12`.
pub fn pinsker_audit(n_trials: usize, num_classes: usize, seed: RngSeed) -> PinskerReport {
    let mut rng = seed.rng();
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..n_trials {
        let a = sample_uniform_simplex(&mut rng, num_classes);
        let b = sample_uniform_simplex(&mut rng, num_classes);
        let slack = pinsker_slack(&a, &b);
        if slack < -AUDIT_TOLERANCE {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    PinskerReport { trials: n_trials, violations, min_slack }
}

/// Largest TV* value over Dirichlet pairs, plus the extreme vertex pairs.
/// Bounded by 2 for `alpha >= 1`.
pub fn tv_star_max_audit(n_pairs: usize, class_counts: &[usize], alpha: f64, seed: RngSeed) -> f64 {
    let mut rng = seed.rng();
    let mut max = raw::tv_star(&[1.0, 0.0], &[0.0, 1.0], alpha);
    for i in 0..n_pairs {
        let c = class_counts[i % class_counts.len()];
        let a = sample_uniform_simplex(&mut rng, c);
        let b = sample_uniform_simplex(&mut rng, c);
        max = max.max(raw::tv_star(&a, &b, alpha));
    }
    max
}

/// Pairs where `L(a, b)` and `L(b, a)` differ in any bit.
pub fn symmetry_audit(n_pairs: usize, class_counts: &[usize], alpha: f64, seed: RngSeed) -> usize {
    let mut rng = seed.rng();
    (0..n_pairs)
        .filter(|i| {
            let c = class_counts[i % class_counts.len()];
            let a = sample_uniform_simplex(&mut rng, c);
            let b = sample_uniform_simplex(&mut rng, c);
            raw::tv_star(&a, &b, alpha).to_bits() != raw::tv_star(&b, &a, alpha).to_bits()
        })
        .count()
}

/// Pairs where a smaller exponent gives a smaller loss (beyond relative
/// rounding of 1e-12), checked across consecutive entries of sorted `alphas`.
pub fn monotonicity_audit(n_pairs: usize, class_counts: &[usize], alphas: &[f64], seed: RngSeed) -> usize {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rng = seed.rng();
    (0..n_pairs)
        .filter(|i| {
            let c = class_counts[i % class_counts.len()];
            let a = sample_uniform_simplex(&mut rng, c);
            let b = sample_uniform_simplex(&mut rng, c);
            sorted.windows(2).any(|w| {
                let low = raw::tv_star(&a, &b, w[0]);
                let high = raw::tv_star(&a, &b, w[1]);
                low < high * (1.0 - AUDIT_TOLERANCE)
            })
        })
        .count()
}

/// Complexity term of the bound:
/// `kappa (sqrt(8 V ln(e m / V) / m) + sqrt(2 ln(4 / delta) / m))`,
/// `kappa = 2^(2/alpha - 1)`.
pub fn theorem_rhs(vc_dim: usize, m: usize, delta: f64, alpha: f64) -> Result<f64> {
    if vc_dim == 0 || m <= vc_dim || !(delta > 0.0 && delta < 1.0) || !(alpha > 0.0) || !alpha.is_finite() {
        return Err(LlpError::InvalidArguments(format!(
            "theorem_rhs needs m > vc_dim >= 1, 0 < delta < 1, alpha > 0 (got V={vc_dim}, m={m}, delta={delta}, alpha={alpha})"
        )));
    }
    let v = vc_dim as f64;
    let m = m as f64;
    let kappa = 2f64.powf(2.0 / alpha - 1.0);
    let capacity = (8.0 * v * (std::f64::consts::E * m / v).ln() / m).sqrt();
    let confidence = (2.0 * (4.0 / delta).ln() / m).sqrt();
    Ok(kappa * (capacity + confidence))
}

/// TV* between two-class proportion vectors `(p, 1 - p)` and `(q, 1 - q)`.
pub fn binary_tv_star(p: f64, q: f64, alpha: f64) -> f64 {
    raw::tv_star(&[p, 1.0 - p], &[q, 1.0 - q], alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremAuditConfig {
    pub m: usize,
    pub delta: f64,
    pub alpha: f64,
    pub n_hypotheses: usize,
    pub n_trials: usize,
    pub seed: u64,
}

impl Default for TheoremAuditConfig {
    fn default() -> Self {
        Self { m: 1000, delta: 0.05, alpha: 1.0, n_hypotheses: 200, n_trials: 1000, seed: 0 }
    }
}

/// Threshold of the reference hypothesis `f_0`.
pub const TARGET_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub trials: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    /// Mean over trials of the smallest `RHS - LHS` on the grid.
    pub mean_slack: f64,
    pub min_slack: f64,
    /// Complexity term added to the empirical loss.
    pub rhs: f64,
    pub m: usize,
    pub delta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub trial: usize,
    pub min_slack: f64,
    pub violated: bool,
}

pub fn threshold_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![TARGET_THRESHOLD];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Fraction of the sorted sample at or above `t`.
fn empirical_aggregate(sorted: &[f64], t: f64) -> f64 {
    let below = sorted.partition_point(|&x| x < t);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

fn draw_sorted_sample(m: usize, seed: RngSeed) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut xs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Monte-Carlo check of the bound: per trial, draw `m` uniform points and
/// test `L(rho_f, rho_f0) <= L(rho~_f, rho~_f0) + rhs` on every grid threshold.
pub fn theorem_mc_audit(config: &TheoremAuditConfig) -> Result<(BoundReport, Vec<TrialLog>)> {
    if config.n_hypotheses == 0 || config.n_trials == 0 {
        return Err(LlpError::InvalidArguments("need at least one hypothesis and one trial".into()));
    }
    let rhs = theorem_rhs(1, config.m, config.delta, config.alpha)?;
    let grid = threshold_grid(config.n_hypotheses);
    let seed = RngSeed(config.seed);
    let logs: Vec<TrialLog> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| {
            let xs = draw_sorted_sample(config.m, seed.derive(trial as u64));
            let target_pop = 1.0 - TARGET_THRESHOLD;
            let target_emp = empirical_aggregate(&xs, TARGET_THRESHOLD);
            let min_slack = grid
                .iter()
                .map(|&t| {
                    let lhs = binary_tv_star(1.0 - t, target_pop, config.alpha);
                    let emp = binary_tv_star(empirical_aggregate(&xs, t), target_emp, config.alpha);
                    emp + rhs - lhs
                })
                .fold(f64::INFINITY, f64::min);
            TrialLog { trial, min_slack, violated: min_slack < 0.0 }
        })
        .collect();
    let violations = logs.iter().filter(|l| l.violated).count();
    let report = BoundReport {
        trials: config.n_trials,
        violations,
        violation_fraction: violations as f64 / config.n_trials as f64,
        mean_slack: logs.iter().map(|l| l.min_slack).sum::<f64>() / logs.len() as f64,
        min_slack: logs.iter().map(|l| l.min_slack).fold(f64::INFINITY, f64::min),
        rhs,
        m: config.m,
        delta: config.delta,
        alpha: config.alpha,
    };
    Ok((report, logs))
}

/// Fraction of trials in which every grid threshold's empirical aggregate
/// is within `tolerance` of `1 - t`.
pub fn aggregate_concentration(m: usize, n_hypotheses: usize, n_trials: usize, tolerance: f64, seed: RngSeed) -> f64 {
    let grid = threshold_grid(n_hypotheses);
    let good = (0..n_trials)
        .into_par_iter()
        .filter(|&trial| {
            let xs = draw_sorted_sample(m, seed.derive(trial as u64));
            grid.iter().all(|&t| (empirical_aggregate(&xs, t) - (1.0 - t)).abs() <= tolerance)
        })
        .count();
    good as f64 / n_trials as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub alpha: f64,
    pub pairs: usize,
    /// Largest `|L(rho, q') - L(rho, q)| / |q' - q|`.
    pub max_value_slope: f64,
    /// Largest `|grad L(rho, q') - grad L(rho, q)| / |q' - q|`.
    pub max_gradient_slope: f64,
}

/// Norm of the perturbation applied to the predicted proportion.
pub const PROBE_STEP: f64 = 1e-4;

/// Random unit direction tangent to the simplex (components sum to zero).
fn tangent_direction<R: Rng + ?Sized>(rng: &mut R, c: usize) -> Vec<f64> {
    loop {
        let mut d: Vec<f64> = (0..c).map(|_| rng.sample(StandardNormal)).collect();
        let mean = d.iter().sum::<f64>() / c as f64;
        d.iter_mut().for_each(|v| *v -= mean);
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-6 {
            d.iter_mut().for_each(|v| *v /= n);
            return d;
        }
    }
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Empirical Lipschitz constants of TV* and of its gradient in the predicted
/// argument, from `n_pairs` random interior pairs perturbed by [`PROBE_STEP`].
pub fn lipschitz_probe(alpha: f64, n_pairs: usize, num_classes: usize, seed: RngSeed) -> Result<LipschitzReport> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(LlpError::NonPositiveAlpha(alpha));
    }
    let mut rng = seed.rng();
    let mut max_value_slope: f64 = 0.0;
    let mut max_gradient_slope: f64 = 0.0;
    let mut done = 0;
    while done < n_pairs {
        let rho = sample_uniform_simplex(&mut rng, num_classes);
        let q = sample_uniform_simplex(&mut rng, num_classes);
        let dir = tangent_direction(&mut rng, num_classes);
        let q2: Vec<f64> = q.iter().zip(&dir).map(|(a, d)| a + PROBE_STEP * d).collect();
        if q2.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let step = l2_diff(&q, &q2);
        let dv = (raw::tv_star(&rho, &q2, alpha) - raw::tv_star(&rho, &q, alpha)).abs();
        let g1 = raw::tv_star_grad(&rho, &q, alpha);
        let g2 = raw::tv_star_grad(&rho, &q2, alpha);
        max_value_slope = max_value_slope.max(dv / step);
        max_gradient_slope = max_gradient_slope.max(l2_diff(&g1, &g2) / step);
        done += 1;
    }
    Ok(LipschitzReport { alpha, pairs: n_pairs, max_value_slope, max_gradient_slope })
}

/// Value slope of a loss at `rho = (1/2, 1/2)`, `rho~ = (eps, 1 - eps)` along
/// `(1, -1) / sqrt 2` with step `eps * 1e-3`, for each `eps`.
pub fn slope_sequence(epsilons: &[f64], loss: impl Fn(&[f64], &[f64]) -> f64) -> Vec<f64> {
    let rho = [0.5, 0.5];
    epsilons
        .iter()
        .map(|&eps| {
            let q = [eps, 1.0 - eps];
            let h = eps * 1e-3;
            let dq = h / std::f64::consts::SQRT_2;
            let q2 = [eps + dq, 1.0 - eps - dq];
            (loss(&rho, &q2) - loss(&rho, &q)).abs() / h
        })
        .collect()
}

/// [`slope_sequence`] for the KL proportion loss; diverges like `1 / eps`.
pub fn kl_slope_sequence(epsilons: &[f64]) -> Vec<f64> {
    slope_sequence(epsilons, raw::kl)
}

/// [`slope_sequence`] for TV*; stays bounded for `alpha >= 1`.
pub fn tv_star_slope_sequence(epsilons: &[f64], alpha: f64) -> Vec<f64> {
    slope_sequence(epsilons, |a, b| raw::tv_star(a, b, alpha))
}
