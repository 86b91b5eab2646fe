//! Proportion-matching losses and the contrastive auxiliary loss, each with
//! an analytic gradient.
//!
//! | Loss | Value |
//! |------|-------|
//! | [`kl_proportion_loss`] | `sum_c rho_c ln(rho_c / rho~_c)` |
//! | [`tv_distance`] | `1/2 sum_c |rho_c - rho~_c|` |
//! | [`tv_star_loss`] | `1/2 (sum_c |rho_c - rho~_c|^alpha)^(2/alpha)` |
//! | [`ssc_loss`] | mean over instances of `-ln softmax_k(cos(z_j, z_k))[j]` |
//! | [`combined_loss`] | `tv_star + lambda * ssc` |
//!
//! Logarithms are natural. KL uses `0 ln(0/q) = 0` and returns `+inf` for
//! `p ln(p/0)`; it is unbounded, asymmetric and not Lipschitz. The TV* loss is
//! symmetric, and for `alpha >= 1` bounded by 2 and Lipschitz on the simplex.
//!
//! Gradients are taken with respect to the second argument (the predicted
//! proportion) with `delta = rho~ - rho`. Where `delta_i = 0` the TV* gradient
//! coordinate is 0, a valid subgradient for `alpha = 1` that also caps the
//! `alpha < 1` singularity.

use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};
use crate::simplex::SimplexVector;

/// Hyperparameters of the combined objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl LossParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(LlpError::NonPositiveAlpha(alpha));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(LlpError::InvalidArguments(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self { alpha, lambda })
    }
}

/// Which proportion loss drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// KL divergence from the true to the predicted proportion.
    Dllp,
    /// TV* with exponent alpha.
    TvStar,
    /// TV* plus lambda times the contrastive loss.
    Combined,
}

impl std::str::FromStr for LossKind {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dllp" | "kl" => Ok(LossKind::Dllp),
            "tvstar" | "tv_star" | "tv*" => Ok(LossKind::TvStar),
            "combined" => Ok(LossKind::Combined),
            other => Err(LlpError::Config(format!("unknown loss `{other}`"))),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossKind::Dllp => "dllp",
            LossKind::TvStar => "tvstar",
            LossKind::Combined => "combined",
        })
    }
}

/// Slice-level loss kernels. Inputs need not lie exactly on the simplex, so
/// finite-difference checks and audits can perturb coordinates freely.
pub mod raw {
    pub fn kl(rho: &[f64], rho_tilde: &[f64]) -> f64 {
        rho.iter()
            .zip(rho_tilde)
            .map(|(&p, &q)| {
                if p == 0.0 {
                    0.0
                } else if q <= 0.0 {
                    f64::INFINITY
                } else {
                    p * (p / q).ln()
                }
            })
            .sum()
    }

    /// d KL / d rho~_c = -rho_c / rho~_c (0 where rho_c = 0).
    pub fn kl_grad(rho: &[f64], rho_tilde: &[f64]) -> Vec<f64> {
        rho.iter()
            .zip(rho_tilde)
            .map(|(&p, &q)| if p == 0.0 { 0.0 } else { -p / q })
            .collect()
    }

    pub fn tv_distance(rho: &[f64], rho_tilde: &[f64]) -> f64 {
        0.5 * rho.iter().zip(rho_tilde).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `sum_c |rho_c - rho~_c|^alpha`.
    fn power_sum(rho: &[f64], rho_tilde: &[f64], alpha: f64) -> f64 {
        rho.iter().zip(rho_tilde).map(|(a, b)| (a - b).abs().powf(alpha)).sum()
    }

    pub fn tv_star(rho: &[f64], rho_tilde: &[f64], alpha: f64) -> f64 {
        0.5 * power_sum(rho, rho_tilde, alpha).powf(2.0 / alpha)
    }

    pub fn tv_star_grad(rho: &[f64], rho_tilde: &[f64], alpha: f64) -> Vec<f64> {
        let s = power_sum(rho, rho_tilde, alpha);
        if s == 0.0 {
            return vec![0.0; rho.len()];
        }
        let scale = s.powf(2.0 / alpha - 1.0);
        rho.iter()
            .zip(rho_tilde)
            .map(|(&r, &q)| {
                let delta = q - r;
                if delta == 0.0 {
                    0.0
                } else {
                    scale * delta.abs().powf(alpha - 1.0) * delta.signum()
                }
            })
            .collect()
    }
}

fn check_dims(a: &SimplexVector, b: &SimplexVector) -> Result<()> {
    if a.num_classes() != b.num_classes() {
        return Err(LlpError::DimensionMismatch { expected: a.num_classes(), got: b.num_classes() });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(LlpError::NonPositiveAlpha(alpha))
    }
}

/// DLLP loss, `KL(rho || rho~)`. May be `+inf`.
pub fn kl_proportion_loss(rho: &SimplexVector, rho_tilde: &SimplexVector) -> Result<f64> {
    check_dims(rho, rho_tilde)?;
    Ok(raw::kl(rho.as_slice(), rho_tilde.as_slice()))
}

pub fn kl_gradient(rho: &SimplexVector, rho_tilde: &SimplexVector) -> Result<Vec<f64>> {
    check_dims(rho, rho_tilde)?;
    Ok(raw::kl_grad(rho.as_slice(), rho_tilde.as_slice()))
}

pub fn tv_distance(rho: &SimplexVector, rho_tilde: &SimplexVector) -> Result<f64> {
    check_dims(rho, rho_tilde)?;
    Ok(raw::tv_distance(rho.as_slice(), rho_tilde.as_slice()))
}

pub fn tv_star_loss(rho: &SimplexVector, rho_tilde: &SimplexVector, alpha: f64) -> Result<f64> {
    check_dims(rho, rho_tilde)?;
    check_alpha(alpha)?;
    Ok(raw::tv_star(rho.as_slice(), rho_tilde.as_slice(), alpha))
}

/// Gradient of [`tv_star_loss`] with respect to `rho_tilde`:
/// `S^(2/alpha - 1) |delta_i|^(alpha - 1) sign(delta_i)`, `S = sum |delta|^alpha`.
pub fn tv_star_gradient(rho: &SimplexVector, rho_tilde: &SimplexVector, alpha: f64) -> Result<Vec<f64>> {
    check_dims(rho, rho_tilde)?;
    check_alpha(alpha)?;
    Ok(raw::tv_star_grad(rho.as_slice(), rho_tilde.as_slice(), alpha))
}

/// Upper bound on the Euclidean norm of the TV* gradient over the simplex,
/// valid for `alpha >= 1`: `2 C^max(0, (3 - 2 alpha) / 2)`.
pub fn tv_star_lipschitz_bound(num_classes: usize, alpha: f64) -> f64 {
    let exponent = ((3.0 - 2.0 * alpha) / 2.0).max(0.0);
    2.0 * (num_classes as f64).powf(exponent)
}

/// Penultimate-layer embeddings of one bag, one row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    rows: Vec<Vec<f64>>,
}

impl EmbeddingBatch {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(LlpError::EmptyBag);
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(LlpError::DimensionMismatch { expected: 1, got: 0 });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(LlpError::DimensionMismatch { expected: width, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LlpError::NonFiniteInput);
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(LlpError::ZeroNormEmbedding(i));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct SscForward {
    units: Vec<Vec<f64>>,
    norms: Vec<f64>,
    /// Row-wise softmax of the similarity matrix.
    softmax: Vec<Vec<f64>>,
    loss: f64,
}

fn ssc_forward(batch: &EmbeddingBatch) -> SscForward {
    let n = batch.len();
    let norms: Vec<f64> = batch.rows.iter().map(|r| norm(r)).collect();
    let units: Vec<Vec<f64>> =
        batch.rows.iter().zip(&norms).map(|(r, &nr)| r.iter().map(|x| x / nr).collect()).collect();
    let mut softmax = Vec::with_capacity(n);
    let mut loss = 0.0;
    for j in 0..n {
        let sims: Vec<f64> = units.iter().map(|uk| dot(&units[j], uk)).collect();
        let max = sims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = sims.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        // -ln(e^{s_jj} / sum_k e^{s_jk}), max-shifted
        loss += max - sims[j] + total.ln();
        softmax.push(exps.into_iter().map(|e| e / total).collect());
    }
    SscForward { units, norms, softmax, loss: loss / n as f64 }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Contrastive auxiliary loss over a bag with cosine similarity and no
/// temperature. The positive term `s(z_j, z_j)` is identically 1 and is kept
/// as written; the loss is 0 exactly for a single-instance bag.
pub fn ssc_loss(embeddings: &EmbeddingBatch) -> f64 {
    ssc_forward(embeddings).loss
}

/// Gradient of [`ssc_loss`] with respect to every embedding coordinate.
pub fn ssc_gradient(embeddings: &EmbeddingBatch) -> Vec<Vec<f64>> {
    let n = embeddings.len();
    let fwd = ssc_forward(embeddings);
    let h = embeddings.rows[0].len();
    let inv_n = 1.0 / n as f64;
    // dL/ds_jk = (P_jk - [j == k]) / n; s_jk = u_j . u_k feeds both u_j and u_k.
    let mut grad_units = vec![vec![0.0; h]; n];
    for j in 0..n {
        for k in 0..n {
            let g = inv_n * (fwd.softmax[j][k] - if j == k { 1.0 } else { 0.0 });
            if g == 0.0 {
                continue;
            }
            for d in 0..h {
                grad_units[j][d] += g * fwd.units[k][d];
                grad_units[k][d] += g * fwd.units[j][d];
            }
        }
    }
    // Back through u = z / |z|: dz = (g - (g . u) u) / |z|.
    grad_units
        .into_iter()
        .enumerate()
        .map(|(j, g)| {
            let u = &fwd.units[j];
            let along = dot(&g, u);
            g.iter().zip(u).map(|(gd, ud)| (gd - along * ud) / fwd.norms[j]).collect()
        })
        .collect()
}

/// `tv_star_loss + lambda * ssc_loss`.
pub fn combined_loss(
    rho: &SimplexVector,
    rho_tilde: &SimplexVector,
    embeddings: &EmbeddingBatch,
    params: LossParams,
) -> Result<f64> {
    let tv = tv_star_loss(rho, rho_tilde, params.alpha)?;
    Ok(tv + params.lambda * ssc_loss(embeddings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::make_simplex;

    fn s(v: &[f64]) -> SimplexVector {
        make_simplex(v).unwrap()
    }

    #[test]
    fn kl_fixtures() {
        assert_eq!(kl_proportion_loss(&s(&[0.3, 0.7]), &s(&[0.3, 0.7])).unwrap(), 0.0);
        let v = kl_proportion_loss(&s(&[1.0, 0.0]), &s(&[0.5, 0.5])).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
        let v = kl_proportion_loss(&s(&[1.0, 0.0]), &s(&[1e-6, 1.0 - 1e-6])).unwrap();
        assert!((v - 13.815_510_557_964_274).abs() < 1e-12);
    }

    #[test]
    fn kl_is_infinite_on_missing_support() {
        let v = kl_proportion_loss(&s(&[0.5, 0.5]), &s(&[1.0, 0.0])).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn kl_is_not_symmetric() {
        let a = s(&[0.9, 0.1]);
        let b = s(&[0.5, 0.5]);
        let ab = kl_proportion_loss(&a, &b).unwrap();
        let ba = kl_proportion_loss(&b, &a).unwrap();
        assert!((ab - ba).abs() > 0.05);
    }

    #[test]
    fn tv_fixtures() {
        let a = s(&[0.7, 0.3]);
        let b = s(&[0.4, 0.6]);
        assert!((tv_distance(&a, &b).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(tv_distance(&s(&[1.0, 0.0]), &s(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((tv_star_loss(&a, &b, 2.0).unwrap() - 0.09).abs() < 1e-12);
        assert!((tv_star_loss(&a, &b, 1.0).unwrap() - 0.18).abs() < 1e-12);
        assert_eq!(tv_star_loss(&s(&[1.0, 0.0]), &s(&[0.0, 1.0]), 1.0).unwrap(), 2.0);
        for alpha in [0.3, 1.0, 2.0, 3.5] {
            assert_eq!(tv_star_loss(&a, &a, alpha).unwrap(), 0.0);
        }
    }

    #[test]
    fn tv_star_errors() {
        let a = s(&[0.7, 0.3]);
        assert!(matches!(tv_star_loss(&a, &a, 0.0), Err(LlpError::NonPositiveAlpha(_))));
        assert!(matches!(tv_star_gradient(&a, &a, -1.0), Err(LlpError::NonPositiveAlpha(_))));
        let c3 = s(&[0.2, 0.3, 0.5]);
        assert!(matches!(tv_star_loss(&a, &c3, 1.0), Err(LlpError::DimensionMismatch { .. })));
        assert!(matches!(kl_proportion_loss(&a, &c3), Err(LlpError::DimensionMismatch { .. })));
    }

    #[test]
    fn tv_star_gradient_fixtures() {
        let a = s(&[0.7, 0.3]);
        let b = s(&[0.4, 0.6]);
        let g = tv_star_gradient(&a, &b, 2.0).unwrap();
        assert!((g[0] + 0.3).abs() < 1e-12 && (g[1] - 0.3).abs() < 1e-12);
        assert_eq!(tv_star_gradient(&a, &a, 2.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(tv_star_gradient(&a, &a, 3.5).unwrap(), vec![0.0, 0.0]);
        // subgradient choice at a zero coordinate
        let g = tv_star_gradient(&s(&[0.2, 0.3, 0.5]), &s(&[0.2, 0.5, 0.3]), 0.5).unwrap();
        assert_eq!(g[0], 0.0);
        assert!(g[1] > 0.0 && g[2] < 0.0);
    }

    #[test]
    fn ssc_fixtures() {
        let single = EmbeddingBatch::new(vec![vec![0.3, -1.2, 4.0]]).unwrap();
        assert_eq!(ssc_loss(&single), 0.0);
        assert!(ssc_gradient(&single)[0].iter().all(|&g| g == 0.0));
        let same = EmbeddingBatch::new(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!((ssc_loss(&same) - std::f64::consts::LN_2).abs() < 1e-12);
        let ortho = EmbeddingBatch::new(vec![vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert!((ssc_loss(&ortho) - 0.313_261_687_518_222_8).abs() < 1e-12);
    }

    #[test]
    fn ssc_rejects_zero_rows() {
        assert!(matches!(
            EmbeddingBatch::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(LlpError::ZeroNormEmbedding(1))
        ));
    }

    #[test]
    fn combined_fixtures() {
        let a = s(&[0.7, 0.3]);
        let b = s(&[0.4, 0.6]);
        let ortho = EmbeddingBatch::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let single = EmbeddingBatch::new(vec![vec![1.0, 0.0]]).unwrap();
        let tv = tv_star_loss(&a, &b, 2.0).unwrap();
        assert_eq!(combined_loss(&a, &b, &ortho, LossParams::new(2.0, 0.0).unwrap()).unwrap(), tv);
        assert_eq!(combined_loss(&a, &b, &single, LossParams::new(2.0, 1.0).unwrap()).unwrap(), tv);
        let v = combined_loss(&a, &b, &ortho, LossParams::new(2.0, 1.0).unwrap()).unwrap();
        assert!((v - 0.403_261_687_518_222_8).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bound_shape() {
        assert_eq!(tv_star_lipschitz_bound(4, 1.0), 4.0);
        assert_eq!(tv_star_lipschitz_bound(4, 2.0), 2.0);
    }

    #[test]
    fn loss_params_validation() {
        assert!(LossParams::new(0.0, 0.0).is_err());
        assert!(LossParams::new(1.0, -0.1).is_err());
        assert!(LossParams::new(0.33, 0.0).is_ok());
    }
}
