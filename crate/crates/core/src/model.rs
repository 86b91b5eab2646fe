//! Small softmax classifiers `f = head(embed(x))` with exact backward passes.
//!
//! `Linear` has an identity embedding and a softmax head. `Mlp1` embeds with
//! one tanh hidden layer, so the contrastive loss reaches its parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};
use crate::losses::{self, raw, EmbeddingBatch, LossKind, LossParams};
use crate::simplex::{RngSeed, SimplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Linear,
    Mlp1,
}

impl std::str::FromStr for Architecture {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Architecture::Linear),
            "mlp1" | "mlp" => Ok(Architecture::Mlp1),
            other => Err(LlpError::Config(format!("unknown architecture `{other}`"))),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Linear => "linear",
            Architecture::Mlp1 => "mlp1",
        })
    }
}

/// Weights and biases, stored in one flat buffer laid out as
/// `[w_hidden (H x D), b_hidden (H), w_out (C x E), b_out (C)]`, row-major,
/// where `E` is `H` for `Mlp1` and `D` for `Linear` (hidden blocks empty).
///
/// Gradients use the same type and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    architecture: Architecture,
    input_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(architecture: Architecture, input_dim: usize, hidden_dim: usize, num_classes: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(LlpError::DimensionMismatch { expected: 1, got: 0 });
        }
        if num_classes < 2 {
            return Err(LlpError::TooFewClasses(num_classes));
        }
        let hidden_dim = match architecture {
            Architecture::Linear => 0,
            Architecture::Mlp1 if hidden_dim == 0 => {
                return Err(LlpError::InvalidArguments("mlp1 needs hidden_dim >= 1".into()))
            }
            Architecture::Mlp1 => hidden_dim,
        };
        let embed = if hidden_dim == 0 { input_dim } else { hidden_dim };
        let len = hidden_dim * input_dim + hidden_dim + num_classes * embed + num_classes;
        Ok(Self { architecture, input_dim, hidden_dim, num_classes, values: vec![0.0; len] })
    }

    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init(
        architecture: Architecture,
        input_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        seed: RngSeed,
    ) -> Result<Self> {
        let mut params = Self::zeros(architecture, input_dim, hidden_dim, num_classes)?;
        let mut rng = seed.rng();
        let hidden_bound = 1.0 / (input_dim as f64).sqrt();
        for w in params.w_hidden_mut() {
            *w = rng.random_range(-hidden_bound..=hidden_bound);
        }
        let out_bound = 1.0 / (params.embed_dim() as f64).sqrt();
        for w in params.w_out_mut() {
            *w = rng.random_range(-out_bound..=out_bound);
        }
        Ok(params)
    }

    /// Rebuild from explicit blocks (checkpoint loading).
    pub fn from_parts(
        architecture: Architecture,
        input_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        w_hidden: &[f64],
        b_hidden: &[f64],
        w_out: &[f64],
        b_out: &[f64],
    ) -> Result<Self> {
        let mut params = Self::zeros(architecture, input_dim, hidden_dim, num_classes)?;
        let blocks = [
            (params.w_hidden_range(), w_hidden),
            (params.b_hidden_range(), b_hidden),
            (params.w_out_range(), w_out),
            (params.b_out_range(), b_out),
        ];
        for (range, src) in blocks {
            if range.len() != src.len() {
                return Err(LlpError::DimensionMismatch { expected: range.len(), got: src.len() });
            }
            if src.iter().any(|v| !v.is_finite()) {
                return Err(LlpError::NonFiniteInput);
            }
            params.values[range].copy_from_slice(src);
        }
        Ok(params)
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Width of the penultimate representation.
    pub fn embed_dim(&self) -> usize {
        match self.architecture {
            Architecture::Linear => self.input_dim,
            Architecture::Mlp1 => self.hidden_dim,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn w_hidden_range(&self) -> std::ops::Range<usize> {
        0..self.hidden_dim * self.input_dim
    }

    fn b_hidden_range(&self) -> std::ops::Range<usize> {
        let start = self.hidden_dim * self.input_dim;
        start..start + self.hidden_dim
    }

    fn w_out_range(&self) -> std::ops::Range<usize> {
        let start = self.b_hidden_range().end;
        start..start + self.num_classes * self.embed_dim()
    }

    fn b_out_range(&self) -> std::ops::Range<usize> {
        let start = self.w_out_range().end;
        start..start + self.num_classes
    }

    pub fn w_hidden(&self) -> &[f64] {
        &self.values[self.w_hidden_range()]
    }

    pub fn b_hidden(&self) -> &[f64] {
        &self.values[self.b_hidden_range()]
    }

    pub fn w_out(&self) -> &[f64] {
        &self.values[self.w_out_range()]
    }

    pub fn b_out(&self) -> &[f64] {
        &self.values[self.b_out_range()]
    }

    pub fn w_hidden_mut(&mut self) -> &mut [f64] {
        let r = self.w_hidden_range();
        &mut self.values[r]
    }

    pub fn b_hidden_mut(&mut self) -> &mut [f64] {
        let r = self.b_hidden_range();
        &mut self.values[r]
    }

    pub fn w_out_mut(&mut self) -> &mut [f64] {
        let r = self.w_out_range();
        &mut self.values[r]
    }

    pub fn b_out_mut(&mut self) -> &mut [f64] {
        let r = self.b_out_range();
        &mut self.values[r]
    }

    /// Euclidean norm of the flat buffer.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn zeros_like(&self) -> Self {
        Self { values: vec![0.0; self.values.len()], ..self.clone() }
    }
}

/// Per-instance forward results kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Penultimate representation: `x` itself for `Linear`, `tanh(W x + b)` for `Mlp1`.
    pub embedding: Vec<f64>,
    pub logits: Vec<f64>,
    pub distribution: SimplexVector,
}

fn affine(weights: &[f64], bias: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    bias.iter()
        .enumerate()
        .map(|(r, b)| b + weights[r * cols..(r + 1) * cols].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn forward(params: &ModelParams, x: &[f64]) -> Result<ForwardTrace> {
    if x.len() != params.input_dim {
        return Err(LlpError::DimensionMismatch { expected: params.input_dim, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LlpError::NonFiniteInput);
    }
    let embedding = match params.architecture {
        Architecture::Linear => x.to_vec(),
        Architecture::Mlp1 => affine(params.w_hidden(), params.b_hidden(), x).into_iter().map(f64::tanh).collect(),
    };
    let logits = affine(params.w_out(), params.b_out(), &embedding);
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(LlpError::NonFiniteInput);
    }
    let distribution = SimplexVector::new(softmax(&logits))?;
    Ok(ForwardTrace { embedding, logits, distribution })
}

/// Mean of the per-instance class distributions.
pub fn aggregate_predictions(traces: &[ForwardTrace]) -> Result<SimplexVector> {
    let first = traces.first().ok_or(LlpError::EmptyBag)?;
    let c = first.distribution.num_classes();
    let mut mean = vec![0.0; c];
    for trace in traces {
        let d = trace.distribution.as_slice();
        if d.len() != c {
            return Err(LlpError::DimensionMismatch { expected: c, got: d.len() });
        }
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v;
        }
    }
    let n = traces.len() as f64;
    SimplexVector::new(mean.into_iter().map(|m| m / n).collect())
}

/// Most probable class, lowest index on ties.
pub fn predict(params: &ModelParams, x: &[f64]) -> Result<usize> {
    Ok(forward(params, x)?.distribution.argmax())
}

/// The per-bag training objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: LossKind,
    pub params: LossParams,
}

impl Objective {
    pub fn new(kind: LossKind, params: LossParams) -> Self {
        Self { kind, params }
    }

    /// Proportion-loss value and its gradient with respect to `rho_tilde`.
    pub fn proportion_terms(&self, rho: &[f64], rho_tilde: &[f64]) -> (f64, Vec<f64>) {
        match self.kind {
            LossKind::Dllp => (raw::kl(rho, rho_tilde), raw::kl_grad(rho, rho_tilde)),
            LossKind::TvStar | LossKind::Combined => (
                raw::tv_star(rho, rho_tilde, self.params.alpha),
                raw::tv_star_grad(rho, rho_tilde, self.params.alpha),
            ),
        }
    }

    pub fn uses_ssc(&self) -> bool {
        self.kind == LossKind::Combined
    }
}

/// Output of [`backward`].
#[derive(Debug, Clone)]
pub struct BagGradient {
    pub grad: ModelParams,
    /// Full objective value (proportion loss plus weighted contrastive term).
    pub loss: f64,
    /// Proportion-loss part only.
    pub proportion_loss: f64,
    pub rho_tilde: SimplexVector,
}

/// Objective value for one bag without gradients.
pub fn bag_loss(params: &ModelParams, instances: &[&[f64]], rho: &SimplexVector, objective: &Objective) -> Result<f64> {
    let traces = instances.iter().map(|x| forward(params, x)).collect::<Result<Vec<_>>>()?;
    let rho_tilde = aggregate_predictions(&traces)?;
    if rho.num_classes() != rho_tilde.num_classes() {
        return Err(LlpError::DimensionMismatch { expected: rho_tilde.num_classes(), got: rho.num_classes() });
    }
    let (mut loss, _) = objective.proportion_terms(rho.as_slice(), rho_tilde.as_slice());
    if objective.uses_ssc() {
        let batch = EmbeddingBatch::new(traces.into_iter().map(|t| t.embedding).collect())?;
        loss += objective.params.lambda * losses::ssc_loss(&batch);
    }
    Ok(loss)
}

/// Gradient of the bag objective with respect to every parameter.
///
/// The predicted proportion is the mean of the instance distributions, so
/// each instance receives `1/|B|` of the proportion-loss gradient, pushed
/// through the softmax Jacobian `diag(p) - p p^T`. The contrastive term
/// feeds only the hidden layer.
pub fn backward(
    params: &ModelParams,
    instances: &[&[f64]],
    rho: &SimplexVector,
    objective: &Objective,
) -> Result<BagGradient> {
    if instances.is_empty() {
        return Err(LlpError::EmptyBag);
    }
    let traces = instances.iter().map(|x| forward(params, x)).collect::<Result<Vec<_>>>()?;
    let rho_tilde = aggregate_predictions(&traces)?;
    if rho.num_classes() != rho_tilde.num_classes() {
        return Err(LlpError::DimensionMismatch { expected: rho_tilde.num_classes(), got: rho.num_classes() });
    }
    let (proportion_loss, grad_rho_tilde) = objective.proportion_terms(rho.as_slice(), rho_tilde.as_slice());
    let n = instances.len() as f64;
    let grad_dist: Vec<f64> = grad_rho_tilde.iter().map(|g| g / n).collect();

    let mut loss = proportion_loss;
    let ssc_grads = if objective.uses_ssc() {
        let batch = EmbeddingBatch::new(traces.iter().map(|t| t.embedding.clone()).collect())?;
        loss += objective.params.lambda * losses::ssc_loss(&batch);
        match params.architecture {
            Architecture::Mlp1 if objective.params.lambda != 0.0 => Some(losses::ssc_gradient(&batch)),
            _ => None,
        }
    } else {
        None
    };

    let mut grad = params.zeros_like();
    let c = params.num_classes;
    let e = params.embed_dim();
    let d = params.input_dim;
    let lambda = objective.params.lambda;
    for (j, (trace, x)) in traces.iter().zip(instances).enumerate() {
        let p = trace.distribution.as_slice();
        let pg: f64 = p.iter().zip(&grad_dist).map(|(a, b)| a * b).sum();
        let grad_logits: Vec<f64> = p.iter().zip(&grad_dist).map(|(pi, gi)| pi * (gi - pg)).collect();

        {
            let w_out = grad.w_out_mut();
            for (r, gl) in grad_logits.iter().enumerate() {
                for (k, emb) in trace.embedding.iter().enumerate() {
                    w_out[r * e + k] += gl * emb;
                }
            }
        }
        for (b, gl) in grad.b_out_mut().iter_mut().zip(&grad_logits) {
            *b += gl;
        }

        if params.architecture == Architecture::Mlp1 {
            let w_out = params.w_out();
            let mut grad_embed = vec![0.0; e];
            for (r, gl) in grad_logits.iter().enumerate() {
                for (k, ge) in grad_embed.iter_mut().enumerate() {
                    *ge += w_out[r * e + k] * gl;
                }
            }
            if let Some(ssc) = &ssc_grads {
                for (ge, gs) in grad_embed.iter_mut().zip(&ssc[j]) {
                    *ge += lambda * gs;
                }
            }
            let grad_pre: Vec<f64> =
                grad_embed.iter().zip(&trace.embedding).map(|(g, h)| g * (1.0 - h * h)).collect();
            {
                let w_hidden = grad.w_hidden_mut();
                for (r, gp) in grad_pre.iter().enumerate() {
                    for (k, xv) in x.iter().enumerate() {
                        w_hidden[r * d + k] += gp * xv;
                    }
                }
            }
            for (b, gp) in grad.b_hidden_mut().iter_mut().zip(&grad_pre) {
                *b += gp;
            }
        }
        debug_assert_eq!(grad_logits.len(), c);
    }
    Ok(BagGradient { grad, loss, proportion_loss, rho_tilde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::make_simplex;

    #[test]
    fn zero_weights_give_uniform() {
        let params = ModelParams::zeros(Architecture::Linear, 3, 0, 4).unwrap();
        let t = forward(&params, &[1.0, -2.0, 0.5]).unwrap();
        assert!(t.distribution.as_slice().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn large_bias_saturates_but_sums_to_one() {
        let mut params = ModelParams::zeros(Architecture::Linear, 2, 0, 2).unwrap();
        params.b_out_mut().copy_from_slice(&[10.0, -10.0]);
        let t = forward(&params, &[0.3, 0.4]).unwrap();
        let p = t.distribution.as_slice();
        assert!((p[1] - 2.061_153_618_190_204e-9).abs() < 1e-20);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mlp_head_matches_linear_on_embedding() {
        let mlp = ModelParams::init(Architecture::Mlp1, 3, 4, 3, RngSeed(2)).unwrap();
        let x = [0.5, -1.0, 2.0];
        let t = forward(&mlp, &x).unwrap();
        let linear = ModelParams::from_parts(Architecture::Linear, 4, 0, 3, &[], &[], mlp.w_out(), mlp.b_out()).unwrap();
        let t2 = forward(&linear, &t.embedding).unwrap();
        assert_eq!(t.distribution, t2.distribution);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let params = ModelParams::zeros(Architecture::Linear, 2, 0, 2).unwrap();
        assert!(matches!(forward(&params, &[1.0]), Err(LlpError::DimensionMismatch { .. })));
        assert!(matches!(forward(&params, &[1.0, f64::NAN]), Err(LlpError::NonFiniteInput)));
    }

    fn trace(p: &[f64]) -> ForwardTrace {
        ForwardTrace { embedding: vec![1.0], logits: vec![0.0; p.len()], distribution: make_simplex(p).unwrap() }
    }

    #[test]
    fn aggregation_is_the_mean() {
        assert_eq!(aggregate_predictions(&[trace(&[0.3, 0.7])]).unwrap().as_slice(), &[0.3, 0.7]);
        assert_eq!(aggregate_predictions(&[trace(&[1.0, 0.0]), trace(&[0.0, 1.0])]).unwrap().as_slice(), &[0.5, 0.5]);
        let m = aggregate_predictions(&[trace(&[0.9, 0.1]), trace(&[0.5, 0.5]), trace(&[0.1, 0.9])]).unwrap();
        assert!((m.as_slice()[0] - 0.5).abs() < 1e-15);
        assert!(matches!(aggregate_predictions(&[]), Err(LlpError::EmptyBag)));
    }

    #[test]
    fn predict_ties_and_scaling() {
        let mut params = ModelParams::zeros(Architecture::Linear, 1, 0, 2).unwrap();
        assert_eq!(predict(&params, &[1.0]).unwrap(), 0);
        params.w_out_mut().copy_from_slice(&[0.2, 0.5]);
        params.b_out_mut().copy_from_slice(&[0.1, -0.1]);
        let before = predict(&params, &[1.0]).unwrap();
        for v in params.as_mut_slice() {
            *v *= 7.5;
        }
        assert_eq!(predict(&params, &[1.0]).unwrap(), before);
        assert_eq!(before, 1);
    }

    #[test]
    fn gradient_vanishes_at_exact_match() {
        let params = ModelParams::zeros(Architecture::Linear, 2, 0, 2).unwrap();
        let xs: Vec<&[f64]> = vec![&[1.0, 2.0], &[-1.0, 0.5]];
        let rho = make_simplex(&[0.5, 0.5]).unwrap();
        let obj = Objective::new(LossKind::TvStar, LossParams::new(2.0, 0.0).unwrap());
        let g = backward(&params, &xs, &rho, &obj).unwrap();
        assert_eq!(g.loss, 0.0);
        assert!(g.grad.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_gradient_ignores_lambda() {
        let params = ModelParams::init(Architecture::Linear, 3, 0, 3, RngSeed(4)).unwrap();
        let xs: Vec<&[f64]> = vec![&[1.0, 2.0, 0.1], &[-1.0, 0.5, 0.3], &[0.2, 0.2, -0.7]];
        let rho = make_simplex(&[1.0 / 3.0, 2.0 / 3.0, 0.0]).unwrap();
        let g0 = backward(&params, &xs, &rho, &Objective::new(LossKind::Combined, LossParams::new(1.5, 0.0).unwrap())).unwrap();
        let g1 = backward(&params, &xs, &rho, &Objective::new(LossKind::Combined, LossParams::new(1.5, 1.0).unwrap())).unwrap();
        assert_eq!(g0.grad, g1.grad);
        assert!(g1.loss > g0.loss);
    }

    #[test]
    fn from_parts_checks_block_sizes() {
        assert!(ModelParams::from_parts(Architecture::Linear, 2, 0, 2, &[], &[], &[0.0; 3], &[0.0; 2]).is_err());
    }
}
