//! Parameter update rules.

use serde::{Deserialize, Serialize};

use crate::error::LlpError;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    /// Bias-corrected first/second moment averages (decay 0.9 / 0.999, eps 1e-8).
    Adaptive,
}

impl std::str::FromStr for OptimizerKind {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self, LlpError> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adaptive" | "adam" => Ok(OptimizerKind::Adaptive),
            other => Err(LlpError::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adaptive => "adaptive",
        })
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    step: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, num_params: usize) -> Self {
        let moments = if kind == OptimizerKind::Adaptive { num_params } else { 0 };
        Self { kind, learning_rate, first: vec![0.0; moments], second: vec![0.0; moments], step: 0 }
    }

    pub fn step(&mut self, params: &mut ModelParams, grad: &ModelParams) {
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.as_mut_slice().iter_mut().zip(grad.as_slice()) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adaptive => {
                self.step = self.step.saturating_add(1);
                let c1 = 1.0 - BETA1.powi(self.step);
                let c2 = 1.0 - BETA2.powi(self.step);
                for (((p, g), m), v) in params
                    .as_mut_slice()
                    .iter_mut()
                    .zip(grad.as_slice())
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
                }
            }
        }
    }
}

/// Scale `grad` in place so its norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_global_norm(grad: &mut ModelParams, max_norm: f64) -> f64 {
    let norm = grad.norm();
    if norm > max_norm && norm.is_finite() {
        let scale = max_norm / norm;
        for g in grad.as_mut_slice() {
            *g *= scale;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Architecture;

    #[test]
    fn sgd_moves_against_gradient() {
        let mut p = ModelParams::zeros(Architecture::Linear, 1, 0, 2).unwrap();
        let mut g = p.zeros_like();
        g.as_mut_slice().copy_from_slice(&[1.0, -2.0, 0.5, 0.0]);
        Optimizer::new(OptimizerKind::Sgd, 0.1, p.len()).step(&mut p, &g);
        assert_eq!(p.as_slice(), &[-0.1, 0.2, -0.05, 0.0]);
    }

    #[test]
    fn adaptive_first_step_has_unit_magnitude() {
        let mut p = ModelParams::zeros(Architecture::Linear, 1, 0, 2).unwrap();
        let mut g = p.zeros_like();
        g.as_mut_slice().copy_from_slice(&[3.0, -0.01, 0.0, 100.0]);
        Optimizer::new(OptimizerKind::Adaptive, 0.01, p.len()).step(&mut p, &g);
        let s = p.as_slice();
        assert!((s[0] + 0.01).abs() < 1e-9);
        assert!((s[1] - 0.01).abs() < 1e-6);
        assert_eq!(s[2], 0.0);
        assert!((s[3] + 0.01).abs() < 1e-9);
    }

    #[test]
    fn clipping_caps_norm() {
        let p = ModelParams::zeros(Architecture::Linear, 1, 0, 2).unwrap();
        let mut g = p.zeros_like();
        g.as_mut_slice().copy_from_slice(&[30.0, 40.0, 0.0, 0.0]);
        assert_eq!(clip_global_norm(&mut g, 10.0), 50.0);
        assert!((g.norm() - 10.0).abs() < 1e-12);
    }
}
