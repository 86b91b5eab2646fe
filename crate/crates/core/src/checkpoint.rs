//! Model checkpoints as a single JSON document.
//!
//! Weights are written with shortest round-trip float formatting, so a
//! loaded checkpoint reproduces predictions bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};
use crate::model::{Architecture, ModelParams};
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub architecture: Architecture,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub hidden_activation: String,
    /// Row-major `hidden_dim x input_dim`.
    pub w_hidden: Vec<f64>,
    pub b_hidden: Vec<f64>,
    /// Row-major `num_classes x embed_dim`.
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub fn new(params: &ModelParams, config: &TrainConfig) -> Self {
        Self {
            architecture: params.architecture(),
            input_dim: params.input_dim(),
            hidden_dim: params.hidden_dim(),
            num_classes: params.num_classes(),
            hidden_activation: "tanh".into(),
            w_hidden: params.w_hidden().to_vec(),
            b_hidden: params.b_hidden().to_vec(),
            w_out: params.w_out().to_vec(),
            b_out: params.b_out().to_vec(),
            config: config.clone(),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        if self.hidden_activation != "tanh" {
            return Err(LlpError::InvalidArguments(format!(
                "unsupported hidden activation `{}`",
                self.hidden_activation
            )));
        }
        ModelParams::from_parts(
            self.architecture,
            self.input_dim,
            self.hidden_dim,
            self.num_classes,
            &self.w_hidden,
            &self.b_hidden,
            &self.w_out,
            &self.b_out,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlpError::Data { path: path.to_path_buf(), message: e.to_string() })?;
        serde_json::from_str(&text).map_err(|e| LlpError::Data { path: path.to_path_buf(), message: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::forward;
    use crate::simplex::RngSeed;

    #[test]
    fn round_trip_is_bit_exact() {
        let params = ModelParams::init(Architecture::Mlp1, 3, 5, 4, RngSeed(11)).unwrap();
        let ckpt = Checkpoint::new(&params, &TrainConfig::default());
        let back: Checkpoint = serde_json::from_str(&ckpt.to_json().unwrap()).unwrap();
        let restored = back.params().unwrap();
        assert_eq!(restored, params);
        let x = [0.1, -0.7, 2.2];
        let a = forward(&params, &x).unwrap().distribution;
        let b = forward(&restored, &x).unwrap().distribution;
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}
