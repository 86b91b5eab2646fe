//! Flat `key = value` config files for [`TrainConfig`].
//!
//! Blank lines and `#` comments are ignored. Keys: `bag_size`, `epochs`,
//! `learning_rate` (or `lr`), `alpha`, `lambda`, `optimizer`, `seed`,
//! `loss`, `arch`, `hidden`, `keep_partial`, `clip_norm`, `timing`.

use std::path::Path;
use std::str::FromStr;

use crate::error::{LlpError, Result};
use crate::trainer::TrainConfig;

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| LlpError::Config(format!("bad value `{value}` for `{key}`")))
}

/// Set one key on `config`.
pub fn apply_key(config: &mut TrainConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key.trim().replace('-', "_").as_str() {
        "bag_size" => config.bag_size = parse(key, value)?,
        "epochs" => config.epochs = parse(key, value)?,
        "learning_rate" | "lr" => config.learning_rate = parse(key, value)?,
        "alpha" => config.alpha = parse(key, value)?,
        "lambda" => config.lambda = parse(key, value)?,
        "optimizer" => config.optimizer = value.parse()?,
        "seed" => config.seed = parse(key, value)?,
        "loss" => config.loss = value.parse()?,
        "arch" => config.arch = value.parse()?,
        "hidden" => config.hidden = parse(key, value)?,
        "keep_partial" => config.keep_partial = parse(key, value)?,
        "clip_norm" => config.clip_norm = Some(parse(key, value)?),
        "timing" => config.timing = parse(key, value)?,
        other => return Err(LlpError::Config(format!("unknown key `{other}`"))),
    }
    Ok(())
}

pub fn parse_config(text: &str, base: TrainConfig) -> Result<TrainConfig> {
    let mut config = base;
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| LlpError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        apply_key(&mut config, key, value)?;
    }
    Ok(config)
}

pub fn load_config(path: &Path, base: TrainConfig) -> Result<TrainConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LlpError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text, base)
}
