//! The `llp-forge` command line: train, eval, sweep, check, gen-blobs.
//!
//! Exit codes: 0 success, 1 config error, 2 data error, 3 diverged,
//! 4 audit failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bagging::gen_blobs;
use crate::checkpoint::Checkpoint;
use crate::config::load_config;
use crate::dataset::LabeledDataset;
use crate::error::LlpError;
use crate::gradcheck::{backward_gradcheck, descent_trials, ssc_gradcheck, tv_star_gradcheck};
use crate::losses::{tv_star_lipschitz_bound, LossKind};
use crate::metrics::{evaluate, MetricsReport};
use crate::model::Architecture;
use crate::optim::OptimizerKind;
use crate::simplex::RngSeed;
use crate::sweep::{rows_to_csv, sweep, SweepAxis};
use crate::theory::{
    kl_slope_sequence, lipschitz_probe, monotonicity_audit, pinsker_audit, symmetry_audit, theorem_mc_audit,
    tv_star_max_audit, tv_star_slope_sequence, TheoremAuditConfig, AUDIT_TOLERANCE,
};
use crate::trainer::{train, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "LLP_FORGE_OUT";

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "llp-forge", version, about = "Learning from label proportions toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a classifier on bags and write checkpoint, history and manifest.
    Train(TrainCmd),
    /// Score one or more checkpoints on a labeled test set.
    Eval(EvalCmd),
    /// Run one training per (value, seed) along a hyperparameter axis.
    Sweep(SweepCmd),
    /// Run the loss-property, gradient and bound audits.
    Check(CheckCmd),
    /// Write a synthetic Gaussian-blob dataset.
    GenBlobs(GenBlobsCmd),
}

/// Training hyperparameters; flags override `--config` file values.
#[derive(Debug, Args, Clone, Default)]
pub struct TrainFlags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub bag_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Global gradient-norm clip; 0 disables. Default: 10 for dllp, off otherwise.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Drop the trailing short bag of each epoch.
    #[arg(long)]
    pub drop_partial: bool,
    /// Write 0 in the history `seconds` column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

impl TrainFlags {
    pub fn resolve(&self) -> Result<TrainConfig, LlpError> {
        let mut c = match &self.config {
            Some(path) => load_config(path, TrainConfig::default())?,
            None => TrainConfig::default(),
        };
        if let Some(v) = &self.loss {
            c.loss = v.parse::<LossKind>()?;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.bag_size {
            c.bag_size = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.lr {
            c.learning_rate = v;
        }
        if let Some(v) = &self.optimizer {
            c.optimizer = v.parse::<OptimizerKind>()?;
        }
        if let Some(v) = &self.arch {
            c.arch = v.parse::<Architecture>()?;
        }
        if let Some(v) = self.hidden {
            c.hidden = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.clip_norm {
            c.clip_norm = Some(v);
        }
        if self.drop_partial {
            c.keep_partial = false;
        }
        if self.no_timing {
            c.timing = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Optional labeled test set, scored after training.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    /// Checkpoint JSON; repeat to compare several models on one test set.
    #[arg(long, required = true)]
    pub checkpoint: Vec<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    /// bag-size, alpha or lambda.
    #[arg(long)]
    pub axis: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Number of seeds per value, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Concurrent training runs (0 = all cores).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub flags: TrainFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckCmd {
    /// Run a single audit: pinsker, bound, symmetry, monotonicity,
    /// gradcheck, descent, lipschitz or theorem.
    #[arg(long)]
    pub only: Option<String>,
    /// Shorthand for `--only theorem`.
    #[arg(long)]
    pub theorem: bool,
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub hypotheses: usize,
    /// Exponents for the bound audit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0])]
    pub alphas: Vec<f64>,
    /// Divide randomized sample counts by this factor (quick runs).
    #[arg(long, default_value_t = 1)]
    pub scale_down: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenBlobsCmd {
    #[arg(long, default_value_t = 1000)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 8.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; `.jsonl` selects JSON lines, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn config(e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_CONFIG, e.to_string())
    }

    fn data(e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_DATA, e.to_string())
    }
}

/// Map a library error from a run phase onto the exit-code contract.
fn classify(e: LlpError) -> CliError {
    let code = match e {
        LlpError::DivergedLoss { .. } => EXIT_DIVERGED,
        LlpError::Config(_) | LlpError::NonPositiveAlpha(_) | LlpError::InvalidArguments(_) => EXIT_CONFIG,
        _ => EXIT_DATA,
    };
    CliError::new(code, e.to_string())
}

/// Provenance record written at the start of a run and finalized at exit.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub version: String,
    pub status: String,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    #[serde(skip)]
    dir: PathBuf,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    fn begin(command: &str, config: Value, seed: u64, dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = Self {
            command: command.into(),
            config,
            seed,
            version: VERSION.into(),
            status: "running".into(),
            started_unix,
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
            dir: dir.to_path_buf(),
            started: Some(Instant::now()),
        };
        manifest.write()?;
        Ok(manifest)
    }

    fn path(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    fn write(&self) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(CliError::data)?;
        std::fs::write(self.path(), text + "\n").map_err(CliError::data)
    }

    fn output(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        self.outputs.push(name.into());
        Ok(path)
    }

    fn finish(mut self, status: &str) -> Result<(), CliError> {
        self.status = status.into();
        self.wall_clock_seconds = self.started.map_or(0.0, |s| s.elapsed().as_secs_f64());
        self.write()
    }
}

fn run_dir(out: &Option<PathBuf>, command: &str, seed: u64) -> PathBuf {
    match out {
        Some(dir) => dir.clone(),
        None => {
            let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
            root.join(format!("{command}-seed{seed}"))
        }
    }
}

fn load_data(path: &Path, num_classes: Option<usize>) -> Result<LabeledDataset, CliError> {
    LabeledDataset::load(path, num_classes).map_err(CliError::data)
}

fn metrics_json(report: &MetricsReport) -> Value {
    json!({
        "w_precision": report.w_precision,
        "w_recall": report.w_recall,
        "w_f1": report.w_f1,
        "confusion": report.confusion.counts(),
    })
}

fn config_json(config: &TrainConfig) -> Value {
    serde_json::to_value(config).unwrap_or(Value::Null)
}

/// Run a manifest-tracked body; on failure the manifest records the error.
fn tracked<F>(mut manifest: RunManifest, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut RunManifest) -> Result<(), CliError>,
{
    match body(&mut manifest) {
        Ok(()) => manifest.finish("ok"),
        Err(e) => {
            let _ = manifest.finish(&format!("failed: {}", e.message));
            Err(e)
        }
    }
}

pub fn cmd_train(cmd: &TrainCmd) -> Result<(), CliError> {
    let config = cmd.flags.resolve().map_err(CliError::config)?;
    let data = load_data(&cmd.data, None)?;
    let val = match &cmd.val {
        Some(p) => load_data(p, Some(data.num_classes()))?,
        None => LabeledDataset::empty(data.num_classes()).map_err(CliError::data)?,
    };
    let test = cmd.test.as_ref().map(|p| load_data(p, Some(data.num_classes()))).transpose()?;
    let dir = run_dir(&cmd.out, "train", config.seed);
    let manifest = RunManifest::begin("train", config_json(&config), config.seed, &dir)?;
    tracked(manifest, |m| {
        let (params, history) = train(&data, &val, &config).map_err(classify)?;
        let ckpt = Checkpoint::new(&params, &config);
        m.output("checkpoint.json", (ckpt.to_json().map_err(CliError::data)? + "\n").as_bytes())?;
        m.output("history.csv", history.to_csv().as_bytes())?;
        if let Some(test) = &test {
            let report = evaluate(&params, test).map_err(classify)?;
            let text = serde_json::to_string_pretty(&metrics_json(&report)).map_err(CliError::data)?;
            m.output("metrics.json", (text + "\n").as_bytes())?;
            println!("{}", serde_json::to_string(&metrics_json(&report)).map_err(CliError::data)?);
        }
        eprintln!("wrote {}", m.dir.display());
        Ok(())
    })
}

pub fn cmd_eval(cmd: &EvalCmd) -> Result<(), CliError> {
    let checkpoints = cmd
        .checkpoint
        .iter()
        .map(|p| Ok((p, Checkpoint::load(p).map_err(CliError::data)?.params().map_err(CliError::data)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let num_classes = checkpoints.iter().map(|(_, p)| p.num_classes()).max();
    let test = load_data(&cmd.test, num_classes)?;
    let mut reports = Vec::new();
    for (path, params) in &checkpoints {
        if test.dim() != params.input_dim() {
            return Err(CliError::data(format!(
                "{}: checkpoint expects {} features, test data has {}",
                path.display(),
                params.input_dim(),
                test.dim()
            )));
        }
        reports.push((path.display().to_string(), evaluate(params, &test).map_err(classify)?));
    }
    let dir = run_dir(&cmd.out, "eval", 0);
    let manifest = RunManifest::begin("eval", json!({ "checkpoints": cmd.checkpoint, "test": cmd.test }), 0, &dir)?;
    tracked(manifest, |m| {
        let json_value = if reports.len() == 1 {
            metrics_json(&reports[0].1)
        } else {
            Value::Array(
                reports
                    .iter()
                    .map(|(name, r)| {
                        let mut v = metrics_json(r);
                        v["checkpoint"] = json!(name);
                        v
                    })
                    .collect(),
            )
        };
        let text = serde_json::to_string_pretty(&json_value).map_err(CliError::data)?;
        m.output("metrics.json", (text + "\n").as_bytes())?;
        let mut csv = String::from("checkpoint,w_p,w_r,w_f1\n");
        for (name, r) in &reports {
            csv.push_str(&format!("{},{}\n", csv_field(name), r.csv_row()));
        }
        m.output("metrics.csv", csv.as_bytes())?;
        println!("{}", serde_json::to_string(&json_value).map_err(CliError::data)?);
        Ok(())
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_sweep(cmd: &SweepCmd) -> Result<(), CliError> {
    let base = cmd.flags.resolve().map_err(CliError::config)?;
    let axis: SweepAxis = cmd.axis.parse().map_err(CliError::config)?;
    for &v in &cmd.values {
        axis.apply(&base, v).map_err(CliError::config)?;
    }
    if cmd.seeds == 0 {
        return Err(CliError::config("--seeds must be >= 1"));
    }
    let data = load_data(&cmd.data, None)?;
    let val = match &cmd.val {
        Some(p) => load_data(p, Some(data.num_classes()))?,
        None => LabeledDataset::empty(data.num_classes()).map_err(CliError::data)?,
    };
    let test = load_data(&cmd.test, Some(data.num_classes()))?;
    let dir = run_dir(&cmd.out, "sweep", base.seed);
    let mut config = config_json(&base);
    config["axis"] = json!(cmd.axis);
    config["values"] = json!(cmd.values);
    config["seeds"] = json!(cmd.seeds);
    let manifest = RunManifest::begin("sweep", config, base.seed, &dir)?;
    tracked(manifest, |m| {
        let rows = sweep(&data, &val, &test, &base, axis, &cmd.values, cmd.seeds, cmd.jobs).map_err(classify)?;
        m.output("sweep.csv", rows_to_csv(&rows).as_bytes())?;
        print!("{}", rows_to_csv(&rows));
        Ok(())
    })
}

/// Outcome of one named audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditResult {
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

pub const AUDIT_NAMES: [&str; 8] =
    ["pinsker", "bound", "symmetry", "monotonicity", "gradcheck", "descent", "lipschitz", "theorem"];

/// Run the selected audits. `scale_down` divides the randomized sample
/// counts (>= 1).
pub fn run_audits(cmd: &CheckCmd) -> Result<(Vec<AuditResult>, Option<String>), CliError> {
    let only = if cmd.theorem { Some("theorem".to_string()) } else { cmd.only.clone() };
    if let Some(name) = &only {
        if !AUDIT_NAMES.contains(&name.as_str()) {
            return Err(CliError::config(format!("unknown audit `{name}`; expected one of {AUDIT_NAMES:?}")));
        }
    }
    let selected = |name: &str| only.as_deref().is_none_or(|o| o == name);
    let scale = cmd.scale_down.max(1);
    let n = |count: usize| (count / scale).max(1);
    let seed = RngSeed(cmd.seed);
    let classes = [2, 3, 4, 5, 8];
    let mut results = Vec::new();
    let mut theorem_log = None;

    if selected("pinsker") {
        let reports: Vec<_> = [2, 3, 5].iter().map(|&c| pinsker_audit(n(100_000), c, seed.derive(c as u64))).collect();
        let violations: usize = reports.iter().map(|r| r.violations).sum();
        results.push(AuditResult {
            name: "pinsker".into(),
            passed: violations == 0,
            details: json!({ "violations": violations, "reports": reports }),
        });
    }
    if selected("bound") {
        let maxima: Vec<(f64, f64)> =
            [1.0, 2.0, 3.5].iter().map(|&a| (a, tv_star_max_audit(n(1_000_000), &classes, a, seed.derive(11)))).collect();
        let passed = maxima.iter().all(|&(_, m)| m <= 2.0 + AUDIT_TOLERANCE);
        results.push(AuditResult { name: "bound".into(), passed, details: json!({ "max_by_alpha": maxima }) });
    }
    if selected("symmetry") {
        let mismatches: usize =
            [0.5, 1.0, 2.0, 3.5].iter().map(|&a| symmetry_audit(n(100_000), &classes, a, seed.derive(12))).sum();
        results.push(AuditResult {
            name: "symmetry".into(),
            passed: mismatches == 0,
            details: json!({ "mismatches": mismatches }),
        });
    }
    if selected("monotonicity") {
        let violations = monotonicity_audit(n(100_000), &classes, &[0.33, 0.5, 1.0, 2.0, 2.5, 3.5], seed.derive(13));
        results.push(AuditResult {
            name: "monotonicity".into(),
            passed: violations == 0,
            details: json!({ "violations": violations }),
        });
    }
    if selected("gradcheck") {
        let mut reports = Vec::new();
        for (i, &alpha) in [0.5, 1.0, 2.0, 3.5].iter().enumerate() {
            reports.push((tv_star_gradcheck(alpha, n(50).max(50), seed.derive(20 + i as u64)), 1e-5));
            for arch in [Architecture::Linear, Architecture::Mlp1] {
                for lambda in [0.0, 0.5] {
                    let r = backward_gradcheck(arch, LossKind::Combined, alpha, lambda, 50, seed.derive(30 + i as u64))
                        .map_err(classify)?;
                    reports.push((r, 1e-4));
                }
            }
        }
        reports.push((ssc_gradcheck(50, seed.derive(40)), 1e-5));
        let dllp = backward_gradcheck(Architecture::Mlp1, LossKind::Dllp, 1.0, 0.0, 50, seed.derive(41)).map_err(classify)?;
        reports.push((dllp, 1e-4));
        let passed = reports.iter().all(|(r, tol)| r.passes(*tol));
        let details: Vec<Value> = reports
            .iter()
            .map(|(r, tol)| json!({ "name": r.name, "configs": r.configs, "skipped": r.skipped, "max_rel_error": r.max_rel_error, "tolerance": tol }))
            .collect();
        results.push(AuditResult { name: "gradcheck".into(), passed, details: Value::Array(details) });
    }
    if selected("descent") {
        let increases = descent_trials(100, 1e-4, seed.derive(50)).map_err(classify)?;
        results.push(AuditResult {
            name: "descent".into(),
            passed: increases == 0,
            details: json!({ "trials": 100, "rate": 1e-4, "increases": increases }),
        });
    }
    if selected("lipschitz") {
        let c = 3;
        let mut probes = Vec::new();
        let mut passed = true;
        for &alpha in &[1.0, 2.0, 3.5] {
            let r = lipschitz_probe(alpha, n(100_000), c, seed.derive(60)).map_err(classify)?;
            let bound = tv_star_lipschitz_bound(c, alpha);
            passed &= r.max_value_slope <= bound + 1e-6 && r.max_gradient_slope.is_finite();
            probes.push(json!({ "report": r, "value_slope_bound": bound }));
        }
        let eps = [1e-2, 1e-4, 1e-6];
        let kl = kl_slope_sequence(&eps);
        let tv = tv_star_slope_sequence(&eps, 1.0);
        let diverges = kl.windows(2).all(|w| w[1] > w[0]) && kl.last().is_some_and(|&s| s > 100.0);
        passed &= diverges && tv.iter().all(|s| s.is_finite());
        results.push(AuditResult {
            name: "lipschitz".into(),
            passed,
            details: json!({ "probes": probes, "kl_slopes": kl, "tv_star_slopes": tv, "epsilons": eps }),
        });
    }
    if selected("theorem") {
        let mut reports = Vec::new();
        let mut log = String::from("alpha,trial,min_slack,violated\n");
        let mut passed = true;
        for &alpha in &cmd.alphas {
            let config = TheoremAuditConfig {
                m: cmd.m,
                delta: cmd.delta,
                alpha,
                n_hypotheses: cmd.hypotheses,
                n_trials: cmd.trials,
                seed: cmd.seed,
            };
            let (report, trials) = theorem_mc_audit(&config).map_err(CliError::config)?;
            passed &= report.violation_fraction <= cmd.delta;
            for t in &trials {
                log.push_str(&format!("{alpha},{},{},{}\n", t.trial, t.min_slack, t.violated));
            }
            reports.push(report);
        }
        results.push(AuditResult { name: "theorem".into(), passed, details: json!({ "reports": reports }) });
        theorem_log = Some(log);
    }
    Ok((results, theorem_log))
}

pub fn cmd_check(cmd: &CheckCmd) -> Result<(), CliError> {
    let (results, theorem_log) = run_audits(cmd)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let report = json!({ "passed": failed.is_empty(), "audits": results });
    let dir = run_dir(&cmd.out, "check", cmd.seed);
    let manifest = RunManifest::begin(
        "check",
        json!({ "only": cmd.only, "theorem": cmd.theorem, "m": cmd.m, "delta": cmd.delta, "trials": cmd.trials, "scale_down": cmd.scale_down }),
        cmd.seed,
        &dir,
    )?;
    tracked(manifest, |m| {
        let text = serde_json::to_string_pretty(&report).map_err(CliError::data)?;
        m.output("check.json", (text + "\n").as_bytes())?;
        if let Some(log) = &theorem_log {
            m.output("theorem_trials.csv", log.as_bytes())?;
        }
        for r in &results {
            println!("{:<13} {}", r.name, if r.passed { "ok" } else { "FAILED" });
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::new(EXIT_AUDIT, format!("audit failed: {}", failed.join(", "))))
        }
    })
}

pub fn cmd_gen_blobs(cmd: &GenBlobsCmd) -> Result<(), CliError> {
    let data = gen_blobs(cmd.n_per_class, cmd.classes, cmd.dim, cmd.separation, RngSeed(cmd.seed))
        .map_err(CliError::config)?;
    if let Some(parent) = cmd.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(CliError::data)?;
    }
    let jsonl = cmd.out.extension().is_some_and(|e| e == "jsonl");
    if jsonl { data.write_jsonl(&cmd.out) } else { data.write_csv(&cmd.out) }.map_err(CliError::data)?;
    Ok(())
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Train(c) => cmd_train(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Check(c) => cmd_check(c),
        Command::GenBlobs(c) => cmd_gen_blobs(c),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
