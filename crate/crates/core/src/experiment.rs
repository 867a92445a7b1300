//! Configuration-driven experiment grids: envs × policies × horizons, each replicated `runs`
//! times, with CSV/JSON output.
//!
//! Output files (all in the output directory):
//!
//! * `runs.csv`: one row per run.
//! * `summary.json`: mean, stderr and theory bounds per (env, policy, T) cell.
//! * `regret_vs_T.csv`: mean regret against horizon, for plotting.
//! * `epochs.csv`: per-epoch records, only when `epoch_log` is set.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    fast_lambda_floor, fast_mix_dependent_bound, fast_mix_independent_bound, minimax_lower_bound,
    slow_lambda_floor, slow_mix_dependent_bound, slow_mix_independent_bound, BoundInput,
};
use crate::concentration::fast_mixing_constant;
use crate::env::BanditEnv;
use crate::error::{Error, Result};
use crate::policy::{PolicyConfig, PolicyKind};
use crate::process::{frozen_rademacher_env, ProcessSpec, RateDescriptor};
use crate::simulator::{delayed_run, mean_stderr, run_episode, DelayConfig, RegretRecord};

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CURVE_FILE: &str = "regret_vs_T.csv";
pub const EPOCHS_FILE: &str = "epochs.csv";

/// An environment of the grid. Frozen environments depend on T, so they are rebuilt per horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    Processes {
        name: String,
        arms: Vec<ProcessSpec>,
    },
    FrozenRademacher {
        name: String,
        arms: usize,
        alpha: f64,
        /// 0-based index of the better arm; all arms are identical when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        best_arm: Option<usize>,
    },
}

impl EnvConfig {
    pub fn name(&self) -> &str {
        match self {
            EnvConfig::Processes { name, .. } | EnvConfig::FrozenRademacher { name, .. } => name,
        }
    }

    pub fn build(&self, horizon: u64) -> Result<BanditEnv> {
        match self {
            EnvConfig::Processes { arms, .. } => BanditEnv::new(arms.clone()),
            EnvConfig::FrozenRademacher {
                arms,
                alpha,
                best_arm,
                ..
            } => frozen_rademacher_env(horizon, *arms, *alpha, *best_arm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub envs: Vec<EnvConfig>,
    pub policies: Vec<PolicyConfig>,
    pub horizons: Vec<u64>,
    pub runs: usize,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Also write `epochs.csv`.
    #[serde(default)]
    pub epoch_log: bool,
    /// Absolute constant C₃ of the instance-independent slow bound.
    #[serde(default = "unit")]
    pub bound_constant: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn unit() -> f64 {
    1.0
}

// 1-based line of the first occurrence of `"key"` in the source text.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a JSON config. Diagnostics carry the line they refer to.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        config.validate().map_err(|(key, msg)| match key_line(text, key) {
            Some(line) => Error::Config(format!("line {line}: {msg}")),
            None => Error::Config(msg),
        })?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the grid; on failure returns the offending top-level key and a message.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let safe = |s: &str| {
            !s.is_empty()
                && !s.starts_with('.')
                && s.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
        };
        if !safe(&self.name) {
            return Err(("name", format!("name {:?} is not filesystem-safe", self.name)));
        }
        if self.envs.is_empty() {
            return Err(("envs", "envs is empty".into()));
        }
        if self.policies.is_empty() {
            return Err(("policies", "policies is empty".into()));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(("horizons", "horizons must be a non-empty list of positive integers".into()));
        }
        if self.runs < 2 {
            return Err(("runs", format!("runs = {} but at least 2 are needed", self.runs)));
        }
        if !(self.bound_constant.is_finite() && self.bound_constant > 0.0) {
            return Err(("bound_constant", "bound_constant must be positive".into()));
        }
        let mut names: Vec<&str> = self.envs.iter().map(EnvConfig::name).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(("envs", format!("duplicate env name {:?}", w[0])));
        }
        let mut labels: Vec<String> = self.policies.iter().map(PolicyConfig::label).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(("policies", format!("duplicate policy label {:?}", w[0])));
        }
        for p in &self.policies {
            p.validate()
                .map_err(|e| ("policies", format!("policy {}: {e}", p.label())))?;
        }
        for &t in &self.horizons {
            if let Some(d) = self.delay {
                if d.tau >= t {
                    return Err(("delay", format!("delay tau = {} must be below T = {t}", d.tau)));
                }
            }
            let local = t - self.delay.map_or(0, |d| d.tau);
            for e in &self.envs {
                let env = e
                    .build(t)
                    .map_err(|err| ("envs", format!("env {}: {err}", e.name())))?;
                if local <= env.arms() as u64 {
                    return Err((
                        "horizons",
                        format!(
                            "T = {t} leaves {local} policy rounds for env {} with K = {}",
                            e.name(),
                            env.arms()
                        ),
                    ));
                }
                for p in &self.policies {
                    if !p.supports_range(env.range()) {
                        return Err((
                            "policies",
                            format!("policy {} cannot handle rewards of env {}", p.label(), e.name()),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize, u64)> {
        let mut cells = Vec::new();
        for e in 0..self.envs.len() {
            for p in 0..self.policies.len() {
                for &t in &self.horizons {
                    cells.push((e, p, t));
                }
            }
        }
        cells
    }
}

/// Regime-matched theory values for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    /// Which upper bound was evaluated.
    pub bound: Option<String>,
    pub lambda: Option<f64>,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    /// Whether the policy is one the upper bound is proved for.
    pub in_contract: bool,
}

/// Picks the bounds that match the environment's mixing regime. An environment is slow when
/// some arm has a polynomial rate with exponent below 1/2; α is the smallest such exponent.
pub fn theory_for(env: &BanditEnv, horizon: u64, policy: &PolicyConfig) -> Theory {
    let slow_alpha = env
        .specs()
        .iter()
        .filter_map(|s| s.rate().polynomial_exponent())
        .filter(|&a| a < 0.5)
        .reduce(f64::min);
    let elimination = matches!(
        policy.kind,
        PolicyKind::CmixImprovedUcb | PolicyKind::ImprovedUcb
    );
    match slow_alpha {
        Some(alpha) if alpha > 0.0 => {
            let lambda = slow_lambda_floor(horizon);
            let input = BoundInput {
                gaps: env.gaps().to_vec(),
                horizon,
                alpha,
                lambda,
                mixing_constant: 0.0,
            };
            Theory {
                bound: Some("slow_mix_dependent".into()),
                lambda: Some(lambda),
                upper: slow_mix_dependent_bound(&input).ok(),
                lower: minimax_lower_bound(horizon, alpha).ok(),
                in_contract: policy.kind == PolicyKind::CmixImprovedUcb,
            }
        }
        Some(alpha) => Theory {
            bound: None,
            lambda: None,
            upper: None,
            lower: minimax_lower_bound(horizon, alpha).ok(),
            in_contract: false,
        },
        None => {
            let m = env
                .specs()
                .iter()
                .map(|s| mixing_constant_at(&s.rate(), horizon))
                .fold(0.0, f64::max);
            let lambda = fast_lambda_floor(horizon);
            let input = BoundInput {
                gaps: env.gaps().to_vec(),
                horizon,
                alpha: 0.0,
                lambda,
                mixing_constant: m,
            };
            Theory {
                bound: Some("fast_mix_dependent".into()),
                lambda: Some(lambda),
                upper: fast_mix_dependent_bound(&input).ok(),
                lower: None,
                in_contract: elimination,
            }
        }
    }
}

fn mixing_constant_at(rate: &RateDescriptor, horizon: u64) -> f64 {
    fast_mixing_constant(rate, Some(horizon)).map_or(f64::INFINITY, |m| m.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub env: String,
    pub policy: String,
    pub horizon: u64,
    pub arms: usize,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub theory_upper: Option<f64>,
    pub theory_lower: Option<f64>,
    pub theory_bound: Option<String>,
    pub lambda: Option<f64>,
    pub in_contract: bool,
    /// Fraction of runs in which some optimal arm was still active at the horizon.
    pub best_arm_survival: f64,
    /// Mean of |Σ X_t^{I_t} − Σ μ_{I_t}| over runs.
    pub mean_approx_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub base_seed: u64,
    pub bound_constant: f64,
    pub cells: Vec<CellSummary>,
}

/// What a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

struct CellResult {
    env: String,
    policy: String,
    horizon: u64,
    arms: usize,
    optimal: Vec<usize>,
    theory: Theory,
    records: Vec<RegretRecord>,
}

/// Runs the grid on `workers` threads (all cores when `None`) and writes the output files.
/// File contents depend only on the config, never on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutput> {
    config
        .validate()
        .map_err(|(_, msg)| Error::Config(msg))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let cells = config.cells();
    let results = pool.install(|| {
        cells
            .par_iter()
            .map(|&(e, p, t)| run_cell(config, e, p, t))
            .collect::<Result<Vec<_>>>()
    })?;

    let summary = summarize(config, &results);
    let mut contents = vec![
        (RUNS_FILE, runs_csv(&results)?),
        (SUMMARY_FILE, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
        (CURVE_FILE, curve_csv(&summary)?),
    ];
    if config.epoch_log {
        contents.push((EPOCHS_FILE, epochs_csv(&results)?));
    }
    let files = write_all(&config.output_dir, &contents)?;
    Ok(ExperimentOutput { summary, files })
}

fn run_cell(config: &ExperimentConfig, e: usize, p: usize, horizon: u64) -> Result<CellResult> {
    let env_cfg = &config.envs[e];
    let policy = &config.policies[p];
    let env = env_cfg.build(horizon)?;
    let records = (0..config.runs)
        .into_par_iter()
        .map(|r| {
            let seed = config.base_seed.wrapping_add(r as u64);
            match config.delay {
                Some(d) => delayed_run(&env, policy, horizon, d, seed).map(|d| d.record),
                None => run_episode(&env, policy, horizon, seed),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        env: env_cfg.name().to_string(),
        policy: policy.label(),
        horizon,
        arms: env.arms(),
        optimal: env.optimal_arms(),
        theory: theory_for(&env, horizon, policy),
        records,
    })
}

fn summarize(config: &ExperimentConfig, results: &[CellResult]) -> Summary {
    let cells = results
        .iter()
        .map(|c| {
            let regrets: Vec<f64> = c.records.iter().map(|r| r.pseudo_regret).collect();
            let (mean, stderr) = mean_stderr(&regrets);
            let n = c.records.len() as f64;
            let survived = c
                .records
                .iter()
                .filter(|r| r.final_active.iter().any(|a| c.optimal.contains(a)))
                .count() as f64;
            let gap = c
                .records
                .iter()
                .map(|r| (r.realized_reward_sum - r.mean_track_sum).abs())
                .sum::<f64>()
                / n;
            CellSummary {
                env: c.env.clone(),
                policy: c.policy.clone(),
                horizon: c.horizon,
                arms: c.arms,
                runs: c.records.len(),
                mean,
                stderr,
                theory_upper: c.theory.upper,
                theory_lower: c.theory.lower,
                theory_bound: c.theory.bound.clone(),
                lambda: c.theory.lambda,
                in_contract: c.theory.in_contract,
                best_arm_survival: survived / n,
                mean_approx_gap: gap,
            }
        })
        .collect();
    Summary {
        name: config.name.clone(),
        base_seed: config.base_seed,
        bound_constant: config.bound_constant,
        cells,
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Output(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn runs_csv(results: &[CellResult]) -> Result<String> {
    let max_k = results.iter().map(|c| c.arms).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "seed",
        "T",
        "K",
        "policy",
        "env",
        "pseudo_regret",
        "realized_reward_sum",
        "mean_track_sum",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=max_k).map(|k| format!("N_{k}")));
    w.write_record(&header).map_err(csv_error)?;
    for c in results {
        for r in &c.records {
            let mut row = vec![
                r.seed.to_string(),
                r.horizon.to_string(),
                c.arms.to_string(),
                c.policy.clone(),
                c.env.clone(),
                r.pseudo_regret.to_string(),
                r.realized_reward_sum.to_string(),
                r.mean_track_sum.to_string(),
            ];
            row.extend(r.pull_counts.iter().map(u64::to_string));
            row.resize(header.len(), String::new());
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    finish(w)
}

fn curve_csv(summary: &Summary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["env", "policy", "T", "mean", "stderr", "theory_upper", "theory_lower"])
        .map_err(csv_error)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for c in &summary.cells {
        w.write_record([
            c.env.clone(),
            c.policy.clone(),
            c.horizon.to_string(),
            c.mean.to_string(),
            c.stderr.to_string(),
            opt(c.theory_upper),
            opt(c.theory_lower),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

fn epochs_csv(results: &[CellResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "env", "policy", "T", "seed", "s", "theta", "tau", "b", "T_s", "branch", "omega", "means",
        "eliminated",
    ])
    .map_err(csv_error)?;
    let join = |items: Vec<String>| items.join(";");
    for c in results {
        for r in &c.records {
            for e in &r.epoch_log {
                w.write_record([
                    c.env.clone(),
                    c.policy.clone(),
                    c.horizon.to_string(),
                    r.seed.to_string(),
                    e.s.to_string(),
                    e.theta.to_string(),
                    e.tau.to_string(),
                    e.b.to_string(),
                    e.pulls.to_string(),
                    e.branch.name().to_string(),
                    e.omega.to_string(),
                    join(e.means.iter().map(|m| m.map_or(String::new(), |x| x.to_string())).collect()),
                    join(e.eliminated.iter().map(usize::to_string).collect()),
                ])
                .map_err(csv_error)?;
            }
        }
    }
    finish(w)
}

// Writes every file or none: anything already written is removed if a later write fails.
fn write_all(dir: &Path, contents: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    let io_error = |path: &Path, e: std::io::Error| Error::Output(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for (name, body) in contents {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(io_error(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

/// Least-squares slope of log(mean regret) against log(T).
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "slope needs at least 3 horizons, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(t, r)| !(t > 0.0 && r > 0.0)) {
        return Err(Error::Config("slope needs positive horizons and regrets".into()));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(t, _)| (lo.min(t), hi.max(t)));
    if hi / lo < 10.0 {
        return Err(Error::Config(format!(
            "horizons span {lo}..{hi}, less than one decade"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope per (env, policy) group of a summary, in first-appearance order.
pub fn summary_slopes(summary: &Summary) -> Vec<(String, String, Result<f64>)> {
    let mut groups: Vec<(String, String, Vec<(f64, f64)>)> = Vec::new();
    for c in &summary.cells {
        match groups
            .iter_mut()
            .find(|g| g.0 == c.env && g.1 == c.policy)
        {
            Some(g) => g.2.push((c.horizon as f64, c.mean)),
            None => groups.push((c.env.clone(), c.policy.clone(), vec![(c.horizon as f64, c.mean)])),
        }
    }
    groups
        .into_iter()
        .map(|(e, p, pts)| (e, p, loglog_slope(&pts)))
        .collect()
}

/// Input of the standalone bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsRequest {
    pub gaps: Vec<f64>,
    pub horizon: u64,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Defaults to the regime-specific floor.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub mixing_constant: f64,
    #[serde(default = "unit")]
    pub bound_constant: f64,
}

fn outcome(r: Result<f64>) -> serde_json::Value {
    match r {
        Ok(v) => serde_json::json!({ "value": v }),
        Err(e) => serde_json::json!({ "value": null, "error": e.to_string() }),
    }
}

/// Evaluates every bound that applies to the request. Inapplicable ones carry an error string.
pub fn evaluate_bounds(req: &BoundsRequest) -> serde_json::Value {
    let t = req.horizon;
    let k = req.gaps.len();
    let fast_floor = fast_lambda_floor(t.max(1));
    let fast_lambda = req.lambda.unwrap_or(fast_floor);
    let fast_input = BoundInput {
        gaps: req.gaps.clone(),
        horizon: t,
        alpha: req.alpha.unwrap_or(0.0),
        lambda: fast_lambda,
        mixing_constant: req.mixing_constant,
    };
    let mut out = serde_json::json!({
        "fast_mix_dependent": outcome(fast_mix_dependent_bound(&fast_input)),
        "fast_mix_independent": outcome(fast_mix_independent_bound(k, t, req.mixing_constant)),
    });
    out["fast_mix_dependent"]["lambda"] = fast_lambda.into();
    out["fast_mix_dependent"]["lambda_floor"] = fast_floor.into();

    if let Some(alpha) = req.alpha {
        let slow_floor = slow_lambda_floor(t.max(1));
        let slow_lambda = req.lambda.unwrap_or(slow_floor);
        let slow_input = BoundInput {
            lambda: slow_lambda,
            ..fast_input
        };
        out["slow_mix_dependent"] = outcome(slow_mix_dependent_bound(&slow_input));
        out["slow_mix_dependent"]["lambda"] = slow_lambda.into();
        out["slow_mix_dependent"]["lambda_floor"] = slow_floor.into();
        out["slow_mix_dependent"]["lambda_floor_met"] = (slow_lambda >= slow_floor).into();
        out["slow_mix_independent"] =
            outcome(slow_mix_independent_bound(k, t, alpha, req.bound_constant));
        out["slow_mix_independent"]["bound_constant"] = req.bound_constant.into();
        out["minimax_lower"] = outcome(minimax_lower_bound(t, alpha));
    }
    out
}
