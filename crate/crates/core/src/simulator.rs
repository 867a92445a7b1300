//! Episode runner, Monte Carlo replication and the delayed-feedback variant.
//!
//! Every arm's full reward path is drawn before the episode starts, so arms evolve whether
//! or not they are pulled and two policies run on the same seed see the same values.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::BanditEnv;
use crate::error::{domain, Error, Result};
use crate::policy::{EpochRecord, Policy, PolicyConfig};
use crate::process::generate_path;

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRecord {
    pub seed: u64,
    pub horizon: u64,
    /// N_k(T).
    pub pull_counts: Vec<u64>,
    /// Σ_k Δ_k·N_k(T).
    pub pseudo_regret: f64,
    /// Σ_t X_t^{I_t}.
    pub realized_reward_sum: f64,
    /// Σ_t μ_{I_t}.
    pub mean_track_sum: f64,
    pub epoch_log: Vec<EpochRecord>,
    /// Arms the policy could still pull at the horizon.
    pub final_active: Vec<usize>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of arm `arm`'s path in the run seeded by `run_seed`.
pub fn arm_seed(run_seed: u64, arm: usize) -> u64 {
    splitmix64(splitmix64(run_seed) ^ (arm as u64).wrapping_add(1))
}

// Seed of the burn-in arm choices in delayed mode, disjoint from every arm stream.
fn burn_in_seed(run_seed: u64) -> u64 {
    splitmix64(splitmix64(run_seed) ^ u64::MAX)
}

/// The K reward paths of the run seeded by `seed`.
pub fn generate_paths(env: &BanditEnv, horizon: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    env.specs()
        .iter()
        .enumerate()
        .map(|(k, spec)| Ok(generate_path(spec, horizon as usize, arm_seed(seed, k))?.values))
        .collect()
}

fn check_compatible(env: &BanditEnv, policy: &PolicyConfig, horizon: u64) -> Result<()> {
    if !policy.supports_range(env.range()) {
        return Err(Error::Config(format!(
            "policy {} cannot handle rewards in [{}, {}]",
            policy.label(),
            env.range().lo,
            env.range().hi
        )));
    }
    if horizon <= env.arms() as u64 {
        return Err(Error::Config(format!(
            "horizon T = {horizon} must exceed K = {}",
            env.arms()
        )));
    }
    Ok(())
}

pub fn run_episode(
    env: &BanditEnv,
    policy: &PolicyConfig,
    horizon: u64,
    seed: u64,
) -> Result<RegretRecord> {
    check_compatible(env, policy, horizon)?;
    let paths = generate_paths(env, horizon, seed)?;
    Ok(run_on_paths(env, policy, horizon, 0, &paths, seed)?.0)
}

/// Feedback delay τ: the decision at time t may use rewards observed up to t − τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    pub tau: u64,
    #[serde(default)]
    pub burn_in_policy: BurnIn,
}

/// How arms are chosen during the first τ rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnIn {
    #[default]
    Random,
}

/// A delayed episode with the realized-versus-mean diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayedRecord {
    pub record: RegretRecord,
    /// |Σ X_t^{I_t} − Σ μ_{I_t}|.
    pub approx_gap: f64,
    /// Σ X_t^{I_t} − Σ μ_{I_t}.
    pub signed_gap: f64,
    /// |Σ_t (E[X_t^{I_t} | F_{t−τ}] − μ_{I_t})|, when every arm's conditional mean given its
    /// value τ steps earlier is available in closed form. Rounds with t ≤ τ contribute 0.
    pub conditional_gap: Option<f64>,
}

pub fn delayed_run(
    env: &BanditEnv,
    policy: &PolicyConfig,
    horizon: u64,
    delay: DelayConfig,
    seed: u64,
) -> Result<DelayedRecord> {
    check_compatible(env, policy, horizon)?;
    if delay.tau >= horizon {
        return Err(domain("tau", format!("{} must be below the horizon {horizon}", delay.tau)));
    }
    let paths = generate_paths(env, horizon, seed)?;
    let (record, trace) = run_on_paths(env, policy, horizon, delay.tau, &paths, seed)?;
    let signed_gap = record.realized_reward_sum - record.mean_track_sum;
    let conditional_gap = conditional_gap(env, &paths, &trace, delay.tau);
    Ok(DelayedRecord {
        record,
        approx_gap: signed_gap.abs(),
        signed_gap,
        conditional_gap,
    })
}

fn conditional_gap(env: &BanditEnv, paths: &[Vec<f64>], arms: &[usize], tau: u64) -> Option<f64> {
    let tau_steps = tau as usize;
    let mut total = 0.0;
    for (i, &k) in arms.iter().enumerate() {
        if i < tau_steps {
            continue;
        }
        let spec = &env.specs()[k];
        let earlier = if tau == 0 {
            paths[k][i]
        } else {
            paths[k][i - tau_steps]
        };
        let cond = if tau == 0 {
            earlier
        } else {
            spec.conditional_mean(earlier, tau)?
        };
        total += cond - spec.mean();
    }
    Some(total.abs())
}

// Observations waiting to be revealed: (local pull time, arm, reward).
struct DelayedFeedback {
    tau: u64,
    pending: VecDeque<(u64, usize, f64)>,
}

impl DelayedFeedback {
    fn push(&mut self, t: u64, arm: usize, reward: f64) {
        self.pending.push_back((t, arm, reward));
    }

    // Hands over every observation whose pull time is at most `now − τ`.
    fn release(&mut self, now: u64, policy: &mut Policy) -> Result<()> {
        while let Some(&(t, arm, reward)) = self.pending.front() {
            if t + self.tau > now {
                break;
            }
            self.pending.pop_front();
            policy.observe(t, arm, reward)?;
        }
        Ok(())
    }
}

/// Runs `policy` on fixed paths. The first `tau` rounds pick arms uniformly at random; the
/// policy then runs on the local clock u = t − τ with horizon T − τ and learns the reward of
/// its pull at u only once u + τ decisions have passed. Returns the chosen arm per round.
pub(crate) fn run_on_paths(
    env: &BanditEnv,
    policy_config: &PolicyConfig,
    horizon: u64,
    tau: u64,
    paths: &[Vec<f64>],
    seed: u64,
) -> Result<(RegretRecord, Vec<usize>)> {
    let k = env.arms();
    if paths.len() != k || paths.iter().any(|p| (p.len() as u64) < horizon) {
        return Err(Error::ContractViolation("paths do not cover the horizon".into()));
    }
    let local_horizon = horizon - tau;
    let mut policy = Policy::new(policy_config, k, local_horizon)
        .map_err(|e| Error::Config(format!("policy {}: {e}", policy_config.label())))?;
    let means = env.means();

    let mut counts = vec![0u64; k];
    let mut realized = 0.0;
    let mut mean_track = 0.0;
    let mut arms = Vec::with_capacity(horizon as usize);
    let mut pull = |t: u64, arm: usize| -> f64 {
        let x = paths[arm][(t - 1) as usize];
        counts[arm] += 1;
        realized += x;
        mean_track += means[arm];
        arms.push(arm);
        x
    };

    if tau > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(burn_in_seed(seed));
        for t in 1..=tau {
            pull(t, rng.gen_range(0..k));
        }
    }

    let mut feedback = DelayedFeedback {
        tau,
        pending: VecDeque::new(),
    };
    for u in 1..=local_horizon {
        feedback.release(u, &mut policy)?;
        let arm = policy.select(u)?;
        if arm >= k {
            return Err(Error::ContractViolation(format!("policy chose arm {arm} of {k}")));
        }
        let x = pull(tau + u, arm);
        feedback.push(u, arm, x);
    }
    feedback.release(local_horizon + tau, &mut policy)?;

    let pseudo_regret = counts
        .iter()
        .zip(env.gaps())
        .map(|(&n, &gap)| n as f64 * gap)
        .sum();
    let record = RegretRecord {
        seed,
        horizon,
        pull_counts: counts,
        pseudo_regret,
        realized_reward_sum: realized,
        mean_track_sum: mean_track,
        epoch_log: policy.epoch_log().to_vec(),
        final_active: policy.active_arms(),
    };
    Ok((record, arms))
}

/// Sample mean and standard error (sample standard deviation / √n).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub mean: f64,
    pub stderr: f64,
    pub records: Vec<RegretRecord>,
}

/// Average pseudo-regret over runs seeded `base_seed + r`, r = 0..runs. Runs execute on the
/// current rayon pool; the result does not depend on scheduling.
pub fn monte_carlo_pseudo_regret(
    env: &BanditEnv,
    policy: &PolicyConfig,
    horizon: u64,
    runs: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if runs < 2 {
        return Err(domain("runs", format!("{runs} < 2")));
    }
    check_compatible(env, policy, horizon)?;
    let records = (0..runs)
        .into_par_iter()
        .map(|r| run_episode(env, policy, horizon, base_seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let regrets: Vec<f64> = records.iter().map(|r| r.pseudo_regret).collect();
    let (mean, stderr) = mean_stderr(&regrets);
    Ok(MonteCarloSummary {
        mean,
        stderr,
        records,
    })
}
