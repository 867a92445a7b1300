//! Arm-selection policies.
//!
//! Every policy runs on a local clock t = 1, 2, …, horizon. The caller asks for an arm with
//! [`Policy::select`] and later reports the reward collected at that time with
//! [`Policy::observe`]. Observations may arrive late (delayed feedback); policies never look
//! at anything they were not given.

mod baselines;
mod elimination;

use serde::{Deserialize, Serialize};

pub use baselines::{Ucb1, Uniform};
pub use elimination::{
    epoch_pull_budget, last_epoch_index, Branch, EliminationPolicy, EpochRecord, EpochState,
    PullBudget, Schedule,
};

use crate::error::{domain, Result};
use crate::process::{RateDescriptor, RewardRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    CmixImprovedUcb,
    ImprovedUcb,
    Ucb1,
    Uniform,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::CmixImprovedUcb => "cmix_improved_ucb",
            PolicyKind::ImprovedUcb => "improved_ucb",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Uniform => "uniform",
        }
    }
}

/// Which value of the sparse-branch constant c3 to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum C3Variant {
    /// c3 = 12800·c0
    #[default]
    #[serde(rename = "lemma_12800")]
    Base12800,
    /// c3 = 52400·c0
    #[serde(rename = "init_52400")]
    Init52400,
}

impl C3Variant {
    pub fn multiplier(self) -> f64 {
        match self {
            C3Variant::Base12800 => 12800.0,
            C3Variant::Init52400 => 52400.0,
        }
    }
}

/// Policy description. Horizon and arm count come from the run it is used in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Mixing-rate bound the learner is told.
    #[serde(default = "zero_rate")]
    pub prior_rate: RateDescriptor,
    #[serde(default = "unit")]
    pub rate_multiplier: f64,
    #[serde(default)]
    pub c3_variant: C3Variant,
    /// Display name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn zero_rate() -> RateDescriptor {
    RateDescriptor::Zero
}

fn unit() -> f64 {
    1.0
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        PolicyConfig {
            kind,
            prior_rate: RateDescriptor::Zero,
            rate_multiplier: 1.0,
            c3_variant: C3Variant::default(),
            label: None,
        }
    }

    pub fn with_prior(mut self, rate: RateDescriptor) -> Self {
        self.prior_rate = rate;
        self
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.prior_rate.validate()?;
        if !(self.rate_multiplier.is_finite() && self.rate_multiplier >= 1.0) {
            return Err(domain(
                "rate_multiplier",
                format!("{} must be at least 1", self.rate_multiplier),
            ));
        }
        Ok(())
    }

    /// Whether rewards in `range` fit the policy's confidence widths.
    pub fn supports_range(&self, range: RewardRange) -> bool {
        match self.kind {
            PolicyKind::Uniform => true,
            _ => range.lo >= -1.0 && range.hi <= 1.0,
        }
    }
}

/// A running policy instance.
#[derive(Debug, Clone)]
pub enum Policy {
    Elimination(EliminationPolicy),
    Ucb1(Ucb1),
    Uniform(Uniform),
}

impl Policy {
    pub fn new(config: &PolicyConfig, arms: usize, horizon: u64) -> Result<Self> {
        config.validate()?;
        if arms == 0 {
            return Err(domain("arms", "must be positive"));
        }
        if horizon <= arms as u64 {
            return Err(domain(
                "horizon",
                format!("T = {horizon} must exceed the number of arms K = {arms}"),
            ));
        }
        let prior = config.prior_rate.scaled(config.rate_multiplier);
        Ok(match config.kind {
            PolicyKind::CmixImprovedUcb => {
                let schedule = match prior.polynomial_exponent() {
                    Some(alpha) if alpha > 0.0 && alpha < 0.5 => {
                        Schedule::slow(horizon, alpha, config.c3_variant, prior)?
                    }
                    _ => Schedule::fast(horizon, &prior)?,
                };
                Policy::Elimination(EliminationPolicy::new(arms, schedule)?)
            }
            PolicyKind::ImprovedUcb => {
                Policy::Elimination(EliminationPolicy::new(arms, Schedule::fast(horizon, &prior)?)?)
            }
            PolicyKind::Ucb1 => Policy::Ucb1(Ucb1::new(arms, horizon)),
            PolicyKind::Uniform => Policy::Uniform(Uniform::new(arms, horizon)),
        })
    }

    /// Arm to pull at local time `t` (1-based).
    pub fn select(&mut self, t: u64) -> Result<usize> {
        match self {
            Policy::Elimination(p) => p.select(t),
            Policy::Ucb1(p) => p.select(t),
            Policy::Uniform(p) => p.select(t),
        }
    }

    /// Reward collected from `arm` at local time `t`.
    pub fn observe(&mut self, t: u64, arm: usize, reward: f64) -> Result<()> {
        match self {
            Policy::Elimination(p) => p.observe(t, arm, reward),
            Policy::Ucb1(p) => p.observe(t, arm, reward),
            Policy::Uniform(_) => Ok(()),
        }
    }

    /// Completed epochs, for epoch-based policies.
    pub fn epoch_log(&self) -> &[EpochRecord] {
        match self {
            Policy::Elimination(p) => p.epoch_log(),
            _ => &[],
        }
    }

    /// Arms the policy may still pull.
    pub fn active_arms(&self) -> Vec<usize> {
        match self {
            Policy::Elimination(p) => p.state().active().to_vec(),
            Policy::Ucb1(p) => (0..p.arms()).collect(),
            Policy::Uniform(p) => (0..p.arms()).collect(),
        }
    }
}
