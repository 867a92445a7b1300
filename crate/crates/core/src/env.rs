use crate::error::{Error, Result};
use crate::process::{ProcessSpec, RewardRange};

/// K arms, each a stationary process. Arms are independent of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    specs: Vec<ProcessSpec>,
    means: Vec<f64>,
    best_mean: f64,
    gaps: Vec<f64>,
    range: RewardRange,
}

impl BanditEnv {
    pub fn new(specs: Vec<ProcessSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Config("environment needs at least one arm".into()));
        }
        let means: Vec<f64> = specs.iter().map(ProcessSpec::mean).collect();
        let best_mean = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps = means.iter().map(|m| best_mean - m).collect();
        let range = specs
            .iter()
            .skip(1)
            .fold(specs[0].range(), |acc, s| acc.hull(&s.range()));
        Ok(BanditEnv {
            specs,
            means,
            best_mean,
            gaps,
            range,
        })
    }

    pub fn arms(&self) -> usize {
        self.specs.len()
    }

    pub fn specs(&self) -> &[ProcessSpec] {
        &self.specs
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_mean(&self) -> f64 {
        self.best_mean
    }

    /// Δ_k = μ★ − μ_k.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Arms attaining μ★.
    pub fn optimal_arms(&self) -> Vec<usize> {
        (0..self.arms()).filter(|&k| self.gaps[k] == 0.0).collect()
    }

    pub fn range(&self) -> RewardRange {
        self.range
    }
}
