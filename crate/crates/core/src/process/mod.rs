//! Stationary reward processes with known mixing rates.
//!
//! Each [`ProcessSpec`] pairs a generative model with its stationary mean, its reward support
//! and an analytic upper bound on its mixing coefficients ([`RateDescriptor`]). Paths are a
//! pure function of `(spec, horizon, seed)`.

mod markov;
mod rate;

pub use rate::RateDescriptor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::BanditEnv;
use crate::error::{domain, Error, Result};

/// Steps discarded before an AR(1) path is emitted.
pub const AR1_BURN_IN: usize = 1024;

/// Mean shift of the best arm in the frozen Rademacher construction.
pub const FROZEN_EPSILON: f64 = 0.125;

/// Closed reward interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardRange {
    pub lo: f64,
    pub hi: f64,
}

impl RewardRange {
    pub const UNIT: RewardRange = RewardRange { lo: 0.0, hi: 1.0 };
    pub const SYMMETRIC: RewardRange = RewardRange { lo: -1.0, hi: 1.0 };

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn hull(&self, other: &RewardRange) -> RewardRange {
        RewardRange {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

/// Kind-specific parameters. Serialized as `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProcessParams {
    IidBernoulli {
        p: f64,
    },
    Ar1 {
        rho: f64,
    },
    MovingAverage {
        theta: Vec<f64>,
        mu: f64,
    },
    MarkovChain {
        transition: Vec<Vec<f64>>,
        state_values: Vec<f64>,
    },
    FrozenRademacher {
        m0: f64,
        p: f64,
        alpha: f64,
    },
}

impl ProcessParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProcessParams::IidBernoulli { .. } => "iid_bernoulli",
            ProcessParams::Ar1 { .. } => "ar1",
            ProcessParams::MovingAverage { .. } => "moving_average",
            ProcessParams::MarkovChain { .. } => "markov_chain",
            ProcessParams::FrozenRademacher { .. } => "frozen_rademacher",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sampler {
    Bernoulli,
    Ar1,
    /// Raw MA values are mapped through `(raw - offset) / width`.
    MovingAverage { offset: f64, width: f64 },
    MarkovChain { stationary: Vec<f64> },
    Frozen,
}

/// A stationary reward process together with its mean, support and mixing-rate bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessSpecWire", into = "ProcessSpecWire")]
pub struct ProcessSpec {
    params: ProcessParams,
    mean: f64,
    range: RewardRange,
    rate: RateDescriptor,
    sampler: Sampler,
}

#[derive(Serialize, Deserialize)]
struct ProcessSpecWire {
    #[serde(flatten)]
    params: ProcessParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<RateDescriptor>,
}

impl TryFrom<ProcessSpecWire> for ProcessSpec {
    type Error = Error;

    fn try_from(wire: ProcessSpecWire) -> Result<Self> {
        let spec = ProcessSpec::from_params(wire.params)?;
        if let Some(rate) = wire.rate {
            if rate != spec.rate {
                return Err(Error::Config(format!(
                    "declared rate {rate:?} differs from the analytic rate {:?} of this {} process",
                    spec.rate,
                    spec.params.kind_name()
                )));
            }
        }
        Ok(spec)
    }
}

impl From<ProcessSpec> for ProcessSpecWire {
    fn from(spec: ProcessSpec) -> Self {
        ProcessSpecWire {
            params: spec.params,
            rate: Some(spec.rate),
        }
    }
}

/// Emitted reward sequence of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl ProcessSpec {
    /// Rebuilds a spec from its parameters, re-deriving mean, range and rate.
    pub fn from_params(params: ProcessParams) -> Result<Self> {
        match params {
            ProcessParams::IidBernoulli { p } => iid_bernoulli(p),
            ProcessParams::Ar1 { rho } => ar1_process(rho),
            ProcessParams::MovingAverage { theta, mu } => ma_process(&theta, mu),
            ProcessParams::MarkovChain {
                transition,
                state_values,
            } => markov_chain_process(transition, state_values),
            ProcessParams::FrozenRademacher { m0, p, alpha } => frozen_rademacher(m0, p, alpha),
        }
    }

    pub fn params(&self) -> &ProcessParams {
        &self.params
    }

    pub fn kind(&self) -> &'static str {
        self.params.kind_name()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn range(&self) -> RewardRange {
        self.range
    }

    pub fn rate(&self) -> RateDescriptor {
        self.rate
    }

    /// E[X_t | history up to t − lag], for processes where the value at t − lag is a
    /// sufficient statistic. `None` for models whose state is not visible in the path.
    pub fn conditional_mean(&self, value_at_lag: f64, lag: u64) -> Option<f64> {
        match (&self.params, &self.sampler) {
            (_, Sampler::Bernoulli) => Some(self.mean),
            (ProcessParams::Ar1 { rho }, Sampler::Ar1) => {
                Some(self.mean + rho.powf(lag as f64) * (value_at_lag - self.mean))
            }
            (_, Sampler::Frozen) => Some(value_at_lag),
            _ => None,
        }
    }
}

/// i.i.d. Bernoulli(p) rewards; Φ ≡ 0.
pub fn iid_bernoulli(p: f64) -> Result<ProcessSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", format!("{p} not in [0, 1]")));
    }
    Ok(ProcessSpec {
        params: ProcessParams::IidBernoulli { p },
        mean: p,
        range: RewardRange::UNIT,
        rate: RateDescriptor::Zero,
        sampler: Sampler::Bernoulli,
    })
}

/// AR(1): X_i = ρ·X_{i−1} + ξ_i with ξ_i ~ Uniform[0, 1 − ρ], stationary on [0, 1] with mean 1/2.
pub fn ar1_process(rho: f64) -> Result<ProcessSpec> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain("rho", format!("{rho} not in (0, 1)")));
    }
    Ok(ProcessSpec {
        params: ProcessParams::Ar1 { rho },
        mean: 0.5,
        range: RewardRange::UNIT,
        rate: RateDescriptor::exponential(rho)?,
        sampler: Sampler::Ar1,
    })
}

/// MA(q): W_i = μ + Σ_j θ_j ψ_{i−j} with ψ uniform on {−1/2, +1/2}.
///
/// When the support μ ± Σ|θ_j|/2 leaves [0, 1] the output is mapped affinely onto [0, 1].
/// The rate uses the coupling bound Φ(k) ≤ Σ_{j≥k} |θ_j| (in output units), enveloped by
/// a geometric descriptor with cutoff at the last nonzero lag.
pub fn ma_process(theta: &[f64], mu: f64) -> Result<ProcessSpec> {
    if theta.is_empty() {
        return Err(domain("theta", "must contain at least one coefficient"));
    }
    if theta.iter().any(|t| !t.is_finite()) || !mu.is_finite() {
        return Err(domain("theta", "coefficients and mu must be finite"));
    }
    let total: f64 = theta.iter().map(|t| t.abs()).sum();
    if total == 0.0 {
        return Err(domain("theta", "at least one coefficient must be nonzero"));
    }

    let raw_lo = mu - total / 2.0;
    let raw_hi = mu + total / 2.0;
    let (offset, width) = if raw_lo >= 0.0 && raw_hi <= 1.0 {
        (0.0, 1.0)
    } else {
        (raw_lo, raw_hi - raw_lo)
    };
    let mean = (mu - offset) / width;

    // tail[k] = Σ_{j ≥ k} |θ_j| / width for k = 1..q
    let q = theta.len() - 1;
    let mut tails = vec![0.0; q + 2];
    for k in (1..=q).rev() {
        tails[k] = tails[k + 1] + theta[k].abs() / width;
    }
    let last_lag = (1..=q).rev().find(|&k| theta[k] != 0.0);
    let rate = match last_lag {
        None => RateDescriptor::Zero,
        Some(last) => {
            let head = tails[1];
            let scale = (2..=last)
                .filter(|&k| tails[k] > 0.0)
                .map(|k| (head / tails[k]).ln() / (k - 1) as f64)
                .fold(f64::INFINITY, f64::min);
            let scale = if scale.is_finite() {
                scale.max(0.0)
            } else {
                std::f64::consts::LN_2
            };
            RateDescriptor::Geometric {
                c1: head * scale.exp(),
                gamma: 1.0,
                scale,
                cutoff: Some(last as u64),
            }
        }
    };

    Ok(ProcessSpec {
        params: ProcessParams::MovingAverage {
            theta: theta.to_vec(),
            mu,
        },
        mean,
        range: RewardRange::UNIT,
        rate,
        sampler: Sampler::MovingAverage { offset, width },
    })
}

/// Finite-state chain emitting `state_values[state]`, started from its stationary law.
/// Rate λ^t with λ the second-largest eigenvalue modulus of the transition matrix.
pub fn markov_chain_process(
    transition: Vec<Vec<f64>>,
    state_values: Vec<f64>,
) -> Result<ProcessSpec> {
    if state_values.len() != transition.len() {
        return Err(Error::Structural(format!(
            "{} state values for a {}-state chain",
            state_values.len(),
            transition.len()
        )));
    }
    if state_values
        .iter()
        .any(|v| !v.is_finite() || !RewardRange::UNIT.contains(*v))
    {
        return Err(domain("state_values", "every value must lie in [0, 1]"));
    }
    let analysis = markov::analyze(&transition)?;
    if analysis.slem >= 1.0 - 1e-12 {
        return Err(Error::Structural(format!(
            "second eigenvalue modulus {} does not give a contraction",
            analysis.slem
        )));
    }
    let rate = if analysis.slem < 1e-12 {
        RateDescriptor::Zero
    } else {
        RateDescriptor::exponential(analysis.slem)?
    };
    let mean = analysis
        .stationary
        .iter()
        .zip(&state_values)
        .map(|(p, v)| p * v)
        .sum();
    Ok(ProcessSpec {
        params: ProcessParams::MarkovChain {
            transition,
            state_values,
        },
        mean,
        range: RewardRange::UNIT,
        rate,
        sampler: Sampler::MarkovChain {
            stationary: analysis.stationary,
        },
    })
}

/// One arm of the frozen construction: a single m0·Rademacher(p) draw repeated forever.
/// Its mixing rate is 2·t^(−alpha).
pub fn frozen_rademacher(m0: f64, p: f64, alpha: f64) -> Result<ProcessSpec> {
    if !(m0 > 0.0 && m0 <= 1.0) {
        return Err(domain("m0", format!("{m0} not in (0, 1]")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", format!("{p} not in [0, 1]")));
    }
    if !(0.0..0.5).contains(&alpha) {
        return Err(domain("alpha", format!("{alpha} not in [0, 1/2)")));
    }
    Ok(ProcessSpec {
        params: ProcessParams::FrozenRademacher { m0, p, alpha },
        mean: m0 * (2.0 * p - 1.0),
        range: RewardRange::SYMMETRIC,
        rate: RateDescriptor::polynomial(2.0, alpha)?,
        sampler: Sampler::Frozen,
    })
}

/// Bandit from the lower-bound construction: K frozen arms scaled by m0 = T^(−alpha), the
/// (0-based) `best_arm` drawing Rademacher(1/2 + 1/8) and the rest Rademacher(1/2).
pub fn frozen_rademacher_env(
    horizon: u64,
    arms: usize,
    alpha: f64,
    best_arm: Option<usize>,
) -> Result<BanditEnv> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(domain("alpha", format!("{alpha} not in [0, 1/2)")));
    }
    if arms < 2 {
        return Err(domain("arms", format!("{arms} < 2")));
    }
    if horizon < arms as u64 {
        return Err(domain("horizon", format!("T = {horizon} < K = {arms}")));
    }
    if let Some(b) = best_arm {
        if b >= arms {
            return Err(domain("best_arm", format!("{b} not an arm index below {arms}")));
        }
    }
    let m0 = (horizon as f64).powf(-alpha);
    let specs = (0..arms)
        .map(|a| {
            let p = if Some(a) == best_arm {
                0.5 + FROZEN_EPSILON
            } else {
                0.5
            };
            frozen_rademacher(m0, p, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    BanditEnv::new(specs)
}

/// Samples a path of length `horizon`. Deterministic in `(spec, horizon, seed)`.
pub fn generate_path(spec: &ProcessSpec, horizon: usize, seed: u64) -> Result<SamplePath> {
    if horizon == 0 {
        return Err(domain("horizon", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(horizon);
    match (&spec.params, &spec.sampler) {
        (ProcessParams::IidBernoulli { p }, _) => {
            values.extend((0..horizon).map(|_| if rng.gen::<f64>() < *p { 1.0 } else { 0.0 }));
        }
        (ProcessParams::Ar1 { rho }, _) => {
            let noise = 1.0 - rho;
            let mut x = 0.5;
            for _ in 0..AR1_BURN_IN {
                x = rho * x + noise * rng.gen::<f64>();
            }
            for _ in 0..horizon {
                x = (rho * x + noise * rng.gen::<f64>()).min(1.0);
                values.push(x);
            }
        }
        (ProcessParams::MovingAverage { theta, mu }, Sampler::MovingAverage { offset, width }) => {
            let q = theta.len() - 1;
            // ring[i] holds ψ for the i-th most recent step (ring[0] = current)
            let mut ring: std::collections::VecDeque<f64> =
                (0..q).map(|_| rademacher_half(&mut rng)).collect();
            for _ in 0..horizon {
                ring.push_front(rademacher_half(&mut rng));
                ring.truncate(q + 1);
                let raw: f64 = mu + theta.iter().zip(&ring).map(|(t, psi)| t * psi).sum::<f64>();
                values.push(((raw - offset) / width).clamp(0.0, 1.0));
            }
        }
        (
            ProcessParams::MarkovChain {
                transition,
                state_values,
            },
            Sampler::MarkovChain { stationary },
        ) => {
            let mut state = draw_index(stationary, rng.gen());
            for _ in 0..horizon {
                values.push(state_values[state]);
                state = draw_index(&transition[state], rng.gen());
            }
        }
        (ProcessParams::FrozenRademacher { m0, p, .. }, _) => {
            let x = if rng.gen::<f64>() < *p { *m0 } else { -*m0 };
            values.resize(horizon, x);
        }
        _ => unreachable!("sampler always matches params"),
    }
    Ok(SamplePath { values, seed })
}

fn rademacher_half(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen::<bool>() {
        0.5
    } else {
        -0.5
    }
}

fn draw_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative sum: take the last state with positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn lag_autocovariance(v: &[f64], lag: usize) -> f64 {
        let m = mean(v);
        let n = v.len() - lag;
        (0..n).map(|i| (v[i] - m) * (v[i + lag] - m)).sum::<f64>() / n as f64
    }

    #[test]
    fn ar1_rate_and_mean() {
        let spec = ar1_process(0.5).unwrap();
        assert!((spec.rate().evaluate(3.0) - 0.125).abs() < 1e-15);
        assert_eq!(spec.mean(), 0.5);
        let tiny = ar1_process(1e-9).unwrap();
        assert!((tiny.rate().evaluate(1.0) - 1e-9).abs() < 1e-20);
        assert!(ar1_process(0.0).is_err());
        assert!(ar1_process(1.0).is_err());
    }

    #[test]
    fn ar1_short_path_in_range_and_long_run_mean() {
        let spec = ar1_process(0.5).unwrap();
        let short = generate_path(&spec, 4, 7).unwrap();
        assert_eq!(short.values.len(), 4);
        assert!(short.values.iter().all(|x| (0.0..=1.0).contains(x)));

        // long-run variance of the mean of AR(1) with Uniform[0, 1-ρ] noise is 1/12 per step
        let n = 1_000_000;
        let long = generate_path(&spec, n, 7).unwrap();
        assert!(long.values.iter().all(|x| (0.0..=1.0).contains(x)));
        let sigma = (1.0 / 12.0 / n as f64).sqrt();
        assert!((mean(&long.values) - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let spec = ar1_process(0.9).unwrap();
        let path = generate_path(&spec, 1_000_000, 11).unwrap();
        let rho_hat = lag_autocovariance(&path.values, 1) / lag_autocovariance(&path.values, 0);
        assert!((rho_hat - 0.9).abs() < 0.02, "rho_hat = {rho_hat}");
    }

    #[test]
    fn iid_bernoulli_mean() {
        let spec = iid_bernoulli(0.5).unwrap();
        let path = generate_path(&spec, 1_000_000, 3).unwrap();
        assert!((mean(&path.values) - 0.5).abs() < 0.005);
        assert!(iid_bernoulli(1.5).is_err());
    }

    #[test]
    fn ma_order_zero_is_independent() {
        let spec = ma_process(&[1.0], 0.5).unwrap();
        assert_eq!(spec.rate(), RateDescriptor::Zero);
        assert_eq!(spec.rate().evaluate(1.0), 0.0);
        assert_eq!(spec.mean(), 0.5);
        let path = generate_path(&spec, 1000, 1).unwrap();
        assert!(path.values.iter().all(|x| *x == 0.0 || *x == 1.0));
    }

    #[test]
    fn ma_lag_one_dependence_brute_force() {
        // W_i = 0.5 + 0.5 ψ_i + 0.5 ψ_{i-1}; enumerate the two atoms of ψ_i (the only
        // F_i-measurable noise entering W_{i+1}) to get the exact conditional mean shift.
        let spec = ma_process(&[0.5, 0.5], 0.5).unwrap();
        let atoms = [-0.5, 0.5];
        let mut worst = 0.0f64;
        for psi_i in atoms {
            let cond: f64 = atoms.iter().map(|psi_next| 0.5 + 0.5 * psi_next + 0.5 * psi_i).sum::<f64>() / 2.0;
            worst = worst.max((cond - spec.mean()).abs());
        }
        assert!(worst > 0.0);
        assert!(spec.rate().evaluate(1.0) >= worst);
        assert!(spec.rate().evaluate(1.0) > 0.0);
        assert_eq!(spec.rate().evaluate(2.0), 0.0);
    }

    #[test]
    fn ma_normalizes_wide_support() {
        let spec = ma_process(&[2.0, -1.0, 0.5], 0.3).unwrap();
        let path = generate_path(&spec, 10_000, 5).unwrap();
        assert!(path.values.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!((spec.mean() - 0.5).abs() < 1e-12);
        assert!(ma_process(&[], 0.5).is_err());
        // envelope dominates the coupling tail at every lag up to q
        let tails = [3.5 / 3.5, 1.5 / 3.5, 0.5 / 3.5];
        for (k, tail) in tails.iter().enumerate().skip(1) {
            assert!(spec.rate().evaluate(k as f64) + 1e-15 >= *tail);
        }
        assert_eq!(spec.rate().evaluate(3.0), 0.0);
    }

    #[test]
    fn ma_paths_deterministic() {
        let spec = ma_process(&[0.2, 0.3, 0.1, 0.4], 0.5).unwrap();
        let a = generate_path(&spec, 500, 99).unwrap();
        let b = generate_path(&spec, 500, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn markov_examples() {
        let fast = markov_chain_process(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![0.0, 1.0]).unwrap();
        assert_eq!(fast.rate(), RateDescriptor::Zero);
        assert!((fast.mean() - 0.5).abs() < 1e-12);

        let slow = markov_chain_process(vec![vec![0.9, 0.1], vec![0.1, 0.9]], vec![0.0, 1.0]).unwrap();
        assert!((slow.rate().evaluate(1.0) - 0.8).abs() < 1e-12);
        assert!((slow.mean() - 0.5).abs() < 1e-12);

        let err = markov_chain_process(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Structural(ref m) if m.contains("reducible")));
    }

    #[test]
    fn markov_long_run_mean() {
        let spec = markov_chain_process(
            vec![vec![0.7, 0.2, 0.1], vec![0.3, 0.4, 0.3], vec![0.2, 0.2, 0.6]],
            vec![0.1, 0.5, 0.9],
        )
        .unwrap();
        let path = generate_path(&spec, 1_000_000, 21).unwrap();
        // conservative band: per-step sd ≤ 0.4, inflated by (1+λ)/(1-λ) for correlation
        let lambda = spec.rate().evaluate(1.0);
        let sd = 0.4 * ((1.0 + lambda) / (1.0 - lambda)).sqrt() / (1e6f64).sqrt();
        assert!((mean(&path.values) - spec.mean()).abs() < 4.0 * sd);
    }

    #[test]
    fn rate_soundness_surrogate() {
        // |Cov(X_0, X_t)| ≤ Φ(t) · E|X_0 − μ| ≤ Φ(t) for [0,1]-valued processes.
        let specs = [
            ar1_process(0.7).unwrap(),
            markov_chain_process(vec![vec![0.8, 0.2], vec![0.3, 0.7]], vec![0.0, 1.0]).unwrap(),
        ];
        let n = 400_000;
        for spec in specs {
            let path = generate_path(&spec, n, 17).unwrap();
            for t in [1usize, 2, 4, 8] {
                let band = 0.005;
                let cov = lag_autocovariance(&path.values, t).abs();
                assert!(cov <= spec.rate().evaluate(t as f64) + band, "{} lag {t}: {cov}", spec.kind());
            }
        }
    }

    #[test]
    fn frozen_env_means_and_constant_paths() {
        let env = frozen_rademacher_env(10_000, 3, 0.25, Some(0)).unwrap();
        assert!((env.means()[0] - 0.025).abs() < 1e-15);
        assert_eq!(env.means()[1], 0.0);
        assert_eq!(env.means()[2], 0.0);
        for seed in 0..20 {
            let path = generate_path(&env.specs()[0], 10_000, seed).unwrap();
            assert_eq!(path.values[0], path.values[9_999]);
            assert!(path.values.iter().all(|x| *x == path.values[0]));
            assert!((path.values[0].abs() - 0.1).abs() < 1e-15);
        }
        assert!(matches!(env.specs()[0].rate(), RateDescriptor::Polynomial { c0, alpha } if c0 == 2.0 && alpha == 0.25));

        let flat = frozen_rademacher_env(10_000, 3, 0.25, None).unwrap();
        assert!(flat.means().iter().all(|m| *m == 0.0));
        assert!(flat.gaps().iter().all(|g| *g == 0.0));
        assert!(frozen_rademacher_env(10_000, 3, 0.5, None).is_err());
    }

    #[test]
    fn horizon_one_paths() {
        let specs = [
            iid_bernoulli(0.3).unwrap(),
            ar1_process(0.4).unwrap(),
            ma_process(&[0.3, 0.3], 0.5).unwrap(),
            markov_chain_process(vec![vec![0.5, 0.5], vec![0.2, 0.8]], vec![0.2, 0.7]).unwrap(),
            frozen_rademacher(0.5, 0.6, 0.2).unwrap(),
        ];
        for spec in &specs {
            let p = generate_path(spec, 1, 0).unwrap();
            assert_eq!(p.values.len(), 1);
            assert!(spec.range().contains(p.values[0]));
            assert!(spec.range().contains(spec.mean()));
            assert!(generate_path(spec, 0, 0).is_err());
        }
    }

    #[test]
    fn json_round_trip_and_shape() {
        let spec = markov_chain_process(vec![vec![0.9, 0.1], vec![0.1, 0.9]], vec![0.0, 1.0]).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "markov_chain");
        assert!(v["params"]["transition"].is_array());
        assert_eq!(v["rate"]["kind"], "geometric");
        let back: ProcessSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let bare: ProcessSpec = serde_json::from_str(r#"{"kind":"ar1","params":{"rho":0.5}}"#).unwrap();
        assert_eq!(bare, ar1_process(0.5).unwrap());
        let bad = serde_json::from_str::<ProcessSpec>(
            r#"{"kind":"ar1","params":{"rho":0.5},"rate":{"kind":"zero"}}"#,
        );
        assert!(bad.is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn paths_stay_in_range_and_are_deterministic(
            rho in 0.01f64..0.99, p in 0.0f64..1.0, seed in proptest::prelude::any::<u64>(),
            theta in proptest::collection::vec(-2.0f64..2.0, 1..5), mu in -1.0f64..2.0,
        ) {
            let mut specs = vec![ar1_process(rho).unwrap(), iid_bernoulli(p).unwrap()];
            if theta.iter().any(|t| *t != 0.0) {
                specs.push(ma_process(&theta, mu).unwrap());
            }
            for spec in &specs {
                let a = generate_path(spec, 200, seed).unwrap();
                proptest::prop_assert!(a.values.iter().all(|x| spec.range().contains(*x)));
                proptest::prop_assert_eq!(&a, &generate_path(spec, 200, seed).unwrap());
            }
        }
    }
}
