use serde::Serialize;

use super::C3Variant;
use crate::bounds::SlowConstants;
use crate::concentration::{epoch_log, fast_mixing_constant, omega, HOEFFDING_A};
use crate::error::{domain, Error, Result};
use crate::process::RateDescriptor;

/// Which pull-count formula an epoch used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// T_{s,1} = ⌈32·log(A·T·θ²)/θ²⌉
    Dense,
    /// T_{s,2} = ⌈(1/b)·(c3·log(A·T·θ²)/θ²)^{1/(2α)}⌉
    Sparse,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Dense => "dense",
            Branch::Sparse => "sparse",
        }
    }
}

/// Per-arm pull count T_s of an epoch.
///
/// `pulls` is a whole number stored as `f64`: in the sparse branch it routinely exceeds
/// `u64::MAX`, and such epochs simply run until the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullBudget {
    pub pulls: f64,
    pub branch: Branch,
    /// t_s, when the two-branch rule was consulted.
    pub sparse_threshold: Option<f64>,
}

impl PullBudget {
    /// T_s saturated to `u64`.
    pub fn count(&self) -> u64 {
        if self.pulls >= u64::MAX as f64 {
            u64::MAX
        } else {
            self.pulls as u64
        }
    }
}

/// T_s for epoch width θ_s with b_s active arms.
///
/// With `alpha` in (0, 1/2) the two-branch rule applies: dense when b_s ≥ t_s, where
/// t_s = (32·c1⁻¹·θ⁻²·log(A·T·θ²))^{(1−2α)/(2α)}, sparse otherwise. Any other `alpha`
/// (including `None`) gives the dense count unconditionally.
pub fn epoch_pull_budget(
    theta_s: f64,
    b_s: usize,
    horizon: u64,
    alpha: Option<f64>,
    c3: C3Variant,
) -> Result<PullBudget> {
    if b_s == 0 {
        return Err(domain("b_s", "must be at least 1"));
    }
    let log_term = epoch_log(theta_s, horizon)?;
    let inv_theta_sq = 1.0 / (theta_s * theta_s);
    let dense = (32.0 * log_term * inv_theta_sq).ceil();

    let alpha = match alpha {
        Some(a) if a > 0.0 && a < 0.5 => a,
        _ => {
            return Ok(PullBudget {
                pulls: dense,
                branch: Branch::Dense,
                sparse_threshold: None,
            })
        }
    };
    let constants = SlowConstants::new(alpha)?;
    let c3 = c3.multiplier() * constants.c0;
    // compare in log space: t_s overflows f64 for small α
    let log_threshold = (1.0 - 2.0 * alpha) / (2.0 * alpha)
        * ((32.0 * log_term * inv_theta_sq).ln() - constants.ln_c1);
    let threshold = log_threshold.exp();
    if (b_s as f64).ln() >= log_threshold {
        return Ok(PullBudget {
            pulls: dense,
            branch: Branch::Dense,
            sparse_threshold: Some(threshold),
        });
    }
    let log_pulls = (c3 * log_term * inv_theta_sq).ln() / (2.0 * alpha) - (b_s as f64).ln();
    Ok(PullBudget {
        pulls: log_pulls.exp().ceil().max(1.0),
        branch: Branch::Sparse,
        sparse_threshold: Some(threshold),
    })
}

/// s_end = ⌊½·log₂(A·T/32)⌋, the largest epoch index reachable before the horizon.
///
/// The logarithm is base 2: θ_{s_end}⁻² ≥ A·T/128 then makes T_{s_end,1} exceed T.
pub fn last_epoch_index(horizon: u64) -> u32 {
    (0.5 * (HOEFFDING_A * horizon as f64 / 32.0).log2())
        .floor()
        .max(0.0) as u32
}

/// How epoch budgets and confidence radii are computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    horizon: u64,
    route: Route,
}

#[derive(Debug, Clone, PartialEq)]
enum Route {
    /// Dense budgets, Ω = (1+M)·sqrt(2·log(A·T·θ²)/T_s).
    Fast { mixing_constant: f64 },
    /// Two-branch budgets, Ω from the dependence sum at gap b_s.
    Slow {
        alpha: f64,
        c3: C3Variant,
        rate: RateDescriptor,
    },
}

impl Schedule {
    /// Fast route with M = fast-mixing constant of `rate` truncated at the horizon.
    pub fn fast(horizon: u64, rate: &RateDescriptor) -> Result<Self> {
        let m = fast_mixing_constant(rate, Some(horizon.max(1)))?.value;
        Ok(Self::fast_with_constant(horizon, m))
    }

    pub fn fast_with_constant(horizon: u64, mixing_constant: f64) -> Self {
        Schedule {
            horizon,
            route: Route::Fast { mixing_constant },
        }
    }

    /// Two-branch route; `rate` is the (already multiplied) rate used inside Ω.
    pub fn slow(horizon: u64, alpha: f64, c3: C3Variant, rate: RateDescriptor) -> Result<Self> {
        SlowConstants::new(alpha)?;
        rate.validate()?;
        Ok(Schedule {
            horizon,
            route: Route::Slow { alpha, c3, rate },
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// M on the fast route.
    pub fn mixing_constant(&self) -> Option<f64> {
        match self.route {
            Route::Fast { mixing_constant } => Some(mixing_constant),
            Route::Slow { .. } => None,
        }
    }

    pub fn budget(&self, theta_s: f64, b_s: usize) -> Result<PullBudget> {
        match self.route {
            Route::Fast { .. } => {
                epoch_pull_budget(theta_s, b_s, self.horizon, None, C3Variant::default())
            }
            Route::Slow { alpha, c3, .. } => {
                epoch_pull_budget(theta_s, b_s, self.horizon, Some(alpha), c3)
            }
        }
    }

    /// Ω(θ_s, b_s) for an epoch of `pulls` samples per arm.
    pub fn omega(&self, theta_s: f64, b_s: usize, pulls: f64) -> Result<f64> {
        match self.route {
            Route::Fast { mixing_constant } => {
                if !(pulls >= 1.0) {
                    return Err(domain("T_s", format!("{pulls} must be at least 1")));
                }
                let log_term = epoch_log(theta_s, self.horizon)?;
                Ok((1.0 + mixing_constant) * (2.0 * log_term / pulls).sqrt())
            }
            Route::Slow { rate, .. } => omega(theta_s, b_s, pulls, self.horizon, &rate, 1.0),
        }
    }
}

/// State of one epoch: its active arms, schedule position and per-arm sample sums.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState {
    s: u32,
    theta: f64,
    tau: u64,
    active: Vec<usize>,
    budget: PullBudget,
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl EpochState {
    /// Epoch `s` starting after time `tau`, pulling `active` (ascending) `budget.pulls` times each.
    pub fn new(s: u32, tau: u64, mut active: Vec<usize>, budget: PullBudget) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        if active.is_empty() {
            return Err(Error::ContractViolation("epoch with no active arms".into()));
        }
        let b = active.len();
        Ok(EpochState {
            s,
            theta: (-(s as f64)).exp2(),
            tau,
            active,
            budget,
            sums: vec![0.0; b],
            counts: vec![0; b],
        })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// θ_s = 2^(−s).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn b(&self) -> usize {
        self.active.len()
    }

    pub fn budget(&self) -> PullBudget {
        self.budget
    }

    pub fn branch(&self) -> Branch {
        self.budget.branch
    }

    /// Arm scheduled at time t = τ_s + i + ℓ·b_s (i ∈ 1..=b_s, ℓ < T_s); `None` outside the epoch.
    pub fn scheduled_arm(&self, t: u64) -> Option<usize> {
        if t <= self.tau {
            return None;
        }
        let offset = t - self.tau - 1;
        if offset as f64 >= self.b() as f64 * self.budget.pulls {
            return None;
        }
        Some(self.active[(offset % self.b() as u64) as usize])
    }

    fn position(&self, arm: usize) -> Option<usize> {
        self.active.binary_search(&arm).ok()
    }

    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        let pos = self.position(arm).ok_or_else(|| {
            Error::ContractViolation(format!("observation for inactive arm {arm}"))
        })?;
        if self.counts[pos] as f64 >= self.budget.pulls {
            return Err(Error::ContractViolation(format!(
                "arm {arm} already has all {} samples of epoch {}",
                self.counts[pos], self.s
            )));
        }
        self.counts[pos] += 1;
        self.sums[pos] += reward;
        Ok(())
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.position(arm).map_or(0, |p| self.counts[p])
    }

    /// Epoch mean μ̂_{arm,s}, if the arm is active and has samples.
    pub fn mean(&self, arm: usize) -> Option<f64> {
        let p = self.position(arm)?;
        (self.counts[p] > 0).then(|| self.sums[p] / self.counts[p] as f64)
    }

    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(|&c| c as f64 >= self.budget.pulls)
    }

    /// Active arms that survive radius `omega`: arm i is dropped when μ̂_i + Ω ≤ max_j μ̂_j − Ω.
    /// The empirical leader (lowest index among ties) always survives.
    pub fn survivors(&self, omega: f64) -> Vec<usize> {
        let means: Vec<f64> = (0..self.b())
            .map(|p| {
                if self.counts[p] == 0 {
                    0.0
                } else {
                    self.sums[p] / self.counts[p] as f64
                }
            })
            .collect();
        let mut leader = 0;
        for p in 1..means.len() {
            if means[p] > means[leader] {
                leader = p;
            }
        }
        let best = means[leader];
        (0..self.b())
            .filter(|&p| p == leader || means[p] + omega > best - omega)
            .map(|p| self.active[p])
            .collect()
    }
}

/// One completed epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub s: u32,
    pub theta: f64,
    pub tau: u64,
    pub b: usize,
    pub pulls: u64,
    pub branch: Branch,
    pub omega: f64,
    /// μ̂ per arm (all K arms, `None` for arms not active in the epoch).
    pub means: Vec<Option<f64>>,
    pub eliminated: Vec<usize>,
}

/// Epoch-based arm elimination: C-Mix Improved UCB, and Improved UCB on the fast route.
#[derive(Debug, Clone)]
pub struct EliminationPolicy {
    arms: usize,
    schedule: Schedule,
    state: EpochState,
    log: Vec<EpochRecord>,
}

impl EliminationPolicy {
    pub fn new(arms: usize, schedule: Schedule) -> Result<Self> {
        if arms == 0 {
            return Err(domain("arms", "must be positive"));
        }
        let budget = schedule.budget(1.0, arms)?;
        let state = EpochState::new(0, 0, (0..arms).collect(), budget)?;
        Ok(EliminationPolicy {
            arms,
            schedule,
            state,
            log: Vec::new(),
        })
    }

    pub fn state(&self) -> &EpochState {
        &self.state
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn epoch_log(&self) -> &[EpochRecord] {
        &self.log
    }

    pub fn select(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(domain("t", "time starts at 1"));
        }
        if t > self.schedule.horizon() {
            return Err(Error::HorizonExhausted(t));
        }
        if self.state.is_complete() {
            self.end_epoch(t)?;
        }
        // past the epoch window while samples are still outstanding (delayed feedback):
        // keep cycling through the active set
        Ok(self
            .state
            .scheduled_arm(t)
            .unwrap_or_else(|| self.state.active[(t % self.state.b() as u64) as usize]))
    }

    pub fn observe(&mut self, t: u64, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::ContractViolation(format!("arm {arm} out of range")));
        }
        if !reward.is_finite() {
            return Err(Error::ContractViolation(format!("non-finite reward {reward}")));
        }
        match self.state.scheduled_arm(t) {
            // stale sample from an earlier epoch, or a filler pull
            None => Ok(()),
            Some(expected) if expected != arm => Err(Error::ContractViolation(format!(
                "time {t} is scheduled for arm {expected}, got an observation for arm {arm}"
            ))),
            Some(_) => self.state.observe(arm, reward),
        }
    }

    fn end_epoch(&mut self, t: u64) -> Result<()> {
        let st = &self.state;
        let omega = self.schedule.omega(st.theta, st.b(), st.budget.pulls)?;
        let survivors = st.survivors(omega);
        let eliminated: Vec<usize> = st
            .active
            .iter()
            .copied()
            .filter(|a| !survivors.contains(a))
            .collect();
        let pulls = st.budget.count();
        self.log.push(EpochRecord {
            s: st.s,
            theta: st.theta,
            tau: st.tau,
            b: st.b(),
            pulls,
            branch: st.budget.branch,
            omega,
            means: (0..self.arms).map(|a| st.mean(a)).collect(),
            eliminated,
        });

        let tau_next = (st.tau + st.b() as u64 * pulls).max(t - 1);
        let s_next = st.s + 1;
        let budget = self
            .schedule
            .budget((-(s_next as f64)).exp2(), survivors.len())?;
        self.state = EpochState::new(s_next, tau_next, survivors, budget)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(pulls: f64) -> PullBudget {
        PullBudget {
            pulls,
            branch: Branch::Dense,
            sparse_threshold: None,
        }
    }

    #[test]
    fn dense_budget_example() {
        let b = epoch_pull_budget(1.0, 3, 1000, None, C3Variant::Base12800).unwrap();
        assert_eq!(b.pulls, 282.0);
        assert_eq!(b.branch, Branch::Dense);
        // α outside (0, 1/2) routes to the dense count
        let b = epoch_pull_budget(1.0, 3, 1000, Some(0.7), C3Variant::Base12800).unwrap();
        assert_eq!(b.pulls, 282.0);
        assert!(epoch_pull_budget(1e-3, 1, 1000, None, C3Variant::Base12800).is_err());
    }

    #[test]
    fn sparse_threshold_example() {
        let b = epoch_pull_budget(1.0, 2, 1000, Some(0.25), C3Variant::Base12800).unwrap();
        assert_eq!(b.branch, Branch::Sparse);
        let t_s = b.sparse_threshold.unwrap();
        let c1 = (0.1875f64 / 80.0).powi(4);
        let oracle = 32.0 / c1 * (4.0 * 0.5f64.exp() * 1000.0).ln();
        assert!(((t_s - oracle) / oracle).abs() < 1e-9);
        assert!((t_s / 9.33e12 - 1.0).abs() < 1e-3);
        // T_{s,2} = ⌈(1/b)(c3 L)^2⌉ at α = 1/4, θ = 1
        let c3 = 12800.0 * 16.0 / 3.0;
        let l = (4.0 * 0.5f64.exp() * 1000.0).ln();
        assert!((b.pulls - ((c3 * l).powi(2) / 2.0).ceil()).abs() <= 1e-6 * b.pulls);
        let wide = epoch_pull_budget(1.0, 2, 1000, Some(0.25), C3Variant::Init52400).unwrap();
        assert!((wide.pulls / b.pulls - (52400.0f64 / 12800.0).powi(2)).abs() < 1e-6);
    }

    #[test]
    fn dense_growth_ratio_follows_closed_form() {
        let t = 1_000_000u64;
        let a = 4.0 * 0.5f64.exp();
        for s in 0..5 {
            let theta = (-(s as f64)).exp2();
            let now = epoch_pull_budget(theta, 1, t, None, C3Variant::default()).unwrap().pulls;
            let next = epoch_pull_budget(theta / 2.0, 1, t, None, C3Variant::default()).unwrap().pulls;
            let x = a * t as f64 * theta * theta;
            let closed = 4.0 * (x / 4.0).ln() / x.ln();
            assert!((next / now - closed).abs() < 4.0 / now, "s {s}");
            assert!(next / now > 3.3 && next / now < 3.7);
        }
    }

    #[test]
    fn schedule_is_cyclic() {
        let st = EpochState::new(0, 10, vec![5, 2], dense(10.0)).unwrap();
        let arms: Vec<_> = (11..=14).map(|t| st.scheduled_arm(t).unwrap()).collect();
        assert_eq!(arms, vec![2, 5, 2, 5]);
        assert_eq!(st.scheduled_arm(10), None);
        assert_eq!(st.scheduled_arm(31), None);
        let single = EpochState::new(3, 0, vec![4], dense(5.0)).unwrap();
        assert!((1..=5).all(|t| single.scheduled_arm(t) == Some(4)));
        assert_eq!(single.theta(), 0.125);
    }

    #[test]
    fn observe_and_means() {
        let mut st = EpochState::new(0, 0, vec![0, 1], dense(2.0)).unwrap();
        st.observe(0, 0.2).unwrap();
        st.observe(0, 0.4).unwrap();
        assert!((st.mean(0).unwrap() - 0.3).abs() < 1e-15);
        assert!(st.observe(0, 0.1).is_err());
        assert!(matches!(st.observe(7, 0.1), Err(Error::ContractViolation(_))));
        assert_eq!(st.mean(1), None);
        st.observe(1, 0.0).unwrap();
        st.observe(1, 0.0).unwrap();
        assert_eq!(st.mean(1), Some(0.0));
        assert!(st.is_complete());
    }

    #[test]
    fn epoch_mean_matches_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws: Vec<f64> = (0..282).map(|_| f64::from(rng.gen_bool(0.5) as u8)).collect();
        let mut st = EpochState::new(0, 0, vec![0], dense(282.0)).unwrap();
        for &x in &draws {
            st.observe(0, x).unwrap();
        }
        let oracle = draws.iter().sum::<f64>() / 282.0;
        assert!((st.mean(0).unwrap() - oracle).abs() <= 1e-15);
    }

    fn state_with_means(means: &[f64]) -> EpochState {
        let mut st = EpochState::new(0, 0, (0..means.len()).collect(), dense(1.0)).unwrap();
        for (a, &m) in means.iter().enumerate() {
            st.observe(a, m).unwrap();
        }
        st
    }

    #[test]
    fn elimination_rule() {
        assert_eq!(state_with_means(&[0.5, 0.3]).survivors(0.05), vec![0]);
        assert_eq!(state_with_means(&[0.5, 0.45]).survivors(0.05), vec![0, 1]);
        assert_eq!(state_with_means(&[0.1, 0.7, 0.4]).survivors(0.0), vec![1]);
        // ties on the max keep the lowest index when Ω = 0
        assert_eq!(state_with_means(&[0.2, 0.6, 0.6]).survivors(0.0), vec![1]);
        // boundary: μ_i + Ω = max − Ω is eliminated
        assert_eq!(state_with_means(&[0.5, 0.25]).survivors(0.125), vec![0]);
    }

    fn run_deterministic(horizon: u64, means: &[f64]) -> EliminationPolicy {
        let k = means.len();
        let mut p = EliminationPolicy::new(k, Schedule::fast_with_constant(horizon, 0.0)).unwrap();
        let mut eliminated = vec![false; k];
        let s_end = last_epoch_index(horizon);
        for t in 1..=horizon {
            let arm = p.select(t).unwrap();
            assert!(!eliminated[arm], "eliminated arm {arm} pulled at {t}");
            assert!(p.state().s() <= s_end);
            p.observe(t, arm, means[arm]).unwrap();
            for r in p.epoch_log() {
                for &e in &r.eliminated {
                    eliminated[e] = true;
                }
            }
        }
        p
    }

    #[test]
    fn last_epoch_examples() {
        assert_eq!(last_epoch_index(1_000), 3);
        assert_eq!(last_epoch_index(10_000), 5);
        assert_eq!(last_epoch_index(100_000), 7);
        assert_eq!(last_epoch_index(1_000_000), 8);
        // every epoch up to s_end keeps log(A·T·θ²) > 1
        for t in [1_000u64, 10_000, 100_000, 1_000_000] {
            let theta = (-(last_epoch_index(t) as f64)).exp2();
            assert!((HOEFFDING_A * t as f64 * theta * theta).ln() > 1.0);
            let budget = epoch_pull_budget(theta, 1, t, None, C3Variant::default()).unwrap();
            assert!(budget.pulls > t as f64);
        }
    }

    #[test]
    fn epoch_index_never_exceeds_last_epoch() {
        for t in [1_000u64, 10_000, 100_000, 1_000_000] {
            let p = run_deterministic(t, &[1.0, 0.0]);
            assert!(p.state().s() <= last_epoch_index(t));
            let p = run_deterministic(t, &[0.5, 0.5, 0.5]);
            assert!(p.state().s() <= last_epoch_index(t));
        }
    }

    #[test]
    fn log_follows_dyadic_schedule() {
        let horizon = 100_000;
        let p = run_deterministic(horizon, &[0.9, 0.5, 0.45, 0.1]);
        let log = p.epoch_log();
        assert!(log.len() >= 2);
        for (s, r) in log.iter().enumerate() {
            assert_eq!(r.s as usize, s);
            assert_eq!(r.theta, (-(s as f64)).exp2());
            // M = 0 reproduces the classic budget
            let l = (4.0 * 0.5f64.exp() * horizon as f64 * r.theta * r.theta).ln();
            assert_eq!(r.pulls as f64, (32.0 * l / (r.theta * r.theta)).ceil());
        }
        for w in log.windows(2) {
            assert_eq!(w[1].tau - w[0].tau, w[0].b as u64 * w[0].pulls);
            assert_eq!(w[1].b, w[0].b - w[0].eliminated.len());
        }
        assert_eq!(p.state().active(), &[0]);
    }

    #[test]
    fn mismatched_observation_is_rejected() {
        let mut p = EliminationPolicy::new(2, Schedule::fast_with_constant(1000, 0.0)).unwrap();
        let arm = p.select(1).unwrap();
        assert_eq!(arm, 0);
        assert!(matches!(p.observe(1, 1, 0.5), Err(Error::ContractViolation(_))));
        assert!(p.select(1001).is_err());
    }

    proptest::proptest! {
        #[test]
        fn same_arm_pulls_are_exactly_b_apart(tau in 0u64..1000, b in 1usize..9, pulls in 1u64..50) {
            let st = EpochState::new(0, tau, (0..b).map(|i| 3 * i).collect(), dense(pulls as f64)).unwrap();
            let mut last = vec![None; 3 * b];
            for t in tau + 1..=tau + b as u64 * pulls {
                let a = st.scheduled_arm(t).unwrap();
                if let Some(prev) = last[a] {
                    proptest::prop_assert_eq!(t - prev, b as u64);
                }
                last[a] = Some(t);
            }
        }
    }
}
