//! Closed-form pseudo-regret bounds for the fast and slow mixing regimes.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::concentration::HOEFFDING_A;
use crate::error::{domain, Result};

/// Problem parameters shared by the problem-dependent bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInput {
    pub gaps: Vec<f64>,
    pub horizon: u64,
    #[serde(default)]
    pub alpha: f64,
    pub lambda: f64,
    /// Fast-mixing constant M.
    #[serde(default)]
    pub mixing_constant: f64,
}

impl BoundInput {
    pub fn arms(&self) -> usize {
        self.gaps.len()
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(domain("horizon", "must be positive"));
        }
        if self.gaps.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(domain("gaps", "entries must be finite and non-negative"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(domain("lambda", format!("{} must be non-negative", self.lambda)));
        }
        if !(self.mixing_constant.is_finite() && self.mixing_constant >= 0.0) {
            return Err(domain("mixing_constant", "must be non-negative"));
        }
        Ok(())
    }

    /// Gaps in A_λ = {k : Δ_k > λ}.
    fn above(&self) -> impl Iterator<Item = f64> + '_ {
        self.gaps.iter().copied().filter(move |&g| g > self.lambda)
    }

    /// |A_0 ∖ A_λ|: strictly suboptimal arms with Δ_k ≤ λ.
    fn small_gap_count(&self) -> usize {
        self.gaps
            .iter()
            .filter(|&&g| g > 0.0 && g <= self.lambda)
            .count()
    }
}

/// λ floor for the fast-regime problem-dependent bound: e^{1/4}/(2√T).
pub fn fast_lambda_floor(horizon: u64) -> f64 {
    0.25f64.exp() / (2.0 * (horizon as f64).sqrt())
}

/// λ floor for the slow regime: sqrt(e^{1−1/e}/T).
pub fn slow_lambda_floor(horizon: u64) -> f64 {
    ((1.0 - (-1.0f64).exp()).exp() / horizon as f64).sqrt()
}

/// (1+M)·Σ_{A_λ}(Δ + 96/Δ + 32·log(TΔ²)/Δ) + 64·Σ_{A_0∖A_λ} 1/λ + λT.
pub fn fast_mix_dependent_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let floor = fast_lambda_floor(input.horizon);
    if input.lambda < floor {
        return Err(domain(
            "lambda",
            format!("{} is below the floor e^(1/4)/(2√T) = {floor}", input.lambda),
        ));
    }
    let t = input.horizon as f64;
    let per_arm: f64 = input
        .above()
        .map(|d| d + 96.0 / d + 32.0 * (t * d * d).ln().max(0.0) / d)
        .sum();
    let small = input.small_gap_count() as f64;
    Ok((1.0 + input.mixing_constant) * per_arm + 64.0 * small / input.lambda + input.lambda * t)
}

/// sqrt((1+M)·K·T)·log(K·log K)/sqrt(log K), defined for K ≥ 3.
pub fn fast_mix_independent_bound(arms: usize, horizon: u64, mixing_constant: f64) -> Result<f64> {
    if arms < 3 {
        return Err(domain("arms", format!("{arms} < 3; log(K log K)/√log K needs K ≥ 3")));
    }
    if horizon == 0 {
        return Err(domain("horizon", "must be positive"));
    }
    if !(mixing_constant.is_finite() && mixing_constant >= 0.0) {
        return Err(domain("mixing_constant", "must be non-negative"));
    }
    let k = arms as f64;
    let log_k = k.ln();
    Ok(((1.0 + mixing_constant) * k * horizon as f64).sqrt() * (k * log_k).ln() / log_k.sqrt())
}

/// Constants of the slow-mixing analysis, all functions of α ∈ (0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowConstants {
    pub alpha: f64,
    pub c0: f64,
    /// Underflows to 0 as α → 1/2; use `ln_c1` there.
    pub c1: f64,
    pub ln_c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c_tilde: f64,
}

impl SlowConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        check_slow_alpha(alpha)?;
        let base = (1.0 - alpha) * (0.5 - alpha);
        let c0 = 1.0 / base;
        let ln_c1 = 2.0 / (1.0 - 2.0 * alpha) * (base / 80.0).ln();
        let c1 = ln_c1.exp();
        let c2 = 64.0 * c0;
        let c3 = 12800.0 * c0;
        let c4 = 1.0 / (1.2 * 2.4f64.sqrt().powf(1.0 / alpha - 2.0) - 1.0);
        let c_tilde = 2f64.powf(-1.0 / alpha + 3.0) * c4 * c3.powf(1.0 / (2.0 * alpha));
        Ok(SlowConstants {
            alpha,
            c0,
            c1,
            ln_c1,
            c2,
            c3,
            c4,
            c_tilde,
        })
    }
}

fn check_slow_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(domain("alpha", format!("{alpha} not in (0, 1/2)")));
    }
    Ok(())
}

/// 2Σ_{A_λ} max{c2·Δ⁻¹·max{log(ATΔ²),1}, 1} + c̃·Δ★^{1−1/α}·(c3·log(ATΔ★²))^{1/(2α)}
/// + (12/√e)·Σ_{A_0∖A_λ} 1/λ + λT, where Δ★ = min_{A_λ} Δ.
///
/// Any λ ≥ 0 is admitted; [`slow_lambda_floor`] gives the smallest admissible λ.
pub fn slow_mix_dependent_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let c = SlowConstants::new(input.alpha)?;
    let t = input.horizon as f64;
    let log_at = |d: f64| (HOEFFDING_A * t * d * d).ln().max(1.0);

    let per_arm: f64 = input
        .above()
        .map(|d| (c.c2 / d * log_at(d)).max(1.0))
        .sum();
    let dependence = match input.above().reduce(f64::min) {
        Some(d_star) => {
            c.c_tilde
                * d_star.powf(1.0 - 1.0 / c.alpha)
                * (c.c3 * log_at(d_star)).powf(1.0 / (2.0 * c.alpha))
        }
        None => 0.0,
    };
    let small = input.small_gap_count() as f64;
    let small_term = if small > 0.0 {
        12.0 / 0.5f64.exp() * small / input.lambda
    } else {
        0.0
    };
    Ok(2.0 * per_arm + dependence + small_term + input.lambda * t)
}

/// C₃·√T·max{√(K log T), T^{1/2−α}·(log T)^{1/(2α)}}. C₃ is a free constant.
pub fn slow_mix_independent_bound(arms: usize, horizon: u64, alpha: f64, c3_abs: f64) -> Result<f64> {
    check_slow_alpha(alpha)?;
    let (instance, dependence) = slow_independent_branches(arms, horizon);
    let t = horizon as f64;
    let dependence = dependence(alpha);
    Ok(c3_abs * t.sqrt() * instance.max(dependence))
}

/// The two branches √(K log T) and α ↦ T^{1/2−α}(log T)^{1/(2α)} of the instance-independent
/// slow bound, before the common √T factor.
pub fn slow_independent_branches(arms: usize, horizon: u64) -> (f64, impl Fn(f64) -> f64) {
    let t = horizon as f64;
    let log_t = t.ln();
    let instance = (arms as f64 * log_t).sqrt();
    (instance, move |alpha: f64| {
        t.powf(0.5 - alpha) * log_t.powf(1.0 / (2.0 * alpha))
    })
}

/// T^{1−α}/80.
pub fn minimax_lower_bound(horizon: u64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha < 0.5) {
        return Err(domain("alpha", format!("{alpha} not in [0, 1/2)")));
    }
    Ok((horizon as f64).powf(1.0 - alpha) / 80.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(gaps: &[f64], horizon: u64, alpha: f64, lambda: f64, m: f64) -> BoundInput {
        BoundInput {
            gaps: gaps.to_vec(),
            horizon,
            alpha,
            lambda,
            mixing_constant: m,
        }
    }

    #[test]
    fn fast_dependent_example() {
        let lambda = fast_lambda_floor(10_000);
        assert!((lambda - 0.00642).abs() < 1e-5);
        let v = fast_mix_dependent_bound(&input(&[0.0, 0.2], 10_000, 0.0, lambda, 0.0)).unwrap();
        let oracle = 0.2 + 480.0 + 160.0 * 400f64.ln() + 10_000.0 * lambda;
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 1503.2).abs() < 0.5, "{v}");
    }

    #[test]
    fn fast_dependent_degenerate_cases() {
        let lambda = 0.01;
        let v = fast_mix_dependent_bound(&input(&[0.0, 0.0, 0.0], 10_000, 0.0, lambda, 3.0)).unwrap();
        assert!((v - lambda * 10_000.0).abs() < 1e-12);
        // arms with 0 < Δ ≤ λ contribute 64/λ each
        let v = fast_mix_dependent_bound(&input(&[0.0, 0.005], 10_000, 0.0, lambda, 0.0)).unwrap();
        assert!((v - (6400.0 + 100.0)).abs() < 1e-9);
        // (1+M) multiplies only the A_λ part
        let base = input(&[0.0, 0.3], 10_000, 0.0, lambda, 0.0);
        let scaled = input(&[0.0, 0.3], 10_000, 0.0, lambda, 2.0);
        let a = fast_mix_dependent_bound(&base).unwrap() - 100.0;
        let b = fast_mix_dependent_bound(&scaled).unwrap() - 100.0;
        assert!((b - 3.0 * a).abs() < 1e-9);
        assert!(fast_mix_dependent_bound(&input(&[0.2], 10_000, 0.0, 0.001, 0.0)).is_err());
    }

    #[test]
    fn fast_independent_examples() {
        let v = fast_mix_independent_bound(10, 10_000, 0.0).unwrap();
        let oracle = 100_000f64.sqrt() * (10.0 * 10f64.ln()).ln() / 10f64.ln().sqrt();
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 653.5).abs() < 0.5, "{v}");
        let m3 = fast_mix_independent_bound(10, 10_000, 3.0).unwrap();
        assert!((m3 / v - 2.0).abs() < 1e-12);
        let t4 = fast_mix_independent_bound(10, 40_000, 0.0).unwrap();
        assert!((t4 / v - 2.0).abs() < 1e-12);
        assert!(fast_mix_independent_bound(2, 10_000, 0.0).is_err());
    }

    #[test]
    fn slow_constants_at_quarter() {
        let c = SlowConstants::new(0.25).unwrap();
        assert!((c.c0 - 16.0 / 3.0).abs() < 1e-12);
        assert!((c.c1 - (0.1875f64 / 80.0).powi(4)).abs() < 1e-24);
        assert!((c.c1 - 3.017e-11).abs() < 1e-14);
        assert!((c.c2 - 341.333_333).abs() < 1e-3);
        assert!((c.c3 - 68_266.666_7).abs() < 1e-3);
        assert!(SlowConstants::new(0.5).is_err());
        assert!(SlowConstants::new(0.0).is_err());
    }

    #[test]
    fn slow_dependent_degenerate_and_monotone() {
        let v = slow_mix_dependent_bound(&input(&[0.0, 0.0], 10_000, 0.25, 0.02, 0.0)).unwrap();
        assert!((v - 200.0).abs() < 1e-9);
        let v = slow_mix_dependent_bound(&input(&[0.0, 0.0], 10_000, 0.25, 0.0, 0.0)).unwrap();
        assert_eq!(v, 0.0);
        assert!(slow_mix_dependent_bound(&input(&[0.1], 10_000, 0.6, 0.01, 0.0)).is_err());
    }

    #[test]
    fn slow_dependent_matches_term_by_term_oracle() {
        let (alpha, t, lambda) = (0.25f64, 100_000u64, 0.01);
        let gaps = [0.0, 0.005, 0.05, 0.3];
        let v = slow_mix_dependent_bound(&input(&gaps, t, alpha, lambda, 0.0)).unwrap();

        let c0: f64 = 1.0 / (0.75 * 0.25);
        let c2 = 64.0 * c0;
        let c3 = 12800.0 * c0;
        let c4 = 1.0 / (1.2 * 2.4f64.sqrt().powf(2.0) - 1.0);
        let ct = 2f64.powf(-1.0) * c4 * c3.powf(2.0);
        let a = 4.0 * 0.5f64.exp();
        let l = |d: f64| f64::max((a * t as f64 * d * d).ln(), 1.0);
        let first = 2.0 * ((c2 / 0.05 * l(0.05)).max(1.0) + (c2 / 0.3 * l(0.3)).max(1.0));
        let second = ct * 0.05f64.powf(-3.0) * (c3 * l(0.05)).powf(2.0);
        let third = 12.0 / 0.5f64.exp() / lambda;
        let oracle = first + second + third + lambda * t as f64;
        assert!(((v - oracle) / oracle).abs() < 1e-12);
    }

    #[test]
    fn slow_independent_examples() {
        let (instance, dep) = slow_independent_branches(2, 1_000_000);
        let log_t = 1e6f64.ln();
        assert!((instance - (2.0 * log_t).sqrt()).abs() < 1e-12);
        assert!((dep(0.1) - 10f64.powf(2.4) * log_t.powi(5)).abs() < 1e-6 * dep(0.1));
        assert!(dep(0.1) > instance);
        let v = slow_mix_independent_bound(2, 1_000_000, 0.1, 1.0).unwrap();
        assert!((v - 1000.0 * dep(0.1)).abs() < 1e-6 * v);
        assert!(slow_mix_independent_bound(2, 1_000, 0.5, 1.0).is_err());
    }

    #[test]
    fn minimax_examples() {
        assert!((minimax_lower_bound(10_000, 0.25).unwrap() - 12.5).abs() < 1e-12);
        assert!((minimax_lower_bound(10_000, 0.0).unwrap() - 125.0).abs() < 1e-12);
        assert!(minimax_lower_bound(10_000, 0.1).unwrap() > minimax_lower_bound(10_000, 0.2).unwrap());
        assert!(minimax_lower_bound(10_000, 0.5).is_err());
    }

    #[test]
    fn sandwich() {
        for t in [1_000u64, 10_000, 100_000] {
            for alpha in [0.1, 0.25, 0.4] {
                let lower = minimax_lower_bound(t, alpha).unwrap();
                let upper = slow_mix_independent_bound(2, t, alpha, 1.0).unwrap();
                assert!(lower <= upper);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn constants_satisfy_defining_identities(alpha in 0.02f64..0.499) {
            let c = SlowConstants::new(alpha).unwrap();
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            proptest::prop_assert!(rel(c.c0 * (1.0 - alpha) * (0.5 - alpha), 1.0) < 1e-12);
            proptest::prop_assert!(rel(c.ln_c1, (2.0 / (1.0 - 2.0 * alpha)) * (1.0 / (80.0 * c.c0)).ln()) < 1e-12);
            proptest::prop_assert!(c.c1 < f64::MIN_POSITIVE || rel(c.c1.ln(), c.ln_c1) < 1e-9);
            proptest::prop_assert!(rel(c.c2, 64.0 * c.c0) < 1e-12);
            proptest::prop_assert!(rel(c.c3, 12800.0 * c.c0) < 1e-12);
            proptest::prop_assert!(rel(1.0 / c.c4 + 1.0, 1.2 * 2.4f64.powf(0.5 / alpha - 1.0)) < 1e-12);
            proptest::prop_assert!(rel(
                c.c_tilde.ln(),
                (3.0 - 1.0 / alpha) * 2f64.ln() + c.c4.ln() + c.c3.ln() / (2.0 * alpha)
            ) < 1e-12);
        }

        #[test]
        fn lambda_enters_linearly_while_sets_are_fixed(lambda in 0.0f64..0.0095, extra in 0.0f64..0.0095) {
            // no gap lies in (λ, λ+extra], so only λT moves
            let gaps = [0.0, 0.02, 0.1, 0.3];
            let lo = slow_mix_dependent_bound(&input(&gaps, 10_000, 0.25, lambda, 0.0)).unwrap();
            let hi = slow_mix_dependent_bound(&input(&gaps, 10_000, 0.25, lambda + extra, 0.0)).unwrap();
            proptest::prop_assert!(((hi - lo) - extra * 10_000.0).abs() < 1e-9 * hi);
        }
    }
}
