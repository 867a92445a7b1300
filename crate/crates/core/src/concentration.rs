//! Hoeffding-type deviation widths for mixing processes.
//!
//! For n samples taken `gap` steps apart from a stationary process with mixing rate Φ, the
//! empirical mean is within
//!
//! ```text
//! (1 + 80·D) · sqrt(2·log(A/δ)/n),    D = Σ_{j=1..n} j^(−3/2) Σ_{ℓ=1..j} Φ(gap·ℓ)
//! ```
//!
//! of the stationary mean with probability at least 1 − δ, where A = 4√e.

use crate::error::{domain, Error, Result};
use crate::process::RateDescriptor;

/// A = 4·√e.
pub const HOEFFDING_A: f64 = 4.0 * 1.648_721_270_700_128_1;

/// Number of terms of the dependence sum that are always summed term by term. Longer sums
/// switch to an Euler–Maclaurin tail, which only happens for sample counts no run can reach.
pub const EXACT_TERMS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceQuery {
    pub n: u64,
    pub gap: u64,
    pub delta: f64,
    pub rate: RateDescriptor,
    pub rate_multiplier: f64,
}

impl ConfidenceQuery {
    pub fn new(n: u64, gap: u64, delta: f64, rate: RateDescriptor) -> Self {
        ConfidenceQuery {
            n,
            gap,
            delta,
            rate,
            rate_multiplier: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("n", "must be at least 1"));
        }
        if self.gap == 0 {
            return Err(domain("gap", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(domain("delta", format!("{} not in (0, 1)", self.delta)));
        }
        if !(self.rate_multiplier >= 1.0) {
            return Err(domain(
                "rate_multiplier",
                format!("{} must be at least 1", self.rate_multiplier),
            ));
        }
        self.rate.validate()
    }
}

#[inline]
fn inv_pow_three_halves(j: f64) -> f64 {
    (-1.5 * j.ln()).exp()
}

/// D(n, gap) = Σ_{j=1..n} j^(−3/2) Σ_{ℓ=1..j} Φ(gap·ℓ).
pub fn dependence_sum(rate: &RateDescriptor, n: u64, gap: u64) -> f64 {
    dependence_sum_split(rate, n as f64, gap, EXACT_TERMS)
}

/// [`dependence_sum`] for sample counts that may exceed `u64` (epoch budgets in the slow
/// regime can be astronomically large). `n` is rounded up to a whole number.
pub fn dependence_sum_extended(rate: &RateDescriptor, n: f64, gap: u64) -> f64 {
    dependence_sum_split(rate, n.ceil(), gap, EXACT_TERMS)
}

pub(crate) fn dependence_sum_split(rate: &RateDescriptor, n: f64, gap: u64, exact_terms: u64) -> f64 {
    if matches!(rate, RateDescriptor::Zero) || n < 1.0 {
        return 0.0;
    }
    let g = gap as f64;
    let head = if n <= exact_terms as f64 {
        n as u64
    } else {
        exact_terms
    };

    let mut inner = 0.0;
    let mut total = 0.0;
    for j in 1..=head {
        let jf = j as f64;
        inner += rate.evaluate(g * jf);
        total += inv_pow_three_halves(jf) * inner;
    }
    if n <= head as f64 {
        return total;
    }

    match *rate {
        RateDescriptor::Zero => total,
        RateDescriptor::Polynomial { c0, alpha } => {
            let scale = c0 * (-alpha * g.ln()).exp();
            total + scale * polynomial_tail(inner / scale, head as f64, n, alpha)
        }
        RateDescriptor::Geometric { .. } => {
            // keep summing until the inner sum stops moving, then the remaining outer factor
            // is a pure power sum
            let mut j = head;
            while (j as f64) < n {
                let next = rate.evaluate(g * (j + 1) as f64);
                if next <= inner * 1e-18 {
                    break;
                }
                j += 1;
                inner += next;
                total += inv_pow_three_halves(j as f64) * inner;
            }
            if (j as f64) >= n {
                return total;
            }
            total + inner * power_sum(1.5, (j + 1) as f64, n)
        }
    }
}

/// Σ_{j=m+1..n} j^(−3/2) h(j) with h(j) = Σ_{ℓ≤j} ℓ^(−α), given h(m).
fn polynomial_tail(h_m: f64, m: f64, n: f64, alpha: f64) -> f64 {
    let log_branch = (1.0 - alpha).abs() < 1e-9;
    // h(j) ≈ C + L(j) + j^(−α)/2 − α j^(−α−1)/12, with L(j) = j^(1−α)/(1−α) or ln j
    let lead = |x: f64| {
        if log_branch {
            x.ln()
        } else {
            (-alpha * x.ln()).exp() * x / (1.0 - alpha)
        }
    };
    let corrections = |x: f64| {
        let xa = (-alpha * x.ln()).exp();
        xa / 2.0 - alpha * xa / (12.0 * x)
    };
    let c = h_m - lead(m) - corrections(m);
    let a = m + 1.0;

    let lead_sum = if log_branch {
        // Σ j^(−3/2) ln j via Euler–Maclaurin
        let f = |x: f64| x.powf(-1.5) * x.ln();
        let anti = |x: f64| {
            if x.is_infinite() {
                0.0
            } else {
                -2.0 * x.powf(-0.5) * x.ln() - 4.0 * x.powf(-0.5)
            }
        };
        let df = |x: f64| x.powf(-2.5) * (1.0 - 1.5 * x.ln());
        euler_maclaurin(f, anti, df, a, n)
    } else {
        power_sum(0.5 + alpha, a, n) / (1.0 - alpha)
    };

    c * power_sum(1.5, a, n) + lead_sum + power_sum(1.5 + alpha, a, n) / 2.0
        - alpha / 12.0 * power_sum(2.5 + alpha, a, n)
}

fn euler_maclaurin(
    f: impl Fn(f64) -> f64,
    antiderivative: impl Fn(f64) -> f64,
    derivative: impl Fn(f64) -> f64,
    a: f64,
    n: f64,
) -> f64 {
    let (fn_, dfn) = if n.is_infinite() {
        (0.0, 0.0)
    } else {
        (f(n), derivative(n))
    };
    antiderivative(n) - antiderivative(a) + (f(a) + fn_) / 2.0 + (dfn - derivative(a)) / 12.0
}

/// Σ_{j=a..n} j^(−s) for a ≥ 10⁴ (Euler–Maclaurin, error far below f64 resolution).
/// `n` may be infinite when s > 1.
fn power_sum(s: f64, a: f64, n: f64) -> f64 {
    let f = |x: f64| (-s * x.ln()).exp();
    let df = |x: f64| -s * (-(s + 1.0) * x.ln()).exp();
    // ∫_a^n x^(−s) dx, written with expm1 so that s → 1 does not cancel
    let integral = if n.is_infinite() {
        (-(s - 1.0) * a.ln()).exp() / (s - 1.0)
    } else {
        let span = (n / a).ln();
        let e = 1.0 - s;
        if e.abs() * span < 1e-300 {
            span
        } else {
            (e * a.ln()).exp() * (e * span).exp_m1() / e
        }
    };
    let (fn_, dfn) = if n.is_infinite() {
        (0.0, 0.0)
    } else {
        (f(n), df(n))
    };
    integral + (f(a) + fn_) / 2.0 + (dfn - df(a)) / 12.0
}

/// (1 + 80·D(n, gap; m·Φ)) · sqrt(2·log(A/δ)/n).
pub fn confidence_width(q: &ConfidenceQuery) -> Result<f64> {
    q.validate()?;
    let rate = q.rate.scaled(q.rate_multiplier);
    let d = dependence_sum(&rate, q.n, q.gap);
    Ok((1.0 + 80.0 * d) * (2.0 * (HOEFFDING_A / q.delta).ln() / q.n as f64).sqrt())
}

/// Fast-mixing constant M = 80·Σ_{j≤N} j^(−3/2) Σ_{k≤j} Φ(k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastMixingConstant {
    pub value: f64,
    /// Upper bound on M(∞) − M(N) when the series converges.
    pub tail_bound: Option<f64>,
}

/// `truncation = None` asks for the limit N → ∞, which exists only for fast rates.
pub fn fast_mixing_constant(
    rate: &RateDescriptor,
    truncation: Option<u64>,
) -> Result<FastMixingConstant> {
    rate.validate()?;
    if let Some(0) = truncation {
        return Err(domain("truncation", "must be at least 1"));
    }
    let n = match truncation {
        Some(n) => n as f64,
        None if rate.is_fast() => f64::INFINITY,
        None => {
            return Err(domain(
                "rate",
                "polynomial exponent ≤ 1/2 has no finite fast-mixing constant; pass a truncation",
            ))
        }
    };
    let value = 80.0 * dependence_sum_split(rate, n, 1, EXACT_TERMS);
    let tail_bound = if n.is_infinite() {
        Some(0.0)
    } else {
        series_tail_bound(rate, n).map(|t| 80.0 * t)
    };
    Ok(FastMixingConstant { value, tail_bound })
}

// Upper bound on Σ_{j>N} j^(−3/2) Σ_{k≤j} Φ(k) using integral comparison.
fn series_tail_bound(rate: &RateDescriptor, n: f64) -> Option<f64> {
    let inv_sqrt = 1.0 / n.sqrt();
    match *rate {
        RateDescriptor::Zero => Some(0.0),
        RateDescriptor::Polynomial { c0, alpha } => {
            if alpha <= 0.5 {
                None
            } else if alpha < 1.0 - 1e-9 {
                Some(c0 * n.powf(0.5 - alpha) / ((1.0 - alpha) * (alpha - 0.5)))
            } else if alpha <= 1.0 + 1e-9 {
                Some(c0 * (2.0 * inv_sqrt * (1.0 + n.ln()) + 4.0 * inv_sqrt))
            } else {
                Some(c0 * alpha / (alpha - 1.0) * 2.0 * inv_sqrt)
            }
        }
        RateDescriptor::Geometric { .. } => {
            let total = limit_inner_sum(rate)?;
            Some(total * 2.0 * inv_sqrt)
        }
    }
}

// Σ_{k≥1} Φ(k) for a rate whose terms eventually vanish below f64 resolution.
fn limit_inner_sum(rate: &RateDescriptor) -> Option<f64> {
    let mut total = 0.0;
    let mut k = 1.0;
    loop {
        let term = rate.evaluate(k);
        total += term;
        if term <= total * 1e-18 || term == 0.0 {
            // remaining terms are bounded by a geometric series with ratio ≤ e^{-scale}
            return Some(total * (1.0 + 1e-15));
        }
        k += 1.0;
        if k > 1e9 {
            return None;
        }
    }
}

/// Ω(θ_s, b_s) = (1 + 80·D(T_s, b_s; m·Φ)) · sqrt(2·max(log(A·T·θ_s²), 1)/T_s).
///
/// `t_s` is the per-arm pull budget of the epoch (a whole number, possibly beyond `u64`).
pub fn omega(
    theta_s: f64,
    b_s: usize,
    t_s: f64,
    horizon: u64,
    rate: &RateDescriptor,
    rate_multiplier: f64,
) -> Result<f64> {
    if !(theta_s > 0.0 && theta_s <= 1.0) {
        return Err(domain("theta_s", format!("{theta_s} not in (0, 1]")));
    }
    if b_s == 0 {
        return Err(domain("b_s", "must be at least 1"));
    }
    if !(t_s >= 1.0) {
        return Err(domain("T_s", format!("{t_s} must be at least 1")));
    }
    let log_term = epoch_log(theta_s, horizon)?;
    let d = dependence_sum_extended(&rate.scaled(rate_multiplier), t_s, b_s as u64);
    Ok((1.0 + 80.0 * d) * (2.0 * log_term / t_s).sqrt())
}

/// max(log(A·T·θ²), 1); errors when A·T·θ² ≤ 1.
pub fn epoch_log(theta_s: f64, horizon: u64) -> Result<f64> {
    let arg = HOEFFDING_A * horizon as f64 * theta_s * theta_s;
    if arg <= 1.0 {
        return Err(Error::InvalidEpoch(arg));
    }
    Ok(arg.ln().max(1.0))
}
