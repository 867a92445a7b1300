use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Upper bound Φ(t) on the mixing coefficients of a reward process.
///
/// * `Zero`: independent samples, Φ ≡ 0.
/// * `Polynomial`: Φ(t) = c0·t^(−alpha).
/// * `Geometric`: Φ(t) = c1·exp(−scale·t^gamma), and Φ(t) = 0 for t > cutoff when a cutoff
///   is set. With `scale = 1` this is the textbook c1·exp(−t^γ) family; AR(1) and Markov
///   chains use `gamma = 1, scale = ln(1/ρ)` so that Φ(t) = ρ^t exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateDescriptor {
    Zero,
    Polynomial {
        c0: f64,
        alpha: f64,
    },
    Geometric {
        c1: f64,
        gamma: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<u64>,
    },
}

fn unit_scale() -> f64 {
    1.0
}

impl RateDescriptor {
    pub fn polynomial(c0: f64, alpha: f64) -> Result<Self> {
        let rate = RateDescriptor::Polynomial { c0, alpha };
        rate.validate()?;
        Ok(rate)
    }

    /// Textbook geometric template c1·exp(−t^gamma).
    pub fn geometric(c1: f64, gamma: f64) -> Result<Self> {
        let rate = RateDescriptor::Geometric {
            c1,
            gamma,
            scale: 1.0,
            cutoff: None,
        };
        rate.validate()?;
        Ok(rate)
    }

    /// Exact exponential decay ρ^t. `rho = 0` collapses to [`RateDescriptor::Zero`].
    pub fn exponential(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(domain("rho", format!("{rho} not in [0, 1)")));
        }
        if rho == 0.0 {
            return Ok(RateDescriptor::Zero);
        }
        Ok(RateDescriptor::Geometric {
            c1: 1.0,
            gamma: 1.0,
            scale: -rho.ln(),
            cutoff: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RateDescriptor::Zero => Ok(()),
            RateDescriptor::Polynomial { c0, alpha } => {
                if !(c0.is_finite() && c0 > 0.0) {
                    return Err(domain("c0", format!("{c0} must be positive")));
                }
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(domain("alpha", format!("{alpha} must be non-negative")));
                }
                Ok(())
            }
            RateDescriptor::Geometric {
                c1, gamma, scale, ..
            } => {
                if !(c1.is_finite() && c1 > 0.0) {
                    return Err(domain("c1", format!("{c1} must be positive")));
                }
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(domain("gamma", format!("{gamma} must be positive")));
                }
                if !(scale.is_finite() && scale >= 0.0) {
                    return Err(domain("scale", format!("{scale} must be non-negative")));
                }
                Ok(())
            }
        }
    }

    /// Φ(t) for a lag t ≥ 1.
    pub fn evaluate(&self, t: f64) -> f64 {
        match *self {
            RateDescriptor::Zero => 0.0,
            RateDescriptor::Polynomial { c0, alpha } => c0 * (-alpha * t.ln()).exp(),
            RateDescriptor::Geometric {
                c1,
                gamma,
                scale,
                cutoff,
            } => {
                if cutoff.is_some_and(|q| t > q as f64) {
                    return 0.0;
                }
                let exponent = if gamma == 1.0 { t } else { t.powf(gamma) };
                c1 * (-scale * exponent).exp()
            }
        }
    }

    /// The same descriptor multiplied by `factor` (used for the conditional-mixing multiplier).
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            RateDescriptor::Zero => RateDescriptor::Zero,
            RateDescriptor::Polynomial { c0, alpha } => RateDescriptor::Polynomial {
                c0: c0 * factor,
                alpha,
            },
            RateDescriptor::Geometric {
                c1,
                gamma,
                scale,
                cutoff,
            } => RateDescriptor::Geometric {
                c1: c1 * factor,
                gamma,
                scale,
                cutoff,
            },
        }
    }

    /// Polynomial exponent, if this is a polynomial rate.
    pub fn polynomial_exponent(&self) -> Option<f64> {
        match *self {
            RateDescriptor::Polynomial { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// True when Σ j^(−3/2) Σ_{ℓ≤j} Φ(ℓ) stays bounded as the truncation grows.
    pub fn is_fast(&self) -> bool {
        match *self {
            RateDescriptor::Polynomial { alpha, .. } => alpha > 0.5,
            RateDescriptor::Geometric { scale, cutoff, .. } => scale > 0.0 || cutoff.is_some(),
            RateDescriptor::Zero => true,
        }
    }
}
