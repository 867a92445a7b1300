use crate::error::{domain, Error, Result};

/// UCB1 with index μ̂_k + sqrt(2·ln t / n_k). Unsampled arms go first, lowest index first.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    horizon: u64,
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl Ucb1 {
    pub fn new(arms: usize, horizon: u64) -> Self {
        Ucb1 {
            horizon,
            sums: vec![0.0; arms],
            counts: vec![0; arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn select(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(domain("t", "time starts at 1"));
        }
        if t > self.horizon {
            return Err(Error::HorizonExhausted(t));
        }
        if let Some(k) = self.counts.iter().position(|&n| n == 0) {
            return Ok(k);
        }
        let log_t = (t as f64).ln();
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for (k, (&s, &n)) in self.sums.iter().zip(&self.counts).enumerate() {
            let index = s / n as f64 + (2.0 * log_t / n as f64).sqrt();
            if index > best_index {
                best = k;
                best_index = index;
            }
        }
        Ok(best)
    }

    pub fn observe(&mut self, _t: u64, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms() {
            return Err(Error::ContractViolation(format!("arm {arm} out of range")));
        }
        self.sums[arm] += reward;
        self.counts[arm] += 1;
        Ok(())
    }
}

/// Round-robin over all arms: arm (t − 1) mod K at time t.
#[derive(Debug, Clone)]
pub struct Uniform {
    arms: usize,
    horizon: u64,
}

impl Uniform {
    pub fn new(arms: usize, horizon: u64) -> Self {
        Uniform { arms, horizon }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn select(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(domain("t", "time starts at 1"));
        }
        if t > self.horizon {
            return Err(Error::HorizonExhausted(t));
        }
        Ok(((t - 1) % self.arms as u64) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_counts_are_equal() {
        let (k, m) = (4usize, 25u64);
        let mut p = Uniform::new(k, k as u64 * m);
        let mut counts = vec![0u64; k];
        for t in 1..=k as u64 * m {
            counts[p.select(t).unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| c == m));
        assert!(p.select(k as u64 * m + 1).is_err());
    }

    #[test]
    fn ucb1_samples_every_arm_first() {
        let mut p = Ucb1::new(3, 100);
        for t in 1..=3 {
            let a = p.select(t).unwrap();
            assert_eq!(a, (t - 1) as usize);
            p.observe(t, a, 0.0).unwrap();
        }
    }

    #[test]
    fn ucb1_suboptimal_pulls_within_classical_band() {
        let horizon = 10_000u64;
        let delta = 0.2;
        let band = 3.0 * 8.0 * (horizon as f64).ln() / (delta * delta);
        let runs = 200;
        let mut within = 0;
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = Ucb1::new(2, horizon);
            for t in 1..=horizon {
                let a = p.select(t).unwrap();
                let mean = if a == 0 { 0.6 } else { 0.4 };
                let r = f64::from(rng.gen_bool(mean) as u8);
                p.observe(t, a, r).unwrap();
            }
            if (p.counts()[1] as f64) <= band {
                within += 1;
            }
        }
        assert!(within as f64 >= 0.95 * runs as f64, "{within}/{runs}");
    }
}
