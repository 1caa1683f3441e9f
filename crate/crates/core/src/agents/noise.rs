use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ACTION_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuConfig {
    /// Mean-reversion rate.
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
}

impl Default for OuConfig {
    fn default() -> Self {
        Self {
            theta: 0.15,
            sigma: 0.2,
            mu: 0.0,
            dt: 1.0,
        }
    }
}

impl OuConfig {
    /// Long-run standard deviation of the discretised process,
    /// `sigma * sqrt(dt / (2 theta dt - theta^2 dt^2))`.
    pub fn stationary_std(&self) -> f64 {
        let td = self.theta * self.dt;
        self.sigma * (self.dt / (2.0 * td - td * td)).sqrt()
    }

    pub fn validate(&self) -> Result<(), String> {
        if ![self.theta, self.sigma, self.mu, self.dt].iter().all(|v| v.is_finite()) {
            return Err("noise parameters must be finite".into());
        }
        if self.sigma < 0.0 || self.dt <= 0.0 || self.theta < 0.0 {
            return Err("noise needs sigma >= 0, theta >= 0 and dt > 0".into());
        }
        Ok(())
    }
}

/// Ornstein-Uhlenbeck process, one independent coordinate per actor output.
#[derive(Debug, Clone, PartialEq)]
pub struct OuState {
    pub config: OuConfig,
    pub x: [f64; ACTION_DIM],
}

impl OuState {
    /// Starts at the long-run mean.
    pub fn new(config: OuConfig) -> Self {
        Self {
            config,
            x: [config.mu; ACTION_DIM],
        }
    }

    pub fn reset(&mut self) {
        self.x = [self.config.mu; ACTION_DIM];
    }

    /// `x += theta (mu - x) dt + sigma sqrt(dt) N(0, 1)`, returning the new `x`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [f64; ACTION_DIM] {
        let OuConfig { theta, sigma, mu, dt } = self.config;
        for x in &mut self.x {
            let z: f64 = rng.sample(StandardNormal);
            *x += theta * (mu - *x) * dt + sigma * dt.sqrt() * z;
        }
        self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_mean_reversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ou = OuState::new(OuConfig {
            sigma: 0.0,
            ..OuConfig::default()
        });
        ou.x = [1.0; ACTION_DIM];
        assert_eq!(ou.step(&mut rng), [0.85; ACTION_DIM]);
        for k in 2..50 {
            let x = ou.step(&mut rng)[0];
            assert!((x - 0.85f64.powi(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn stationary_deviation_matches_closed_form() {
        let config = OuConfig::default();
        let mut ou = OuState::new(config);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            ou.step(&mut rng);
        }
        let n = 100_000;
        let mut sum = [0.0; ACTION_DIM];
        let mut sum_sq = [0.0; ACTION_DIM];
        for _ in 0..n {
            let x = ou.step(&mut rng);
            for i in 0..ACTION_DIM {
                sum[i] += x[i];
                sum_sq[i] += x[i] * x[i];
            }
        }
        let expected = config.stationary_std();
        for i in 0..ACTION_DIM {
            let mean = sum[i] / n as f64;
            let std = (sum_sq[i] / n as f64 - mean * mean).sqrt();
            assert!((std / expected - 1.0).abs() < 0.05, "coordinate {i}: {std} vs {expected}");
        }
    }

    #[test]
    fn reset_returns_to_mean() {
        let mut ou = OuState::new(OuConfig::default());
        ou.step(&mut ChaCha8Rng::seed_from_u64(1));
        ou.reset();
        assert_eq!(ou.x, [0.0; ACTION_DIM]);
    }
}
