//! Running error statistics and the confidence-interval stopping rule.
//!
//! Everything is accumulated in integers so that partial sums from any
//! number of workers merge to the same totals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingRule {
    pub min_bit_errors: u64,
    pub max_trials: u64,
    pub confidence: f64,
    pub target_relative_halfwidth: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 100,
            max_trials: 10_000_000,
            confidence: 0.95,
            target_relative_halfwidth: 0.1,
        }
    }
}

impl StoppingRule {
    /// Two-sided normal quantile for the configured confidence.
    pub fn z(&self) -> f64 {
        Normal::new(0.0, 1.0)
            .expect("standard normal")
            .inverse_cdf(0.5 * (1.0 + self.confidence))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorTally {
    pub trials: u64,
    pub bit_errors: u64,
    /// Sum over trials of (bit errors in the trial)^2.
    pub sum_sq: u128,
}

impl ErrorTally {
    pub fn record(&mut self, errors: u64) {
        self.trials += 1;
        self.bit_errors += errors;
        self.sum_sq += u128::from(errors) * u128::from(errors);
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            bit_errors: self.bit_errors + other.bit_errors,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    /// Mean per-trial error fraction, equal to the pooled BER.
    pub fn mean(&self, bits_per_trial: u64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.bit_errors as f64 / (self.trials as f64 * bits_per_trial as f64)
    }

    /// Unbiased sample variance of the per-trial error fraction.
    pub fn variance(&self, bits_per_trial: u64) -> f64 {
        let n = u128::from(self.trials);
        if n < 2 {
            return 0.0;
        }
        let e = u128::from(self.bit_errors);
        let num = self.sum_sq * n - e * e;
        let b = bits_per_trial as f64;
        num as f64 / ((n * (n - 1)) as f64 * b * b)
    }

    pub fn halfwidth(&self, bits_per_trial: u64, z: f64) -> f64 {
        if self.trials == 0 {
            return f64::INFINITY;
        }
        z * (self.variance(bits_per_trial) / self.trials as f64).sqrt()
    }

    pub fn satisfies(&self, rule: &StoppingRule, bits_per_trial: u64, z: f64) -> bool {
        if self.bit_errors < rule.min_bit_errors {
            return false;
        }
        let ber = self.mean(bits_per_trial);
        ber > 0.0 && self.halfwidth(bits_per_trial, z) <= rule.target_relative_halfwidth * ber
    }
}
