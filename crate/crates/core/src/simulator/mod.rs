//! Monte Carlo bit-error-rate engine.
//!
//! A trial draws one serving channel and one aggregate interferer channel,
//! holds them fixed for `blocks_per_trial` space-time blocks, and counts bit
//! errors after linear detection. Trials are independent and each owns a
//! random stream keyed by `(seed, grid index, trial index)`, so results do
//! not depend on how trials are spread across workers.

mod engine;
pub mod modulation;
pub mod oracle;
pub mod receiver;
pub mod stats;
pub mod stbc;

use serde::{Deserialize, Serialize};

pub use engine::{format_ber_csv, run_point, run_sweep, BerCurve, BerPoint, BER_CSV_HEADER};
pub use modulation::{demodulate, modulate, Modulation};
pub use oracle::{db_to_linear, mrc_ber_oracle, rayleigh_ber_oracle, rayleigh_ber_per_bit};
pub use receiver::{linear_receive, ReceiveError, ReceiverKind};
pub use stats::{ErrorTally, StoppingRule};
pub use stbc::{SpaceTimeCode, TransmitScheme};

use crate::channel::ChannelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Serving-link fading statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub k_factor: f64,
    /// Exponential correlation coefficient between adjacent receive antennas.
    pub rx_correlation: f64,
    pub tx_correlation: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            k_factor: 0.0,
            rx_correlation: 0.0,
            tx_correlation: 0.0,
        }
    }
}

/// Co-channel interferers. Each entry of `inr_db` is one interfering base
/// station; all share the serving link's receive correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceParams {
    pub inr_db: Vec<f64>,
    pub antennas: usize,
    pub k_factor: f64,
    pub tx_correlation: f64,
}

impl Default for InterferenceParams {
    fn default() -> Self {
        Self {
            inr_db: Vec::new(),
            antennas: 1,
            k_factor: 0.0,
            tx_correlation: 0.0,
        }
    }
}

impl InterferenceParams {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn common(count: usize, inr_db: f64) -> Self {
        Self {
            inr_db: vec![inr_db; count],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_grid_db: Vec<f64>,
    pub channel: ChannelParams,
    pub interference: InterferenceParams,
    pub receiver: ReceiverKind,
    pub modulation: Modulation,
    pub scheme: TransmitScheme,
    pub blocks_per_trial: usize,
    pub stopping: StoppingRule,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_t: 2,
            n_r: 2,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            channel: ChannelParams::default(),
            interference: InterferenceParams::default(),
            receiver: ReceiverKind::default(),
            modulation: Modulation::default(),
            scheme: TransmitScheme::default(),
            blocks_per_trial: 1,
            stopping: StoppingRule::default(),
            seed: 1,
        }
    }
}

/// Trial indices share a 64-bit stream id with the grid index.
pub(crate) const TRIAL_BITS: u32 = 40;

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n_t == 0 || self.n_r == 0 {
            return bad(format!("antenna counts must be positive (n_t = {}, n_r = {})", self.n_t, self.n_r));
        }
        if self.snr_grid_db.is_empty() {
            return bad("snr_grid_db is empty".into());
        }
        if let Some(s) = self.snr_grid_db.iter().find(|s| s.is_nan() || **s == f64::INFINITY) {
            return bad(format!("snr_grid_db entry {s} (finite values or -inf only)"));
        }
        if self.stopping.max_trials == 0 || self.stopping.max_trials >= 1 << TRIAL_BITS {
            return bad(format!("stopping.max_trials = {} (must be 1 to 2^40 - 1)", self.stopping.max_trials));
        }
        let c = self.stopping.confidence;
        if !(c > 0.5 && c < 1.0) {
            return bad(format!("stopping.confidence = {c} (must lie in (0.5, 1))"));
        }
        let t = self.stopping.target_relative_halfwidth;
        if !(t > 0.0 && t.is_finite()) {
            return bad(format!("stopping.target_relative_halfwidth = {t} (must be positive)"));
        }
        if self.blocks_per_trial == 0 {
            return bad("blocks_per_trial must be positive".into());
        }
        for (name, r) in [
            ("channel.rx_correlation", self.channel.rx_correlation),
            ("channel.tx_correlation", self.channel.tx_correlation),
            ("interference.tx_correlation", self.interference.tx_correlation),
        ] {
            if !(0.0..1.0).contains(&r) {
                return bad(format!("{name} = {r} (must lie in [0, 1))"));
            }
        }
        for (name, k) in [
            ("channel.k_factor", self.channel.k_factor),
            ("interference.k_factor", self.interference.k_factor),
        ] {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("{name} = {k} (must be finite and non-negative)"));
            }
        }
        if self.interference.antennas == 0 {
            return bad("interference.antennas must be positive".into());
        }
        if let Some(i) = self.interference.inr_db.iter().find(|s| s.is_nan() || **s == f64::INFINITY) {
            return bad(format!("interference.inr_db entry {i} (finite values or -inf only)"));
        }
        SpaceTimeCode::for_scheme(self.scheme, self.n_t).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    /// Bits carried by one trial.
    pub fn bits_per_trial(&self) -> Result<u64, SimError> {
        let code = SpaceTimeCode::for_scheme(self.scheme, self.n_t)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok((self.blocks_per_trial * code.symbols() * self.modulation.bits_per_symbol()) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
        assert_eq!(SimConfig::default().bits_per_trial().unwrap(), 4);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut c = SimConfig::default();
        c.snr_grid_db.clear();
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.stopping.max_trials = 0;
        assert!(c.validate().is_err());
        for conf in [0.5, 1.0, 0.2] {
            let mut c = SimConfig::default();
            c.stopping.confidence = conf;
            assert!(c.validate().is_err(), "{conf}");
        }
        let mut c = SimConfig {
            n_t: 5,
            ..SimConfig::default()
        };
        assert!(c.validate().unwrap_err().to_string().contains("5 transmit antennas"));
        c.scheme = TransmitScheme::Multiplexing;
        c.validate().unwrap();
        let c = SimConfig {
            snr_grid_db: vec![f64::NEG_INFINITY],
            ..SimConfig::default()
        };
        c.validate().unwrap();
    }
}
