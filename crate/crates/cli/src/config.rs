//! Run configuration: one TOML file with `[sim]`, `[channel]`,
//! `[interference]`, `[antenna]`, `[pattern]` and `[network]` sections.
//! Every key is optional; omitted keys take the defaults below.

use std::path::{Path, PathBuf};

use linksim_core::antenna::{AntennaPattern, Cut};
use linksim_core::network::{LinkBudget, PathLossModel};
use linksim_core::simulator::{
    ChannelParams, InterferenceParams, Modulation, ReceiverKind, SimConfig, StoppingRule,
    TransmitScheme,
};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub sim: SimSection,
    pub channel: ChannelParams,
    pub interference: InterferenceSection,
    pub antenna: AntennaSection,
    pub pattern: PatternSection,
    pub network: NetworkSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            sim: SimSection::default(),
            channel: ChannelParams::default(),
            interference: InterferenceSection::default(),
            antenna: AntennaSection::default(),
            pattern: PatternSection::default(),
            network: NetworkSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Antenna configurations as `"<n_t>x<n_r>"`; one BER file each.
    pub arrays: Vec<String>,
    pub snr_grid_db: Vec<f64>,
    pub receiver: ReceiverKind,
    pub modulation: Modulation,
    pub scheme: TransmitScheme,
    pub blocks_per_trial: usize,
    pub stopping: StoppingRule,
}

impl Default for SimSection {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            arrays: vec!["2x2".into(), "4x4".into()],
            snr_grid_db: sim.snr_grid_db,
            receiver: sim.receiver,
            modulation: sim.modulation,
            scheme: sim.scheme,
            blocks_per_trial: sim.blocks_per_trial,
            stopping: sim.stopping,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceSource {
    /// No interferers.
    None,
    /// `count` interferers at a common `inr_db`.
    Common,
    /// One interferer per entry of `inr_list_db`.
    List,
    /// INRs taken from the network interference profile.
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceSection {
    pub source: InterferenceSource,
    pub count: usize,
    pub inr_db: f64,
    pub inr_list_db: Vec<f64>,
    pub antennas: usize,
    pub k_factor: f64,
    pub tx_correlation: f64,
}

impl Default for InterferenceSection {
    fn default() -> Self {
        Self {
            source: InterferenceSource::Common,
            count: 10,
            inr_db: 3.0,
            inr_list_db: Vec::new(),
            antennas: 1,
            k_factor: 0.0,
            tx_correlation: 0.0,
        }
    }
}

/// Sector antenna; angles in degrees, gains in dB(i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    pub g_max: f64,
    pub theta_3db_h: f64,
    pub theta_3db_v: f64,
    pub g_fb: f64,
    pub downtilt: f64,
    pub sidelobe_suppression: f64,
}

impl Default for AntennaSection {
    fn default() -> Self {
        let p = AntennaPattern::<f64>::default();
        Self {
            g_max: p.g_max,
            theta_3db_h: p.theta_3db_h,
            theta_3db_v: p.theta_3db_v,
            g_fb: p.g_fb,
            downtilt: p.downtilt,
            sidelobe_suppression: p.sidelobe_suppression,
        }
    }
}

impl AntennaSection {
    pub fn pattern(&self) -> AntennaPattern<f64> {
        AntennaPattern {
            g_max: self.g_max,
            theta_3db_h: self.theta_3db_h,
            theta_3db_v: self.theta_3db_v,
            g_fb: self.g_fb,
            downtilt: self.downtilt,
            sidelobe_suppression: self.sidelobe_suppression,
            ..AntennaPattern::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternSection {
    pub cuts: Vec<Cut>,
    pub step_deg: f64,
}

impl Default for PatternSection {
    fn default() -> Self {
        Self {
            cuts: vec![Cut::Vertical, Cut::Horizontal],
            step_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossSection {
    pub reference_distance_km: f64,
    pub reference_loss_db: f64,
    pub exponent: f64,
}

impl Default for PathLossSection {
    fn default() -> Self {
        let m = PathLossModel::<f64>::default();
        Self {
            reference_distance_km: m.reference_distance_km,
            reference_loss_db: m.reference_loss_db,
            exponent: m.exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    /// Site table file; the bundled inter-site distance list when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site_table: Option<PathBuf>,
    pub serving_sector: String,
    /// Mobile placed this far along the serving sector's boresight...
    pub ms_distance_km: f64,
    /// ...unless an explicit `[x, y]` position is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms_position_km: Option<[f64; 2]>,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub bs_height_m: f64,
    pub ms_height_m: f64,
    pub path_loss: PathLossSection,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let b = LinkBudget::<f64>::default();
        Self {
            site_table: None,
            serving_sector: "Site 1/0".into(),
            ms_distance_km: 0.5,
            ms_position_km: None,
            tx_power_dbm: b.tx_power_dbm,
            noise_floor_dbm: b.noise_floor_dbm,
            bs_height_m: b.bs_height_m,
            ms_height_m: b.ms_height_m,
            path_loss: PathLossSection::default(),
        }
    }
}

impl NetworkSection {
    pub fn budget(&self) -> LinkBudget<f64> {
        LinkBudget {
            tx_power_dbm: self.tx_power_dbm,
            noise_floor_dbm: self.noise_floor_dbm,
            bs_height_m: self.bs_height_m,
            ms_height_m: self.ms_height_m,
        }
    }

    pub fn path_loss_model(&self) -> PathLossModel<f64> {
        PathLossModel {
            reference_distance_km: self.path_loss.reference_distance_km,
            reference_loss_db: self.path_loss.reference_loss_db,
            exponent: self.path_loss.exponent,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Reads a config file, or the config snapshot embedded in a run manifest.
pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|message| ConfigError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse(text: &str) -> Result<Config, String> {
    let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    if table.contains_key("command") && table.contains_key("config") {
        let m: RunManifest = toml::from_str(text).map_err(|e| e.to_string())?;
        return Ok(m.config);
    }
    toml::from_str(text).map_err(|e| e.to_string())
}

/// Parses `"<n_t>x<n_r>"`.
pub fn parse_array(s: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || ConfigError::Invalid(format!("sim.arrays entry `{s}` is not of the form <n_t>x<n_r>"));
    let (t, r) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let n_t: usize = t.trim().parse().map_err(|_| bad())?;
    let n_r: usize = r.trim().parse().map_err(|_| bad())?;
    if n_t == 0 || n_r == 0 {
        return Err(bad());
    }
    Ok((n_t, n_r))
}

impl Config {
    /// Simulation settings for one antenna configuration, given the resolved
    /// interferer INRs.
    pub fn sim_config(&self, n_t: usize, n_r: usize, inr_db: Vec<f64>) -> SimConfig {
        SimConfig {
            n_t,
            n_r,
            snr_grid_db: self.sim.snr_grid_db.clone(),
            channel: self.channel,
            interference: InterferenceParams {
                inr_db,
                antennas: self.interference.antennas,
                k_factor: self.interference.k_factor,
                tx_correlation: self.interference.tx_correlation,
            },
            receiver: self.sim.receiver,
            modulation: self.sim.modulation,
            scheme: self.sim.scheme,
            blocks_per_trial: self.sim.blocks_per_trial,
            stopping: self.sim.stopping,
            seed: self.seed,
        }
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(parse("").unwrap(), Config::default());
    }

    #[test]
    fn roundtrips_through_toml() {
        let mut c = Config::default();
        c.sim.snr_grid_db = vec![f64::NEG_INFINITY, 3.5];
        c.network.ms_position_km = Some([0.25, -1.0]);
        c.antenna.sidelobe_suppression = f64::INFINITY;
        c.interference.source = InterferenceSource::Network;
        assert_eq!(parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn dotted_sections() {
        let c = parse(
            "seed = 9\n[sim]\narrays = [\"1x1\"]\nreceiver = \"zf\"\nmodulation = \"16qam\"\n\
             [sim.stopping]\nmax_trials = 5\n[network.path_loss]\nexponent = 4.0\n",
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.sim.arrays, vec!["1x1".to_string()]);
        assert_eq!(c.sim.receiver, ReceiverKind::Zf);
        assert_eq!(c.sim.modulation, Modulation::Qam16);
        assert_eq!(c.sim.stopping.max_trials, 5);
        assert_eq!(c.sim.stopping.min_bit_errors, 100);
        assert_eq!(c.network.path_loss.exponent, 4.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("[antenna]\ngmax = 3.0\n").unwrap_err();
        assert!(err.contains("gmax"), "{err}");
    }

    #[test]
    fn array_names() {
        assert_eq!(parse_array("2x2").unwrap(), (2, 2));
        assert_eq!(parse_array("4X1").unwrap(), (4, 1));
        assert!(parse_array("2by2").is_err());
        assert!(parse_array("0x2").is_err());
    }
}
