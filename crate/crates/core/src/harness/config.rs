// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ScenarioParams;
use crate::circuit::{Converters, MappingConfig, OaModel, Topology, TransientOptions};
use crate::detector::DetectorKind;
use crate::error::{Error, Result};
use crate::mapping::MappingScheme;
use crate::metrics::PowerParams;
use crate::modem::SnrConvention;

/// Which detector computes the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    Proposed,
    Conventional,
    DigitalReference,
}

impl Realization {
    pub fn circuit(self) -> Option<Topology> {
        match self {
            Realization::Proposed => Some(Topology::Proposed),
            Realization::Conventional => Some(Topology::Conventional),
            Realization::DigitalReference => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// All LSFCs equal to one; noise set from the configured SNR.
    Snr,
    /// Users dropped in a cell; noise from bandwidth and noise figure.
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Ideal,
    FiniteGain,
    Transient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaUnit {
    /// Fraction of the usable span ω.
    Fraction,
    Siemens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    Beta,
    SigmaM,
    OlgDb,
    KUsers,
    RAntennas,
    GbpHz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { axis: SweepAxis::SnrDb, values: vec![8.0, 12.0, 16.0, 20.0, 24.0, 28.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub max_frames: u64,
    pub target_bit_errors: u64,
    /// Frames simulated between two checks of the stop rule.
    pub batch_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { max_frames: 100_000, target_bit_errors: 500, batch_frames: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    /// Computation time used for efficiency when no transient is solved.
    pub t_compute_s: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Timing { t_compute_s: 110e-9 }
    }
}

/// One Monte Carlo experiment over a single sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_path: String,
    pub detector: DetectorKind,
    pub topology: Realization,
    pub solver: SolverKind,
    pub mode: ChannelMode,
    pub snr_db: f64,
    pub snr_convention: SnrConvention,
    pub qam_order: usize,
    pub sigma_m: f64,
    pub sigma_m_unit: SigmaUnit,
    pub deviate_theta: bool,
    /// Draw new user positions every frame in cell mode.
    pub redraw_lsfc: bool,
    pub scenario: ScenarioParams,
    pub mapping: MappingConfig,
    pub oa: OaModel,
    pub transient: TransientOptions,
    pub converters: Converters,
    pub power: PowerParams,
    pub timing: Timing,
    pub sweep: Sweep,
    pub stop: StopRule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            out_path: "results.csv".into(),
            detector: DetectorKind::Mmse,
            topology: Realization::Proposed,
            solver: SolverKind::Ideal,
            mode: ChannelMode::Snr,
            snr_db: 20.0,
            snr_convention: SnrConvention::PerUserCombined,
            qam_order: 64,
            sigma_m: 0.0,
            sigma_m_unit: SigmaUnit::Fraction,
            deviate_theta: true,
            redraw_lsfc: true,
            scenario: ScenarioParams::default(),
            mapping: MappingConfig::default(),
            oa: OaModel::default(),
            transient: TransientOptions::default(),
            converters: Converters::default(),
            power: PowerParams::default(),
            timing: Timing::default(),
            sweep: Sweep::default(),
            stop: StopRule::default(),
        }
    }
}

/// The shipped defaults file; every key is documented inline.
pub const DEFAULTS_TOML: &str = include_str!("defaults.toml");

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.mapping.range.validate()?;
        self.mapping.scheme.validate()?;
        self.oa.validate()?;
        self.transient.validate()?;
        self.power.validate()?;
        if ![4, 16, 64].contains(&self.qam_order) {
            return Err(Error::Config(format!("unsupported QAM order {}", self.qam_order)));
        }
        if !(self.sigma_m >= 0.0) {
            return Err(Error::Config("sigma_m must be non-negative".into()));
        }
        if !(self.timing.t_compute_s > 0.0) {
            return Err(Error::Config("t_compute_s must be positive".into()));
        }
        if self.stop.max_frames < 1 || self.stop.batch_frames < 1 {
            return Err(Error::Config("max_frames and batch_frames must be at least 1".into()));
        }
        if self.stop.max_frames >= 1 << 40 {
            return Err(Error::Config("max_frames is too large".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        for &v in &self.sweep.values {
            self.at(v)?;
        }
        Ok(())
    }

    /// σ_m in siemens.
    pub fn sigma_m_siemens(&self) -> f64 {
        match self.sigma_m_unit {
            SigmaUnit::Fraction => self.sigma_m * self.mapping.range.omega(),
            SigmaUnit::Siemens => self.sigma_m,
        }
    }

    /// The configuration at one sweep point.
    pub fn at(&self, value: f64) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        let count = |v: f64, what: &str| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{what} must be a positive integer, got {v}")))
            }
        };
        match self.sweep.axis {
            SweepAxis::SnrDb => c.snr_db = value,
            SweepAxis::Beta => match c.mapping.scheme {
                MappingScheme::Fmf { .. } => c.mapping.scheme = MappingScheme::Fmf { beta: value },
                // AMF ignores β; sweeping it gives a flat reference curve
                MappingScheme::Amf => {}
            },
            SweepAxis::SigmaM => c.sigma_m = value,
            SweepAxis::OlgDb => c.oa.open_loop_gain_db = value,
            SweepAxis::KUsers => c.scenario.users = count(value, "k_users")?,
            SweepAxis::RAntennas => c.scenario.antennas = count(value, "r_antennas")?,
            SweepAxis::GbpHz => c.oa.gbp_hz = value,
        }
        c.scenario.validate()?;
        c.mapping.scheme.validate()?;
        c.oa.validate()?;
        if !(c.sigma_m >= 0.0) {
            return Err(Error::Config("sigma_m must be non-negative".into()));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_code() {
        let parsed = ExperimentConfig::from_toml(DEFAULTS_TOML).unwrap();
        assert_eq!(parsed, ExperimentConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.mapping.scheme = MappingScheme::Fmf { beta: 2.5 };
        c.sweep = Sweep { axis: SweepAxis::Beta, values: vec![1.0, 2.0] };
        c.converters.dac_bits = Some(8);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_takes_defaults() {
        let c = ExperimentConfig::from_toml("seed = 9\n[scenario]\nusers = 8\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.scenario.users, 8);
        assert_eq!(c.scenario.antennas, 64);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "unknown_key = 1",
            "qam_order = 32",
            "[stop]\nmax_frames = 0",
            "[sweep]\naxis = \"k_users\"\nvalues = [2.5]",
            "[sweep]\naxis = \"snr_db\"\nvalues = []",
            "[mapping.scheme]\nkind = \"fmf\"\nbeta = -1.0",
            "sigma_m = -0.1",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn sweep_application() {
        let mut c = ExperimentConfig::default();
        c.mapping.scheme = MappingScheme::Fmf { beta: 1.0 };
        c.sweep.axis = SweepAxis::Beta;
        assert_eq!(c.at(3.0).unwrap().mapping.scheme, MappingScheme::Fmf { beta: 3.0 });
        c.sweep.axis = SweepAxis::KUsers;
        assert_eq!(c.at(8.0).unwrap().scenario.users, 8);
        c.sweep.axis = SweepAxis::OlgDb;
        assert_eq!(c.at(40.0).unwrap().oa.open_loop_gain_db, 40.0);
    }

    #[test]
    fn sigma_units() {
        let mut c = ExperimentConfig { sigma_m: 0.01, ..Default::default() };
        assert!((c.sigma_m_siemens() - 0.299e-6).abs() < 1e-18);
        c.sigma_m_unit = SigmaUnit::Siemens;
        assert_eq!(c.sigma_m_siemens(), 0.01);
    }
}
