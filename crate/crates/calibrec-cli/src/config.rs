//! The experiment file: one TOML document with a schema version that
//! declares the simulator, calibration, action grid, feature encoding,
//! training, evaluation, and policy roster for a full experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use calibrec_core::calibration::CalibrationConfig;
use calibrec_core::ope::OpeConfig;
use calibrec_core::policy::ExplorerKind;
use calibrec_core::reward_model::{FeatureSpec, TrainConfig};
use calibrec_core::simulator::{SimConfig, SlateMode};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn default_slate_mode() -> SlateMode {
    SlateMode::CalibratedGreedy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub output_dir: PathBuf,
    pub sim: SimConfig,
    pub calibration: CalibrationConfig,
    /// How `simulate` turns the chosen action into a slate. The sequential
    /// mode is the blending baseline's literal construction, kept for
    /// fidelity checks.
    #[serde(default = "default_slate_mode")]
    pub slate_mode: SlateMode,
    pub actions: ActionsConfig,
    pub features: FeaturesConfig,
    pub train: TrainConfig,
    pub ope: OpeSection,
    pub logging: LoggingConfig,
    pub policies: Vec<PolicyConfig>,
    pub evaluate: EvaluateConfig,
    pub abtest: AbtestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionsConfig {
    /// Points on the podcast-share grid (11 gives 0.0, 0.1, ..., 1.0).
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesConfig {
    pub embed_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeSection {
    pub cap: f64,
    pub min_propensity: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    /// Caps reported side by side so cap sensitivity is visible.
    pub cap_sweep: Vec<f64>,
}

impl OpeSection {
    pub fn ope_config(&self, cap: f64) -> OpeConfig {
        OpeConfig {
            cap,
            min_propensity: self.min_propensity,
            bootstrap_resamples: self.bootstrap_resamples,
            bootstrap_seed: self.bootstrap_seed,
        }
    }
}

/// The data-collection policy behind `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum LoggingConfig {
    Uniform,
    Gaussian { sigma: f64, window_days: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub name: String,
    #[serde(flatten)]
    pub kind: PolicyKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PolicyKind {
    /// Learned contextual bandit; requires a trained checkpoint.
    Cb { epsilon: f64, explorer: ExplorerKind },
    /// Historical-preference calibration over a window.
    Sc { window_days: u32 },
    /// Fixed business mix.
    Mb { business_dist: Vec<f64> },
    Uniform,
    /// Ground-truth oracle (simulator cohorts required).
    Oracle,
    /// Gaussian logging policy evaluated as a target.
    Gaussian { sigma: f64, window_days: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    /// Policy name lifts are reported against.
    pub baseline: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbtestConfig {
    pub treatment: String,
    pub control: String,
    /// Fresh-traffic horizon in days.
    pub days: u32,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    /// Two-sided confidence level of the lift interval.
    pub ci_level: f64,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(format!("serialize: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.sim.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.calibration.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.sim.slate_size != self.calibration.slate_size {
            return Err(CliError::Config(format!(
                "sim.slate_size {} and calibration.slate_size {} must agree",
                self.sim.slate_size, self.calibration.slate_size
            )));
        }
        if self.actions.grid_points < 2 {
            return Err(CliError::Config("actions.grid_points must be >= 2".into()));
        }
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.ope.ope_config(self.ope.cap).validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.ope.cap_sweep.is_empty() {
            return Err(CliError::Config("ope.cap_sweep must be non-empty".into()));
        }
        if self.policies.is_empty() {
            return Err(CliError::Config("at least one policy must be declared".into()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies.iter().take(i).any(|other| other.name == p.name) {
                return Err(CliError::Config(format!("duplicate policy name {:?}", p.name)));
            }
        }
        for name in [&self.evaluate.baseline, &self.abtest.treatment, &self.abtest.control] {
            if !self.policies.iter().any(|p| &p.name == name) {
                return Err(CliError::Config(format!("referenced policy {name:?} not declared")));
            }
        }
        if !(self.abtest.ci_level > 0.0 && self.abtest.ci_level < 1.0) {
            return Err(CliError::Config("abtest.ci_level must be in (0, 1)".into()));
        }
        Ok(())
    }

    /// The feature encoding implied by this experiment.
    pub fn feature_spec(&self) -> FeatureSpec {
        FeatureSpec::new(
            2,
            self.sim.aggregate_windows.clone(),
            self.sim.countries.clone(),
            self.sim.devices.clone(),
            self.sim.cohorts.len(),
            self.features.embed_dim,
        )
    }

    /// FNV-1a hash of the canonical serialized config, for the metadata
    /// sidecar.
    pub fn config_hash(&self) -> Result<String, CliError> {
        let canonical = self.to_toml()?;
        Ok(format!("{:016x}", calibrec_core::simulator::fnv1a(canonical.as_bytes())))
    }
}
