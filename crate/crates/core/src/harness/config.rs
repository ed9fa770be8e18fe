//! TOML experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{KernelConfig, PathSpec, Scatterer, ScattererScene, SpatialModel};
use crate::estimator::{EstimatorConfig, SupportMethod};
use crate::parallel::Execution;
use crate::pilots::PilotLayout;
use crate::{Error, Result};

/// Channel estimators compared in experiment C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMethod {
    ScsFri,
    FriIndependent,
    Lowpass,
    ScsFriHalfPilots,
}

impl ChannelMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelMethod::ScsFri => "scs-fri",
            ChannelMethod::FriIndependent => "fri-independent",
            ChannelMethod::Lowpass => "lowpass",
            ChannelMethod::ScsFriHalfPilots => "scs-fri-half-pilots",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Antenna count for uncorrelated fading; ignored when a scene is given.
    #[serde(default = "default_antennas")]
    pub antennas: usize,
    /// Paths for uncorrelated fading. With a scene, the scatterers' paths are
    /// used instead.
    #[serde(default)]
    pub paths: Vec<PathSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<ScattererScene>,
}

fn default_antennas() -> usize {
    4
}

impl ChannelConfig {
    pub fn paths(&self) -> Vec<PathSpec> {
        match &self.scene {
            Some(scene) => scene.paths(),
            None => self.paths.clone(),
        }
    }

    pub fn spatial(&self) -> SpatialModel {
        match &self.scene {
            Some(scene) => SpatialModel::Scene(scene.clone()),
            None => SpatialModel::Uncorrelated { antennas: self.antennas },
        }
    }

    pub fn antenna_count(&self) -> usize {
        self.scene.as_ref().map_or(self.antennas, |s| s.antenna_count())
    }
}

/// Experiment-specific knobs; each driver reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    /// Experiment A: antenna counts swept.
    pub antenna_counts: Vec<usize>,
    /// Experiment A: antenna count of the Prony/ESPRIT/Cadzow comparison.
    pub comparison_antennas: usize,
    /// Experiment B: second-path offsets in sampling steps.
    pub separations: Vec<f64>,
    /// Experiment B: ToA mismatch half-widths in seconds.
    pub epsilons: Vec<f64>,
    /// Experiment B: fading draws of the full Monte-Carlo bound.
    pub fisher_draws: usize,
    /// Experiment C: estimators compared.
    pub methods: Vec<ChannelMethod>,
    /// Experiment C: pilots kept by the half-pilot variant.
    pub half_pilot_count: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            antenna_counts: vec![1, 2, 4, 8],
            comparison_antennas: 4,
            separations: vec![1.0, 2.0],
            epsilons: vec![0.0, 1e-9],
            fisher_draws: 10_000,
            methods: vec![
                ChannelMethod::ScsFri,
                ChannelMethod::FriIndependent,
                ChannelMethod::Lowpass,
                ChannelMethod::ScsFriHalfPilots,
            ],
            half_pilot_count: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    /// Global input SNR grid in dB.
    pub snr_db: Vec<f64>,
    /// Per-antenna ToA mismatch half-width in seconds.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default = "KernelConfig::table_iii")]
    pub kernel: KernelConfig,
    #[serde(default = "PilotLayout::table_iii")]
    pub pilots: PilotLayout,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub experiment: ExperimentOptions,
}

fn default_name() -> String {
    "experiment".into()
}

fn snr_grid(lo: i32, hi: i32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(f64::from).collect()
}

impl ExperimentConfig {
    /// Reference 511-sample frame with the two-path channel of experiment A.
    pub fn table_iii() -> Self {
        let kernel = KernelConfig::table_iii();
        let t1 = 0.5e-6;
        ExperimentConfig {
            name: "table-iii".into(),
            seed: 7,
            trials: 400,
            snr_db: snr_grid(-10, 40, 5),
            epsilon: 0.0,
            execution: Execution::Parallel,
            kernel,
            pilots: PilotLayout::table_iii(),
            estimator: EstimatorConfig::new(2, SupportMethod::Esprit, 3),
            channel: ChannelConfig {
                antennas: 4,
                paths: vec![PathSpec::new(t1, 1.0), PathSpec::new(t1 + 2.0 * kernel.step(), 0.1)],
                scene: None,
            },
            experiment: ExperimentOptions::default(),
        }
    }

    /// Two equal-power paths on four uncorrelated antennas.
    pub fn experiment_b() -> Self {
        let mut cfg = Self::table_iii();
        cfg.name = "experiment-b".into();
        cfg.snr_db = snr_grid(0, 60, 5);
        cfg.channel.paths = vec![PathSpec::new(0.5e-6, 1.0)];
        cfg
    }

    /// Four scatterers seen by five antennas on a 10 cm circle; scatterer
    /// parameters are illustrative defaults.
    pub fn experiment_c() -> Self {
        let mut cfg = Self::table_iii();
        cfg.name = "experiment-c".into();
        cfg.snr_db = snr_grid(0, 50, 5);
        cfg.epsilon = cfg.kernel.step() / 50.0;
        cfg.estimator.k = 4;
        let scatterer = |azimuth: f64, kappa: f64, toa: f64, amp: f64| Scatterer {
            azimuth,
            kappa,
            path: PathSpec::new(toa, amp),
        };
        cfg.channel = ChannelConfig {
            antennas: 5,
            paths: Vec::new(),
            scene: Some(ScattererScene {
                carrier_omega: 2.0 * std::f64::consts::PI * 2.6e9,
                wave_speed: 299_792_458.0,
                antennas: ScattererScene::circular_array(5, 0.1),
                scatterers: vec![
                    scatterer(0.3, 40.0, 0.20e-6, 1.0),
                    scatterer(1.9, 8.0, 0.55e-6, 0.7),
                    scatterer(3.4, 80.0, 0.95e-6, 0.5),
                    scatterer(4.8, 3.0, 1.40e-6, 0.35),
                ],
            }),
        };
        cfg
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "a" | "table-iii" => Some(Self::table_iii()),
            "b" => Some(Self::experiment_b()),
            "c" => Some(Self::experiment_c()),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serialises")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db must be a non-empty list of finite values");
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad("epsilon must be finite and non-negative");
        }
        self.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.pilots
            .pilot_indices(&self.kernel)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.estimator.k == 0 {
            return bad("estimator.k must be at least 1");
        }
        if let Some(scene) = &self.channel.scene {
            scene.validate().map_err(|e| Error::Config(e.to_string()))?;
        } else if self.channel.antennas == 0 {
            return bad("channel.antennas must be at least 1");
        }
        for p in self.channel.paths() {
            if !(p.toa.is_finite() && (0.0..self.kernel.tau).contains(&p.toa)) {
                return bad("path ToAs must lie in [0, tau)");
            }
            if !(p.expected_amplitude.is_finite() && p.expected_amplitude > 0.0) {
                return bad("path amplitudes must be positive");
            }
        }
        if self.experiment.antenna_counts.contains(&0) {
            return bad("experiment.antenna_counts must be positive");
        }
        Ok(())
    }
}
