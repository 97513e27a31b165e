//! TOML run configuration. Every field is optional; missing values fall
//! back to the built-in defaults, command-line flags override both.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub generate: GenerateConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub identify: IdentifySection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub amplitudes_deg: Option<Vec<f64>>,
    pub freq: Option<f64>,
    pub swing_duration: Option<f64>,
    pub translation_duration: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub variant: Option<String>,
    pub data: Option<String>,
    pub epochs: Option<usize>,
    pub width: Option<usize>,
    pub hidden_layers: Option<usize>,
    pub lr: Option<f64>,
    /// `fixed` or `plateau`.
    pub schedule: Option<String>,
    pub lambda: Option<f64>,
    pub scalar_lr: Option<f64>,
    pub seed: Option<u64>,
    /// `f32` or `f64`.
    pub precision: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifySection {
    pub method: Option<String>,
    pub data: Option<String>,
    pub seed: Option<u64>,
    pub nm_max_iters: Option<usize>,
    pub ga_population: Option<usize>,
    pub ga_generations: Option<usize>,
    pub lm_max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub mode: Option<String>,
    pub traj: Option<u8>,
    pub noise: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub v_points: Option<usize>,
    pub fn_min: Option<f64>,
    pub fn_max: Option<f64>,
    pub fn_points: Option<usize>,
}

impl Config {
    pub fn from_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }
}
