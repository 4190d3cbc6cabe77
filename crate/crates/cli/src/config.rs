use std::path::{Path, PathBuf};

use quantos::model::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    pub model: ModelParams,
    pub winding: WindingConfig,
    #[serde(rename = "phase-diagram")]
    pub phase_diagram: PhaseDiagramConfig,
    #[serde(rename = "fisher-scaling")]
    pub fisher_scaling: FisherScalingConfig,
    #[serde(rename = "resonance-t1")]
    pub resonance_t1: ResonanceT1Config,
    #[serde(rename = "resonance-omega")]
    pub resonance_omega: ResonanceOmegaConfig,
    #[serde(rename = "classical-shift")]
    pub classical_shift: ClassicalShiftConfig,
    #[serde(rename = "validate-cr")]
    pub validate_cr: ValidateCrConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("quantos-out"),
            seed: 2024,
            model: ModelParams::default(),
            winding: WindingConfig::default(),
            phase_diagram: PhaseDiagramConfig::default(),
            fisher_scaling: FisherScalingConfig::default(),
            resonance_t1: ResonanceT1Config::default(),
            resonance_omega: ResonanceOmegaConfig::default(),
            classical_shift: ClassicalShiftConfig::default(),
            validate_cr: ValidateCrConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindingConfig {
    pub n_k: usize,
}

impl Default for WindingConfig {
    fn default() -> Self {
        Self { n_k: 1024 }
    }
}

/// Grids cover `(min, max]` with `points` values per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub t1_min: f64,
    pub t1_max: f64,
    pub t1_points: usize,
    pub t2_min: f64,
    pub t2_max: f64,
    pub t2_points: usize,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            t1_min: 0.0,
            t1_max: 2.0,
            t1_points: 50,
            t2_min: 0.0,
            t2_max: 2.0,
            t2_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisherScalingConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Keep adding sizes until the information plateaus.
    pub saturate: bool,
    pub saturate_n_max: usize,
    pub saturate_chunk: usize,
}

impl Default for FisherScalingConfig {
    fn default() -> Self {
        Self {
            n_min: 11,
            n_max: 61,
            saturate: false,
            saturate_n_max: 201,
            saturate_chunk: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceT1Config {
    pub t1_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for ResonanceT1Config {
    fn default() -> Self {
        Self {
            t1_values: vec![0.5, 0.6, 0.65, 0.69],
            omega_values: vec![0.0],
            n_min: 5,
            n_max: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceOmegaConfig {
    pub n_values: Vec<usize>,
    /// Log-spaced grid from `omega_min` to `omega_max`, plus zero.
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    /// Also scan the negative frequencies.
    pub mirrored: bool,
}

impl Default for ResonanceOmegaConfig {
    fn default() -> Self {
        Self {
            n_values: vec![17, 21],
            omega_min: 1e-9,
            omega_max: 1e-2,
            omega_points: 281,
            mirrored: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalShiftConfig {
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for ClassicalShiftConfig {
    fn default() -> Self {
        Self { n_min: 5, n_max: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateCrConfig {
    pub n_samples: usize,
    pub batches: usize,
    pub true_gamma: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

impl Default for ValidateCrConfig {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            batches: 200,
            true_gamma: 0.5,
            bracket_lo: 0.0,
            bracket_hi: 1.0,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Read(PathBuf, std::io::Error),
    Parse(PathBuf, toml::de::Error),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Read(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            Self::Parse(p, e) => write!(f, "invalid config {}: {}", p.display(), e.message()),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(p.to_path_buf(), e))?;
                toml::from_str(&text).map_err(|e| ConfigError::Parse(p.to_path_buf(), e))
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn partial_sections_keep_remaining_defaults() {
        let c: RunConfig = toml::from_str("[model]\nt1 = 0.69\n[resonance-omega]\nn_values = [25]\n").unwrap();
        assert_eq!(c.model.t1, 0.69);
        assert_eq!(c.model.gamma, 0.7);
        assert_eq!(c.resonance_omega.n_values, vec![25]);
        assert_eq!(c.resonance_omega.omega_points, 281);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[model]\nt3 = 1.0\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
