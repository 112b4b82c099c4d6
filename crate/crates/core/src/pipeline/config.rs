use serde::{Deserialize, Serialize};

use crate::coarse::CoarseConfig;
use crate::error::{Error, Result};
use crate::exine::ExineConfig;
use crate::morpho::MorphoConfig;
use crate::preproc::PreprocConfig;
use crate::snake::{GvfConfig, SnakeConfig};

/// Orchestration settings that belong to no single stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    /// Pixels added around each coarse grain before the fine stages.
    pub crop_margin: usize,
    /// Grains whose second-moment elongation exceeds this are flagged as a
    /// possible cluster of touching grains.
    pub cluster_elongation: f64,
    pub write_overlay: bool,
    pub write_grain_images: bool,
    pub write_masks: bool,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            crop_margin: 20,
            cluster_elongation: 1.2,
            write_overlay: true,
            write_grain_images: true,
            write_masks: true,
        }
    }
}

/// Every tunable of the pipeline. Omitted sections and keys take their
/// defaults; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preproc: PreprocConfig,
    pub morpho: MorphoConfig,
    pub coarse: CoarseConfig,
    pub snake: SnakeConfig,
    pub gvf: GvfConfig,
    pub exine: ExineConfig,
    pub pipeline: PipelineSection,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.preproc.validate()?;
        self.morpho.validate()?;
        self.coarse.validate()?;
        self.snake.validate()?;
        self.gvf.validate()?;
        self.exine.validate()?;
        if !(self.pipeline.cluster_elongation >= 1.0) {
            return Err(Error::Config("pipeline.cluster_elongation must be >= 1".into()));
        }
        Ok(())
    }

    /// Parses and validates a TOML config.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml_str("").unwrap(), cfg);
    }

    #[test]
    fn partial_and_invalid() {
        let cfg = PipelineConfig::from_toml_str("[exine]\ntau_r = 0.2\n").unwrap();
        assert_eq!(cfg.exine.tau_r, 0.2);
        assert_eq!(cfg.exine.erosion_se_radius, 2);
        assert!(matches!(PipelineConfig::from_toml_str("[exine]\ntau_r = 0.0\n"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_toml_str("[snake]\nbogus = 1\n"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_toml_str("[nope]\n"), Err(Error::Config(_))));
    }
}
