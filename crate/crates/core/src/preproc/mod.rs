//! Intensity and edge preprocessing.

mod clahe;
mod diffusion;
mod median;
mod sobel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use clahe::clahe;
pub use diffusion::anisotropic_diffuse;
pub use median::median_filter;
pub use sobel::{gradient_energy, otsu_threshold, sobel_edges, sobel_gradients, sobel_magnitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    Otsu,
    Fixed,
}

/// Which gray image feeds the grain-level edge energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    /// After CLAHE and median filtering.
    #[default]
    Preprocessed,
    /// The grayscale input as read.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocConfig {
    pub clahe_tile: usize,
    /// Clip limit in multiples of the uniform bin height.
    pub clahe_clip: f64,
    pub median_radius: usize,
    pub pm_iterations: usize,
    pub pm_kappa: f64,
    pub pm_lambda: f64,
    pub sobel_threshold_mode: ThresholdMode,
    pub sobel_fixed_threshold: f64,
    pub energy_source: EnergySource,
}

impl Default for PreprocConfig {
    fn default() -> Self {
        Self {
            clahe_tile: 64,
            clahe_clip: 2.0,
            median_radius: 2,
            pm_iterations: 15,
            pm_kappa: 30.0,
            pm_lambda: 0.2,
            sobel_threshold_mode: ThresholdMode::Otsu,
            sobel_fixed_threshold: 100.0,
            energy_source: EnergySource::Preprocessed,
        }
    }
}

impl PreprocConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(format!("preproc.{m}")));
        if self.clahe_tile < 8 {
            return err("clahe_tile must be >= 8");
        }
        if !(self.clahe_clip >= 1.0) {
            return err("clahe_clip must be >= 1");
        }
        if self.median_radius < 1 {
            return err("median_radius must be >= 1");
        }
        if !(self.pm_lambda > 0.0 && self.pm_lambda <= 0.25) {
            return err("pm_lambda must be in (0, 0.25]");
        }
        if self.pm_iterations < 1 {
            return err("pm_iterations must be >= 1");
        }
        if !(self.pm_kappa > 0.0) {
            return err("pm_kappa must be > 0");
        }
        if !(self.sobel_fixed_threshold >= 0.0) {
            return err("sobel_fixed_threshold must be >= 0");
        }
        Ok(())
    }
}
