//! Fine-stage active contour: gradient vector flow, semi-implicit snake
//! evolution with tension, rigidity and balloon terms, and contour/mask
//! conversion.

mod discretize;
mod evolve;
mod gvf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use discretize::{contour_to_mask, discretize_perimeter};
pub use evolve::{evolve, internal_matrix};
pub use gvf::{gvf, gvf_with_residuals, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnakeConfig {
    pub iterations: usize,
    /// Keep one traced perimeter point out of this many.
    pub sample_stride: usize,
    /// Tension (second-difference) weight.
    pub alpha: f64,
    /// Rigidity / thin-plate (fourth-difference) weight.
    pub beta: f64,
    /// Time step.
    pub gamma: f64,
    pub kappa_gvf: f64,
    /// Balloon weight along the outward normal; negative deflates.
    pub kappa_balloon: f64,
    /// Use the unit direction of the GVF field instead of its raw value.
    pub normalize_field: bool,
    /// Re-space points uniformly in arc length every this many iterations (0 = never).
    pub resample_every: usize,
}

impl Default for SnakeConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            sample_stride: 20,
            alpha: 0.01,
            beta: 0.01,
            gamma: 1.0,
            kappa_gvf: 0.5,
            kappa_balloon: 0.05,
            normalize_field: true,
            resample_every: 10,
        }
    }
}

impl SnakeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 || self.sample_stride < 1 {
            return Err(Error::Config("snake.iterations and snake.sample_stride must be >= 1".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config("snake.gamma must be > 0".into()));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("snake.alpha and snake.beta must be >= 0".into()));
        }
        if !self.kappa_gvf.is_finite() || !self.kappa_balloon.is_finite() {
            return Err(Error::Config("snake force weights must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GvfConfig {
    /// Smoothness weight of the flow field.
    pub mu: f64,
    pub iterations: usize,
}

impl Default for GvfConfig {
    fn default() -> Self {
        Self {
            mu: 0.01,
            iterations: 200,
        }
    }
}

impl GvfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Config("gvf.mu must be > 0".into()));
        }
        Ok(())
    }
}
