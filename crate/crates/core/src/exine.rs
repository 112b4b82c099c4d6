//! Exine (outer wall) segmentation inside a segmented grain.
//!
//! The grain mask is eroded repeatedly and the fraction of edge pixels left
//! inside each eroded mask is recorded. The textured exine keeps that
//! fraction high until the erosion front passes into the smoother inner part,
//! where it drops. The last significant drop, found by scanning the
//! normalized first difference backwards, gives a rough inner-part mask that
//! seeds a snake.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, Contour, FloatImage, Raster};
use crate::morpho::{erode, erosion_sequence, DiskSE};
use crate::preproc::{anisotropic_diffuse, gradient_energy, sobel_edges, PreprocConfig};
use crate::snake::{contour_to_mask, discretize_perimeter, evolve, gvf, GvfConfig, SnakeConfig};

/// Image the exine snake's edge energy is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExineEnergy {
    #[default]
    Diffused,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExineConfig {
    /// Threshold on the normalized derivative of the edge-ratio profile.
    pub tau_r: f64,
    pub erosion_se_radius: usize,
    /// Gaps implying a thinner exine than this are ignored.
    pub min_exine_px: usize,
    /// Gaps implying an exine thicker than this fraction of the grain's
    /// equivalent radius are ignored.
    pub max_exine_fraction: f64,
    /// Edges closer than this to the grain boundary are left out of the
    /// profile; they belong to the grain outline, not the exine texture.
    pub rim_band_px: usize,
    /// Eroded masks with fewer pixels are left out of the profile; a handful
    /// of pixels gives ratios that swing between 0 and 1.
    pub min_profile_px: usize,
    pub energy_source: ExineEnergy,
    /// Unit-normalize the GVF for the inner snake. Off by default: the
    /// snake starts next to the inner boundary, and normalizing lifts weak
    /// texture edges in the exine to full strength.
    pub inner_normalize_field: bool,
}

impl Default for ExineConfig {
    fn default() -> Self {
        Self {
            tau_r: 0.1,
            erosion_se_radius: 2,
            min_exine_px: 2,
            max_exine_fraction: 0.5,
            rim_band_px: 3,
            min_profile_px: 50,
            energy_source: ExineEnergy::Diffused,
            inner_normalize_field: false,
        }
    }
}

impl ExineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_r > 0.0 && self.tau_r <= 1.0) {
            return Err(Error::Config("exine.tau_r must be in (0, 1]".into()));
        }
        if self.erosion_se_radius < 1 {
            return Err(Error::Config("exine.erosion_se_radius must be >= 1".into()));
        }
        if !(self.max_exine_fraction > 0.0) {
            return Err(Error::Config("exine.max_exine_fraction must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRatioProfile {
    /// Edge fraction inside each non-empty eroded mask.
    pub ratios: Vec<f64>,
    /// `ratios[j] - ratios[j+1]`, divided by the largest absolute difference.
    pub derivative: Vec<f64>,
    /// Pixel count of each eroded mask.
    pub n_points_total: Vec<usize>,
    /// Edge pixels inside each eroded mask.
    pub n_edge: Vec<usize>,
}

impl EdgeRatioProfile {
    /// Builds a profile from raw ratios (counts unknown).
    pub fn from_ratios(ratios: Vec<f64>) -> Self {
        let derivative = normalized_differences(&ratios);
        Self {
            derivative,
            n_points_total: Vec::new(),
            n_edge: Vec::new(),
            ratios,
        }
    }

    /// Equivalent radius of the un-eroded grain, when counts are known.
    pub fn grain_equiv_radius(&self) -> Option<f64> {
        self.n_points_total
            .first()
            .map(|&a| (a as f64 / std::f64::consts::PI).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapDetection {
    /// Index into the erosion sequence of the mask just after the gap.
    pub erosion_index: usize,
    pub found: bool,
}

impl GapDetection {
    pub const NOT_FOUND: GapDetection = GapDetection {
        erosion_index: 0,
        found: false,
    };
}

fn normalized_differences(ratios: &[f64]) -> Vec<f64> {
    let diffs: Vec<f64> = ratios.windows(2).map(|w| w[0] - w[1]).collect();
    let max = diffs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if max > 0.0 {
        diffs.iter().map(|d| d / max).collect()
    } else {
        diffs
    }
}

/// Edge-point ratio of every mask in the erosion sequence of `grain_mask`
/// holding at least `min_px` pixels (and always at least one).
pub fn edge_ratio_profile(
    edge_mask: &BinaryMask,
    grain_mask: &BinaryMask,
    se: &DiskSE,
    min_px: usize,
) -> Result<EdgeRatioProfile> {
    edge_mask.ensure_same_dims(grain_mask)?;
    let seq = erosion_sequence(grain_mask, se)?;
    Ok(profile_from_sequence(edge_mask, &seq, min_px))
}

fn profile_from_sequence(edge_mask: &BinaryMask, seq: &[BinaryMask], min_px: usize) -> EdgeRatioProfile {
    // The sequence shrinks monotonically, so this keeps a prefix. The grain
    // itself always stays, however small.
    let min_px = min_px.max(1);
    let non_empty = seq
        .iter()
        .enumerate()
        .filter(|(k, m)| *k == 0 || m.count() >= min_px)
        .map(|(_, m)| m);
    let n_points_total: Vec<usize> = non_empty.clone().map(BinaryMask::count).collect();
    let n_edge: Vec<usize> = non_empty.map(|m| m.intersection_count(edge_mask)).collect();
    let ratios: Vec<f64> = n_edge
        .iter()
        .zip(&n_points_total)
        .map(|(&e, &t)| e as f64 / t as f64)
        .collect();
    EdgeRatioProfile {
        derivative: normalized_differences(&ratios),
        ratios,
        n_points_total,
        n_edge,
    }
}

/// Scans the normalized derivative from the end and stops at the first value
/// above `tau_r`; derivative index `j` maps to erosion index `j + 1`.
///
/// The result is discarded (`found = false`) when the implied thickness
/// `erosion_index * se_radius` is below `min_exine_px` or above
/// `max_exine_fraction` of the grain's equivalent radius. The upper guard
/// needs pixel counts and is skipped for profiles built from bare ratios.
pub fn detect_gap(profile: &EdgeRatioProfile, cfg: &ExineConfig) -> GapDetection {
    let Some(j) = profile.derivative.iter().rposition(|&d| d > cfg.tau_r) else {
        return GapDetection::NOT_FOUND;
    };
    let erosion_index = j + 1;
    let thickness = (erosion_index * cfg.erosion_se_radius) as f64;
    if thickness < cfg.min_exine_px as f64 {
        return GapDetection::NOT_FOUND;
    }
    if let Some(r) = profile.grain_equiv_radius() {
        if thickness > cfg.max_exine_fraction * r {
            return GapDetection::NOT_FOUND;
        }
    }
    GapDetection {
        erosion_index,
        found: true,
    }
}

/// The eroded grain mask at the detected gap: the rough inner part.
pub fn coarse_exine_mask(grain_mask: &BinaryMask, gap: GapDetection, se: &DiskSE) -> Result<BinaryMask> {
    if !gap.found {
        return Err(Error::NoExineBoundary);
    }
    let mut seq = erosion_sequence(grain_mask, se)?;
    if gap.erosion_index >= seq.len() {
        return Err(Error::NoExineBoundary);
    }
    Ok(seq.swap_remove(gap.erosion_index))
}

#[derive(Debug, Clone)]
pub struct ExineSegmentation {
    pub exine_mask: BinaryMask,
    pub inner_mask: BinaryMask,
    pub inner_contour: Contour,
    pub gap: GapDetection,
    pub profile: EdgeRatioProfile,
}

impl ExineSegmentation {
    /// Thickness implied by the gap: `erosion_index * se_radius`.
    pub fn thickness_estimate(&self, cfg: &ExineConfig) -> f64 {
        (self.gap.erosion_index * cfg.erosion_se_radius) as f64
    }
}

/// Splits a grain into exine and inner part.
///
/// `gray` is the grain's sub-image, aligned with `grain_mask`. Fails with
/// [`Error::NoExineBoundary`] when the profile shows no usable gap; callers
/// then treat the whole grain as inner part.
pub fn segment_exine(
    grain_mask: &BinaryMask,
    gray: &Raster,
    preproc: &PreprocConfig,
    cfg: &ExineConfig,
    snake: &SnakeConfig,
    gvf_cfg: &GvfConfig,
) -> Result<ExineSegmentation> {
    if grain_mask.dims() != gray.dims() {
        return Err(Error::DimensionMismatch {
            mask: grain_mask.dims(),
            expected: gray.dims(),
        });
    }
    let gray = gray.to_grayscale();
    let diffused = anisotropic_diffuse(&FloatImage::from_raster(&gray), preproc);
    let (mag, edges) = sobel_edges(&diffused, preproc);
    let edges = if cfg.rim_band_px > 0 {
        edges.and(&erode(grain_mask, &DiskSE::new(cfg.rim_band_px)))
    } else {
        edges.and(grain_mask)
    };

    let se = DiskSE::new(cfg.erosion_se_radius);
    let mut seq = erosion_sequence(grain_mask, &se)?;
    let profile = profile_from_sequence(&edges, &seq, cfg.min_profile_px);
    let gap = detect_gap(&profile, cfg);
    if !gap.found || gap.erosion_index >= seq.len() {
        return Err(Error::NoExineBoundary);
    }
    let coarse = seq.swap_remove(gap.erosion_index);

    let init = discretize_perimeter(&coarse, snake.sample_stride)?;
    let energy = match cfg.energy_source {
        ExineEnergy::Diffused => {
            let mut e = mag;
            let max = e.max();
            if max > 0.0 {
                e.data_mut().iter_mut().for_each(|v| *v /= max);
            }
            e
        }
        ExineEnergy::Raw => gradient_energy(&gray),
    };
    let field = gvf(&energy, gvf_cfg.mu, gvf_cfg.iterations);
    let snake = SnakeConfig {
        normalize_field: cfg.inner_normalize_field,
        ..snake.clone()
    };
    let inner_contour = evolve(&init, &field, &snake)?;
    let (w, h) = grain_mask.dims();
    let inner_mask = contour_to_mask(&inner_contour, w, h).and(grain_mask);
    let exine_mask = grain_mask.and_not(&inner_mask);
    Ok(ExineSegmentation {
        exine_mask,
        inner_mask,
        inner_contour,
        gap,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: usize, c: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, w, |x, y| (x as f64 - c).hypot(y as f64 - c) <= r)
    }

    #[test]
    fn empty_and_full_edges() {
        let g = disk(60, 30.0, 20.0);
        let se = DiskSE::new(2);
        let p = edge_ratio_profile(&BinaryMask::new(60, 60), &g, &se, 1).unwrap();
        assert!(p.ratios.iter().all(|&r| r == 0.0));
        assert!(p.derivative.iter().all(|&d| d == 0.0));
        assert_eq!(p.derivative.len(), p.ratios.len() - 1);
        let p = edge_ratio_profile(&g, &g, &se, 1).unwrap();
        assert!(p.ratios.iter().all(|&r| r == 1.0));
        assert!(p.derivative.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn backward_scan_rule() {
        let p = EdgeRatioProfile {
            ratios: vec![],
            derivative: vec![0.05, 0.3, 1.0, 0.02],
            n_points_total: vec![],
            n_edge: vec![],
        };
        let g = detect_gap(&p, &ExineConfig::default());
        assert_eq!(g, GapDetection { erosion_index: 3, found: true });
        let flat = EdgeRatioProfile::from_ratios(vec![0.2; 6]);
        assert!(!detect_gap(&flat, &ExineConfig::default()).found);
    }

    #[test]
    fn thick_gap_guard() {
        let g = disk(80, 40.0, 30.0);
        let se = DiskSE::new(2);
        // edges only in a ring deep inside the grain
        let edges = disk(80, 40.0, 14.0).and_not(&disk(80, 40.0, 8.0));
        let p = edge_ratio_profile(&edges, &g, &se, 1).unwrap();
        let raw = p.derivative.iter().rposition(|&d| d > 0.1).unwrap();
        assert!((raw + 1) * 2 > 15);
        assert!(!detect_gap(&p, &ExineConfig::default()).found);
    }

    #[test]
    fn coarse_mask_index() {
        let g = disk(140, 70.0, 60.0);
        let se = DiskSE::new(2);
        let same = coarse_exine_mask(&g, GapDetection { erosion_index: 0, found: true }, &se).unwrap();
        assert_eq!(same, g);
        let m = coarse_exine_mask(&g, GapDetection { erosion_index: 7, found: true }, &se).unwrap();
        let expect = std::f64::consts::PI * 46.0 * 46.0;
        assert!((m.count() as f64 - expect).abs() / expect <= 0.05);
        assert!(matches!(
            coarse_exine_mask(&g, GapDetection::NOT_FOUND, &se),
            Err(Error::NoExineBoundary)
        ));
    }

    #[test]
    fn edge_free_disk_has_no_boundary() {
        let g = disk(120, 60.0, 40.0);
        let gray = Raster::from_fn(120, 120, |x, y| if g.get(x, y) { 90 } else { 200 });
        let r = segment_exine(
            &g,
            &gray,
            &PreprocConfig::default(),
            &ExineConfig::default(),
            &SnakeConfig::default(),
            &GvfConfig::default(),
        );
        assert!(matches!(r, Err(Error::NoExineBoundary)));
    }
}
