//! Coarse grain extraction: 2-means binarization, morphological cleanup and
//! the debris constraints on circularity and intensity spread.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    connected_components, region_stats, BinaryMask, Component, Connectivity, Offset, Raster,
    RegionStats,
};
use crate::morpho::{self, CleanupOrder, DiskSE, MorphoConfig};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseConfig {
    /// Upper bound (exclusive) on perimeter / (2 · equivalent radius).
    pub circularity_max: f64,
    /// Lower bound (exclusive) on the gray-level standard deviation.
    pub sd_min: f64,
    pub min_area: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub reject_border_touching: bool,
    /// Grains are the darker cluster (bright-field). Set false for inverted images.
    pub foreground_darker: bool,
}

impl Default for CoarseConfig {
    fn default() -> Self {
        Self {
            circularity_max: 3.55,
            sd_min: 20.0,
            min_area: 900,
            kmeans_max_iter: 100,
            kmeans_tol: 0.1,
            reject_border_touching: false,
            foreground_darker: true,
        }
    }
}

impl CoarseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.circularity_max >= std::f64::consts::PI) {
            return Err(Error::Config("coarse.circularity_max must be >= pi".into()));
        }
        if !(self.sd_min >= 0.0) {
            return Err(Error::Config("coarse.sd_min must be >= 0".into()));
        }
        if self.min_area < 1 {
            return Err(Error::Config("coarse.min_area must be >= 1".into()));
        }
        if self.kmeans_max_iter < 1 || !(self.kmeans_tol > 0.0) {
            return Err(Error::Config("coarse.kmeans_max_iter >= 1 and kmeans_tol > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    MinArea,
    Circularity,
    IntensitySd,
    BorderTouch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrainCandidate {
    pub pixels: Vec<(usize, usize)>,
    pub stats: RegionStats,
    /// Component mask over its bounding box.
    pub mask: BinaryMask,
    /// Position of `mask` in the full image.
    pub mask_offset: Offset,
    pub touches_border: bool,
    pub rejection: Option<RejectionReason>,
}

impl GrainCandidate {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

/// Result of 1-D 2-means on the gray histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoMeans {
    /// Largest gray value assigned to the lower cluster.
    pub threshold: u8,
    pub lower_center: f64,
    pub upper_center: f64,
    pub iterations: usize,
}

/// Lloyd iterations of 2-means on the 256-bin histogram, seeded at the
/// minimum and maximum intensities. Values equidistant from both centers
/// join the lower cluster.
pub fn two_means(gray: &Raster, cfg: &CoarseConfig) -> Result<TwoMeans> {
    let gray = gray.to_grayscale();
    let mut hist = [0u64; 256];
    for &v in gray.data() {
        hist[v as usize] += 1;
    }
    let lo = hist.iter().position(|&c| c > 0).unwrap();
    let hi = hist.iter().rposition(|&c| c > 0).unwrap();
    if lo == hi {
        return Err(Error::DegenerateClustering);
    }
    let (mut c0, mut c1) = (lo as f64, hi as f64);
    let split = |c0: f64, c1: f64| {
        (lo..=hi)
            .take_while(|&v| (v as f64 - c0).abs() <= (v as f64 - c1).abs())
            .last()
            .unwrap_or(lo)
    };
    let mut iterations = 0;
    let mut t = split(c0, c1);
    while iterations < cfg.kmeans_max_iter {
        iterations += 1;
        let mean = |range: std::ops::RangeInclusive<usize>| {
            let (mut n, mut s) = (0u64, 0.0);
            for v in range {
                n += hist[v];
                s += hist[v] as f64 * v as f64;
            }
            s / n as f64
        };
        let n0 = mean(lo..=t);
        let n1 = mean(t + 1..=hi);
        let moved = (n0 - c0).abs().max((n1 - c1).abs());
        c0 = n0;
        c1 = n1;
        t = split(c0, c1);
        if moved < cfg.kmeans_tol {
            break;
        }
    }
    Ok(TwoMeans {
        threshold: t as u8,
        lower_center: c0,
        upper_center: c1,
        iterations,
    })
}

/// Foreground = the darker 2-means cluster (or the brighter one when
/// `foreground_darker` is false).
pub fn kmeans_binarize(gray: &Raster, cfg: &CoarseConfig) -> Result<BinaryMask> {
    let km = two_means(gray, cfg)?;
    let gray = gray.to_grayscale();
    let (w, h) = gray.dims();
    let t = km.threshold;
    let bits = gray
        .data()
        .iter()
        .map(|&v| if cfg.foreground_darker { v <= t } else { v > t })
        .collect();
    Ok(BinaryMask::from_vec(w, h, bits))
}

/// Binarize, fill 4-connected holes, then open and close.
pub fn coarse_masks(gray: &Raster, cfg: &CoarseConfig, morpho_cfg: &MorphoConfig) -> Result<BinaryMask> {
    let binary = kmeans_binarize(gray, cfg)?;
    let filled = morpho::fill_holes(&binary);
    let se = DiskSE::new(morpho_cfg.cleanup_se_radius);
    Ok(match morpho_cfg.cleanup_order {
        CleanupOrder::OpenThenClose => morpho::close(&morpho::open(&filled, &se), &se),
        CleanupOrder::CloseThenOpen => morpho::open(&morpho::close(&filled, &se), &se),
    })
}

fn judge(stats: &RegionStats, touches_border: bool, cfg: &CoarseConfig) -> Option<RejectionReason> {
    if stats.area < cfg.min_area {
        Some(RejectionReason::MinArea)
    } else if stats.circularity() >= cfg.circularity_max {
        Some(RejectionReason::Circularity)
    } else if stats.intensity_sd <= cfg.sd_min {
        Some(RejectionReason::IntensitySd)
    } else if touches_border && cfg.reject_border_touching {
        Some(RejectionReason::BorderTouch)
    } else {
        None
    }
}

/// Labels 8-connected components of `mask` and applies the area,
/// circularity and intensity constraints in that order. Candidates are
/// ordered by centroid `(y, x)`.
pub fn filter_candidates(mask: &BinaryMask, gray: &Raster, cfg: &CoarseConfig) -> Vec<GrainCandidate> {
    let gray = gray.to_grayscale();
    let (w, h) = mask.dims();
    let labeling = connected_components(mask, Connectivity::Eight);
    let mut candidates = par::map(&labeling.components, |c: &Component| {
        let stats = region_stats(&c.pixels, &gray);
        let bb = stats.bbox;
        let offset = Offset {
            x: bb.x0 as usize,
            y: bb.y0 as usize,
        };
        let mut local = BinaryMask::new(bb.width() as usize, bb.height() as usize);
        for &(x, y) in &c.pixels {
            local.set(x - offset.x, y - offset.y, true);
        }
        let touches_border =
            bb.x0 == 0 || bb.y0 == 0 || bb.x1 == w as i64 - 1 || bb.y1 == h as i64 - 1;
        let rejection = judge(&stats, touches_border, cfg);
        GrainCandidate {
            pixels: c.pixels.clone(),
            stats,
            mask: local,
            mask_offset: offset,
            touches_border,
            rejection,
        }
    });
    candidates.sort_by(|a, b| {
        let (ax, ay) = a.stats.centroid;
        let (bx, by) = b.stats.centroid;
        ay.total_cmp(&by).then(ax.total_cmp(&bx))
    });
    candidates
}
