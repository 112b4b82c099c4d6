use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::coarse::{coarse_masks, filter_candidates, GrainCandidate, RejectionReason};
use crate::error::{Error, Result};
use crate::exine::segment_exine;
use crate::imgcore::{region_stats, BBox, BinaryMask, Contour, Offset, Point, Raster, RegionStats};
use crate::par;
use crate::preproc::{clahe, gradient_energy, median_filter, EnergySource};
use crate::snake::{contour_to_mask, discretize_perimeter, evolve, gvf};

use super::PipelineConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub border_touch: bool,
    pub no_exine_boundary: bool,
    /// Largest distance from a final snake point to the initial contour.
    pub snake_max_displacement: f64,
    /// Square root of the ratio of the principal second moments.
    pub elongation: f64,
    /// Elongated beyond `pipeline.cluster_elongation`: likely touching grains.
    pub possible_cluster: bool,
    /// A fine stage failed; coarse results were kept.
    pub error: Option<String>,
}

/// One segmented grain. Masks live in sub-image coordinates (`offset` is
/// the sub-image's top-left corner in the full image); contours and stats
/// are in full-image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GrainRecord {
    pub id: usize,
    pub bbox: BBox,
    pub offset: Offset,
    pub grain_contour: Contour,
    pub inner_contour: Option<Contour>,
    pub grain_mask: BinaryMask,
    pub exine_mask: BinaryMask,
    pub inner_mask: BinaryMask,
    /// Statistics of the fine grain mask.
    pub stats: RegionStats,
    /// Statistics of the coarse candidate, the values the constraints judged.
    pub coarse_stats: RegionStats,
    /// `erosion_index * erosion_se_radius`.
    pub exine_thickness_est: Option<f64>,
    pub erosion_index: Option<usize>,
    pub diagnostics: Diagnostics,
}

impl GrainRecord {
    pub fn sub_dims(&self) -> (usize, usize) {
        self.grain_mask.dims()
    }

    /// The record in full-image coordinates, for scoring.
    pub fn to_scored(&self, width: usize, height: usize) -> crate::phantom::ScoredGrain {
        crate::phantom::ScoredGrain {
            grain_mask: self.grain_mask.embed(self.offset, width, height),
            inner_mask: self
                .inner_contour
                .as_ref()
                .map(|_| self.inner_mask.embed(self.offset, width, height)),
            grain_contour: self.grain_contour.points().to_vec(),
            inner_contour: self.inner_contour.as_ref().map(|c| c.points().to_vec()),
            thickness_est: self.exine_thickness_est,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub bbox: BBox,
    pub stats: RegionStats,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub width: usize,
    pub height: usize,
    pub records: Vec<GrainRecord>,
    pub rejected: Vec<RejectedCandidate>,
    pub warnings: Vec<String>,
}

/// Square root of the ratio of the larger to the smaller eigenvalue of the
/// pixel-coordinate covariance; 1 for a disk.
pub fn elongation(pixels: &[(usize, usize)]) -> f64 {
    let n = pixels.len() as f64;
    if pixels.len() < 2 {
        return 1.0;
    }
    let (mx, my) = pixels
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x as f64, b + y as f64));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let (dx, dy) = (x as f64 - mx, y as f64 - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let tr = sxx + syy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let (l1, l2) = (0.5 * (tr + disc), 0.5 * (tr - disc));
    // capped so degenerate (line) shapes stay representable in JSON
    if l2 <= 1e-12 {
        1e6
    } else {
        (l1 / l2).sqrt().min(1e6)
    }
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.x - a.x - t * vx).hypot(p.y - a.y - t * vy)
}

fn max_displacement(init: &Contour, fin: &Contour) -> f64 {
    let pts = init.points();
    fin.points()
        .iter()
        .map(|p| {
            (0..pts.len())
                .map(|i| point_segment_distance(p, &pts[i], &pts[(i + 1) % pts.len()]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn to_full(c: &Contour, offset: Offset) -> Contour {
    c.translated(offset.x as f64, offset.y as f64)
}

/// Fine grain contour by a snake on the sub-image, falling back to the
/// coarse outline when the snake fails or collapses.
fn refine_grain(coarse: &BinaryMask, energy_src: &Raster, cfg: &PipelineConfig, diag: &mut Diagnostics) -> Result<(Contour, BinaryMask)> {
    let init = discretize_perimeter(coarse, cfg.snake.sample_stride)?;
    let (w, h) = coarse.dims();
    let energy = gradient_energy(energy_src);
    let field = gvf(&energy, cfg.gvf.mu, cfg.gvf.iterations);
    match evolve(&init, &field, &cfg.snake) {
        Ok(contour) => {
            let mask = contour_to_mask(&contour, w, h);
            if mask.is_empty() {
                diag.error = Some("grain snake collapsed; coarse outline kept".into());
                Ok((init, coarse.clone()))
            } else {
                diag.snake_max_displacement = max_displacement(&init, &contour);
                Ok((contour, mask))
            }
        }
        Err(e) => {
            diag.error = Some(format!("grain snake failed: {e}; coarse outline kept"));
            Ok((init, coarse.clone()))
        }
    }
}

fn grain_record(
    cand: &GrainCandidate,
    gray: &Raster,
    pre: &Raster,
    cfg: &PipelineConfig,
) -> Result<GrainRecord> {
    let (img_w, img_h) = gray.dims();
    let (sub_gray, offset) = gray.crop(cand.stats.bbox, cfg.pipeline.crop_margin)?;
    let (sub_pre, _) = pre.crop(cand.stats.bbox, cfg.pipeline.crop_margin)?;
    let (w, h) = sub_gray.dims();
    let local_offset = Offset {
        x: cand.mask_offset.x - offset.x,
        y: cand.mask_offset.y - offset.y,
    };
    let coarse = cand.mask.embed(local_offset, w, h);

    let mut diag = Diagnostics::default();
    let energy_src = match cfg.preproc.energy_source {
        EnergySource::Preprocessed => &sub_pre,
        EnergySource::Raw => &sub_gray,
    };
    let (contour, grain_mask) = refine_grain(&coarse, energy_src, cfg, &mut diag)?;

    let full_pixels: Vec<(usize, usize)> = grain_mask
        .pixels()
        .into_iter()
        .map(|(x, y)| (x + offset.x, y + offset.y))
        .collect();
    let stats = region_stats(&full_pixels, gray);
    diag.border_touch = stats.bbox.x0 == 0
        || stats.bbox.y0 == 0
        || stats.bbox.x1 == img_w as i64 - 1
        || stats.bbox.y1 == img_h as i64 - 1;
    diag.elongation = elongation(&full_pixels);
    diag.possible_cluster = diag.elongation > cfg.pipeline.cluster_elongation;

    let exine = segment_exine(&grain_mask, &sub_gray, &cfg.preproc, &cfg.exine, &cfg.snake, &cfg.gvf);
    let (exine_mask, inner_mask, inner_contour, thickness, erosion_index) = match exine {
        Ok(seg) => {
            let t = seg.thickness_estimate(&cfg.exine);
            (
                seg.exine_mask,
                seg.inner_mask,
                Some(to_full(&seg.inner_contour, offset)),
                Some(t),
                Some(seg.gap.erosion_index),
            )
        }
        Err(e) => {
            diag.no_exine_boundary = true;
            if !matches!(e, Error::NoExineBoundary) {
                let msg = format!("exine stage failed: {e}");
                diag.error = Some(match diag.error.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
            }
            (BinaryMask::new(w, h), grain_mask.clone(), None, None, None)
        }
    };

    Ok(GrainRecord {
        id: 0,
        bbox: stats.bbox,
        offset,
        grain_contour: to_full(&contour, offset),
        inner_contour,
        grain_mask,
        exine_mask,
        inner_mask,
        stats,
        coarse_stats: cand.stats.clone(),
        exine_thickness_est: thickness,
        erosion_index,
        diagnostics: diag,
    })
}

/// Grayscale → CLAHE → median, the image the coarse stage clusters.
pub fn preprocess(gray: &Raster, cfg: &PipelineConfig) -> Raster {
    median_filter(&clahe(gray, &cfg.preproc), cfg.preproc.median_radius)
}

/// Segments every grain in an image.
///
/// Only an invalid configuration is an error. A constant image yields no
/// records and a warning; a failure inside one grain's fine stages is
/// recorded in that grain's diagnostics.
pub fn segment_image(img: &Raster, cfg: &PipelineConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let gray = img.to_grayscale();
    let (width, height) = gray.dims();
    let mut seg = Segmentation {
        width,
        height,
        records: Vec::new(),
        rejected: Vec::new(),
        warnings: Vec::new(),
    };
    let pre = preprocess(&gray, cfg);
    let mask = match coarse_masks(&pre, &cfg.coarse, &cfg.morpho) {
        Ok(m) => m,
        Err(Error::DegenerateClustering) => {
            warn!("constant image; no grains");
            seg.warnings.push("degenerate_clustering".into());
            return Ok(seg);
        }
        Err(e) => return Err(e),
    };
    let candidates = filter_candidates(&mask, &gray, &cfg.coarse);
    let mut accepted = Vec::new();
    for c in candidates {
        match c.rejection {
            Some(reason) => {
                debug!("rejected candidate at {:?}: {:?}", c.stats.bbox, reason);
                seg.rejected.push(RejectedCandidate {
                    bbox: c.stats.bbox,
                    stats: c.stats,
                    reason,
                });
            }
            None => accepted.push(c),
        }
    }
    let results = par::map(&accepted, |c| grain_record(c, &gray, &pre, cfg));
    for r in results {
        match r {
            Ok(rec) => seg.records.push(rec),
            Err(e) => {
                warn!("grain dropped: {e}");
                seg.warnings.push(format!("grain dropped: {e}"));
            }
        }
    }
    seg.records.sort_by(|a, b| {
        let (ax, ay) = a.stats.centroid;
        let (bx, by) = b.stats.centroid;
        ay.total_cmp(&by).then(ax.total_cmp(&bx))
    });
    for (i, r) in seg.records.iter_mut().enumerate() {
        r.id = i;
    }
    Ok(seg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elongation_of_shapes() {
        let disk: Vec<(usize, usize)> = BinaryMask::from_fn(60, 60, |x, y| {
            (x as f64 - 30.0).hypot(y as f64 - 30.0) <= 20.0
        })
        .pixels();
        assert!((elongation(&disk) - 1.0).abs() < 0.02);
        let bar: Vec<(usize, usize)> = BinaryMask::from_fn(60, 60, |x, y| x < 40 && y < 10).pixels();
        assert!((elongation(&bar) - 4.0).abs() < 0.1);
    }

    #[test]
    fn constant_image_warns() {
        let seg = segment_image(&Raster::filled(64, 64, 1, 220), &PipelineConfig::default()).unwrap();
        assert!(seg.records.is_empty());
        assert_eq!(seg.warnings, vec!["degenerate_clustering".to_string()]);
    }
}
