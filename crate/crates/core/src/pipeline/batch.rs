use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Raster;
use crate::par;

use super::io::{is_supported_image, read_image, write_mask, write_png};
use super::report::{GrainFiles, Report};
use super::{render_overlay, segment_image, PipelineConfig, Segmentation};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub images_processed: usize,
    pub grains_found: usize,
    /// Inputs that could not be read or decoded.
    pub errors: usize,
    /// Files skipped for not having an image extension.
    pub skipped: usize,
}

/// Input images under `input`: the file itself, or the directory's
/// image files in name order. Returns the list and the number of skipped
/// non-image files.
pub fn collect_inputs(input: &Path) -> Result<(Vec<PathBuf>, usize)> {
    let io_err = |source| Error::Io {
        path: input.to_path_buf(),
        source,
    };
    let meta = fs::metadata(input).map_err(io_err)?;
    if meta.is_file() {
        return Ok((vec![input.to_path_buf()], 0));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let (images, others): (Vec<PathBuf>, Vec<PathBuf>) = files.into_iter().partition(|p| is_supported_image(p));
    for p in &others {
        warn!("skipping non-image file {}", p.display());
    }
    Ok((images, others.len()))
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string()
}

/// Writes the report, overlay and per-grain files of one segmented image.
pub fn write_outputs(
    out_dir: &Path,
    stem: &str,
    image_name: &str,
    img: &Raster,
    seg: &Segmentation,
    cfg: &PipelineConfig,
) -> Result<Report> {
    let opts = &cfg.pipeline;
    let mut all_files = Vec::with_capacity(seg.records.len());
    for r in &seg.records {
        let mut files = GrainFiles::default();
        let base = format!("{stem}.grain{}", r.id);
        if opts.write_grain_images {
            let (w, h) = r.sub_dims();
            let bbox = crate::imgcore::BBox::new(
                r.offset.x as i64,
                r.offset.y as i64,
                (r.offset.x + w) as i64 - 1,
                (r.offset.y + h) as i64 - 1,
            );
            let (sub, _) = img.crop(bbox, 0)?;
            let name = format!("{base}.png");
            write_png(&out_dir.join(&name), &sub)?;
            files.image = Some(name);
        }
        if opts.write_masks {
            for (suffix, mask, slot) in [
                ("grainmask", &r.grain_mask, &mut files.grain_mask),
                ("exinemask", &r.exine_mask, &mut files.exine_mask),
                ("innermask", &r.inner_mask, &mut files.inner_mask),
            ] {
                let name = format!("{base}.{suffix}.png");
                write_mask(&out_dir.join(&name), mask)?;
                *slot = Some(name);
            }
        }
        all_files.push(files);
    }
    if opts.write_overlay {
        write_png(&out_dir.join(format!("{stem}.overlay.png")), &render_overlay(img, &seg.records))?;
    }
    let report = Report::new(image_name, seg, cfg, all_files);
    report.write(&out_dir.join(format!("{stem}.report.json")))?;
    Ok(report)
}

enum Outcome {
    Done(usize),
    Unreadable,
}

/// Segments every image under `input` and writes results to `output`.
///
/// Unreadable images are logged and counted; failing to write output aborts
/// the batch with the I/O error.
pub fn run_batch(input: &Path, output: &Path, cfg: &PipelineConfig) -> Result<BatchSummary> {
    cfg.validate()?;
    let (images, skipped) = collect_inputs(input)?;
    fs::create_dir_all(output).map_err(|source| Error::Io {
        path: output.to_path_buf(),
        source,
    })?;
    let outcomes = par::map(&images, |path| -> Result<Outcome> {
        let img = match read_image(path) {
            Ok(img) => img,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                return Ok(Outcome::Unreadable);
            }
        };
        let seg = segment_image(&img, cfg)?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        write_outputs(output, &stem_of(path), name, &img, &seg, cfg)?;
        info!("{}: {} grain(s)", path.display(), seg.records.len());
        Ok(Outcome::Done(seg.records.len()))
    });
    let mut summary = BatchSummary {
        skipped,
        ..Default::default()
    };
    for o in outcomes {
        match o? {
            Outcome::Done(n) => {
                summary.images_processed += 1;
                summary.grains_found += n;
            }
            Outcome::Unreadable => summary.errors += 1,
        }
    }
    Ok(summary)
}
