//! Phantom files on disk and scoring of written reports against them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{fill_polygon, BinaryMask, Point};
use crate::phantom::{generate, score, PhantomSpec, PhantomTruth, ScoreReport, ScoredGrain};

use super::io::{atomic_write, read_mask, write_mask, write_png};
use super::report::Report;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Subdirectory of a phantom output directory holding the ground truth.
pub const TRUTH_SUBDIR: &str = "truth";

/// Parses a phantom spec from TOML.
pub fn phantom_spec_from_toml(text: &str) -> Result<PhantomSpec> {
    let spec: PhantomSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Renders a phantom and writes `<stem>.png` into `out_dir`, plus
/// `<stem>.truth.json` and the truth masks
/// `<stem>.truth<k>.{grain,exine,inner}mask.png` into `out_dir/truth`, so the
/// image directory can be fed straight to the segmenter.
pub fn write_phantom(spec: &PhantomSpec, stem: &str, out_dir: &Path) -> Result<PhantomTruth> {
    let (img, truth) = generate(spec)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_png(&out_dir.join(format!("{stem}.png")), &img)?;
    let truth_dir = out_dir.join(TRUTH_SUBDIR);
    fs::create_dir_all(&truth_dir).map_err(io_err(&truth_dir))?;
    let json = serde_json::to_string_pretty(&truth)? + "\n";
    atomic_write(&truth_dir.join(format!("{stem}.truth.json")), json.as_bytes())?;
    let (w, h) = (truth.width, truth.height);
    for (k, g) in truth.grains.iter().enumerate() {
        write_mask(&truth_dir.join(format!("{stem}.truth{k}.grainmask.png")), &g.grain_mask(w, h))?;
        write_mask(&truth_dir.join(format!("{stem}.truth{k}.exinemask.png")), &g.exine_mask(w, h))?;
        write_mask(&truth_dir.join(format!("{stem}.truth{k}.innermask.png")), &g.inner_mask(w, h))?;
    }
    Ok(truth)
}

fn to_points(c: &[[f64; 2]]) -> Vec<Point> {
    c.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

/// Rebuilds full-image results from a report, reading mask files next to
/// it when present and rasterizing the contours otherwise.
pub fn load_scored(report_path: &Path) -> Result<(Report, Vec<ScoredGrain>)> {
    let report = Report::load(report_path)?;
    let dir = report_path.parent().unwrap_or(Path::new("."));
    let (w, h) = (report.width, report.height);
    let mut out = Vec::with_capacity(report.grains.len());
    for g in &report.grains {
        let load = |name: &Option<String>| -> Result<Option<BinaryMask>> {
            match name {
                Some(n) => Ok(Some(read_mask(&dir.join(n))?.embed(g.offset, w, h))),
                None => Ok(None),
            }
        };
        let grain_contour = to_points(&g.grain_contour);
        let inner_contour = g.inner_contour.as_deref().map(to_points);
        let grain_mask = load(&g.files.grain_mask)?.unwrap_or_else(|| fill_polygon(&grain_contour, w, h));
        let inner_mask = match &inner_contour {
            None => None,
            Some(c) => Some(
                load(&g.files.inner_mask)?
                    .unwrap_or_else(|| fill_polygon(c, w, h).and(&grain_mask)),
            ),
        };
        out.push(ScoredGrain {
            grain_mask,
            inner_mask,
            grain_contour,
            inner_contour,
            thickness_est: g.exine_thickness_est,
        });
    }
    Ok((report, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub stem: String,
    pub report_found: bool,
    pub score: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub images: Vec<ImageScore>,
    pub n_truth: usize,
    pub n_matched: usize,
    pub recall: f64,
    pub false_positives: usize,
    pub mean_grain_rms: Option<f64>,
    pub mean_inner_rms: Option<f64>,
    pub mean_abs_thickness_error: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Scores every `<stem>.truth.json` in `truth_dir` against
/// `<stem>.report.json` in `results_dir` (a missing report scores as an
/// empty result).
pub fn score_dirs(results_dir: &Path, truth_dir: &Path, iou_threshold: f64) -> Result<ScoreSummary> {
    let mut truths: Vec<PathBuf> = fs::read_dir(truth_dir)
        .map_err(io_err(truth_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_str().is_some_and(|s| s.ends_with(".truth.json")))
        .collect();
    truths.sort();
    let mut images = Vec::new();
    for t in truths {
        let name = t.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = name.trim_end_matches(".truth.json").to_string();
        let text = fs::read_to_string(&t).map_err(io_err(&t))?;
        let truth: PhantomTruth = serde_json::from_str(&text)?;
        let report_path = results_dir.join(format!("{stem}.report.json"));
        let (found, results) = if report_path.exists() {
            (true, load_scored(&report_path)?.1)
        } else {
            (false, Vec::new())
        };
        images.push(ImageScore {
            stem,
            report_found: found,
            score: score(&results, &truth, iou_threshold),
        });
    }
    let n_truth = images.iter().map(|i| i.score.n_truth).sum();
    let n_matched = images.iter().map(|i| i.score.n_matched).sum();
    let grains = || images.iter().flat_map(|i| i.score.grains.iter());
    Ok(ScoreSummary {
        n_truth,
        n_matched,
        recall: if n_truth == 0 { 1.0 } else { n_matched as f64 / n_truth as f64 },
        false_positives: images.iter().map(|i| i.score.false_positives).sum(),
        mean_grain_rms: mean(grains().filter_map(|g| g.grain_rms)),
        mean_inner_rms: mean(grains().filter_map(|g| g.inner_rms)),
        mean_abs_thickness_error: mean(grains().filter_map(|g| g.thickness_error.map(f64::abs))),
        images,
    })
}
