use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coarse::RejectionReason;
use crate::error::{Error, Result};
use crate::imgcore::{BBox, Contour, Offset, RegionStats};

use super::io::atomic_write;
use super::{Diagnostics, GrainRecord, PipelineConfig, RejectedCandidate, Segmentation};

/// JSON Schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

pub const TOOL_NAME: &str = "palynseg";

/// Output files of one grain, relative to the report's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GrainFiles {
    pub image: Option<String>,
    pub grain_mask: Option<String>,
    pub exine_mask: Option<String>,
    pub inner_mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrainAreas {
    pub grain: usize,
    pub exine: usize,
    pub inner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrainReport {
    pub id: usize,
    pub bbox: BBox,
    pub offset: Offset,
    /// `[width, height]` of the grain's sub-image.
    pub sub_size: [usize; 2],
    pub stats: RegionStats,
    /// Circularity `P / 2R` of the fine grain mask.
    pub circularity: f64,
    /// Coarse-candidate statistics the acceptance constraints were checked on.
    pub coarse_stats: RegionStats,
    pub coarse_circularity: f64,
    pub areas: GrainAreas,
    /// Full-image `[x, y]` points.
    pub grain_contour: Vec<[f64; 2]>,
    pub inner_contour: Option<Vec<[f64; 2]>>,
    pub exine_thickness_est: Option<f64>,
    pub erosion_index: Option<usize>,
    pub diagnostics: Diagnostics,
    pub files: GrainFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedReport {
    pub bbox: BBox,
    pub area: usize,
    pub circularity: f64,
    pub intensity_sd: f64,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub warnings: Vec<String>,
    pub grains: Vec<GrainReport>,
    pub rejected: Vec<RejectedReport>,
    pub config: PipelineConfig,
}

fn points(c: &Contour) -> Vec<[f64; 2]> {
    c.points().iter().map(|p| [p.x, p.y]).collect()
}

impl GrainReport {
    pub fn from_record(r: &GrainRecord, files: GrainFiles) -> Self {
        let (w, h) = r.sub_dims();
        GrainReport {
            id: r.id,
            bbox: r.bbox,
            offset: r.offset,
            sub_size: [w, h],
            circularity: r.stats.circularity(),
            stats: r.stats.clone(),
            coarse_circularity: r.coarse_stats.circularity(),
            coarse_stats: r.coarse_stats.clone(),
            areas: GrainAreas {
                grain: r.grain_mask.count(),
                exine: r.exine_mask.count(),
                inner: r.inner_mask.count(),
            },
            grain_contour: points(&r.grain_contour),
            inner_contour: r.inner_contour.as_ref().map(points),
            exine_thickness_est: r.exine_thickness_est,
            erosion_index: r.erosion_index,
            diagnostics: r.diagnostics.clone(),
            files,
        }
    }
}

impl From<&RejectedCandidate> for RejectedReport {
    fn from(r: &RejectedCandidate) -> Self {
        RejectedReport {
            bbox: r.bbox,
            area: r.stats.area,
            circularity: r.stats.circularity(),
            intensity_sd: r.stats.intensity_sd,
            reason: r.reason,
        }
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Report {
    pub fn new(image: &str, seg: &Segmentation, cfg: &PipelineConfig, files: Vec<GrainFiles>) -> Self {
        let mut files = files.into_iter();
        Report {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: now_unix(),
            image: image.into(),
            width: seg.width,
            height: seg.height,
            warnings: seg.warnings.clone(),
            grains: seg
                .records
                .iter()
                .map(|r| GrainReport::from_record(r, files.next().unwrap_or_default()))
                .collect(),
            rejected: seg.rejected.iter().map(RejectedReport::from).collect(),
            config: cfg.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}
