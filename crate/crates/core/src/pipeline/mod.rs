//! End-to-end orchestration: configuration, per-image segmentation,
//! overlays, reports and batch processing.

mod batch;
mod config;
pub mod evaluate;
pub mod io;
mod overlay;
pub mod report;
mod segment;

pub use batch::{collect_inputs, run_batch, write_outputs, BatchSummary};
pub use config::{PipelineConfig, PipelineSection};
pub use overlay::{draw_contour, render_overlay, GRAIN_COLOR, INNER_COLOR};
pub use report::{Report, REPORT_SCHEMA};
pub use segment::{elongation, preprocess, segment_image, Diagnostics, GrainRecord, RejectedCandidate, Segmentation};
