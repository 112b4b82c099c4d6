//! Pollen grain and exine segmentation for bright-field microscope images.
//!
//! The coarse stage clusters intensities into grain and background, cleans
//! the binary mask morphologically and rejects debris by shape and texture.
//! Each surviving grain is refined with a gradient-vector-flow snake, after
//! which the exine is located from the edge density of successively eroded
//! grain masks and refined with a second snake.

pub mod coarse;
pub mod error;
pub mod exine;
pub mod imgcore;
pub mod morpho;
mod par;
pub mod phantom;
pub mod pipeline;
pub mod preproc;
pub mod snake;

pub use error::{Error, Result};
pub use pipeline::{run_batch, segment_image, GrainRecord, PipelineConfig};
