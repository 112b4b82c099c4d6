//! Raster, mask and contour types, labeling and region statistics.

pub mod contour;
pub mod label;
pub mod mask;
pub mod raster;
pub mod region;

pub use contour::{fill_polygon, outer_loop, resample_closed, trace_loops, Contour, Point};
pub use label::{connected_components, Component, Connectivity, Labeling};
pub use mask::BinaryMask;
pub use raster::{BBox, FloatImage, Offset, Raster};
pub use region::{region_stats, RegionStats};
