use serde::{Deserialize, Serialize};

use crate::imgcore::contour::outer_perimeter;
use crate::imgcore::raster::{BBox, Raster};

/// Shape and intensity statistics of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub area: usize,
    /// Marching-squares length of the outer boundary.
    pub perimeter: f64,
    /// Radius of the disk with the same area, `sqrt(area / pi)`.
    pub equiv_radius: f64,
    /// Population standard deviation of the gray values.
    pub intensity_sd: f64,
    pub centroid: (f64, f64),
    pub bbox: BBox,
}

impl RegionStats {
    /// Perimeter over equivalent diameter; `pi` for an ideal disk.
    pub fn circularity(&self) -> f64 {
        self.perimeter / (2.0 * self.equiv_radius)
    }
}

/// Statistics of a non-empty pixel set over a gray raster.
pub fn region_stats(pixels: &[(usize, usize)], gray: &Raster) -> RegionStats {
    assert!(!pixels.is_empty(), "region_stats on an empty component");
    let n = pixels.len() as f64;
    let (mut sx, mut sy, mut sum, mut sum_sq) = (0.0, 0.0, 0.0, 0.0);
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for &(x, y) in pixels {
        let v = gray.get(x, y) as f64;
        sx += x as f64;
        sy += y as f64;
        sum += v;
        sum_sq += v * v;
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let area = pixels.len();
    RegionStats {
        area,
        perimeter: outer_perimeter(pixels),
        equiv_radius: (area as f64 / std::f64::consts::PI).sqrt(),
        intensity_sd: var.sqrt(),
        centroid: (sx / n, sy / n),
        bbox: BBox::new(x0 as i64, y0 as i64, x1 as i64, y1 as i64),
    }
}
