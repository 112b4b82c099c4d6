use crate::error::{Error, Result};
use crate::imgcore::contour::closed_length;
use crate::imgcore::{
    connected_components, fill_polygon, outer_loop, resample_closed, BinaryMask, Connectivity, Contour, Point,
};

/// Samples the outer boundary of the mask's largest 8-connected component
/// into a snake initialization.
///
/// The marching-squares loop is resampled uniformly in arc length and one
/// point per `stride` pixels of boundary is kept. When that leaves fewer
/// than three points the stride is halved until three remain. Points are
/// clamped into the mask's pixel-center extent.
pub fn discretize_perimeter(mask: &BinaryMask, stride: usize) -> Result<Contour> {
    let labeling = connected_components(mask, Connectivity::Eight);
    let largest = labeling
        .components
        .iter()
        .max_by_key(|c| c.area())
        .ok_or(Error::TooFewPoints)?;
    let component = largest.to_mask(mask.width(), mask.height());
    let boundary = outer_loop(&component).ok_or(Error::TooFewPoints)?;
    if boundary.len() < 3 {
        return Err(Error::TooFewPoints);
    }
    let length = closed_length(&boundary);
    let mut stride = stride.max(1);
    let mut n = (length / stride as f64).round() as usize;
    while n < 3 && stride > 1 {
        stride /= 2;
        n = (length / stride as f64).round() as usize;
    }
    let n = n.max(3);
    let (xmax, ymax) = ((mask.width() - 1) as f64, (mask.height() - 1) as f64);
    let points: Vec<Point> = resample_closed(&boundary, n)
        .into_iter()
        .map(|p| Point::new(p.x.clamp(0.0, xmax), p.y.clamp(0.0, ymax)))
        .collect();
    Contour::new(points)
}

/// Even-odd scanline fill of a closed contour (pixel centers, half-open).
pub fn contour_to_mask(contour: &Contour, width: usize, height: usize) -> BinaryMask {
    fill_polygon(contour.points(), width, height)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
    }

    #[test]
    fn disk_points_near_circle() {
        let m = disk(140, 140, 70.0, 70.0, 50.0);
        let c = discretize_perimeter(&m, 20).unwrap();
        assert!((15..=17).contains(&c.len()), "{}", c.len());
        for p in c.points() {
            let r = (p.x - 70.0).hypot(p.y - 70.0);
            assert!((r - 50.0).abs() <= 1.0, "{r}");
        }
        assert!(c.signed_area() < 0.0);
    }

    #[test]
    fn square_gives_eight() {
        let m = BinaryMask::from_fn(60, 60, |x, y| (10..50).contains(&x) && (10..50).contains(&y));
        let c = discretize_perimeter(&m, 20).unwrap();
        assert_eq!(c.len(), 8);
        // every retained point lies on the traced boundary
        for p in c.points() {
            let on_edge = (p.x - 9.5).abs() < 1.0 || (p.x - 49.5).abs() < 1.0 || (p.y - 9.5).abs() < 1.0 || (p.y - 49.5).abs() < 1.0;
            assert!(on_edge, "{p:?}");
        }
    }

    #[test]
    fn tiny_mask_halves_stride() {
        let m = BinaryMask::from_pixels(10, 10, &[(4, 4), (5, 4), (6, 4)]);
        let c = discretize_perimeter(&m, 20).unwrap();
        assert!(c.len() >= 3);
        assert!(matches!(discretize_perimeter(&BinaryMask::new(5, 5), 20), Err(Error::TooFewPoints)));
    }

    #[test]
    fn largest_component_wins() {
        let mut m = disk(100, 100, 30.0, 30.0, 20.0);
        for (x, y) in disk(100, 100, 80.0, 80.0, 5.0).pixels() {
            m.set(x, y, true);
        }
        let c = discretize_perimeter(&m, 10).unwrap();
        let ctr = c.centroid();
        assert!((ctr.x - 30.0).abs() < 1.0 && (ctr.y - 30.0).abs() < 1.0);
    }

    #[test]
    fn roundtrip_mask() {
        let m = disk(100, 100, 50.0, 50.0, 30.0);
        let c = discretize_perimeter(&m, 1).unwrap();
        let back = contour_to_mask(&c, 100, 100);
        assert!(back.iou(&m) > 0.97);
    }
}
