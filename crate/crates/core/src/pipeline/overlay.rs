use crate::imgcore::{Contour, Raster};

use super::GrainRecord;

pub const GRAIN_COLOR: [u8; 3] = [0, 0, 255];
pub const INNER_COLOR: [u8; 3] = [0, 255, 0];

/// Bresenham line between rounded endpoints, clipped to the raster.
fn draw_line(img: &mut Raster, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: &[u8; 3]) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    let (w, h) = (img.width() as i64, img.height() as i64);
    loop {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            img.set_pixel(x as usize, y as usize, color);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Draws a closed contour as a 1-pixel polyline.
pub fn draw_contour(img: &mut Raster, contour: &Contour, color: &[u8; 3]) {
    let pts: Vec<(i64, i64)> = contour
        .points()
        .iter()
        .map(|p| (p.x.round() as i64, p.y.round() as i64))
        .collect();
    for i in 0..pts.len() {
        draw_line(img, pts[i], pts[(i + 1) % pts.len()], color);
    }
}

/// RGB copy of the image with grain outlines in blue and inner-part
/// outlines in green.
pub fn render_overlay(img: &Raster, records: &[GrainRecord]) -> Raster {
    let mut out = img.to_rgb();
    for r in records {
        draw_contour(&mut out, &r.grain_contour, &GRAIN_COLOR);
    }
    for r in records {
        if let Some(c) = &r.inner_contour {
            draw_contour(&mut out, c, &INNER_COLOR);
        }
    }
    out
}
