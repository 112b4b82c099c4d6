//! Subpixel closed contours: marching-squares tracing of binary masks,
//! polygon rasterization and arc-length resampling.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::mask::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Ordered closed polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    points: Vec<Point>,
}

impl Contour {
    /// Builds a contour, dropping consecutive duplicates (including the
    /// wrap-around pair). Fails with [`Error::TooFewPoints`] below 3 points.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        points.dedup();
        while points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::TooFewPoints);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total polyline length including the closing segment.
    pub fn length(&self) -> f64 {
        closed_length(&self.points)
    }

    /// Shoelace area in raw `(x, y)` coordinates. With the image y axis
    /// pointing down, a contour that runs counterclockwise on screen has a
    /// negative value.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Contour {
        Contour {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    pub fn reversed(&self) -> Contour {
        let mut points = self.points.clone();
        points.reverse();
        Contour { points }
    }

    /// Rasterizes the enclosed region (see [`fill_polygon`]).
    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        fill_polygon(&self.points, width, height)
    }
}

pub(crate) fn closed_length(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n).map(|i| points[i].dist(&points[(i + 1) % n])).sum()
}

pub(crate) fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

/// Resamples a closed polyline to `n` points evenly spaced in arc length,
/// starting at the first input point.
pub fn resample_closed(points: &[Point], n: usize) -> Vec<Point> {
    let m = points.len();
    let total = closed_length(points);
    if m == 0 || n == 0 || total <= 0.0 {
        return points.to_vec();
    }
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut seg_len = points[0].dist(&points[1 % m]);
    for k in 0..n {
        let target = k as f64 * step;
        while seg_start + seg_len < target && seg < m - 1 {
            seg_start += seg_len;
            seg += 1;
            seg_len = points[seg].dist(&points[(seg + 1) % m]);
        }
        let (a, b) = (points[seg], points[(seg + 1) % m]);
        let t = if seg_len > 0.0 {
            ((target - seg_start) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t));
    }
    out
}

/// Scanline polygon fill with the even-odd rule.
///
/// Pixel `(x, y)` is foreground when its center `(x, y)` lies inside the
/// polygon. Edges are half-open in y (`y0 <= y < y1`) and spans half-open in x
/// (`xa <= x < xb`), so a polygon with integer corners `(0,0)-(10,10)` covers
/// exactly 100 pixels.
pub fn fill_polygon(points: &[Point], width: usize, height: usize) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let n = points.len();
    if n < 3 {
        return mask;
    }
    let mut xs: Vec<f64> = Vec::new();
    for y in 0..height {
        let yc = y as f64;
        xs.clear();
        for i in 0..n {
            let (a, b) = (points[i], points[(i + 1) % n]);
            let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
            if lo.y <= yc && yc < hi.y {
                let t = (yc - lo.y) / (hi.y - lo.y);
                xs.push(lo.x + (hi.x - lo.x) * t);
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let start = pair[0].ceil().max(0.0);
            let end = pair[1].ceil().min(width as f64);
            let (start, end) = (start as i64, end as i64);
            for x in start..end {
                mask.set(x as usize, y, true);
            }
        }
    }
    mask
}

// Edge midpoints are keyed by doubled coordinates so adjacent cells agree.
type Vertex = (i64, i64);

/// Traces every closed iso-line at level 0.5 of the mask indicator.
///
/// Pixels outside the mask count as background, so every loop is closed.
/// Vertices sit at midpoints between 4-adjacent pixel centers. Diagonal
/// (saddle) configurations are resolved as connected foreground, which
/// matches 8-connectivity. Outer boundaries run counterclockwise on screen
/// (negative [`Contour::signed_area`]) and hole boundaries the other way.
/// Loops are returned in the row-major order of their first cell.
pub fn trace_loops(mask: &BinaryMask) -> Vec<Vec<Point>> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let at = |x: i64, y: i64| mask.get_or_bg(x as isize, y as isize);

    let mut segments: Vec<(Vertex, Vertex)> = Vec::new();
    for cy in -1..h {
        for cx in -1..w {
            // corners in clockwise screen order: TL, TR, BR, BL
            let c = [
                at(cx, cy),
                at(cx + 1, cy),
                at(cx + 1, cy + 1),
                at(cx, cy + 1),
            ];
            if c.iter().all(|&v| v) || c.iter().all(|&v| !v) {
                continue;
            }
            // edge k joins corner k to corner k+1: top, right, bottom, left
            let mids: [Vertex; 4] = [
                (2 * cx + 1, 2 * cy),
                (2 * cx + 2, 2 * cy + 1),
                (2 * cx + 1, 2 * cy + 2),
                (2 * cx, 2 * cy + 1),
            ];
            let mut crossings: Vec<(usize, bool)> = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                if a != b {
                    // entering = background -> foreground along the cycle
                    crossings.push((k, b));
                }
            }
            if crossings.len() == 2 {
                let (enter, leave) = if crossings[0].1 {
                    (crossings[0].0, crossings[1].0)
                } else {
                    (crossings[1].0, crossings[0].0)
                };
                segments.push((mids[enter], mids[leave]));
            } else {
                // saddle: join each entering crossing to the preceding leaving one
                for i in 0..4 {
                    if crossings[i].1 {
                        let prev = crossings[(i + 3) % 4].0;
                        segments.push((mids[crossings[i].0], mids[prev]));
                    }
                }
            }
        }
    }

    let next: HashMap<Vertex, usize> = segments
        .iter()
        .enumerate()
        .map(|(i, (start, _))| (*start, i))
        .collect();
    let mut visited = vec![false; segments.len()];
    let mut loops = Vec::new();
    for first in 0..segments.len() {
        if visited[first] {
            continue;
        }
        let mut pts = Vec::new();
        let mut i = first;
        while !visited[i] {
            visited[i] = true;
            let (start, end) = segments[i];
            pts.push(Point::new(start.0 as f64 * 0.5, start.1 as f64 * 0.5));
            match next.get(&end) {
                Some(&j) => i = j,
                None => break,
            }
        }
        loops.push(pts);
    }
    loops
}

/// The outer boundary loop of a mask: the traced loop with the largest
/// enclosed area. `None` for an empty mask.
pub fn outer_loop(mask: &BinaryMask) -> Option<Vec<Point>> {
    trace_loops(mask)
        .into_iter()
        .filter(|l| signed_area(l) < 0.0)
        .max_by(|a, b| signed_area(b).total_cmp(&signed_area(a)))
}

/// Marching-squares length of the outer boundary of the given pixel set.
pub fn outer_perimeter(pixels: &[(usize, usize)]) -> f64 {
    if pixels.is_empty() {
        return 0.0;
    }
    let x0 = pixels.iter().map(|p| p.0).min().unwrap();
    let y0 = pixels.iter().map(|p| p.1).min().unwrap();
    let x1 = pixels.iter().map(|p| p.0).max().unwrap();
    let y1 = pixels.iter().map(|p| p.1).max().unwrap();
    let mut local = BinaryMask::new(x1 - x0 + 1, y1 - y0 + 1);
    for &(x, y) in pixels {
        local.set(x - x0, y - y0, true);
    }
    outer_loop(&local).map_or(0.0, |l| closed_length(&l))
}
