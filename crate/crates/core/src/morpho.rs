//! Binary morphology with disk structuring elements.
//!
//! Pixels outside the mask are background for both erosion and dilation, so
//! objects touching the frame also erode from the frame side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::BinaryMask;
use crate::par;

/// Digital disk `{(dx, dy) : dx² + dy² <= r²}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiskSE {
    radius: usize,
    /// Half-width of the disk row at `dy = i - radius`.
    half_widths: Vec<usize>,
}

impl DiskSE {
    pub fn new(radius: usize) -> Self {
        assert!(radius >= 1, "disk radius must be at least 1");
        let r = radius as i64;
        let half_widths = (-r..=r)
            .map(|dy| {
                let mut hw = 0;
                while (hw + 1) * (hw + 1) + dy * dy <= r * r {
                    hw += 1;
                }
                hw as usize
            })
            .collect();
        Self {
            radius,
            half_widths,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for (i, &hw) in self.half_widths.iter().enumerate() {
            let dy = i as isize - r;
            for dx in -(hw as isize)..=hw as isize {
                out.push((dx, dy));
            }
        }
        out
    }

    fn rows(&self) -> impl Iterator<Item = (isize, usize)> + '_ {
        let r = self.radius as isize;
        self.half_widths
            .iter()
            .enumerate()
            .map(move |(i, &hw)| (i as isize - r, hw))
    }
}

/// Which pass runs first when cleaning coarse masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanupOrder {
    #[default]
    OpenThenClose,
    CloseThenOpen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphoConfig {
    /// Disk radius for the opening/closing that cleans coarse grain masks.
    pub cleanup_se_radius: usize,
    pub cleanup_order: CleanupOrder,
}

impl Default for MorphoConfig {
    fn default() -> Self {
        Self {
            cleanup_se_radius: 4,
            cleanup_order: CleanupOrder::OpenThenClose,
        }
    }
}

impl MorphoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cleanup_se_radius < 1 {
            return Err(Error::Config("morpho.cleanup_se_radius must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-row prefix counts of foreground pixels: `prefix[y*(w+1) + x]` counts
/// foreground in `row[0..x]`.
fn row_prefix(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = mask.dims();
    let mut prefix = vec![0u32; (w + 1) * h];
    for y in 0..h {
        let base = y * (w + 1);
        for x in 0..w {
            prefix[base + x + 1] = prefix[base + x] + mask.get(x, y) as u32;
        }
    }
    prefix
}

pub fn erode(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    let (w, h) = mask.dims();
    let prefix = row_prefix(mask);
    let mut bits = vec![false; w * h];
    par::for_each_row(&mut bits, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            if !mask.get(x, y) {
                continue;
            }
            *out = se.rows().all(|(dy, hw)| {
                let yy = y as isize + dy;
                if yy < 0 || yy >= h as isize || x < hw || x + hw >= w {
                    return false;
                }
                let base = yy as usize * (w + 1);
                let count = prefix[base + x + hw + 1] - prefix[base + x - hw];
                count as usize == 2 * hw + 1
            });
        }
    });
    BinaryMask::from_vec(w, h, bits)
}

pub fn dilate(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    let (w, h) = mask.dims();
    let prefix = row_prefix(mask);
    let mut bits = vec![false; w * h];
    par::for_each_row(&mut bits, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = se.rows().any(|(dy, hw)| {
                let yy = y as isize + dy;
                if yy < 0 || yy >= h as isize {
                    return false;
                }
                let lo = x.saturating_sub(hw);
                let hi = (x + hw + 1).min(w);
                let base = yy as usize * (w + 1);
                prefix[base + hi] > prefix[base + lo]
            });
        }
    });
    BinaryMask::from_vec(w, h, bits)
}

/// Opening, `dilate(erode(m))`.
pub fn open(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

/// Closing, `erode(dilate(m))`, evaluated on a canvas padded by the SE radius
/// so the frame does not erode the result. This keeps closing extensive.
pub fn close(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    let pad = se.radius();
    erode(&dilate(&mask.padded(pad), se), se).unpadded(pad)
}

/// Sets every background pixel not 4-connected to the frame.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut outside = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, stack: &mut Vec<(usize, usize)>| {
        if !mask.get(x, y) && !outside[y * w + x] {
            outside[y * w + x] = true;
            stack.push((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut stack);
        seed(x, h - 1, &mut outside, &mut stack);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut stack);
        seed(w - 1, y, &mut outside, &mut stack);
    }
    while let Some((x, y)) = stack.pop() {
        if x > 0 {
            seed(x - 1, y, &mut outside, &mut stack);
        }
        if x + 1 < w {
            seed(x + 1, y, &mut outside, &mut stack);
        }
        if y > 0 {
            seed(x, y - 1, &mut outside, &mut stack);
        }
        if y + 1 < h {
            seed(x, y + 1, &mut outside, &mut stack);
        }
    }
    BinaryMask::from_vec(w, h, outside.into_iter().map(|o| !o).collect())
}

/// Squared Euclidean distance from each foreground pixel to the nearest
/// background pixel, with everything outside the frame counted as
/// background. Background pixels get 0.
pub fn distance_transform_sq(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    // Pad by one so the frame acts as background.
    let (pw, ph) = (w + 2, h + 2);
    let inf = ((pw * pw + ph * ph) as f64) * 4.0;
    let mut grid = vec![inf; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let inside = x >= 1 && y >= 1 && x <= w && y <= h && mask.get(x - 1, y - 1);
            if !inside {
                grid[y * pw + x] = 0.0;
            }
        }
    }
    // Columns, then rows.
    let mut cols = vec![0.0; pw * ph];
    {
        let mut transposed = vec![0.0; pw * ph];
        for y in 0..ph {
            for x in 0..pw {
                transposed[x * ph + y] = grid[y * pw + x];
            }
        }
        par::for_each_row(&mut cols, ph, |x, out| {
            edt_1d(&transposed[x * ph..(x + 1) * ph], out);
        });
    }
    let mut rows_in = vec![0.0; pw * ph];
    for x in 0..pw {
        for y in 0..ph {
            rows_in[y * pw + x] = cols[x * ph + y];
        }
    }
    let mut full = vec![0.0; pw * ph];
    par::for_each_row(&mut full, pw, |y, out| {
        edt_1d(&rows_in[y * pw..(y + 1) * pw], out);
    });
    let mut out = Vec::with_capacity(w * h);
    for y in 1..=h {
        out.extend_from_slice(&full[y * pw + 1..y * pw + 1 + w]);
    }
    out
}

/// Lower envelope of parabolas (Felzenszwalb and Huttenlocher).
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        // z[0] is -inf, so the loop always stops at k >= 0.
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let diff = q as f64 - p as f64;
        *dq = diff * diff + f[p];
    }
}

/// Erosion sequence `m₀ = mask`, `m_k = mask ⊖ disk(k·r)`, ending with (and
/// including) the first empty mask.
///
/// `m_k` is read off a single Euclidean distance transform. Each step equals
/// one more erosion by a Euclidean disk of radius `r`; iterating the small
/// digital disk instead would shrink diagonals about 30% slower than axes.
/// `m₁` is exactly `erode(mask, se)`.
pub fn erosion_sequence(mask: &BinaryMask, se: &DiskSE) -> Result<Vec<BinaryMask>> {
    if mask.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (w, h) = mask.dims();
    let dt = distance_transform_sq(mask);
    let r = se.radius() as f64;
    let mut seq = vec![mask.clone()];
    for k in 1.. {
        let t = (k as f64 * r).powi(2);
        let bits: Vec<bool> = dt.iter().map(|&d| d > t).collect();
        let next = BinaryMask::from_vec(w, h, bits);
        let done = next.is_empty();
        seq.push(next);
        if done {
            break;
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, r: f64) -> BinaryMask {
        let c = (size / 2) as f64;
        BinaryMask::from_fn(size, size, |x, y| {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            dx * dx + dy * dy <= r * r
        })
    }

    #[test]
    fn disk_se_shape() {
        let se = DiskSE::new(2);
        let offs = se.offsets();
        assert_eq!(offs.len(), 13);
        assert!(offs.contains(&(0, 0)));
        for &(dx, dy) in &offs {
            assert!(offs.contains(&(-dx, dy)) && offs.contains(&(dy, dx)));
        }
        assert_eq!(DiskSE::new(1).offsets().len(), 5);
    }

    #[test]
    fn erode_small_object_vanishes() {
        let m = BinaryMask::from_fn(20, 20, |x, y| (8..12).contains(&x) && (8..12).contains(&y));
        assert!(erode(&m, &DiskSE::new(3)).is_empty());
    }

    #[test]
    fn erode_disk_radius() {
        let eroded = erode(&disk(101, 30.0), &DiskSE::new(3));
        let expect = std::f64::consts::PI * 27.0 * 27.0;
        assert!((eroded.count() as f64 - expect).abs() / expect < 0.05);
    }

    #[test]
    fn erosion_touches_frame() {
        let full = BinaryMask::from_fn(10, 10, |_, _| true);
        let e = erode(&full, &DiskSE::new(1));
        assert_eq!(e.count(), 64);
    }

    #[test]
    fn open_removes_specks_close_fills_pockets() {
        let se = DiskSE::new(3);
        let mut m = disk(61, 20.0);
        m.set(2, 2, true);
        m.set(3, 2, true);
        let opened = open(&m, &se);
        assert!(!opened.get(2, 2));
        assert!(opened.get(30, 30));

        let mut holed = disk(61, 20.0);
        holed.set(30, 30, false);
        holed.set(31, 30, false);
        assert!(close(&holed, &se).get(30, 30));
    }

    #[test]
    fn fill_holes_donut_and_c() {
        let donut = BinaryMask::from_fn(21, 21, |x, y| {
            let d = ((x as f64 - 10.0).powi(2) + (y as f64 - 10.0).powi(2)).sqrt();
            d <= 8.0 && d >= 4.0
        });
        assert_eq!(fill_holes(&donut), disk(21, 8.0));

        let c_shape = BinaryMask::from_fn(21, 21, |x, y| {
            let d = ((x as f64 - 10.0).powi(2) + (y as f64 - 10.0).powi(2)).sqrt();
            d <= 8.0 && d >= 4.0 && !(x > 10 && (9..=11).contains(&y))
        });
        assert_eq!(fill_holes(&c_shape), c_shape);
    }

    #[test]
    fn sequence_single_pixel() {
        let m = BinaryMask::from_pixels(5, 5, &[(2, 2)]);
        let seq = erosion_sequence(&m, &DiskSE::new(1)).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(seq[1].is_empty());
    }

    #[test]
    fn sequence_disk_length() {
        let seq = erosion_sequence(&disk(61, 20.0), &DiskSE::new(2)).unwrap();
        assert!((10..=12).contains(&seq.len()), "len {}", seq.len());
        for pair in seq.windows(2) {
            assert!(pair[1].count() < pair[0].count());
            assert!(pair[1].is_subset_of(&pair[0]));
        }
    }

    #[test]
    fn sequence_first_step_matches_erode() {
        let m = BinaryMask::from_fn(40, 30, |x, y| (x * 7 + y * 3) % 11 < 8 || (10..30).contains(&x));
        for r in 1..4 {
            let se = DiskSE::new(r);
            let seq = erosion_sequence(&m, &se).unwrap();
            assert_eq!(seq[1], erode(&m, &se));
        }
    }

    #[test]
    fn distance_transform_brute_force() {
        let m = BinaryMask::from_fn(17, 13, |x, y| (x * x + 3 * y) % 7 != 0);
        let dt = distance_transform_sq(&m);
        for y in 0..13i64 {
            for x in 0..17i64 {
                let mut best = i64::MAX;
                for by in -1..=13i64 {
                    for bx in -1..=17i64 {
                        if !m.get_or_bg(bx as isize, by as isize) {
                            best = best.min((bx - x).pow(2) + (by - y).pow(2));
                        }
                    }
                }
                assert_eq!(dt[(y * 17 + x) as usize], best as f64, "at {x},{y}");
            }
        }
    }

    #[test]
    fn sequence_is_isotropic() {
        let seq = erosion_sequence(&disk(141, 60.0), &DiskSE::new(2)).unwrap();
        let expect = std::f64::consts::PI * 46.0 * 46.0;
        assert!((seq[7].count() as f64 - expect).abs() / expect < 0.05);
    }

    #[test]
    fn sequence_empty_input() {
        assert!(matches!(
            erosion_sequence(&BinaryMask::new(4, 4), &DiskSE::new(1)),
            Err(Error::EmptyInput)
        ));
    }
}
