use crate::imgcore::{BinaryMask, FloatImage, Raster};
use crate::par;

use super::{PreprocConfig, ThresholdMode};

/// Horizontal and vertical 3×3 Sobel responses with replicated borders.
pub fn sobel_gradients(img: &FloatImage) -> (FloatImage, FloatImage) {
    let (w, h) = img.dims();
    let mut buf = vec![(0.0, 0.0); w * h];
    par::for_each_row(&mut buf, w, |y, row| {
        let yi = y as isize;
        for (x, o) in row.iter_mut().enumerate() {
            let xi = x as isize;
            let p = |dx: isize, dy: isize| img.get_clamped(xi + dx, yi + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            *o = (gx, gy);
        }
    });
    let gx = FloatImage::from_vec(w, h, buf.iter().map(|g| g.0).collect());
    let gy = FloatImage::from_vec(w, h, buf.iter().map(|g| g.1).collect());
    (gx, gy)
}

pub fn sobel_magnitude(img: &FloatImage) -> FloatImage {
    let (gx, gy) = sobel_gradients(img);
    let (w, h) = img.dims();
    FloatImage::from_vec(
        w,
        h,
        gx.data()
            .iter()
            .zip(gy.data())
            .map(|(a, b)| a.hypot(*b))
            .collect(),
    )
}

/// Otsu threshold over a 256-bin histogram of non-negative values spanning
/// `[0, max]`. Returns the upper edge of the last bin of the lower class;
/// values strictly above it form the upper class. `None` when all values are 0.
pub fn otsu_threshold(values: &[f64]) -> Option<f64> {
    const BINS: usize = 256;
    let max = values.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let mut hist = [0u64; BINS];
    for &v in values {
        let b = ((v / max) * BINS as f64) as usize;
        hist[b.min(BINS - 1)] += 1;
    }
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0);
    let (mut best, mut best_k) = (-1.0, 0usize);
    for (k, &c) in hist.iter().enumerate().take(BINS - 1) {
        w0 += c;
        sum0 += k as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_k = k;
        }
    }
    Some((best_k + 1) as f64 * max / BINS as f64)
}

/// Sobel magnitude and the binary edge map `magnitude > threshold`.
pub fn sobel_edges(img: &FloatImage, cfg: &PreprocConfig) -> (FloatImage, BinaryMask) {
    let mag = sobel_magnitude(img);
    let threshold = match cfg.sobel_threshold_mode {
        ThresholdMode::Otsu => otsu_threshold(mag.data()),
        ThresholdMode::Fixed => Some(cfg.sobel_fixed_threshold),
    };
    let (w, h) = mag.dims();
    let edges = match threshold {
        Some(t) => BinaryMask::from_vec(w, h, mag.data().iter().map(|&m| m > t).collect()),
        None => BinaryMask::new(w, h),
    };
    (mag, edges)
}

/// Sobel magnitude of a gray raster scaled so its maximum is 1.
pub fn gradient_energy(gray: &Raster) -> FloatImage {
    let mut mag = sobel_magnitude(&FloatImage::from_raster(gray));
    let max = mag.max();
    if max > 0.0 {
        mag.data_mut().iter_mut().for_each(|v| *v /= max);
    }
    mag
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_edges() {
        let img = FloatImage::from_fn(10, 10, |_, _| 50.0);
        let (mag, edges) = sobel_edges(&img, &PreprocConfig::default());
        assert!(mag.data().iter().all(|&v| v == 0.0));
        assert!(edges.is_empty());
        let e = gradient_energy(&Raster::filled(10, 10, 1, 50));
        assert!(e.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_step() {
        let img = FloatImage::from_fn(10, 8, |x, _| if x < 5 { 10.0 } else { 110.0 });
        let (gx, gy) = sobel_gradients(&img);
        for y in 1..7 {
            assert_eq!(gx.get(4, y), 400.0);
            assert_eq!(gx.get(5, y), 400.0);
            assert_eq!(gy.get(4, y), 0.0);
            assert_eq!(gx.get(2, y), 0.0);
        }
        let (_, edges) = sobel_edges(&img, &PreprocConfig::default());
        assert!(edges.get(4, 3) && edges.get(5, 3) && !edges.get(1, 3));
    }

    #[test]
    fn energy_normalized() {
        let img = Raster::from_fn(20, 20, |x, y| ((x * 3 + y * 5) % 17) as u8 * 10);
        let e = gradient_energy(&img);
        assert_eq!(e.max(), 1.0);
        assert!(e.min() >= 0.0);
    }

    #[test]
    fn otsu_splits_bimodal() {
        let mut v = vec![1.0; 100];
        v.extend(vec![9.0; 50]);
        let t = otsu_threshold(&v).unwrap();
        assert!(t >= 1.0 && t < 9.0);
        assert_eq!(otsu_threshold(&[0.0, 0.0]), None);
    }

    #[test]
    fn fixed_threshold_mode() {
        let img = FloatImage::from_fn(10, 8, |x, _| if x < 5 { 10.0 } else { 20.0 });
        let cfg = PreprocConfig {
            sobel_threshold_mode: ThresholdMode::Fixed,
            sobel_fixed_threshold: 50.0,
            ..Default::default()
        };
        let (_, edges) = sobel_edges(&img, &cfg);
        assert!(edges.is_empty());
    }
}
