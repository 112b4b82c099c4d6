use crate::imgcore::Raster;
use crate::par;

use super::PreprocConfig;

const BINS: usize = 256;

/// Tile boundaries: `n` tiles of near-equal size covering `0..len`.
fn tile_bounds(len: usize, tile: usize) -> Vec<(usize, usize)> {
    let n = (len / tile).max(1);
    (0..n).map(|i| (i * len / n, (i + 1) * len / n)).collect()
}

fn tile_lut(gray: &Raster, xs: (usize, usize), ys: (usize, usize), clip: f64) -> [u8; BINS] {
    let mut hist = [0usize; BINS];
    for y in ys.0..ys.1 {
        for x in xs.0..xs.1 {
            hist[gray.get(x, y) as usize] += 1;
        }
    }
    let mut lut = [0u8; BINS];
    // A flat tile carries no contrast to redistribute; keep it as is.
    if hist.iter().filter(|&&c| c > 0).count() <= 1 {
        for (v, out) in lut.iter_mut().enumerate() {
            *out = v as u8;
        }
        return lut;
    }
    let area = (xs.1 - xs.0) * (ys.1 - ys.0);
    let limit = ((clip * area as f64 / BINS as f64) as usize).max(1);
    let mut excess = 0;
    for c in hist.iter_mut() {
        if *c > limit {
            excess += *c - limit;
            *c = limit;
        }
    }
    let per_bin = excess / BINS;
    let residual = excess % BINS;
    for c in hist.iter_mut() {
        *c += per_bin;
    }
    if residual > 0 {
        let step = (BINS / residual).max(1);
        for c in hist.iter_mut().step_by(step).take(residual) {
            *c += 1;
        }
    }
    let mut cdf = 0usize;
    for (v, out) in lut.iter_mut().enumerate() {
        cdf += hist[v];
        *out = ((cdf as f64 * 255.0 / area as f64).round()).min(255.0) as u8;
    }
    lut
}

/// Locates `p` between tile centers: `(i0, i1, weight of i1)`.
fn interp_index(p: usize, centers: &[f64]) -> (usize, usize, f64) {
    let p = p as f64;
    let last = centers.len() - 1;
    if p <= centers[0] {
        return (0, 0, 0.0);
    }
    if p >= centers[last] {
        return (last, last, 0.0);
    }
    let i = centers.iter().rposition(|&c| c <= p).unwrap();
    let t = (p - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, t)
}

/// Contrast-limited adaptive histogram equalization on a gray raster.
///
/// The image is split into tiles of roughly `clahe_tile` pixels; each tile's
/// 256-bin histogram is clipped at `clahe_clip` times the uniform bin height,
/// the excess is spread over all bins, and output pixels are bilinearly
/// interpolated between the mappings of the four nearest tile centers.
pub fn clahe(gray: &Raster, cfg: &PreprocConfig) -> Raster {
    let gray = gray.to_grayscale();
    let (w, h) = gray.dims();
    let tx = tile_bounds(w, cfg.clahe_tile);
    let ty = tile_bounds(h, cfg.clahe_tile);
    let cells: Vec<(usize, usize)> = (0..ty.len())
        .flat_map(|j| (0..tx.len()).map(move |i| (i, j)))
        .collect();
    let luts: Vec<[u8; BINS]> = par::map(&cells, |&(i, j)| tile_lut(&gray, tx[i], ty[j], cfg.clahe_clip));
    let lut = |i: usize, j: usize| &luts[j * tx.len() + i];
    let cx: Vec<f64> = tx.iter().map(|&(a, b)| (a + b - 1) as f64 / 2.0).collect();
    let cy: Vec<f64> = ty.iter().map(|&(a, b)| (a + b - 1) as f64 / 2.0).collect();

    let mut out = vec![0u8; w * h];
    par::for_each_row(&mut out, w, |y, row| {
        let (j0, j1, v) = interp_index(y, &cy);
        for (x, o) in row.iter_mut().enumerate() {
            let (i0, i1, u) = interp_index(x, &cx);
            let g = gray.get(x, y) as usize;
            let top = lut(i0, j0)[g] as f64 * (1.0 - u) + lut(i1, j0)[g] as f64 * u;
            let bottom = lut(i0, j1)[g] as f64 * (1.0 - u) + lut(i1, j1)[g] as f64 * u;
            *o = (top * (1.0 - v) + bottom * v).round().clamp(0.0, 255.0) as u8;
        }
    });
    Raster::from_vec(w, h, 1, out).expect("same dimensions")
}
