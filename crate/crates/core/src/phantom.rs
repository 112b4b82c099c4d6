//! Synthetic grain images with exact ground truth, and scoring of
//! segmentation results against them.
//!
//! A grain is a dark disk whose outer annulus (the exine) carries a dense
//! granular texture and whose inner part is smooth, speckled or patterned.
//! Debris disks and elongated smudges can be scattered on the background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, Point, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorStyle {
    /// White noise.
    #[default]
    Smooth,
    /// Blurred noise blobs a few pixels across.
    Speckled,
    /// Product of sines with a 14 px period.
    Patterned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomGrain {
    /// `[x, y]` in pixels.
    pub center: [f64; 2],
    pub inner_radius: f64,
    pub exine_thickness: f64,
    pub interior_style: InteriorStyle,
    pub interior_mean: f64,
    /// Standard deviation of the interior texture.
    pub interior_sd: f64,
    pub exine_mean: f64,
    /// Pixel noise on the exine.
    pub exine_sd: f64,
    /// Probability that an exine pixel seeds a 3×3 granule.
    pub edge_density: f64,
    /// Brightness of granules above `exine_mean`.
    pub texture_contrast: f64,
}

impl Default for PhantomGrain {
    fn default() -> Self {
        Self {
            center: [128.0, 128.0],
            inner_radius: 45.0,
            exine_thickness: 15.0,
            interior_style: InteriorStyle::Smooth,
            interior_mean: 140.0,
            interior_sd: 4.0,
            exine_mean: 70.0,
            exine_sd: 5.0,
            edge_density: 0.04,
            texture_contrast: 70.0,
        }
    }
}

impl PhantomGrain {
    pub fn outer_radius(&self) -> f64 {
        self.inner_radius + self.exine_thickness
    }
}

/// Uniform dark disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Debris {
    pub center: [f64; 2],
    pub radius: f64,
    pub intensity: f64,
}

/// Uniform rotated bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Smudge {
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    pub angle_deg: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub background_mean: f64,
    pub background_sd: f64,
    pub rng_seed: u64,
    /// Allows grains to overlap (touching clusters).
    pub cluster: bool,
    pub grains: Vec<PhantomGrain>,
    pub debris: Vec<Debris>,
    pub smudges: Vec<Smudge>,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            background_mean: 200.0,
            background_sd: 8.0,
            rng_seed: 1,
            cluster: false,
            grains: vec![PhantomGrain::default()],
            debris: Vec::new(),
            smudges: Vec::new(),
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("phantom width and height must be >= 1".into()));
        }
        if !(self.background_sd >= 0.0) {
            return Err(Error::Config("phantom background_sd must be >= 0".into()));
        }
        for g in &self.grains {
            if !(g.exine_thickness >= 2.0) || !(g.inner_radius > 0.0) {
                return Err(Error::Config(
                    "phantom grains need inner_radius > 0 and exine_thickness >= 2".into(),
                ));
            }
            if !(0.0..=1.0).contains(&g.edge_density) || g.interior_sd < 0.0 || g.exine_sd < 0.0 {
                return Err(Error::Config("phantom grain texture parameters out of range".into()));
            }
        }
        for d in &self.debris {
            if !(d.radius > 0.0 && d.radius <= 8.0) {
                return Err(Error::Config("debris radius must be in (0, 8]".into()));
            }
        }
        for s in &self.smudges {
            if !(s.length > 0.0 && s.width > 0.0) {
                return Err(Error::Config("smudge length and width must be > 0".into()));
            }
        }
        if !self.cluster {
            for i in 0..self.grains.len() {
                for j in i + 1..self.grains.len() {
                    let (a, b) = (&self.grains[i], &self.grains[j]);
                    let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                    if d < a.outer_radius() + b.outer_radius() {
                        return Err(Error::SpecOverlap(i, j));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Geometry of one rendered grain. Masks use the pixel-center rule
/// `distance <= radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthGrain {
    pub center: [f64; 2],
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl TruthGrain {
    fn disk(&self, r: f64, width: usize, height: usize) -> BinaryMask {
        let [cx, cy] = self.center;
        BinaryMask::from_fn(width, height, |x, y| (x as f64 - cx).hypot(y as f64 - cy) <= r)
    }

    pub fn grain_mask(&self, width: usize, height: usize) -> BinaryMask {
        self.disk(self.outer_radius, width, height)
    }

    pub fn inner_mask(&self, width: usize, height: usize) -> BinaryMask {
        self.disk(self.inner_radius, width, height)
    }

    pub fn exine_mask(&self, width: usize, height: usize) -> BinaryMask {
        self.grain_mask(width, height).and_not(&self.inner_mask(width, height))
    }

    pub fn thickness(&self) -> f64 {
        self.outer_radius - self.inner_radius
    }

    /// Radial distance error of a point from the circle of radius `r`.
    fn radial_error(&self, p: &Point, r: f64) -> f64 {
        (p.x - self.center[0]).hypot(p.y - self.center[1]) - r
    }

    /// A perfect segmentation of this grain.
    pub fn as_result(&self, width: usize, height: usize) -> ScoredGrain {
        let circle = |r: f64| {
            let n = ((std::f64::consts::TAU * r) / 4.0).ceil().max(8.0) as usize;
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    Point::new(self.center[0] + r * t.cos(), self.center[1] - r * t.sin())
                })
                .collect()
        };
        ScoredGrain {
            grain_mask: self.grain_mask(width, height),
            inner_mask: Some(self.inner_mask(width, height)),
            grain_contour: circle(self.outer_radius),
            inner_contour: Some(circle(self.inner_radius)),
            thickness_est: Some(self.thickness()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomTruth {
    pub width: usize,
    pub height: usize,
    pub grains: Vec<TruthGrain>,
}

fn coverage(signed_dist_inside: f64) -> f64 {
    (signed_dist_inside + 0.5).clamp(0.0, 1.0)
}

/// Separable Gaussian blur (σ = 1.5) with replicated borders.
fn blur(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let sigma: f64 = 1.5;
    let radius = 4isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let pass = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, k) in kernel.iter().enumerate() {
                    let o = i as isize - radius;
                    let (sx, sy) = if horizontal {
                        ((x as isize + o).clamp(0, w as isize - 1) as usize, y)
                    } else {
                        (x, (y as isize + o).clamp(0, h as isize - 1) as usize)
                    };
                    acc += k * src[sy * w + sx];
                }
                out[y * w + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(data, true), false)
}

fn population_sd(v: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd.max(0.0)).expect("finite standard deviation")
}

/// Bounding window `[x0, x1) × [y0, y1)` of a disk, clipped to the image.
fn window(cx: f64, cy: f64, r: f64, w: usize, h: usize) -> (usize, usize, usize, usize) {
    let x0 = (cx - r - 2.0).floor().max(0.0) as usize;
    let y0 = (cy - r - 2.0).floor().max(0.0) as usize;
    let x1 = ((cx + r + 3.0).ceil().max(0.0) as usize).min(w);
    let y1 = ((cy + r + 3.0).ceil().max(0.0) as usize).min(h);
    (x0, y0, x1.max(x0), y1.max(y0))
}

fn render_grain(img: &mut [f64], w: usize, h: usize, g: &PhantomGrain, rng: &mut ChaCha8Rng) {
    let [cx, cy] = g.center;
    let outer = g.outer_radius();
    let (x0, y0, x1, y1) = window(cx, cy, outer, w, h);
    let (bw, bh) = (x1 - x0, y1 - y0);
    if bw == 0 || bh == 0 {
        return;
    }
    let n = bw * bh;

    let seeds: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < g.edge_density).collect();
    let exine_noise = normal(g.exine_sd);
    let exine_jitter: Vec<f64> = (0..n).map(|_| exine_noise.sample(rng)).collect();
    let white = normal(1.0);
    let raw: Vec<f64> = (0..n).map(|_| white.sample(rng)).collect();
    let texture: Vec<f64> = match g.interior_style {
        InteriorStyle::Smooth => raw.iter().map(|v| v * g.interior_sd).collect(),
        InteriorStyle::Speckled => {
            let b = blur(&raw, bw, bh);
            let sd = population_sd(&b);
            let scale = if sd > 0.0 { g.interior_sd / sd } else { 0.0 };
            b.iter().map(|v| v * scale).collect()
        }
        InteriorStyle::Patterned => {
            let period = 14.0;
            let k = std::f64::consts::TAU / period;
            (0..n)
                .map(|i| {
                    let (x, y) = ((x0 + i % bw) as f64, (y0 + i / bw) as f64);
                    // sin·sin has standard deviation 1/2
                    2.0 * g.interior_sd * (k * (x - cx)).sin() * (k * (y - cy)).sin() + 0.1 * raw[i] * g.interior_sd
                })
                .collect()
        }
    };

    for by in 0..bh {
        for bx in 0..bw {
            let (x, y) = (x0 + bx, y0 + by);
            let d = (x as f64 - cx).hypot(y as f64 - cy);
            let a_out = coverage(outer - d);
            if a_out == 0.0 {
                continue;
            }
            let a_in = coverage(g.inner_radius - d);
            let i = by * bw + bx;
            let granule = (-1..=1).any(|oy: isize| {
                (-1..=1).any(|ox: isize| {
                    let (sx, sy) = (bx as isize + ox, by as isize + oy);
                    sx >= 0 && sy >= 0 && (sx as usize) < bw && (sy as usize) < bh && seeds[sy as usize * bw + sx as usize]
                })
            });
            let exine = g.exine_mean + if granule { g.texture_contrast } else { 0.0 } + exine_jitter[i];
            let interior = g.interior_mean + texture[i];
            let value = exine * (1.0 - a_in) + interior * a_in;
            let p = &mut img[y * w + x];
            *p = *p * (1.0 - a_out) + value * a_out;
        }
    }
}

fn render_debris(img: &mut [f64], w: usize, h: usize, d: &Debris) {
    let [cx, cy] = d.center;
    let (x0, y0, x1, y1) = window(cx, cy, d.radius, w, h);
    for y in y0..y1 {
        for x in x0..x1 {
            let a = coverage(d.radius - (x as f64 - cx).hypot(y as f64 - cy));
            let p = &mut img[y * w + x];
            *p = *p * (1.0 - a) + d.intensity * a;
        }
    }
}

fn render_smudge(img: &mut [f64], w: usize, h: usize, s: &Smudge) {
    let [cx, cy] = s.center;
    let (sin, cos) = s.angle_deg.to_radians().sin_cos();
    let reach = 0.5 * s.length.hypot(s.width);
    let (x0, y0, x1, y1) = window(cx, cy, reach, w, h);
    for y in y0..y1 {
        for x in x0..x1 {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let along = dx * cos + dy * sin;
            let across = -dx * sin + dy * cos;
            let outside = (along.abs() - 0.5 * s.length).max(across.abs() - 0.5 * s.width);
            let a = coverage(-outside);
            let p = &mut img[y * w + x];
            *p = *p * (1.0 - a) + s.intensity * a;
        }
    }
}

/// Renders the phantom. The output is a pure function of the spec.
pub fn generate(spec: &PhantomSpec) -> Result<(Raster, PhantomTruth)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let bg = normal(spec.background_sd);
    let mut img: Vec<f64> = (0..w * h).map(|_| spec.background_mean + bg.sample(&mut rng)).collect();
    for d in &spec.debris {
        render_debris(&mut img, w, h, d);
    }
    for s in &spec.smudges {
        render_smudge(&mut img, w, h, s);
    }
    for g in &spec.grains {
        render_grain(&mut img, w, h, g, &mut rng);
    }
    let data = img.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let raster = Raster::from_vec(w, h, 1, data)?;
    let truth = PhantomTruth {
        width: w,
        height: h,
        grains: spec
            .grains
            .iter()
            .map(|g| TruthGrain {
                center: g.center,
                inner_radius: g.inner_radius,
                outer_radius: g.outer_radius(),
            })
            .collect(),
    };
    Ok((raster, truth))
}

/// A segmentation result in full-image coordinates, as consumed by [`score`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGrain {
    pub grain_mask: BinaryMask,
    pub inner_mask: Option<BinaryMask>,
    pub grain_contour: Vec<Point>,
    pub inner_contour: Option<Vec<Point>>,
    pub thickness_est: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrainScore {
    pub truth_index: usize,
    /// Index of the matched result, if any.
    pub result_index: Option<usize>,
    pub iou: f64,
    pub grain_rms: Option<f64>,
    pub grain_max: Option<f64>,
    pub inner_rms: Option<f64>,
    pub thickness_error: Option<f64>,
    pub exine_iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// IoU a result must reach to count as a correct segmentation.
    pub iou_threshold: f64,
    pub n_truth: usize,
    pub n_results: usize,
    pub n_matched: usize,
    pub recall: f64,
    pub false_positives: usize,
    pub grains: Vec<GrainScore>,
}

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.7;

fn rms_and_max(errors: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (mut n, mut sq, mut max) = (0usize, 0.0, 0.0_f64);
    for e in errors {
        n += 1;
        sq += e * e;
        max = max.max(e.abs());
    }
    (n > 0).then(|| ((sq / n as f64).sqrt(), max))
}

/// Matches results to truth grains one-to-one by descending mask IoU
/// (pairs below `iou_threshold` never match) and measures boundary errors
/// of the matched pairs. Unmatched results are false positives.
pub fn score(results: &[ScoredGrain], truth: &PhantomTruth, iou_threshold: f64) -> ScoreReport {
    let (w, h) = (truth.width, truth.height);
    let truth_masks: Vec<(BinaryMask, BinaryMask)> = truth
        .grains
        .iter()
        .map(|t| (t.grain_mask(w, h), t.inner_mask(w, h)))
        .collect();
    let mut pairs = Vec::new();
    for (ti, (tm, _)) in truth_masks.iter().enumerate() {
        for (ri, r) in results.iter().enumerate() {
            if r.grain_mask.dims() != (w, h) {
                continue;
            }
            let iou = tm.iou(&r.grain_mask);
            if iou >= iou_threshold {
                pairs.push((iou, ti, ri));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut truth_match: Vec<Option<(usize, f64)>> = vec![None; truth.grains.len()];
    let mut result_used = vec![false; results.len()];
    for (iou, ti, ri) in pairs {
        if truth_match[ti].is_none() && !result_used[ri] {
            truth_match[ti] = Some((ri, iou));
            result_used[ri] = true;
        }
    }

    let grains: Vec<GrainScore> = truth
        .grains
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let Some((ri, iou)) = truth_match[ti] else {
                let best = results
                    .iter()
                    .filter(|r| r.grain_mask.dims() == (w, h))
                    .map(|r| truth_masks[ti].0.iou(&r.grain_mask))
                    .fold(0.0, f64::max);
                return GrainScore {
                    truth_index: ti,
                    result_index: None,
                    iou: best,
                    grain_rms: None,
                    grain_max: None,
                    inner_rms: None,
                    thickness_error: None,
                    exine_iou: None,
                };
            };
            let r = &results[ri];
            let grain = rms_and_max(r.grain_contour.iter().map(|p| t.radial_error(p, t.outer_radius)));
            let inner = r
                .inner_contour
                .as_ref()
                .and_then(|c| rms_and_max(c.iter().map(|p| t.radial_error(p, t.inner_radius))));
            let exine_iou = r.inner_mask.as_ref().map(|inner_mask| {
                let result_exine = r.grain_mask.and_not(inner_mask);
                let truth_exine = truth_masks[ti].0.and_not(&truth_masks[ti].1);
                truth_exine.iou(&result_exine)
            });
            GrainScore {
                truth_index: ti,
                result_index: Some(ri),
                iou,
                grain_rms: grain.map(|g| g.0),
                grain_max: grain.map(|g| g.1),
                inner_rms: inner.map(|i| i.0),
                thickness_error: r.thickness_est.map(|e| e - t.thickness()),
                exine_iou,
            }
        })
        .collect();
    let n_matched = grains.iter().filter(|g| g.result_index.is_some()).count();
    ScoreReport {
        iou_threshold,
        n_truth: truth.grains.len(),
        n_results: results.len(),
        n_matched,
        recall: if truth.grains.is_empty() {
            1.0
        } else {
            n_matched as f64 / truth.grains.len() as f64
        },
        false_positives: results.len() - n_matched,
        grains,
    }
}

/// A random single-image spec inside the ranges used for acceptance runs:
/// inner radius 40–120 px, exine 8–25 px, background noise SD ≤ 10, one to
/// three separated grains and every interior style.
pub fn random_spec(seed: u64, width: usize, height: usize, n_grains: usize) -> PhantomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_9a11);
    let styles = [InteriorStyle::Smooth, InteriorStyle::Speckled, InteriorStyle::Patterned];
    let mut grains: Vec<PhantomGrain> = Vec::new();
    let mut attempts = 0;
    while grains.len() < n_grains && attempts < 10_000 {
        attempts += 1;
        let inner_radius = rng.random_range(40.0..=120.0_f64).round();
        // thin walls on large grains would leave too little texture for the
        // grain-level intensity test
        let t_min = (0.15 * inner_radius).max(8.0).min(25.0);
        let exine_thickness = rng.random_range(t_min..=25.0_f64).round();
        let outer = inner_radius + exine_thickness;
        let margin = outer + 30.0;
        if 2.0 * margin >= width.min(height) as f64 {
            continue;
        }
        let center = [
            rng.random_range(margin..width as f64 - margin).round(),
            rng.random_range(margin..height as f64 - margin).round(),
        ];
        let clear = grains.iter().all(|g| {
            (g.center[0] - center[0]).hypot(g.center[1] - center[1]) > g.outer_radius() + outer + 30.0
        });
        if !clear {
            continue;
        }
        let style = styles[(seed as usize + grains.len()) % 3];
        let interior_sd = match style {
            InteriorStyle::Smooth => 4.0,
            InteriorStyle::Speckled => 10.0,
            InteriorStyle::Patterned => 8.0,
        };
        grains.push(PhantomGrain {
            center,
            inner_radius,
            exine_thickness,
            interior_style: style,
            interior_sd,
            ..PhantomGrain::default()
        });
    }
    PhantomSpec {
        width,
        height,
        background_mean: 200.0,
        background_sd: rng.random_range(3.0..=10.0_f64),
        rng_seed: seed,
        cluster: false,
        grains,
        debris: Vec::new(),
        smudges: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = PhantomSpec::default();
        let (a, _) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate(&PhantomSpec { rng_seed: 2, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn truth_partition() {
        let (_, t) = generate(&PhantomSpec::default()).unwrap();
        let g = &t.grains[0];
        let (grain, inner, exine) = (g.grain_mask(256, 256), g.inner_mask(256, 256), g.exine_mask(256, 256));
        assert_eq!(exine.intersection_count(&inner), 0);
        assert_eq!(exine.or(&inner), grain);
    }

    #[test]
    fn overlap_rejected_unless_cluster() {
        let a = PhantomGrain {
            center: [100.0, 128.0],
            ..Default::default()
        };
        let b = PhantomGrain {
            center: [160.0, 128.0],
            ..Default::default()
        };
        let spec = PhantomSpec {
            grains: vec![a, b],
            ..Default::default()
        };
        assert!(matches!(generate(&spec), Err(Error::SpecOverlap(0, 1))));
        assert!(generate(&PhantomSpec { cluster: true, ..spec }).is_ok());
    }

    #[test]
    fn identity_score() {
        let spec = random_spec(3, 512, 512, 2);
        let (_, truth) = generate(&spec).unwrap();
        let results: Vec<ScoredGrain> = truth.grains.iter().map(|g| g.as_result(512, 512)).collect();
        let s = score(&results, &truth, DEFAULT_IOU_THRESHOLD);
        assert_eq!(s.n_matched, truth.grains.len());
        assert_eq!(s.false_positives, 0);
        for g in &s.grains {
            assert_eq!(g.iou, 1.0);
            assert_eq!(g.exine_iou, Some(1.0));
            assert!(g.grain_rms.unwrap() < 1e-9 && g.inner_rms.unwrap() < 1e-9);
            assert_eq!(g.thickness_error, Some(0.0));
        }
        let empty = score(&[], &truth, DEFAULT_IOU_THRESHOLD);
        assert_eq!((empty.n_matched, empty.recall), (0, 0.0));
    }
}
