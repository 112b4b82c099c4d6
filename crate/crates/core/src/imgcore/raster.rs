use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive pixel bounding box `(x0, y0)..=(x1, y1)`.
///
/// Coordinates are signed so that boxes partially (or fully) outside an
/// image can be expressed before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BBox {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }

    pub fn expand(&self, margin: i64) -> Self {
        Self::new(
            self.x0 - margin,
            self.y0 - margin,
            self.x1 + margin,
            self.y1 + margin,
        )
    }

    /// Intersection with `[0, width) x [0, height)`, or `None` when disjoint.
    pub fn clamp_to(&self, width: usize, height: usize) -> Option<Self> {
        let x0 = self.x0.max(0);
        let y0 = self.y0.max(0);
        let x1 = self.x1.min(width as i64 - 1);
        let y1 = self.y1.min(height as i64 - 1);
        (x0 <= x1 && y0 <= y1).then_some(Self::new(x0, y0, x1, y1))
    }
}

/// Top-left corner of a sub-image in the coordinates of its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Offset {
    pub x: usize,
    pub y: usize,
}

/// 8-bit raster with one (gray) or three (RGB) interleaved channels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        assert!(width >= 1 && height >= 1, "raster must be at least 1x1");
        assert!(channels == 1 || channels == 3, "raster has 1 or 3 channels");
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0
            || height == 0
            || !(channels == 1 || channels == 3)
            || data.len() != width * height * channels
        {
            return Err(Error::BadDimensions {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Grayscale raster from a function of `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, 1, data).expect("from_fn dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    /// First channel at `(x, y)`; the gray value for single-channel rasters.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].fill(value);
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].copy_from_slice(&value[..self.channels]);
    }

    /// BT.601 luma, rounded and clamped. Single-channel input is returned as is.
    pub fn to_grayscale(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| {
                let luma = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                luma.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Replicates a gray raster into three channels.
    pub fn to_rgb(&self) -> Raster {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Raster {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    /// Sub-image of `bbox` grown by `margin` and clamped to the image.
    pub fn crop(&self, bbox: BBox, margin: usize) -> Result<(Raster, Offset)> {
        bbox.clamp_to(self.width, self.height)
            .ok_or(Error::EmptyIntersection)?;
        let region = bbox
            .expand(margin as i64)
            .clamp_to(self.width, self.height)
            .ok_or(Error::EmptyIntersection)?;
        let (x0, y0) = (region.x0 as usize, region.y0 as usize);
        let (w, h) = (region.width() as usize, region.height() as usize);
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        Ok((
            Raster {
                width: w,
                height: h,
                channels: self.channels,
                data,
            },
            Offset { x: x0, y: y0 },
        ))
    }

    /// Writes `sub` into `self` at `offset`, clipping to bounds.
    pub fn paste(&mut self, sub: &Raster, offset: Offset) {
        assert_eq!(self.channels, sub.channels);
        for y in 0..sub.height {
            let ty = offset.y + y;
            if ty >= self.height {
                break;
            }
            for x in 0..sub.width {
                let tx = offset.x + x;
                if tx >= self.width {
                    break;
                }
                self.set_pixel(tx, ty, sub.pixel(x, y));
            }
        }
    }
}

/// Real-valued single-channel image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "float image buffer length");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    /// Gray values of a raster (first channel) as reals.
    pub fn from_raster(img: &Raster) -> Self {
        let gray = img.to_grayscale();
        Self::from_vec(
            gray.width,
            gray.height,
            gray.data.iter().map(|&v| v as f64).collect(),
        )
    }

    /// Rounds and clamps to an 8-bit gray raster.
    pub fn to_raster(&self) -> Raster {
        Raster::from_vec(
            self.width,
            self.height,
            1,
            self.data
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        )
        .expect("same dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Value at `(x, y)` with coordinates clamped to the border (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear interpolation at a real position, clamped to the image.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        self.sample_at(x0, y0, x - x0 as f64, y - y0 as f64)
    }

    /// Bilinear interpolation in the cell at integer `(x0, y0)` with fractional offsets.
    #[inline]
    pub fn sample_at(&self, x0: usize, y0: usize, fx: f64, fy: f64) -> f64 {
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        let top = a + (b - a) * fx;
        let bottom = c + (d - c) * fx;
        top + (bottom - top) * fy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_luma() {
        let img = Raster::from_vec(
            3,
            1,
            3,
            vec![255, 255, 255, 0, 0, 0, 255, 0, 0],
        )
        .unwrap();
        let g = img.to_grayscale();
        assert_eq!(g.channels(), 1);
        assert_eq!(g.data(), &[255, 0, 76]);
    }

    #[test]
    fn grayscale_passthrough() {
        let img = Raster::from_fn(4, 3, |x, y| (x * 10 + y) as u8);
        assert_eq!(img.to_grayscale(), img);
    }

    #[test]
    fn bad_buffer_rejected() {
        assert!(matches!(
            Raster::from_vec(2, 2, 1, vec![0; 3]),
            Err(Error::BadDimensions { .. })
        ));
        assert!(Raster::from_vec(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn crop_full_image_is_identity() {
        let img = Raster::from_fn(7, 5, |x, y| (x * 31 + y * 7) as u8);
        let (sub, off) = img.crop(BBox::new(0, 0, 6, 4), 0).unwrap();
        assert_eq!(sub, img);
        assert_eq!(off, Offset { x: 0, y: 0 });
    }

    #[test]
    fn crop_with_margin() {
        let img = Raster::new(100, 100, 1);
        let (sub, off) = img.crop(BBox::new(10, 10, 20, 20), 5).unwrap();
        assert_eq!(sub.dims(), (21, 21));
        assert_eq!(off, Offset { x: 5, y: 5 });
    }

    #[test]
    fn crop_clamps_at_border() {
        let img = Raster::new(100, 80, 3);
        let (sub, off) = img.crop(BBox::new(90, 2, 99, 10), 8).unwrap();
        assert_eq!(off, Offset { x: 82, y: 0 });
        assert_eq!(sub.dims(), (18, 19));
        assert_eq!(sub.channels(), 3);
    }

    #[test]
    fn crop_outside_fails() {
        let img = Raster::new(10, 10, 1);
        assert!(matches!(
            img.crop(BBox::new(20, 20, 30, 30), 50),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn crop_paste_roundtrip() {
        let img = Raster::from_fn(40, 30, |x, y| ((x * 13) ^ (y * 7)) as u8);
        let (sub, off) = img.crop(BBox::new(5, 3, 17, 20), 4).unwrap();
        let mut canvas = Raster::new(40, 30, 1);
        canvas.paste(&sub, off);
        for y in off.y..off.y + sub.height() {
            for x in off.x..off.x + sub.width() {
                assert_eq!(canvas.get(x, y), img.get(x, y));
            }
        }
    }

    #[test]
    fn bilinear_sampling() {
        let f = FloatImage::from_fn(3, 3, |x, y| (x + 10 * y) as f64);
        assert_eq!(f.sample(1.5, 0.5), 6.5);
        assert_eq!(f.sample(-3.0, 9.0), 20.0);
    }
}
