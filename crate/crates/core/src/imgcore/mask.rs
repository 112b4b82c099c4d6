use crate::error::{Error, Result};
use crate::imgcore::raster::{BBox, Offset};

/// Boolean foreground grid aligned to a raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "mask buffer length");
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::from_vec(width, height, bits)
    }

    /// Mask with the given pixels set.
    pub fn from_pixels(width: usize, height: usize, pixels: &[(usize, usize)]) -> Self {
        let mut m = Self::new(width, height);
        for &(x, y) in pixels {
            m.set(x, y, true);
        }
        m
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn ensure_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                mask: other.dims(),
                expected: self.dims(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> BinaryMask {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn and(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &BinaryMask) -> BinaryMask {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn not(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn pixels(&self) -> Vec<(usize, usize)> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    /// Tight bounding box of the foreground.
    pub fn bbox(&self) -> Option<BBox> {
        let mut bb: Option<BBox> = None;
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            let (x, y) = ((i % self.width) as i64, (i / self.width) as i64);
            bb = Some(match bb {
                None => BBox::new(x, y, x, y),
                Some(b) => BBox::new(b.x0.min(x), b.y0.min(y), b.x1.max(x), b.y1.max(y)),
            });
        }
        bb
    }

    /// Whether any foreground pixel lies on the outermost row or column.
    pub fn touches_border(&self) -> bool {
        let (w, h) = (self.width, self.height);
        (0..w).any(|x| self.get(x, 0) || self.get(x, h - 1))
            || (0..h).any(|y| self.get(0, y) || self.get(w - 1, y))
    }

    /// Sub-mask of size `width x height` starting at `offset`; pixels outside
    /// `self` read as background.
    pub fn crop(&self, offset: Offset, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| {
            self.get_or_bg((x + offset.x) as isize, (y + offset.y) as isize)
        })
    }

    /// Places `self` (a sub-image mask) at `offset` inside a `width x height` canvas.
    pub fn embed(&self, offset: Offset, width: usize, height: usize) -> BinaryMask {
        let mut out = BinaryMask::new(width, height);
        for y in 0..self.height {
            let ty = y + offset.y;
            if ty >= height {
                break;
            }
            for x in 0..self.width {
                let tx = x + offset.x;
                if tx >= width {
                    break;
                }
                if self.get(x, y) {
                    out.set(tx, ty, true);
                }
            }
        }
        out
    }

    /// Mask grown by `pad` background pixels on every side.
    pub fn padded(&self, pad: usize) -> BinaryMask {
        let mut out = BinaryMask::new(self.width + 2 * pad, self.height + 2 * pad);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.set(x + pad, y + pad, true);
                }
            }
        }
        out
    }

    /// Inverse of [`BinaryMask::padded`].
    pub fn unpadded(&self, pad: usize) -> BinaryMask {
        self.crop(
            Offset { x: pad, y: pad },
            self.width - 2 * pad,
            self.height - 2 * pad,
        )
    }

    pub fn iou(&self, other: &BinaryMask) -> f64 {
        let inter = self.intersection_count(other);
        let union = self.count() + other.count() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let b = BinaryMask::from_fn(4, 4, |_, y| y < 2);
        assert_eq!(a.and(&b).count(), 4);
        assert_eq!(a.or(&b).count(), 12);
        assert_eq!(a.and_not(&b).count(), 4);
        assert_eq!(a.not().count(), 8);
        assert!(a.and(&b).is_subset_of(&a));
        assert!((a.iou(&b) - 4.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn bbox_and_border() {
        let mut m = BinaryMask::new(10, 8);
        assert!(m.bbox().is_none());
        m.set(3, 2, true);
        m.set(6, 5, true);
        assert_eq!(m.bbox(), Some(BBox::new(3, 2, 6, 5)));
        assert!(!m.touches_border());
        m.set(9, 4, true);
        assert!(m.touches_border());
    }

    #[test]
    fn crop_embed_roundtrip() {
        let m = BinaryMask::from_fn(12, 9, |x, y| (x * y) % 3 == 1);
        let off = Offset { x: 2, y: 3 };
        let sub = m.crop(off, 6, 4);
        let back = sub.embed(off, 12, 9);
        for y in 3..7 {
            for x in 2..8 {
                assert_eq!(back.get(x, y), m.get(x, y));
            }
        }
        assert_eq!(m.padded(3).unpadded(3), m);
    }
}
