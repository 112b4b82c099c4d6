use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, Raster};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Extensions accepted as input images.
pub fn is_supported_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "tif" | "tiff")
    )
}

fn from_dynamic(img: DynamicImage) -> Result<Raster> {
    match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            Raster::from_vec(w as usize, h as usize, 1, g.into_raw())
        }
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            let g = img.to_luma8();
            let (w, h) = g.dimensions();
            Raster::from_vec(w as usize, h as usize, 1, g.into_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            Raster::from_vec(w as usize, h as usize, 3, rgb.into_raw())
        }
    }
}

/// Decodes a PNG or TIFF file into a gray or RGB raster.
pub fn read_image(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let format = ImageFormat::from_path(path).map_err(image_err(path))?;
    let img = image::load_from_memory_with_format(&bytes, format).map_err(image_err(path))?;
    from_dynamic(img)
}

/// PNG bytes of a gray or RGB raster.
pub fn encode_png(img: &Raster) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = if img.channels() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, img.data().to_vec()).expect("buffer size"))
    } else {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, img.data().to_vec()).expect("buffer size"))
    };
    let mut buf = Cursor::new(Vec::new());
    dynamic
        .write_to(&mut buf, ImageFormat::Png)
        .map_err(image_err(Path::new("<png>")))?;
    Ok(buf.into_inner())
}

/// A mask as an 8-bit gray raster, 255 for foreground.
pub fn mask_to_raster(mask: &BinaryMask) -> Raster {
    let data = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    Raster::from_vec(mask.width(), mask.height(), 1, data).expect("mask dimensions")
}

/// Foreground where the (first-channel) value is at least 128.
pub fn raster_to_mask(img: &Raster) -> BinaryMask {
    let gray = img.to_grayscale();
    BinaryMask::from_vec(gray.width(), gray.height(), gray.data().iter().map(|&v| v >= 128).collect())
}

pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    encode_png(&mask_to_raster(mask))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    read_image(path).map(|r| raster_to_mask(&r))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

pub fn write_png(path: &Path, img: &Raster) -> Result<()> {
    atomic_write(path, &encode_png(img)?)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    atomic_write(path, &encode_mask_png(mask)?)
}
