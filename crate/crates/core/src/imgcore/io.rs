//! 8-bit PNG conversion. Samples map linearly between `[0, 255]` and
//! `[0, 1]`; quantisation rounds half up.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage as Rgb8};

use super::{IlluminanceMap, Mask, RgbImage};
use crate::error::{Error, Result};

pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn dequantize(v: u8) -> f64 {
    v as f64 / 255.0
}

fn codec_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Codec {
        path: path.to_path_buf(),
        source,
    }
}

fn from_rgb8(img: &Rgb8) -> RgbImage {
    let data = img.as_raw().iter().map(|&v| dequantize(v)).collect();
    RgbImage::new(img.width() as usize, img.height() as usize, data).expect("rgb8 layout")
}

fn from_gray8(img: &GrayImage) -> IlluminanceMap {
    let data = img.as_raw().iter().map(|&v| dequantize(v)).collect();
    IlluminanceMap::new(img.width() as usize, img.height() as usize, data).expect("luma8 layout")
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    let raw: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let buf = Rgb8::from_raw(img.width() as u32, img.height() as u32, raw).expect("rgb8 layout");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(codec_err(Path::new("<memory>")))?;
    Ok(out.into_inner())
}

pub fn encode_gray_png(map: &IlluminanceMap) -> Result<Vec<u8>> {
    let raw: Vec<u8> = map.data().iter().map(|&v| quantize(v)).collect();
    let buf = GrayImage::from_raw(map.width() as u32, map.height() as u32, raw).expect("luma8 layout");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(codec_err(Path::new("<memory>")))?;
    Ok(out.into_inner())
}

fn decode(bytes: &[u8]) -> Result<DynamicImage> {
    image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(codec_err(Path::new("<memory>")))
}

/// Decodes any PNG into RGB (alpha is dropped, gray is replicated).
pub fn decode_rgb_png(bytes: &[u8]) -> Result<RgbImage> {
    Ok(from_rgb8(&decode(bytes)?.to_rgb8()))
}

pub fn decode_gray_png(bytes: &[u8]) -> Result<IlluminanceMap> {
    Ok(from_gray8(&decode(bytes)?.to_luma8()))
}

fn read(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    image::load_from_memory(&bytes).map_err(codec_err(path))
}

pub fn read_rgb_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(from_rgb8(&read(path.as_ref())?.to_rgb8()))
}

/// Reads an 8-bit grayscale mask (colour inputs are converted to luma).
pub fn read_mask_png(path: impl AsRef<Path>) -> Result<Mask> {
    Ok(Mask::from_map(from_gray8(&read(path.as_ref())?.to_luma8())))
}
