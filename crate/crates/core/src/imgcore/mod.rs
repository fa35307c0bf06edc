//! Pixel containers and the per-pixel operators every stage builds on.
//!
//! All samples are `f64`. Colour images are row-major `H x W x 3`,
//! single-channel maps are row-major `H x W`. Quantisation to 8 bits
//! happens only in [`io`].

mod blend;
mod color;
mod filter;
pub mod io;
mod otsu;
mod warp;

pub use blend::{alpha_blend, resize_map, resize_rgb};
pub use color::{replace_illuminance, to_illuminance};
pub use filter::{gaussian_filter, gaussian_kernel};
pub use otsu::{otsu_threshold, OTSU_BINS};
pub use warp::{homography_rect_to_quad, rectify_quad, warp_to_quad, Homography, RegionQuad};

pub(crate) use filter::gaussian_taps;

use crate::error::{Error, Result};

/// Guard used for every division by an illuminance value.
pub const EPS_DIV: f64 = 1e-4;

/// An `H x W x 3` colour image with nominal range `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::Config(format!(
                "rgb buffer holds {} samples, {}x{}x3 needs {}",
                data.len(),
                width,
                height,
                width * height * 3
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Builds an image from three single-channel planes of equal size.
    pub fn from_channels(channels: [&IlluminanceMap; 3]) -> Result<Self> {
        let dims = channels[0].dims();
        for c in &channels[1..] {
            if c.dims() != dims {
                return Err(Error::dims(dims, c.dims()));
            }
        }
        let mut data = Vec::with_capacity(dims.0 * dims.1 * 3);
        for i in 0..dims.0 * dims.1 {
            data.extend(channels.iter().map(|c| c.data[i]));
        }
        Ok(Self {
            width: dims.0,
            height: dims.1,
            data,
        })
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(3)
    }

    /// Extracts channel `c` (0 = R, 1 = G, 2 = B).
    pub fn channel(&self, c: usize) -> IlluminanceMap {
        IlluminanceMap {
            width: self.width,
            height: self.height,
            data: self.data.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Copies the `w x h` block whose top-left pixel is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::dims(self.dims(), (x0 + w, y0 + h)));
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for y in y0..y0 + h {
            let row = (y * self.width + x0) * 3;
            data.extend_from_slice(&self.data[row..row + w * 3]);
        }
        Ok(Self {
            width: w,
            height: h,
            data,
        })
    }

    pub(crate) fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() == dims {
            Ok(())
        } else {
            Err(Error::dims(dims, self.dims()))
        }
    }
}

/// A single-channel `H x W` map of nonnegative samples.
#[derive(Clone, Debug, PartialEq)]
pub struct IlluminanceMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl IlluminanceMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Config(format!(
                "map buffer holds {} samples, {}x{} needs {}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two maps of equal size.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::dims(self.dims(), (x0 + w, y0 + h)));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width + x0;
            data.extend_from_slice(&self.data[row..row + w]);
        }
        Ok(Self {
            width: w,
            height: h,
            data,
        })
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Replicates the map into the three channels of an RGB image.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }
}

/// A soft region mask with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask(IlluminanceMap);

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("mask sample {bad} outside [0, 1]")));
        }
        IlluminanceMap::new(width, height, data).map(Mask)
    }

    /// Clamps every sample of `map` into `[0, 1]`.
    pub fn from_map(map: IlluminanceMap) -> Self {
        Mask(map.map(|v| v.clamp(0.0, 1.0)))
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Mask(IlluminanceMap::filled(width, height, value.clamp(0.0, 1.0)))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Mask(IlluminanceMap::from_fn(width, height, |x, y| {
            f(x, y).clamp(0.0, 1.0)
        }))
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    pub fn as_map(&self) -> &IlluminanceMap {
        &self.0
    }

    pub fn area(&self) -> f64 {
        self.0.data.iter().sum()
    }

    /// Pixel bounds `(x0, y0, x1, y1)` (exclusive end) of the nonzero
    /// samples, or `None` for an empty mask.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let (w, h) = self.dims();
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for y in 0..h {
            for x in 0..w {
                if self.get(x, y) > 0.0 {
                    b = Some(match b {
                        None => (x, y, x + 1, y + 1),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1)),
                    });
                }
            }
        }
        b
    }
}
