use std::path::PathBuf;

use thiserror::Error;

use crate::backbone::BackboneError;

/// Errors raised by the pixel operators and pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid kernel size {0}: must be odd and >= 1")]
    InvalidKernel(i64),
    #[error("kernel size {kernel} too large for a {width}x{height} map (max {max})")]
    KernelTooLarge {
        kernel: usize,
        width: usize,
        height: usize,
        max: usize,
    },
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidAlpha { name: &'static str, value: f64 },
    #[error("degenerate quad: {0}")]
    DegenerateQuad(String),
    #[error("quad corner ({x}, {y}) lies outside the {width}x{height} canvas")]
    QuadOutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("mask has no nonzero pixels")]
    EmptyMask,
    #[error("image is empty")]
    EmptyImage,
    #[error("image {width}x{height} too small: minimum side is {min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("illuminance is zero everywhere")]
    ZeroIlluminance,
    #[error("invalid lamp index {index} (scene has {count} lamps)")]
    InvalidLamp { index: usize, count: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("backbone error: {0}")]
    Backbone(#[from] BackboneError),
    #[error("probe pass {pass} failed: {source}")]
    Probe {
        pass: u8,
        #[source]
        source: BackboneError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn dims(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::DimensionMismatch { expected, actual }
    }

    pub fn is_backbone(&self) -> bool {
        matches!(self, Error::Backbone(_) | Error::Probe { .. })
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Codec { .. })
    }

    /// True for errors caused by inconsistent geometry (sizes, quads, masks).
    pub fn is_geometry(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::DegenerateQuad(_)
                | Error::QuadOutOfBounds { .. }
                | Error::EmptyMask
                | Error::EmptyImage
                | Error::TooSmall { .. }
                | Error::KernelTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha { name, value })
    }
}
