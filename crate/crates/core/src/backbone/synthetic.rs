use super::{BackboneError, BackboneInfo, RelightBackbone};
use crate::imgcore::{gaussian_filter, gaussian_kernel, resize_rgb, RgbImage};

/// Linear light-transport stand-in for a relighting model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticLinear {
    pub gain: f64,
    pub blur_k: usize,
}

impl SyntheticLinear {
    pub fn new(gain: f64, blur_k: usize) -> Result<Self, BackboneError> {
        gaussian_kernel(blur_k).map_err(|e| BackboneError::Input(e.to_string()))?;
        if !gain.is_finite() || gain < 0.0 {
            return Err(BackboneError::Input(format!("gain {gain} must be finite and >= 0")));
        }
        Ok(Self { gain, blur_k })
    }
}

/// `clamp(foreground * gain * blur(background), 0, 1)` with the background
/// bilinearly resampled to the foreground's size and blurred per channel.
pub fn synthetic_linear_relight(
    gain: f64,
    blur_k: usize,
    background: &RgbImage,
    foreground: &RgbImage,
) -> Result<RgbImage, BackboneError> {
    let input = |e: crate::error::Error| BackboneError::Input(e.to_string());
    let (w, h) = foreground.dims();
    let bg = resize_rgb(background, w, h).map_err(input)?;
    let mut blurred = Vec::with_capacity(3);
    for c in 0..3 {
        blurred.push(gaussian_filter(&bg.channel(c), blur_k).map_err(input)?);
    }
    let mut out = foreground.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        for (c, v) in px.iter_mut().enumerate() {
            *v = (*v * gain * blurred[c].data()[i]).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

impl RelightBackbone for SyntheticLinear {
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError> {
        synthetic_linear_relight(self.gain, self.blur_k, background, foreground)
    }

    fn info(&self) -> BackboneInfo {
        BackboneInfo {
            name: "synthetic".into(),
            params: serde_json::json!({ "gain": self.gain, "blur_k": self.blur_k }),
            deterministic: true,
        }
    }
}
