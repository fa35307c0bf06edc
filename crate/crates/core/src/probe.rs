//! Differential probing of a relighting backbone.
//!
//! The backbone is run twice on the same probe foreground: once over the
//! full frame and once over the frame with the region greyed out. The
//! difference of the two outputs is the region's illumination residual.

use serde::{Deserialize, Serialize};

use crate::backbone::{BackboneError, RelightBackbone};
use crate::error::{Error, Result};
use crate::imgcore::{Mask, RgbImage, EPS_DIV};

/// Fill value for the removed region.
pub const NEUTRAL_GRAY: f64 = 0.5;

/// Foreground used for the two probing passes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    #[default]
    Gray,
    Banner,
}

/// Signed `H x W x 3` map.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Residual {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::Config(format!(
                "residual buffer holds {} samples, {}x{}x3 needs {}",
                data.len(),
                width,
                height,
                width * height * 3
            )));
        }
        Ok(Self { width, height, data })
    }

    /// `a - b` per sample.
    pub fn difference(a: &RgbImage, b: &RgbImage) -> Result<Self> {
        b.ensure_dims(a.dims())?;
        let data = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
        Self::new(a.width(), a.height(), data)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn stats(&self) -> FeatureStats {
        let n = (self.width * self.height) as f64;
        let channels = [0, 1, 2].map(|c| {
            let (mut lo, mut hi, mut abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for &v in self.data.iter().skip(c).step_by(3) {
                lo = lo.min(v);
                hi = hi.max(v);
                abs += v.abs();
            }
            ChannelStats {
                min: lo,
                max: hi,
                mean_abs: abs / n,
            }
        });
        FeatureStats {
            channels,
            max_abs: self.max_abs(),
        }
    }

    /// Raw little-endian `f32` samples, row-major `H x W x 3`.
    pub fn to_f32_le(&self) -> Vec<u8> {
        self.data
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect()
    }

    pub fn from_f32_le(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 12 {
            return Err(Error::Config(format!(
                "f32 sidecar holds {} bytes, {}x{}x3 needs {}",
                bytes.len(),
                width,
                height,
                width * height * 12
            )));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        Self::new(width, height, data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub min: f64,
    pub max: f64,
    pub mean_abs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub channels: [ChannelStats; 3],
    /// Joint normalisation scale before the `EPS_DIV` guard.
    pub max_abs: f64,
}

impl FeatureStats {
    fn scale(&self) -> f64 {
        self.max_abs.max(EPS_DIV)
    }
}

/// The differential illumination feature and its displayable form.
#[derive(Clone, Debug, PartialEq)]
pub struct LightFeature {
    pub residual: Residual,
    pub normalized: RgbImage,
    pub stats: FeatureStats,
}

impl LightFeature {
    pub fn from_residual(residual: Residual) -> Self {
        Self {
            normalized: normalize_feature(&residual),
            stats: residual.stats(),
            residual,
        }
    }
}

/// Joint affine map `0.5 + 0.5 * r / max(|r|, EPS_DIV)` into `[0, 1]`.
pub fn normalize_feature(residual: &Residual) -> RgbImage {
    let scale = residual.max_abs().max(EPS_DIV);
    let data = residual
        .data
        .iter()
        .map(|&v| (0.5 + 0.5 * v / scale).clamp(0.0, 1.0))
        .collect();
    RgbImage::new(residual.width, residual.height, data).expect("same layout")
}

/// Inverse of [`normalize_feature`] given the residual's stats.
pub fn denormalize_feature(normalized: &RgbImage, stats: &FeatureStats) -> Residual {
    let scale = stats.scale();
    let data = normalized.data().iter().map(|&v| (v - 0.5) * 2.0 * scale).collect();
    Residual::new(normalized.width(), normalized.height(), data).expect("same layout")
}

/// Full frame and the frame with the masked region faded to neutral gray:
/// `(1 - m) * frame + m * 0.5`.
pub fn build_probe_pair(frame: &RgbImage, mask: &Mask) -> Result<(RgbImage, RgbImage)> {
    frame.ensure_dims(mask.dims())?;
    if mask.area() <= 0.0 {
        return Err(Error::EmptyMask);
    }
    let mut masked = frame.clone();
    for (px, &m) in masked.data_mut().chunks_exact_mut(3).zip(mask.data()) {
        for v in px.iter_mut() {
            *v = (1.0 - m) * *v + m * NEUTRAL_GRAY;
        }
    }
    Ok((frame.clone(), masked))
}

/// Runs both probing passes (concurrently) and returns `Out1 - Out2`.
pub fn differential_feature(
    backbone: &dyn RelightBackbone,
    full: &RgbImage,
    masked: &RgbImage,
    probe_fg: &RgbImage,
) -> Result<LightFeature> {
    masked.ensure_dims(full.dims())?;
    let (out1, out2) = std::thread::scope(|s| {
        let second = s.spawn(|| backbone.relight(masked, probe_fg));
        let first = backbone.relight(full, probe_fg);
        let second = second
            .join()
            .unwrap_or_else(|_| Err(BackboneError::Input("probe worker panicked".into())));
        (first, second)
    });
    let out1 = out1.map_err(|source| Error::Probe { pass: 1, source })?;
    let out2 = out2.map_err(|source| Error::Probe { pass: 2, source })?;
    Ok(LightFeature::from_residual(Residual::difference(&out1, &out2)?))
}

/// Foreground for the probing passes: a uniform gray card, or the banner.
pub fn make_probe_card(width: usize, height: usize, mode: ProbeMode, banner: Option<&RgbImage>) -> Result<RgbImage> {
    match mode {
        ProbeMode::Gray => Ok(RgbImage::filled(width, height, [NEUTRAL_GRAY; 3])),
        ProbeMode::Banner => {
            let banner = banner.ok_or_else(|| Error::Config("probe mode 'banner' needs a banner image".into()))?;
            banner.ensure_dims((width, height))?;
            Ok(banner.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::{Identity, SyntheticLinear};

    fn frame() -> RgbImage {
        RgbImage::from_fn(16, 12, |x, y| [0.1 + 0.05 * x as f64, 0.2 + 0.05 * y as f64, 0.7])
    }

    #[test]
    fn empty_mask_rejected_and_unmasked_pixels_kept() {
        let m = Mask::filled(16, 12, 0.0);
        assert!(matches!(build_probe_pair(&frame(), &m), Err(Error::EmptyMask)));
        // a mask that is zero except one faint pixel changes only that pixel
        let m = Mask::from_fn(16, 12, |x, y| if (x, y) == (3, 3) { 1e-3 } else { 0.0 });
        let (bo, bm) = build_probe_pair(&frame(), &m).unwrap();
        assert_eq!(bo, frame());
        assert_eq!(bm.pixel(0, 0), frame().pixel(0, 0));
    }

    #[test]
    fn full_mask_is_gray() {
        let (_, bm) = build_probe_pair(&frame(), &Mask::filled(16, 12, 1.0)).unwrap();
        assert!(bm.data().iter().all(|&v| v == NEUTRAL_GRAY));
    }

    #[test]
    fn half_mask_fills_right_half() {
        let m = Mask::from_fn(16, 12, |x, _| if x >= 8 { 1.0 } else { 0.0 });
        let (_, bm) = build_probe_pair(&frame(), &m).unwrap();
        for y in 0..12 {
            for x in 0..16 {
                let expected = if x >= 8 { [0.5; 3] } else { frame().pixel(x, y) };
                assert_eq!(bm.pixel(x, y), expected);
            }
        }
    }

    #[test]
    fn soft_mask_blends() {
        let (_, bm) = build_probe_pair(&frame(), &Mask::filled(16, 12, 0.25)).unwrap();
        let p = frame().pixel(2, 5);
        let q = bm.pixel(2, 5);
        for c in 0..3 {
            assert!((q[c] - (0.75 * p[c] + 0.125)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_backgrounds_give_zero_feature() {
        let fg = make_probe_card(8, 6, ProbeMode::Gray, None).unwrap();
        let bb = SyntheticLinear::new(1.0, 3).unwrap();
        let f = differential_feature(&bb, &frame(), &frame(), &fg).unwrap();
        assert!(f.residual.data().iter().all(|&v| v == 0.0));
        assert!(f.normalized.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn identity_backbone_gives_zero_feature() {
        let fg = make_probe_card(8, 6, ProbeMode::Gray, None).unwrap();
        let (bo, bm) = build_probe_pair(&frame(), &Mask::filled(16, 12, 1.0)).unwrap();
        let f = differential_feature(&Identity, &bo, &bm, &fg).unwrap();
        assert_eq!(f.residual.max_abs(), 0.0);
    }

    #[test]
    fn normalization_examples() {
        let r = Residual::new(1, 1, vec![-0.1, 0.0, 0.2]).unwrap();
        let n = normalize_feature(&r);
        let expected = [0.25, 0.5, 1.0];
        for (a, b) in n.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = Residual::new(1, 1, vec![0.2, -0.2, 0.0]).unwrap();
        assert_eq!(normalize_feature(&r).data(), &[1.0, 0.0, 0.5]);
        let zero = Residual::new(2, 2, vec![0.0; 12]).unwrap();
        assert!(normalize_feature(&zero).data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn normalization_round_trip() {
        let r = Residual::new(3, 2, (0..18).map(|i| (i as f64 - 7.0) * 0.013).collect()).unwrap();
        let f = LightFeature::from_residual(r.clone());
        let back = denormalize_feature(&f.normalized, &f.stats);
        for (a, b) in back.data().iter().zip(r.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn probe_cards() {
        let gray = make_probe_card(64, 64, ProbeMode::Gray, None).unwrap();
        assert!(gray.data().iter().all(|&v| v == 0.5));
        let banner = frame();
        assert_eq!(make_probe_card(16, 12, ProbeMode::Gray, Some(&banner)).unwrap(), RgbImage::filled(16, 12, [0.5; 3]));
        assert_eq!(make_probe_card(16, 12, ProbeMode::Banner, Some(&banner)).unwrap(), banner);
        assert!(make_probe_card(16, 12, ProbeMode::Banner, None).is_err());
    }

    #[test]
    fn f32_sidecar_round_trip() {
        let r = Residual::new(2, 1, vec![0.5, -0.25, 0.125, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(Residual::from_f32_le(2, 1, &r.to_f32_le()).unwrap(), r);
        assert!(Residual::from_f32_le(3, 1, &r.to_f32_le()).is_err());
    }
}
