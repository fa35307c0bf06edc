//! Stage 3 operators (light gradient, background mix, backbone relight,
//! soft shadows, compositing) and the end-to-end pipeline.

mod config;
mod pipeline;

pub use config::{BackboneKind, PipelineConfig, Variant};
pub use pipeline::{
    plain_warp, probe_region, run_pipeline, Intermediates, PipelineError, PipelineResult, RegionProbe, Stage, StageTimings,
};

use crate::backbone::{BackboneError, RelightBackbone};
use crate::error::{check_alpha, Error, Result};
use crate::imgcore::{gaussian_filter, otsu_threshold, to_illuminance, warp_to_quad, IlluminanceMap, RegionQuad, RgbImage, EPS_DIV};

/// Low-frequency illumination trend of the region.
pub fn light_gradient(region_ill: &IlluminanceMap, k_prime: usize) -> Result<IlluminanceMap> {
    gaussian_filter(region_ill, k_prime)
}

/// `alpha_eps * G + (1 - alpha_eps) * eps`, with `G` broadcast to RGB.
pub fn mix_background(gradient: &IlluminanceMap, eps_normalized: &RgbImage, alpha_eps: f64) -> Result<RgbImage> {
    check_alpha("alpha_eps", alpha_eps)?;
    eps_normalized.ensure_dims(gradient.dims())?;
    let mut out = eps_normalized.clone();
    for (px, &g) in out.data_mut().chunks_exact_mut(3).zip(gradient.data()) {
        for v in px.iter_mut() {
            *v = (alpha_eps * g + (1.0 - alpha_eps) * *v).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// One backbone call with `B_eps` as background and the banner as foreground.
pub fn relight_banner(backbone: &dyn RelightBackbone, b_eps: &RgbImage, banner: &RgbImage) -> Result<RgbImage> {
    let out = backbone.relight(b_eps, banner)?;
    if out.dims() != banner.dims() {
        return Err(BackboneError::Protocol {
            endpoint: backbone.info().name,
            message: format!("returned {:?} for a {:?} foreground", out.dims(), banner.dims()),
        }
        .into());
    }
    Ok(out.clamped())
}

/// Smooths the region illuminance with `k_s`, thresholds it with Otsu and
/// returns `df = min(1, smooth / Thr)` together with `Thr`.
///
/// `df` is floored at `EPS_DIV` so it stays strictly positive on black input.
pub fn shadow_attenuation(region_ill: &IlluminanceMap, k_s: usize) -> Result<(IlluminanceMap, f64)> {
    if region_ill.is_empty() {
        return Err(Error::EmptyImage);
    }
    let smooth = gaussian_filter(region_ill, k_s)?;
    let thr = otsu_threshold(&smooth);
    Ok((attenuation_from(&smooth, thr), thr))
}

/// `min(1, ill / max(thr, EPS_DIV))` floored at `EPS_DIV`.
pub fn attenuation_from(smooth: &IlluminanceMap, thr: f64) -> IlluminanceMap {
    let denom = thr.max(EPS_DIV);
    smooth.map(|v| (v / denom).clamp(EPS_DIV, 1.0))
}

/// Blends the attenuated illuminance with the original:
/// `ill' = alpha_s * ill + (1 - alpha_s) * ill * df`.
///
/// Applied as a per-pixel scale of all three channels, which keeps hue and
/// saturation exactly like [`replace_illuminance`](crate::imgcore::replace_illuminance)
/// and never lifts a sample above its input.
pub fn apply_shadow(relit: &RgbImage, df: &IlluminanceMap, alpha_s: f64) -> Result<RgbImage> {
    check_alpha("alpha_s", alpha_s)?;
    relit.ensure_dims(df.dims())?;
    let mut out = relit.clone();
    for (px, &d) in out.data_mut().chunks_exact_mut(3).zip(df.data()) {
        let factor = (alpha_s + (1.0 - alpha_s) * d.clamp(0.0, 1.0)).min(1.0);
        px.iter_mut().for_each(|v| *v *= factor);
    }
    Ok(out)
}

/// Odd Gaussian kernel size whose sigma (`k / 6`) is roughly `feather`.
fn feather_kernel(feather: f64) -> usize {
    2 * (3.0 * feather).ceil() as usize + 1
}

/// Warps the relit banner onto `quad` and alpha-composites it into the
/// frame. With `feather > 0` the coverage mask is Gaussian-softened first.
pub fn composite(frame: &RgbImage, relit_banner: &RgbImage, quad: &RegionQuad, feather: f64) -> Result<RgbImage> {
    let (warped, mask) = warp_to_quad(relit_banner, quad, frame)?;
    if feather <= 0.0 {
        return Ok(warped);
    }
    let k = feather_kernel(feather);
    let max_k = 2 * frame.width().min(frame.height()) - 1;
    let soft = gaussian_filter(mask.as_map(), k.min(max_k | 1))?;
    let mut out = frame.clone();
    for ((o, w), &m) in out
        .data_mut()
        .chunks_exact_mut(3)
        .zip(warped.data().chunks_exact(3))
        .zip(soft.data())
    {
        for c in 0..3 {
            o[c] = (1.0 - m) * o[c] + m * w[c];
        }
    }
    Ok(out)
}

/// Illuminance of the relit banner; convenience for diagnostics.
pub fn banner_illuminance(relit: &RgbImage) -> IlluminanceMap {
    to_illuminance(relit)
}
