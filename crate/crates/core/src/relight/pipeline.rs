use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{apply_shadow, composite, light_gradient, mix_background, relight_banner, shadow_attenuation, PipelineConfig};
use crate::backbone::RelightBackbone;
use crate::error::Error;
use crate::imgcore::{rectify_quad, resize_rgb, to_illuminance, IlluminanceMap, Mask, RegionQuad, RgbImage};
use crate::probe::{build_probe_pair, differential_feature, make_probe_card, LightFeature, ProbeMode};
use crate::shading::{apply_texture, decompose, transfer_shading, ShadingDecomposition};

/// Pipeline step that produced an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Texture,
    ShadeAlign,
    Probe,
    LightGradient,
    Relight,
    Shadow,
    Composite,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Texture => "texture",
            Stage::ShadeAlign => "shade_align",
            Stage::Probe => "probe",
            Stage::LightGradient => "light_gradient",
            Stage::Relight => "relight",
            Stage::Shadow => "shadow",
            Stage::Composite => "composite",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait StageExt<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> StageExt<T> for crate::error::Result<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// Wall-clock time spent per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub stage1: Duration,
    pub stage2: Duration,
    pub stage3: Duration,
    pub composite: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.stage1 + self.stage2 + self.stage3 + self.composite
    }
}

/// Every named map produced on the way to the final frame. All banner-space
/// maps share the quad's bounding-box resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Intermediates {
    /// Frame content under the quad, rectified.
    pub region: RgbImage,
    /// Banner resampled to the region resolution.
    pub banner: RgbImage,
    pub textured: RgbImage,
    pub aligned: RgbImage,
    pub region_shading: ShadingDecomposition,
    pub banner_shading: ShadingDecomposition,
    pub probe_full: RgbImage,
    pub probe_masked: RgbImage,
    pub probe_card: RgbImage,
    pub feature: LightFeature,
    pub gradient: IlluminanceMap,
    pub b_eps: RgbImage,
    pub relit_raw: RgbImage,
    pub df: IlluminanceMap,
    pub thr: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub final_frame: RgbImage,
    /// Relit banner after the shadow blend, at region resolution.
    pub relit_banner: RgbImage,
    pub intermediates: Intermediates,
    pub timings: StageTimings,
}

/// Rectified probe backgrounds, the probe foreground and the resulting feature.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionProbe {
    pub full: RgbImage,
    pub masked: RgbImage,
    pub card: RgbImage,
    pub feature: LightFeature,
}

/// Stage 2 on the quad's rectified grid: builds the probe pair from the
/// frame and mask, rectifies both backgrounds and runs the two passes.
/// `banner` must already have the quad's bounding-box size when the probe
/// mode needs it.
pub fn probe_region(
    frame: &RgbImage,
    mask: &Mask,
    quad: &RegionQuad,
    mode: ProbeMode,
    banner: Option<&RgbImage>,
    backbone: &dyn RelightBackbone,
) -> crate::error::Result<RegionProbe> {
    let (w, h) = quad.bounds_size();
    let (full, masked) = build_probe_pair(frame, mask)?;
    let full = rectify_quad(&full, quad, w, h)?;
    let masked = rectify_quad(&masked, quad, w, h)?;
    let card = make_probe_card(w, h, mode, banner)?;
    let feature = differential_feature(backbone, &full, &masked, &card)?;
    Ok(RegionProbe {
        full,
        masked,
        card,
        feature,
    })
}

/// Runs all three stages and composites the result into `frame`.
///
/// The region, probe backgrounds and banner are all resampled to the quad's
/// bounding-box size so that every intermediate is pixel-aligned with the
/// banner that is finally warped back onto the quad.
pub fn run_pipeline(
    frame: &RgbImage,
    banner: &RgbImage,
    mask: &Mask,
    quad: &RegionQuad,
    texture: Option<&RgbImage>,
    cfg: &PipelineConfig,
    backbone: &dyn RelightBackbone,
) -> Result<PipelineResult, PipelineError> {
    cfg.validate().at(Stage::Input)?;
    if banner.is_empty() || frame.is_empty() {
        return Err(Error::EmptyImage).at(Stage::Input);
    }
    frame.ensure_dims(mask.dims()).at(Stage::Input)?;
    quad.check_within(frame.width(), frame.height()).at(Stage::Input)?;
    let (w, h) = quad.bounds_size();
    let region = rectify_quad(frame, quad, w, h).at(Stage::Input)?;
    let banner_r = if banner.dims() == (w, h) {
        banner.clone()
    } else {
        resize_rgb(banner, w, h).at(Stage::Input)?
    };

    let t = Instant::now();
    let textured = match texture {
        Some(tex) => apply_texture(&banner_r, tex, cfg.alpha).at(Stage::Texture)?,
        None => banner_r.clone(),
    };
    let region_ill = to_illuminance(&region);
    let region_shading = decompose(&region_ill, cfg.k).at(Stage::ShadeAlign)?;
    let banner_shading = decompose(&to_illuminance(&textured), cfg.k).at(Stage::ShadeAlign)?;
    let aligned = if cfg.shade_align {
        transfer_shading(&textured, &region, cfg.k).at(Stage::ShadeAlign)?
    } else {
        textured.clone()
    };
    let stage1 = t.elapsed();

    let t = Instant::now();
    let probe = probe_region(frame, mask, quad, cfg.probe_mode, Some(&aligned), backbone).at(Stage::Probe)?;
    let stage2 = t.elapsed();

    let t = Instant::now();
    let gradient = light_gradient(&region_ill, cfg.k_prime).at(Stage::LightGradient)?;
    let b_eps = mix_background(&gradient, &probe.feature.normalized, cfg.alpha_eps).at(Stage::LightGradient)?;
    let relit_raw = relight_banner(backbone, &b_eps, &aligned).at(Stage::Relight)?;
    let (df, thr) = shadow_attenuation(&region_ill, cfg.k_s).at(Stage::Shadow)?;
    let relit_banner = apply_shadow(&relit_raw, &df, cfg.alpha_s).at(Stage::Shadow)?;
    let stage3 = t.elapsed();

    let t = Instant::now();
    let final_frame = composite(frame, &relit_banner, quad, cfg.feather).at(Stage::Composite)?;
    let composite_time = t.elapsed();

    Ok(PipelineResult {
        final_frame,
        relit_banner,
        intermediates: Intermediates {
            region,
            banner: banner_r,
            textured,
            aligned,
            region_shading,
            banner_shading,
            probe_full: probe.full,
            probe_masked: probe.masked,
            probe_card: probe.card,
            feature: probe.feature,
            gradient,
            b_eps,
            relit_raw,
            df,
            thr,
        },
        timings: StageTimings {
            stage1,
            stage2,
            stage3,
            composite: composite_time,
        },
    })
}

/// Baseline without any relighting: the banner resized to the quad's
/// bounding box and composited as is. Returns `(frame, banner)`.
pub fn plain_warp(frame: &RgbImage, banner: &RgbImage, quad: &RegionQuad, feather: f64) -> crate::error::Result<(RgbImage, RgbImage)> {
    let (w, h) = quad.bounds_size();
    let banner_r = if banner.dims() == (w, h) {
        banner.clone()
    } else {
        resize_rgb(banner, w, h)?
    };
    Ok((composite(frame, &banner_r, quad, feather)?, banner_r))
}
