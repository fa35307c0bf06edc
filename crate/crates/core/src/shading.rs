//! Shade alignment: factor illuminance into a smooth shading layer and a
//! detail quotient, then re-shade the banner with the region's shading.

use crate::error::{check_alpha, Result};
use crate::imgcore::{
    alpha_blend, gaussian_filter, replace_illuminance, resize_rgb, to_illuminance, IlluminanceMap,
    RgbImage, EPS_DIV,
};

/// Upper bound on the structure quotient.
pub const STRUCTURE_MAX: f64 = 4.0;

/// Default texture blend weight.
pub const DEFAULT_TEXTURE_ALPHA: f64 = 0.3;

/// Illuminance split as `shading * structure`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingDecomposition {
    pub shading: IlluminanceMap,
    pub structure: IlluminanceMap,
}

impl ShadingDecomposition {
    pub fn reconstruct(&self) -> IlluminanceMap {
        self.shading
            .zip_with(&self.structure, |s, t| s * t)
            .expect("decomposition layers share dimensions")
    }
}

/// `shading = gaussian(ill, k)`, `structure = ill / (shading + EPS_DIV)`
/// clamped to `[0, STRUCTURE_MAX]`.
pub fn decompose(ill: &IlluminanceMap, k: usize) -> Result<ShadingDecomposition> {
    let shading = gaussian_filter(ill, k)?;
    let structure = ill.zip_with(&shading, |v, s| (v / (s + EPS_DIV)).clamp(0.0, STRUCTURE_MAX))?;
    Ok(ShadingDecomposition { shading, structure })
}

/// Blends a texture over the banner. The texture is bilinearly resized to
/// the banner first when the sizes differ.
pub fn apply_texture(banner: &RgbImage, texture: &RgbImage, alpha: f64) -> Result<RgbImage> {
    check_alpha("alpha", alpha)?;
    if texture.dims() == banner.dims() {
        alpha_blend(banner, texture, alpha)
    } else {
        let resized = resize_rgb(texture, banner.width(), banner.height())?;
        alpha_blend(banner, &resized, alpha)
    }
}

/// Gives `banner` the shading of `region` while keeping its own structure.
/// Both images must already share dimensions.
pub fn transfer_shading(banner: &RgbImage, region: &RgbImage, k: usize) -> Result<RgbImage> {
    banner.ensure_dims(region.dims())?;
    let region_dec = decompose(&to_illuminance(region), k)?;
    let banner_dec = decompose(&to_illuminance(banner), k)?;
    let new_ill = region_dec
        .shading
        .zip_with(&banner_dec.structure, |s, t| (s * t).clamp(0.0, 1.0))?;
    replace_illuminance(banner, &new_ill)
}
