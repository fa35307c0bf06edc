use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SyntheticLinear;
use crate::error::{Error, Result};
use crate::imgcore::io::read_rgb_png;
use crate::imgcore::{RegionQuad, RgbImage};

/// An isotropic Gaussian light splat.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lamp {
    /// Centre in pixel coordinates; pixel `(x, y)` is evaluated at `(x + 0.5, y + 0.5)`.
    pub center: [f64; 2],
    pub radius: f64,
    pub color: [f64; 3],
    pub intensity: f64,
}

impl Lamp {
    /// Irradiance contribution at pixel `(x, y)`.
    pub fn splat(&self, x: usize, y: usize) -> [f64; 3] {
        let dx = x as f64 + 0.5 - self.center[0];
        let dy = y as f64 + 0.5 - self.center[1];
        let fall = (-(dx * dx + dy * dy) / (2.0 * self.radius * self.radius)).exp();
        self.color.map(|c| self.intensity * c * fall)
    }
}

/// A lamp-lit flat floor with known light transport.
///
/// `gain` and `blur_k` parameterise the matching [`SyntheticLinear`]
/// backbone so fixtures and oracle share one description.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub base_albedo: RgbImage,
    pub lamps: Vec<Lamp>,
    pub gain: f64,
    pub blur_k: usize,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.base_albedo.ensure_dims((self.width, self.height))?;
        for (i, l) in self.lamps.iter().enumerate() {
            if !(l.radius > 0.0) || !(l.intensity >= 0.0) || l.color.iter().any(|&c| !(c >= 0.0)) {
                return Err(Error::Config(format!(
                    "lamp {i}: radius must be > 0, intensity and color >= 0"
                )));
            }
        }
        Ok(())
    }

    pub fn backbone(&self) -> std::result::Result<SyntheticLinear, super::BackboneError> {
        SyntheticLinear::new(self.gain, self.blur_k)
    }

    fn check_lamps(&self, lamps: &BTreeSet<usize>) -> Result<()> {
        match lamps.iter().find(|&&i| i >= self.lamps.len()) {
            Some(&index) => Err(Error::InvalidLamp {
                index,
                count: self.lamps.len(),
            }),
            None => Ok(()),
        }
    }

    /// Summed illumination of every lamp not in `drop_lamps` (unclamped).
    pub fn illumination(&self, drop_lamps: &BTreeSet<usize>) -> Result<RgbImage> {
        self.check_lamps(drop_lamps)?;
        let active: Vec<&Lamp> = self
            .lamps
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop_lamps.contains(i))
            .map(|(_, l)| l)
            .collect();
        Ok(RgbImage::from_fn(self.width, self.height, |x, y| {
            active.iter().fold([0.0; 3], |acc, l| {
                let s = l.splat(x, y);
                [acc[0] + s[0], acc[1] + s[1], acc[2] + s[2]]
            })
        }))
    }

    /// Illumination of lamp `index` alone (unclamped).
    pub fn lamp_map(&self, index: usize) -> Result<RgbImage> {
        let lamp = self.lamps.get(index).ok_or(Error::InvalidLamp {
            index,
            count: self.lamps.len(),
        })?;
        Ok(RgbImage::from_fn(self.width, self.height, |x, y| lamp.splat(x, y)))
    }
}

/// `clamp(albedo * L, 0, 1)` where `L` omits the dropped lamps.
pub fn render_scene(spec: &SceneSpec, drop_lamps: &BTreeSet<usize>) -> Result<RgbImage> {
    spec.validate()?;
    let light = spec.illumination(drop_lamps)?;
    let data = spec
        .base_albedo
        .data()
        .iter()
        .zip(light.data())
        .map(|(a, l)| (a * l).clamp(0.0, 1.0))
        .collect();
    RgbImage::new(spec.width, spec.height, data)
}

/// Albedo layer of a scene description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlbedoSpec {
    Constant { rgb: [f64; 3] },
    /// Two-colour checkerboard with square tiles of `tile` pixels.
    Checker { tile: usize, a: [f64; 3], b: [f64; 3] },
    /// An RGB PNG, resolved relative to the description file.
    Png { path: PathBuf },
}

/// On-disk form of a [`SceneSpec`] plus the banner region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDescription {
    pub width: usize,
    pub height: usize,
    pub albedo: AlbedoSpec,
    #[serde(default)]
    pub lamps: Vec<Lamp>,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_blur_k")]
    pub blur_k: usize,
    /// Banner region; defaults to the centred rectangle of half the frame size.
    #[serde(default)]
    pub quad: Option<RegionQuad>,
}

fn default_gain() -> f64 {
    1.0
}

fn default_blur_k() -> usize {
    9
}

impl SceneDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scene json: {e}")))
    }

    /// Builds the scene; PNG albedo paths are joined onto `base_dir`.
    pub fn to_spec(&self, base_dir: &Path) -> Result<SceneSpec> {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return Err(Error::Config("scene width and height must be positive".into()));
        }
        let base_albedo = match &self.albedo {
            AlbedoSpec::Constant { rgb } => RgbImage::filled(w, h, *rgb),
            AlbedoSpec::Checker { tile, a, b } => {
                if *tile == 0 {
                    return Err(Error::Config("checker tile must be positive".into()));
                }
                RgbImage::from_fn(w, h, |x, y| if (x / tile + y / tile) % 2 == 0 { *a } else { *b })
            }
            AlbedoSpec::Png { path } => {
                let img = read_rgb_png(base_dir.join(path))?;
                img.ensure_dims((w, h))?;
                img
            }
        };
        let spec = SceneSpec {
            width: w,
            height: h,
            base_albedo,
            lamps: self.lamps.clone(),
            gain: self.gain,
            blur_k: self.blur_k,
        };
        spec.validate()?;
        spec.backbone()?;
        Ok(spec)
    }

    pub fn region(&self) -> Result<RegionQuad> {
        let quad = match &self.quad {
            Some(q) => RegionQuad::new(q.corners())?,
            None => {
                let (w, h) = (self.width as f64, self.height as f64);
                RegionQuad::from_rect((w / 4.0).floor(), (h / 4.0).floor(), (w / 2.0).round(), (h / 2.0).round())?
            }
        };
        quad.check_within(self.width, self.height)?;
        Ok(quad)
    }
}
