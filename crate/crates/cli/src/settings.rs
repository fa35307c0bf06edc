//! Shared flags: configuration resolution and geometry inputs.

use std::fs;
use std::path::{Path, PathBuf};

use adrelight::backbone::{RelightBackbone, ENDPOINT_ENV};
use adrelight::imgcore::io::{read_mask_png, read_rgb_png};
use adrelight::imgcore::{Mask, RegionQuad, RgbImage};
use adrelight::probe::ProbeMode;
use adrelight::relight::{BackboneKind, PipelineConfig, Variant};
use clap::Args;

use crate::error::{CliError, CliResult};

/// Pipeline configuration flags.
///
/// Precedence: built-in defaults, then `--config`, then `--variant`, then
/// the individual flags. The remote endpoint falls back to
/// `ADRELIGHT_BACKBONE_URL` when neither the flag nor the file sets it.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// JSON file with flat PipelineConfig keys
    #[arg(long, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Ablation preset applied on top of the config file (paper, M1..M5)
    #[arg(long, value_name = "NAME")]
    pub variant: Option<String>,
    /// synthetic, identity or remote
    #[arg(long, value_name = "KIND")]
    pub backbone: Option<String>,
    #[arg(long, value_name = "URL")]
    pub backbone_url: Option<String>,
    /// gray or banner
    #[arg(long, value_name = "MODE")]
    pub probe_mode: Option<String>,
    /// Composite feather width in pixels (0 = hard paste)
    #[arg(long)]
    pub feather: Option<f64>,
    #[arg(long)]
    pub seed: Option<i64>,
    #[arg(long)]
    pub steps: Option<u32>,
    /// Remote request timeout in seconds
    #[arg(long)]
    pub timeout: Option<f64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> CliResult<PipelineConfig> {
        self.resolve_with_env(std::env::var(ENDPOINT_ENV).ok())
    }

    pub fn resolve_with_env(&self, env_url: Option<String>) -> CliResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                PipelineConfig::from_json(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.variant {
            let variant: Variant = v.parse().map_err(CliError::usage)?;
            variant.apply(&mut cfg);
        }
        if let Some(b) = &self.backbone {
            cfg.backbone = b.parse().map_err(CliError::usage)?;
        }
        if let Some(url) = &self.backbone_url {
            cfg.backbone_url = Some(url.clone());
        }
        if let Some(mode) = &self.probe_mode {
            cfg.probe_mode = match mode.to_ascii_lowercase().as_str() {
                "gray" => ProbeMode::Gray,
                "banner" => ProbeMode::Banner,
                other => return Err(CliError::usage(format!("unknown probe mode '{other}'"))),
            };
        }
        if let Some(f) = self.feather {
            cfg.feather = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        if let Some(t) = self.timeout {
            cfg.timeout_s = t;
        }
        if cfg.backbone == BackboneKind::Remote && cfg.backbone_url.as_deref().is_none_or(str::is_empty) {
            cfg.backbone_url = env_url.filter(|u| !u.is_empty());
        }
        cfg.validate().map_err(CliError::usage)?;
        Ok(cfg)
    }
}

pub fn build_backbone(cfg: &PipelineConfig) -> CliResult<Box<dyn RelightBackbone>> {
    cfg.build_backbone().map_err(|e| CliError::from_core("backbone", e))
}

pub fn load_rgb(path: &Path) -> CliResult<RgbImage> {
    read_rgb_png(path).map_err(|e| CliError::from_core("input", e))
}

pub fn load_mask(path: &Path) -> CliResult<Mask> {
    read_mask_png(path).map_err(|e| CliError::from_core("input", e))
}

/// Reads `{"corners": [[x, y] x 4]}` and validates the quad.
pub fn load_quad(path: &Path) -> CliResult<RegionQuad> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_quad(&text).map_err(|e| CliError { message: format!("{}: {}", path.display(), e.message), ..e })
}

pub fn parse_quad(text: &str) -> CliResult<RegionQuad> {
    let raw: RegionQuad = serde_json::from_str(text).map_err(|e| CliError::usage(format!("quad json: {e}")))?;
    RegionQuad::new(raw.corners()).map_err(|e| CliError::from_core("input", e))
}

/// Completes a mask/quad pair from whichever of the two was given: the
/// quad defaults to the mask's bounding box, the mask to the quad's
/// coverage. Both are checked against the frame size.
pub fn resolve_geometry(frame: &RgbImage, mask: Option<Mask>, quad: Option<RegionQuad>) -> CliResult<(Mask, RegionQuad)> {
    let geo = |e| CliError::from_core("input", e);
    let (w, h) = frame.dims();
    if let Some(m) = &mask {
        if m.dims() != (w, h) {
            return Err(geo(adrelight::Error::DimensionMismatch {
                expected: (w, h),
                actual: m.dims(),
            }));
        }
    }
    let quad = match (quad, &mask) {
        (Some(q), _) => q,
        (None, Some(m)) => {
            let (x0, y0, x1, y1) = m.bounding_box().ok_or(adrelight::Error::EmptyMask).map_err(geo)?;
            RegionQuad::from_rect(x0 as f64, y0 as f64, (x1 - x0) as f64, (y1 - y0) as f64).map_err(geo)?
        }
        (None, None) => return Err(CliError::usage("one of --mask or --quad is required")),
    };
    quad.check_within(w, h).map_err(geo)?;
    let mask = mask.unwrap_or_else(|| quad.coverage(w, h));
    Ok((mask, quad))
}
