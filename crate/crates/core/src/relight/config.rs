use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backbone::{Identity, RelightBackbone, RemoteBackbone, SyntheticLinear, ENDPOINT_ENV};
use crate::error::{check_alpha, Error, Result};
use crate::probe::ProbeMode;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackboneKind {
    #[default]
    Synthetic,
    Identity,
    Remote,
}

impl FromStr for BackboneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "synthetic" => Ok(Self::Synthetic),
            "identity" => Ok(Self::Identity),
            "remote" => Ok(Self::Remote),
            other => Err(Error::Config(format!("unknown backbone '{other}'"))),
        }
    }
}

/// Every scalar knob of the pipeline. Serialises to a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Shade-alignment kernel.
    #[serde(rename = "K")]
    pub k: usize,
    /// Light-gradient kernel; must be smaller than `K`.
    #[serde(rename = "K_prime")]
    pub k_prime: usize,
    /// Shadow pre-smoothing kernel.
    #[serde(rename = "K_s")]
    pub k_s: usize,
    /// Texture blend weight.
    pub alpha: f64,
    /// Weight of the light gradient against the normalised probe feature.
    pub alpha_eps: f64,
    /// Share of the unshadowed relit illuminance kept by the shadow blend.
    pub alpha_s: f64,
    pub probe_mode: ProbeMode,
    /// Run the shade-alignment transfer (disabled by the M4 ablation).
    pub shade_align: bool,
    /// Gaussian feather width of the composite mask in pixels; 0 pastes hard.
    pub feather: f64,
    pub backbone: BackboneKind,
    pub synthetic_gain: f64,
    pub synthetic_blur_k: usize,
    pub backbone_url: Option<String>,
    pub seed: i64,
    pub steps: u32,
    pub timeout_s: f64,
    /// Name of the preset this configuration was derived from, if any.
    pub variant: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 99,
            k_prime: 21,
            k_s: 15,
            alpha: 0.3,
            alpha_eps: 0.4,
            alpha_s: 0.2,
            probe_mode: ProbeMode::Gray,
            shade_align: true,
            feather: 2.0,
            backbone: BackboneKind::Synthetic,
            synthetic_gain: 1.0,
            synthetic_blur_k: 9,
            backbone_url: None,
            seed: 0,
            steps: 25,
            timeout_s: 120.0,
            variant: None,
        }
    }
}

fn check_kernel(name: &str, k: usize) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        Err(Error::Config(format!("{name} = {k} must be odd and >= 1")))
    } else {
        Ok(())
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config json: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        check_kernel("K", self.k)?;
        check_kernel("K_prime", self.k_prime)?;
        check_kernel("K_s", self.k_s)?;
        check_kernel("synthetic_blur_k", self.synthetic_blur_k)?;
        if self.k_prime >= self.k {
            return Err(Error::Config(format!(
                "K_prime = {} must be smaller than K = {}",
                self.k_prime, self.k
            )));
        }
        check_alpha("alpha", self.alpha)?;
        check_alpha("alpha_eps", self.alpha_eps)?;
        check_alpha("alpha_s", self.alpha_s)?;
        if !(self.feather >= 0.0 && self.feather.is_finite()) {
            return Err(Error::Config(format!("feather = {} must be >= 0", self.feather)));
        }
        if !(self.synthetic_gain >= 0.0 && self.synthetic_gain.is_finite()) {
            return Err(Error::Config("synthetic_gain must be >= 0".into()));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(Error::Config("timeout_s must be > 0".into()));
        }
        Ok(())
    }

    /// Instantiates the configured backbone. A remote backbone needs
    /// `backbone_url`; callers resolve it from [`ENDPOINT_ENV`] beforehand.
    pub fn build_backbone(&self) -> Result<Box<dyn RelightBackbone>> {
        Ok(match self.backbone {
            BackboneKind::Identity => Box::new(Identity),
            BackboneKind::Synthetic => Box::new(SyntheticLinear::new(self.synthetic_gain, self.synthetic_blur_k)?),
            BackboneKind::Remote => {
                let url = self.backbone_url.as_deref().filter(|u| !u.is_empty()).ok_or_else(|| {
                    Error::Config(format!(
                        "remote backbone needs an endpoint: set {ENDPOINT_ENV} or pass --backbone-url"
                    ))
                })?;
                Box::new(RemoteBackbone::new(
                    url,
                    Duration::from_secs_f64(self.timeout_s),
                    self.seed,
                    self.steps,
                ))
            }
        })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        variant.apply(&mut self);
        self
    }
}

/// Hyper-parameter and component ablations of the full pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Paper,
    M1,
    M2,
    /// No light gradient: the backbone sees the normalised feature alone.
    M3,
    /// No shade alignment.
    M4,
    /// No probe feature: the backbone sees the light gradient alone.
    M5,
}

impl Variant {
    pub const ALL: [Variant; 6] = [Variant::Paper, Variant::M1, Variant::M2, Variant::M3, Variant::M4, Variant::M5];

    pub fn apply(self, cfg: &mut PipelineConfig) {
        match self {
            Variant::Paper => {
                let d = PipelineConfig::default();
                cfg.k = d.k;
                cfg.k_prime = d.k_prime;
                cfg.alpha = d.alpha;
                cfg.alpha_eps = d.alpha_eps;
                cfg.alpha_s = d.alpha_s;
                cfg.shade_align = true;
            }
            Variant::M1 => {
                cfg.alpha = 0.2;
                cfg.alpha_s = 0.1;
                cfg.alpha_eps = 0.2;
                cfg.k_prime = 71;
            }
            Variant::M2 => {
                cfg.alpha = 0.4;
                cfg.alpha_s = 0.3;
                cfg.alpha_eps = 0.5;
                cfg.k_prime = 15;
            }
            Variant::M3 => cfg.alpha_eps = 0.0,
            Variant::M4 => cfg.shade_align = false,
            Variant::M5 => cfg.alpha_eps = 1.0,
        }
        cfg.variant = Some(self.to_string());
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Paper => "paper",
            Variant::M1 => "M1",
            Variant::M2 => "M2",
            Variant::M3 => "M3",
            Variant::M4 => "M4",
            Variant::M5 => "M5",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "full" => Ok(Variant::Paper),
            "m1" => Ok(Variant::M1),
            "m2" => Ok(Variant::M2),
            "m3" => Ok(Variant::M3),
            "m4" => Ok(Variant::M4),
            "m5" => Ok(Variant::M5),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}
