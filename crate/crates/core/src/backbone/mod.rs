//! Relighting backbones.
//!
//! A backbone relights a foreground image under the illumination implied
//! by a background image. Three implementations ship here:
//!
//! * [`SyntheticLinear`]: `foreground * gain * blur(background)`, exactly
//!   linear in the background, used as a ground-truth oracle;
//! * [`Identity`]: returns the foreground untouched;
//! * [`RemoteBackbone`]: HTTP client for a diffusion relighting service.

mod remote;
mod scene;
mod synthetic;

pub use remote::{RelightRequest, RelightResponse, RemoteBackbone, DEFAULT_TIMEOUT, ENDPOINT_ENV, MAX_IMAGE_SIDE};
pub use scene::{render_scene, AlbedoSpec, Lamp, SceneDescription, SceneSpec};
pub use synthetic::{synthetic_linear_relight, SyntheticLinear};

use serde::Serialize;
use thiserror::Error;

use crate::imgcore::RgbImage;

#[derive(Debug, Error)]
pub enum BackboneError {
    #[error("invalid backbone input: {0}")]
    Input(String),
    #[error("transport error talking to {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error("protocol error from {endpoint}: {message}")]
    Protocol { endpoint: String, message: String },
}

/// Descriptive metadata recorded in run manifests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackboneInfo {
    pub name: String,
    pub params: serde_json::Value,
    pub deterministic: bool,
}

/// The two-image relighting contract.
///
/// Implementations must be callable from several threads at once and must
/// return an image with the foreground's dimensions.
pub trait RelightBackbone: Send + Sync {
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError>;

    fn info(&self) -> BackboneInfo;
}

impl<B: RelightBackbone + ?Sized> RelightBackbone for &B {
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError> {
        (**self).relight(background, foreground)
    }

    fn info(&self) -> BackboneInfo {
        (**self).info()
    }
}

impl<B: RelightBackbone + ?Sized> RelightBackbone for Box<B> {
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError> {
        (**self).relight(background, foreground)
    }

    fn info(&self) -> BackboneInfo {
        (**self).info()
    }
}

/// Ignores the background.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

pub fn identity_relight(_background: &RgbImage, foreground: &RgbImage) -> RgbImage {
    foreground.clone()
}

impl RelightBackbone for Identity {
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError> {
        Ok(identity_relight(background, foreground))
    }

    fn info(&self) -> BackboneInfo {
        BackboneInfo {
            name: "identity".into(),
            params: serde_json::json!({}),
            deterministic: true,
        }
    }
}
