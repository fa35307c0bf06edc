use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{BackboneError, BackboneInfo, RelightBackbone};
use crate::imgcore::io::{decode_rgb_png, encode_rgb_png};
use crate::imgcore::RgbImage;

/// Environment variable naming the default relight service endpoint.
pub const ENDPOINT_ENV: &str = "ADRELIGHT_BACKBONE_URL";

/// Largest image side a conforming server accepts.
pub const MAX_IMAGE_SIDE: usize = 4096;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

const MAX_RESPONSE_BYTES: u64 = 512 * 1024 * 1024;

/// Body of `POST {endpoint}/relight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelightRequest {
    pub background: String,
    pub foreground: String,
    pub seed: i64,
    pub steps: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelightResponse {
    pub output: String,
}

/// Client for a relighting service speaking the JSON/base64-PNG protocol.
#[derive(Clone, Debug)]
pub struct RemoteBackbone {
    endpoint: String,
    timeout: Duration,
    seed: i64,
    steps: u32,
    agent: ureq::Agent,
}

enum Attempt {
    Retry(BackboneError),
    Fatal(BackboneError),
}

impl RemoteBackbone {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, seed: i64, steps: u32) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build();
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            timeout,
            seed,
            steps,
            agent: ureq::Agent::new_with_config(config),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Serialises the request body. Identical inputs give identical bytes.
    pub fn encode_request(&self, background: &RgbImage, foreground: &RgbImage) -> Result<Vec<u8>, BackboneError> {
        let png = |img: &RgbImage| {
            encode_rgb_png(img)
                .map(|b| STANDARD.encode(b))
                .map_err(|e| BackboneError::Input(e.to_string()))
        };
        let req = RelightRequest {
            background: png(background)?,
            foreground: png(foreground)?,
            seed: self.seed,
            steps: self.steps,
        };
        serde_json::to_vec(&req).map_err(|e| BackboneError::Input(e.to_string()))
    }

    fn protocol(&self, message: impl Into<String>) -> BackboneError {
        BackboneError::Protocol {
            endpoint: self.endpoint.clone(),
            message: message.into(),
        }
    }

    fn transport(&self, message: impl Into<String>) -> BackboneError {
        BackboneError::Transport {
            endpoint: self.endpoint.clone(),
            message: message.into(),
        }
    }

    fn attempt(&self, body: &[u8], expect: (usize, usize), timeout: Duration) -> Result<RgbImage, Attempt> {
        let url = format!("{}/relight", self.endpoint);
        let mut resp = match self
            .agent
            .post(&url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .header("Content-Type", "application/json")
            .send(body)
        {
            Ok(r) => r,
            Err(ureq::Error::BadUri(u)) => return Err(Attempt::Fatal(self.transport(format!("bad url {u}")))),
            Err(e) => return Err(Attempt::Retry(self.transport(e.to_string()))),
        };
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(MAX_RESPONSE_BYTES)
            .read_to_vec()
            .map_err(|e| Attempt::Retry(self.transport(format!("reading response: {e}"))))?;
        match status {
            200 => {}
            413 => {
                return Err(Attempt::Fatal(self.protocol(format!(
                    "413 payload too large: images are limited to {MAX_IMAGE_SIDE}x{MAX_IMAGE_SIDE}"
                ))))
            }
            422 => {
                return Err(Attempt::Fatal(self.protocol(format!(
                    "422 undecodable payload: {}",
                    String::from_utf8_lossy(&bytes)
                ))))
            }
            s if s >= 500 => return Err(Attempt::Retry(self.protocol(format!("server error {s}")))),
            s => return Err(Attempt::Fatal(self.protocol(format!("unexpected status {s}")))),
        }
        let parsed: RelightResponse = serde_json::from_slice(&bytes)
            .map_err(|e| Attempt::Fatal(self.protocol(format!("malformed response json: {e}"))))?;
        let png = STANDARD
            .decode(parsed.output.as_bytes())
            .map_err(|e| Attempt::Fatal(self.protocol(format!("malformed base64: {e}"))))?;
        let img = decode_rgb_png(&png).map_err(|e| Attempt::Fatal(self.protocol(format!("malformed png: {e}"))))?;
        if img.dims() != expect {
            return Err(Attempt::Fatal(self.protocol(format!(
                "output is {:?}, expected foreground size {:?}",
                img.dims(),
                expect
            ))));
        }
        Ok(img)
    }
}

impl RelightBackbone for RemoteBackbone {
    /// Posts both images; a transient failure (connection, timeout, 5xx) is
    /// retried once. Both attempts together never take longer than twice
    /// the configured timeout.
    fn relight(&self, background: &RgbImage, foreground: &RgbImage) -> Result<RgbImage, BackboneError> {
        let body = self.encode_request(background, foreground)?;
        let start = Instant::now();
        let first = match self.attempt(&body, foreground.dims(), self.timeout) {
            Ok(img) => return Ok(img),
            Err(Attempt::Fatal(e)) => return Err(e),
            Err(Attempt::Retry(e)) => e,
        };
        let remaining = (2 * self.timeout).saturating_sub(start.elapsed());
        if remaining.is_zero() {
            return Err(first);
        }
        match self.attempt(&body, foreground.dims(), remaining.min(self.timeout)) {
            Ok(img) => Ok(img),
            Err(Attempt::Fatal(e) | Attempt::Retry(e)) => Err(e),
        }
    }

    fn info(&self) -> BackboneInfo {
        BackboneInfo {
            name: "remote".into(),
            params: serde_json::json!({
                "endpoint": self.endpoint,
                "seed": self.seed,
                "steps": self.steps,
                "timeout_s": self.timeout.as_secs_f64(),
            }),
            deterministic: false,
        }
    }
}
