//! Region-level quality metrics: SSIM and illuminance cosine similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::gaussian_taps;
use crate::imgcore::{resize_map, to_illuminance, IlluminanceMap, Mask, RegionQuad, RgbImage};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Side of the common grid used by [`ill_sim`].
pub const ILL_SIM_GRID: usize = 128;

/// Correlates `data` (`w x h`) with `taps` along both axes, keeping only
/// positions where the window fits entirely.
fn filter_valid(data: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * data[y * w + x + k]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * rows[(y + k) * ow + x]).sum();
        }
    }
    out
}

/// Single-scale SSIM of two maps with unit dynamic range.
pub fn ssim_maps(a: &IlluminanceMap, b: &IlluminanceMap) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min: SSIM_WINDOW,
        });
    }
    let taps = gaussian_taps(SSIM_WINDOW / 2, SSIM_SIGMA);
    let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> {
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect()
    };
    let mu_a = filter_valid(a.data(), w, h, &taps);
    let mu_b = filter_valid(b.data(), w, h, &taps);
    let e_aa = filter_valid(&prod(|x, _| x * x), w, h, &taps);
    let e_bb = filter_valid(&prod(|_, y| y * y), w, h, &taps);
    let e_ab = filter_valid(&prod(|x, y| x * y), w, h, &taps);

    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (var_a + var_b + SSIM_C2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

/// SSIM on the illuminance channel, 11x11 Gaussian window (sigma 1.5),
/// averaged over every window that fits inside the image.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    ssim_maps(&to_illuminance(a), &to_illuminance(b))
}

/// Cosine similarity of two illuminance maps after resampling both to a
/// common 128x128 grid.
pub fn ill_sim_maps(a: &IlluminanceMap, b: &IlluminanceMap) -> Result<f64> {
    let u = resize_map(a, ILL_SIM_GRID, ILL_SIM_GRID)?;
    let v = resize_map(b, ILL_SIM_GRID, ILL_SIM_GRID)?;
    let dot: f64 = u.data().iter().zip(v.data()).map(|(x, y)| x * y).sum();
    let nu = u.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroIlluminance);
    }
    Ok(dot / (nu * nv))
}

/// ILL-SIM between a scene region and a relit banner.
pub fn ill_sim(region: &RgbImage, relit_banner: &RgbImage) -> Result<f64> {
    ill_sim_maps(&to_illuminance(region), &to_illuminance(relit_banner))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub id: String,
    pub ssim: f64,
    pub ill_sim: f64,
}

/// Crops the quad's bounding box from the original and relit frames and
/// scores the pair. Returns `(ssim, ill_sim)`.
pub fn evaluate_case(frame: &RgbImage, mask: Option<&Mask>, quad: &RegionQuad, relit_frame: &RgbImage) -> Result<(f64, f64)> {
    relit_frame.ensure_dims(frame.dims())?;
    if let Some(m) = mask {
        frame.ensure_dims(m.dims())?;
    }
    quad.check_within(frame.width(), frame.height())?;
    let (x0, y0, x1, y1) = quad.pixel_bounds();
    let (w, h) = (x1.min(frame.width()) - x0, y1.min(frame.height()) - y0);
    let original = frame.crop(x0, y0, w, h)?;
    let relit = relit_frame.crop(x0, y0, w, h)?;
    Ok((ssim(&original, &relit)?, ill_sim(&original, &relit)?))
}

/// Aggregate scores over a set of cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ssim: f64,
    pub ill_sim: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lpips: Option<f64>,
    pub cases: Vec<CaseMetrics>,
    pub config: serde_json::Value,
}

impl MetricsReport {
    pub fn from_cases(cases: Vec<CaseMetrics>, config: serde_json::Value) -> Self {
        let n = cases.len().max(1) as f64;
        Self {
            ssim: cases.iter().map(|c| c.ssim).sum::<f64>() / n,
            ill_sim: cases.iter().map(|c| c.ill_sim).sum::<f64>() / n,
            lpips: None,
            cases,
            config,
        }
    }

    /// Plain-text table with one row per case and a closing mean row.
    pub fn to_table(&self) -> String {
        let width = self
            .cases
            .iter()
            .map(|c| c.id.len())
            .chain([4])
            .max()
            .unwrap_or(4);
        let mut out = format!("{:<width$}  {:>8}  {:>8}\n", "case", "SSIM", "ILL-SIM");
        out.push_str(&format!("{}\n", "-".repeat(width + 20)));
        for c in &self.cases {
            out.push_str(&format!("{:<width$}  {:>8.4}  {:>8.4}\n", c.id, c.ssim, c.ill_sim));
        }
        out.push_str(&format!("{}\n", "-".repeat(width + 20)));
        out.push_str(&format!("{:<width$}  {:>8.4}  {:>8.4}\n", "mean", self.ssim, self.ill_sim));
        out
    }
}
