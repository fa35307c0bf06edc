use super::IlluminanceMap;
use crate::error::{Error, Result};

/// Normalised 1-D Gaussian taps for an odd kernel size `k`, with `sigma = k / 6`.
pub fn gaussian_kernel(k: usize) -> Result<Vec<f64>> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidKernel(k as i64));
    }
    Ok(gaussian_taps(k / 2, k as f64 / 6.0))
}

pub(crate) fn gaussian_taps(radius: usize, sigma: f64) -> Vec<f64> {
    let r = radius as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable convolution of a `w x h` plane with replicate borders.
pub(crate) fn convolve_separable(data: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for x in 0..w {
            tmp[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * row[clamp(x as isize + k as isize - r, w)])
                .sum();
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[clamp(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Gaussian low-pass with kernel size `k` (odd), `sigma = k / 6` and
/// replicate border handling.
///
/// `k` may not exceed `2 * min(width, height) - 1`. The output is clamped to
/// the input's range, so constant maps come back bit-identical.
pub fn gaussian_filter(map: &IlluminanceMap, k: usize) -> Result<IlluminanceMap> {
    let taps = gaussian_kernel(k)?;
    let (w, h) = map.dims();
    if map.is_empty() {
        return Err(Error::EmptyImage);
    }
    let max_k = 2 * w.min(h) - 1;
    if k > max_k {
        return Err(Error::KernelTooLarge {
            kernel: k,
            width: w,
            height: h,
            max: max_k,
        });
    }
    if k == 1 {
        return Ok(map.clone());
    }
    let (lo, hi) = (map.min(), map.max());
    let out = convolve_separable(map.data(), w, h, &taps)
        .into_iter()
        .map(|v| v.clamp(lo, hi))
        .collect();
    IlluminanceMap::new(w, h, out)
}
