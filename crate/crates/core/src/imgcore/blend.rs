use super::{IlluminanceMap, RgbImage};
use crate::error::{check_alpha, Error, Result};

/// Per-sample `(1 - alpha) * a + alpha * b`.
pub fn alpha_blend(a: &RgbImage, b: &RgbImage, alpha: f64) -> Result<RgbImage> {
    check_alpha("alpha", alpha)?;
    b.ensure_dims(a.dims())?;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (1.0 - alpha) * x + alpha * y)
        .collect();
    RgbImage::new(a.width(), a.height(), data)
}

/// Snaps coordinates that are within rounding noise of a pixel centre.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Bilinear sample of an interleaved `w x h x ch` buffer at index-space
/// coordinates (pixel centres on integers), clamping to the edge.
pub(crate) fn sample_bilinear(data: &[f64], w: usize, h: usize, ch: usize, fx: f64, fy: f64, out: &mut [f64]) {
    let fx = snap(fx).clamp(0.0, (w - 1) as f64);
    let fy = snap(fy).clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    for (c, o) in out.iter_mut().enumerate().take(ch) {
        let at = |x: usize, y: usize| data[(y * w + x) * ch + c];
        if tx == 0.0 && ty == 0.0 {
            *o = at(x0, y0);
            continue;
        }
        let top = at(x0, y0) * (1.0 - tx) + at(x1, y0) * tx;
        let bottom = at(x0, y1) * (1.0 - tx) + at(x1, y1) * tx;
        *o = top * (1.0 - ty) + bottom * ty;
    }
}

fn resize_plane(data: &[f64], w: usize, h: usize, ch: usize, nw: usize, nh: usize) -> Vec<f64> {
    if (w, h) == (nw, nh) {
        return data.to_vec();
    }
    let (sx, sy) = (w as f64 / nw as f64, h as f64 / nh as f64);
    let mut out = vec![0.0; nw * nh * ch];
    for y in 0..nh {
        let fy = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..nw {
            let fx = (x as f64 + 0.5) * sx - 0.5;
            let i = (y * nw + x) * ch;
            sample_bilinear(data, w, h, ch, fx, fy, &mut out[i..i + ch]);
        }
    }
    out
}

/// Bilinear resize with pixel-centre alignment.
pub fn resize_rgb(img: &RgbImage, width: usize, height: usize) -> Result<RgbImage> {
    if img.is_empty() || width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let data = resize_plane(img.data(), img.width(), img.height(), 3, width, height);
    RgbImage::new(width, height, data)
}

/// Bilinear resize of a single-channel map.
pub fn resize_map(map: &IlluminanceMap, width: usize, height: usize) -> Result<IlluminanceMap> {
    if map.is_empty() || width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let data = resize_plane(map.data(), map.width(), map.height(), 1, width, height);
    IlluminanceMap::new(width, height, data)
}
