use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::blend::sample_bilinear;
use super::{Mask, RgbImage};
use crate::error::{Error, Result};

/// Four corners in frame pixel coordinates, ordered top-left, top-right,
/// bottom-right, bottom-left. Pixel `(x, y)` covers `[x, x+1) x [y, y+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionQuad {
    corners: [[f64; 2]; 4],
}

impl RegionQuad {
    /// Validates that the corners form a strictly convex quadrilateral in
    /// clockwise (y-down) order.
    pub fn new(corners: [[f64; 2]; 4]) -> Result<Self> {
        if corners.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateQuad("non-finite corner".into()));
        }
        let scale = corners
            .iter()
            .flat_map(|c| corners.iter().map(move |d| (c[0] - d[0]).hypot(c[1] - d[1])))
            .fold(0.0, f64::max);
        for i in 0..4 {
            let (a, b, c) = (corners[i], corners[(i + 1) % 4], corners[(i + 2) % 4]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 1e-9 * scale * scale {
                return Err(Error::DegenerateQuad(format!(
                    "corners {i}..{} are collinear or not in clockwise order",
                    i + 2
                )));
            }
        }
        Ok(Self { corners })
    }

    /// Axis-aligned rectangle with top-left `(x, y)`.
    pub fn from_rect(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new([[x, y], [x + w, y], [x + w, y + h], [x, y + h]])
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        self.corners
    }

    /// Integer pixel bounds `(x0, y0, x1, y1)` (exclusive end) covering the quad.
    pub fn pixel_bounds(&self) -> (usize, usize, usize, usize) {
        let xs = self.corners.map(|c| c[0]);
        let ys = self.corners.map(|c| c[1]);
        let min = |v: [f64; 4]| v.into_iter().fold(f64::INFINITY, f64::min);
        let max = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
        (
            min(xs).floor().max(0.0) as usize,
            min(ys).floor().max(0.0) as usize,
            max(xs).ceil().max(0.0) as usize,
            max(ys).ceil().max(0.0) as usize,
        )
    }

    /// Width and height of [`pixel_bounds`](Self::pixel_bounds).
    pub fn bounds_size(&self) -> (usize, usize) {
        let (x0, y0, x1, y1) = self.pixel_bounds();
        (x1 - x0, y1 - y0)
    }

    /// Point-in-quad test, edges inclusive.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0..4).all(|i| {
            let (a, b) = (self.corners[i], self.corners[(i + 1) % 4]);
            (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= -1e-9
        })
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        for c in self.corners {
            if c[0] < 0.0 || c[1] < 0.0 || c[0] > width as f64 || c[1] > height as f64 {
                return Err(Error::QuadOutOfBounds {
                    x: c[0],
                    y: c[1],
                    width,
                    height,
                });
            }
        }
        Ok(())
    }

    /// Coverage mask of the quad on a `width x height` canvas (pixel centres).
    pub fn coverage(&self, width: usize, height: usize) -> Mask {
        Mask::from_fn(width, height, |x, y| {
            if self.contains(x as f64 + 0.5, y as f64 + 0.5) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// A projective map of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.0 * Vector3::new(x, y, 1.0);
        (p.x / p.z, p.y / p.z)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .try_inverse()
            .map(Homography)
            .ok_or_else(|| Error::DegenerateQuad("homography is singular".into()))
    }
}

/// Solves the homography taking the corners of the `w x h` source rectangle
/// onto `corners` (TL, TR, BR, BL).
pub fn homography_rect_to_quad(w: f64, h: f64, corners: &[[f64; 2]; 4]) -> Result<Homography> {
    let src = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let ([x, y], [u, v]) = (src[i], corners[i]);
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        b[r] = u;
        b[r + 1] = v;
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateQuad("corner system is singular".into()))?;
    let m = Matrix3::new(sol[0], sol[1], sol[2], sol[3], sol[4], sol[5], sol[6], sol[7], 1.0);
    let det = m.determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::DegenerateQuad(format!("homography determinant {det:e}")));
    }
    Ok(Homography(m))
}

/// Pastes `src` into `canvas` so that its rectangle lands on `quad`.
///
/// Every canvas pixel whose centre falls inside the quad is inverse-mapped
/// into `src` and bilinearly sampled. Returns the new canvas and the
/// binary coverage mask.
pub fn warp_to_quad(src: &RgbImage, quad: &RegionQuad, canvas: &RgbImage) -> Result<(RgbImage, Mask)> {
    if src.is_empty() {
        return Err(Error::EmptyImage);
    }
    quad.check_within(canvas.width(), canvas.height())?;
    let h = homography_rect_to_quad(src.width() as f64, src.height() as f64, &quad.corners())?;
    let inv = h.inverse()?;

    let (cw, ch) = canvas.dims();
    let mut out = canvas.clone();
    let mut mask = vec![0.0; cw * ch];
    let (x0, y0, x1, y1) = quad.pixel_bounds();
    let mut px = [0.0; 3];
    for y in y0..y1.min(ch) {
        for x in x0..x1.min(cw) {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            if !quad.contains(cx, cy) {
                continue;
            }
            let (u, v) = inv.apply(cx, cy);
            sample_bilinear(src.data(), src.width(), src.height(), 3, u - 0.5, v - 0.5, &mut px);
            out.set_pixel(x, y, px);
            mask[y * cw + x] = 1.0;
        }
    }
    Ok((out, Mask::new(cw, ch, mask)?))
}

/// Resamples the quad's interior of `frame` onto a `w x h` rectangle: the
/// inverse of [`warp_to_quad`].
pub fn rectify_quad(frame: &RgbImage, quad: &RegionQuad, w: usize, h: usize) -> Result<RgbImage> {
    if frame.is_empty() || w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    quad.check_within(frame.width(), frame.height())?;
    let hom = homography_rect_to_quad(w as f64, h as f64, &quad.corners())?;
    let mut out = RgbImage::filled(w, h, [0.0; 3]);
    let mut px = [0.0; 3];
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = hom.apply(x as f64 + 0.5, y as f64 + 0.5);
            sample_bilinear(frame.data(), frame.width(), frame.height(), 3, fx - 0.5, fy - 0.5, &mut px);
            out.set_pixel(x, y, px);
        }
    }
    Ok(out)
}
