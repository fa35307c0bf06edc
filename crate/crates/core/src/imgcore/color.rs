use super::{IlluminanceMap, RgbImage, EPS_DIV};
use crate::error::Result;

/// HSV value channel: `max(R, G, B)` per pixel.
pub fn to_illuminance(img: &RgbImage) -> IlluminanceMap {
    let data = img
        .pixels()
        .map(|p| p[0].max(p[1]).max(p[2]).max(0.0))
        .collect();
    IlluminanceMap::new(img.width(), img.height(), data).expect("one sample per pixel")
}

/// Writes `new_ill` back as the image's value channel, keeping hue and
/// saturation. Pixels darker than [`EPS_DIV`] become achromatic.
pub fn replace_illuminance(img: &RgbImage, new_ill: &IlluminanceMap) -> Result<RgbImage> {
    img.ensure_dims(new_ill.dims())?;
    let mut out = img.clone();
    for (px, &target) in out.data_mut().chunks_exact_mut(3).zip(new_ill.data()) {
        let old = px[0].max(px[1]).max(px[2]);
        if old < EPS_DIV {
            px.fill(target.clamp(0.0, 1.0));
        } else {
            let scale = target / old;
            for v in px.iter_mut() {
                *v = (*v * scale).clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_channel_examples() {
        let white = RgbImage::filled(2, 2, [1.0, 1.0, 1.0]);
        assert!(to_illuminance(&white).data().iter().all(|&v| v == 1.0));
        let red = RgbImage::filled(1, 1, [1.0, 0.0, 0.0]);
        assert_eq!(to_illuminance(&red).data(), &[1.0]);
        let gray = RgbImage::filled(1, 1, [0.3, 0.3, 0.3]);
        assert_eq!(to_illuminance(&gray).data(), &[0.3]);
    }

    #[test]
    fn replace_with_own_illuminance_is_identity() {
        let img = RgbImage::from_fn(5, 4, |x, y| {
            [0.1 + 0.15 * x as f64, 0.05 * y as f64, 0.4]
        });
        let out = replace_illuminance(&img, &to_illuminance(&img)).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn replace_scales_chroma() {
        let img = RgbImage::filled(1, 1, [0.5, 0.25, 0.0]);
        let out = replace_illuminance(&img, &IlluminanceMap::filled(1, 1, 1.0)).unwrap();
        assert_eq!(out.pixel(0, 0), [1.0, 0.5, 0.0]);
    }

    #[test]
    fn black_pixel_becomes_achromatic() {
        let img = RgbImage::filled(1, 1, [0.0, 0.0, 0.0]);
        let out = replace_illuminance(&img, &IlluminanceMap::filled(1, 1, 0.4)).unwrap();
        assert_eq!(out.pixel(0, 0), [0.4, 0.4, 0.4]);
    }

    #[test]
    fn replace_rejects_size_mismatch() {
        let img = RgbImage::filled(2, 2, [0.5; 3]);
        assert!(replace_illuminance(&img, &IlluminanceMap::filled(2, 3, 0.5)).is_err());
    }
}
