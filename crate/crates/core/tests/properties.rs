use adrelight::backbone::{Identity, SyntheticLinear};
use adrelight::imgcore::io::{decode_rgb_png, dequantize, encode_rgb_png, quantize};
use adrelight::imgcore::{
    gaussian_filter, otsu_threshold, replace_illuminance, to_illuminance, IlluminanceMap, Mask, RgbImage,
};
use adrelight::metrics::{ill_sim, ssim, CaseMetrics, MetricsReport};
use adrelight::probe::{denormalize_feature, differential_feature, normalize_feature, Residual};
use adrelight::relight::{apply_shadow, attenuation_from, mix_background, shadow_attenuation};
use adrelight::shading::decompose;
use proptest::prelude::*;

fn rgb(w: usize, h: usize) -> impl Strategy<Value = RgbImage> {
    prop::collection::vec(0.0..=1.0f64, w * h * 3).prop_map(move |d| RgbImage::new(w, h, d).unwrap())
}

fn sized_rgb(max: usize) -> impl Strategy<Value = RgbImage> {
    (2..=max, 2..=max).prop_flat_map(|(w, h)| rgb(w, h))
}

fn map(w: usize, h: usize) -> impl Strategy<Value = IlluminanceMap> {
    prop::collection::vec(0.0..=1.0f64, w * h).prop_map(move |d| IlluminanceMap::new(w, h, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn illuminance_is_channel_max(img in sized_rgb(12)) {
        let ill = to_illuminance(&img);
        for (px, &v) in img.pixels().zip(ill.data()) {
            prop_assert_eq!(v, px[0].max(px[1]).max(px[2]));
        }
    }

    #[test]
    fn replace_with_own_illuminance_is_identity(img in sized_rgb(12)) {
        let out = replace_illuminance(&img, &to_illuminance(&img)).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            prop_assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn replace_hits_target_illuminance(img in rgb(8, 6), target in map(8, 6)) {
        let out = replace_illuminance(&img, &target).unwrap();
        for (&v, &t) in to_illuminance(&out).data().iter().zip(target.data()) {
            prop_assert!((v - t).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_stays_in_input_range(m in map(17, 13), k in prop::sample::select(vec![1usize, 3, 5, 9, 21])) {
        let g = gaussian_filter(&m, k).unwrap();
        let (lo, hi) = (m.min(), m.max());
        prop_assert!(g.data().iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn gaussian_preserves_constants(c in 0.0..=1.0f64, k in prop::sample::select(vec![1usize, 5, 15, 31])) {
        let m = IlluminanceMap::filled(20, 16, c);
        prop_assert_eq!(gaussian_filter(&m, k).unwrap(), m);
    }

    #[test]
    fn decomposition_reconstructs(m in map(24, 24), k in prop::sample::select(vec![3usize, 9, 21])) {
        let d = decompose(&m, k).unwrap();
        let r = d.reconstruct();
        for ((&v, &s), &rv) in m.data().iter().zip(d.shading.data()).zip(r.data()) {
            if s >= 0.01 && v / (s + 1e-4) <= 4.0 {
                prop_assert!((v - rv).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn otsu_threshold_within_histogram_range(m in map(10, 10)) {
        let t = otsu_threshold(&m);
        prop_assert!(t > 0.0 && t < m.max().max(1.0));
    }

    #[test]
    fn residual_antisymmetry(a in rgb(8, 8), b in rgb(8, 8)) {
        let bb = SyntheticLinear::new(0.8, 3).unwrap();
        let card = RgbImage::filled(8, 8, [0.5; 3]);
        let ab = differential_feature(&bb, &a, &b, &card).unwrap();
        let ba = differential_feature(&bb, &b, &a, &card).unwrap();
        for (x, y) in ab.residual.data().iter().zip(ba.residual.data()) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn normalization_round_trip(data in prop::collection::vec(-0.7..=0.7f64, 6 * 5 * 3)) {
        let r = Residual::new(6, 5, data).unwrap();
        let back = denormalize_feature(&normalize_feature(&r), &r.stats());
        for (a, b) in back.data().iter().zip(r.data()) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_backbone_gives_zero_feature(a in rgb(6, 6), b in rgb(6, 6)) {
        let f = differential_feature(&Identity, &a, &b, &a).unwrap();
        prop_assert!(f.residual.data().iter().all(|&v| v == 0.0));
        prop_assert!(f.normalized.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn mixed_background_in_unit_range(g in map(7, 5), e in rgb(7, 5), a in 0.0..=1.0f64) {
        let b = mix_background(&g, &e, a).unwrap();
        prop_assert!(b.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn attenuation_in_half_open_unit_interval(m in map(20, 20)) {
        let (df, _) = shadow_attenuation(&m, 5).unwrap();
        prop_assert!(df.data().iter().all(|&d| d > 0.0 && d <= 1.0));
    }

    #[test]
    fn shadow_never_brightens(img in rgb(9, 7), d in map(9, 7), a in 0.0..=1.0f64) {
        let df = attenuation_from(&d, 0.5);
        let out = apply_shadow(&img, &df, a).unwrap();
        let before = to_illuminance(&img);
        for ((&n, &o), &f) in to_illuminance(&out).data().iter().zip(before.data()).zip(df.data()) {
            prop_assert!(n <= o);
            if f < 1.0 && a < 1.0 && o > 0.0 {
                prop_assert!(n < o);
            }
        }
    }

    #[test]
    fn ssim_is_symmetric(a in rgb(14, 12), b in rgb(14, 12)) {
        let ab = ssim(&a, &b).unwrap();
        let ba = ssim(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert_eq!(ssim(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ill_sim_is_scale_invariant(a in rgb(10, 9), c in 0.05..=1.0f64) {
        prop_assume!(to_illuminance(&a).max() > 0.0);
        let scaled = a.map(|v| v * c);
        prop_assert!((ill_sim(&a, &scaled).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn report_means_match_cases(vals in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..20)) {
        let cases: Vec<CaseMetrics> = vals
            .iter()
            .enumerate()
            .map(|(i, &(s, l))| CaseMetrics { id: i.to_string(), ssim: s, ill_sim: l })
            .collect();
        let r = MetricsReport::from_cases(cases, serde_json::Value::Null);
        let n = vals.len() as f64;
        prop_assert!((r.ssim - vals.iter().map(|v| v.0).sum::<f64>() / n).abs() < 1e-12);
        prop_assert!((r.ill_sim - vals.iter().map(|v| v.1).sum::<f64>() / n).abs() < 1e-12);
    }

    #[test]
    fn png_round_trip_within_quantization(img in sized_rgb(9)) {
        let back = decode_rgb_png(&encode_rgb_png(&img).unwrap()).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            prop_assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn quantize_inverts_dequantize(v in any::<u8>()) {
        prop_assert_eq!(quantize(dequantize(v)), v);
    }

    #[test]
    fn mask_from_map_clamps(m in prop::collection::vec(-1.0..=2.0f64, 12)) {
        let mask = Mask::from_map(IlluminanceMap::new(4, 3, m).unwrap());
        prop_assert!(mask.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
