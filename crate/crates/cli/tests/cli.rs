use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adrelight::imgcore::io::{decode_rgb_png, encode_gray_png, encode_rgb_png, read_rgb_png};
use adrelight::imgcore::{IlluminanceMap, RgbImage};
use adrelight::probe::Residual;
use adrelight::relight::{PipelineConfig, Variant};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adrelight"));
    c.env_remove("ADRELIGHT_BACKBONE_URL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// 96x80 lamp-lit frame, 48x40 banner, mask and quad for the
    /// rectangle at (16, 12) of size 64x56.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let frame = RgbImage::from_fn(96, 80, |x, y| {
            let dx = x as f64 + 0.5 - 30.0;
            let dy = y as f64 + 0.5 - 35.0;
            let l = 0.1 + 0.8 * (-(dx * dx + dy * dy) / (2.0 * 28.0 * 28.0)).exp();
            let a = if (x / 8 + y / 8) % 2 == 0 { 0.8 } else { 0.6 };
            [a * l, 0.95 * a * l, 0.85 * a * l]
        });
        let banner = RgbImage::from_fn(48, 40, |x, y| {
            if (y / 5) % 3 == 0 && (x / 3) % 2 == 0 { [0.1, 0.1, 0.15] } else { [0.9, 0.85, 0.7] }
        });
        let mask = IlluminanceMap::from_fn(96, 80, |x, y| {
            if (16..80).contains(&x) && (12..68).contains(&y) { 1.0 } else { 0.0 }
        });
        fs::write(dir.path().join("frame.png"), encode_rgb_png(&frame).unwrap()).unwrap();
        fs::write(dir.path().join("banner.png"), encode_rgb_png(&banner).unwrap()).unwrap();
        fs::write(dir.path().join("mask.png"), encode_gray_png(&mask).unwrap()).unwrap();
        fs::write(
            dir.path().join("quad.json"),
            r#"{"corners": [[16, 12], [80, 12], [80, 68], [16, 68]]}"#,
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

#[test]
fn relight_happy_path_writes_frame_and_manifest() {
    let f = Fixture::new();
    let out = run(&[
        "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--mask", &f.path("mask.png"),
        "--out", &f.path("out/result.png"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let img = read_rgb_png(f.path("out/result.png")).unwrap();
    assert_eq!(img.dims(), (96, 80));
    let m: Value = serde_json::from_str(&fs::read_to_string(f.path("out/result.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "relight");
    assert_eq!(m["config"]["K"], 99);
    assert_eq!(m["backbone"]["name"], "synthetic");
    assert_eq!(m["inputs"]["frame"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"]["frame"]["path"], "result.png");
    assert_eq!(m["region_size"], serde_json::json!([64, 56]));
    assert!(m["thr"].as_f64().unwrap() > 0.0);
    assert!(m.get("timings").is_none());
}

#[test]
fn relight_twice_is_byte_identical() {
    let f = Fixture::new();
    let preset = presets().join("paper.json").display().to_string();
    for run_dir in ["a", "b"] {
        let out = run(&[
            "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--mask", &f.path("mask.png"),
            "--quad", &f.path("quad.json"), "--config", &preset, "--out", &f.path(&format!("{run_dir}/frame.png")),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["frame.png", "frame.json"] {
        assert_eq!(fs::read(f.path(&format!("a/{name}"))).unwrap(), fs::read(f.path(&format!("b/{name}"))).unwrap());
    }
}

#[test]
fn relight_dumps_intermediates() {
    let f = Fixture::new();
    let out = run(&[
        "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--quad", &f.path("quad.json"),
        "--out", &f.path("o.png"), "--dump-intermediates", &f.path("dump"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&fs::read_to_string(f.path("dump/intermediates.json")).unwrap()).unwrap();
    for file in summary["files"].as_array().unwrap() {
        assert!(Path::new(&f.path(&format!("dump/{}", file.as_str().unwrap()))).exists());
    }
    for name in ["b_eps.png", "df.png", "gradient.png", "epsilon.f32", "region_shading.png", "relit.png"] {
        assert!(summary["files"].as_array().unwrap().iter().any(|v| v == name), "{name}");
    }
    assert!(summary["timings_s"]["total"].as_f64().unwrap() >= 0.0);
    let eps = fs::read(f.path("dump/epsilon.f32")).unwrap();
    assert_eq!(eps.len(), 64 * 56 * 3 * 4);
}

#[test]
fn missing_banner_is_usage_error() {
    let f = Fixture::new();
    let out = run(&["relight", "--frame", &f.path("frame.png"), "--mask", &f.path("mask.png"), "--out", &f.path("o.png")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--banner"), "{}", stderr(&out));
}

#[test]
fn remote_without_url_names_env_var() {
    let f = Fixture::new();
    let out = run(&[
        "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--mask", &f.path("mask.png"),
        "--out", &f.path("o.png"), "--backbone", "remote",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ADRELIGHT_BACKBONE_URL"), "{}", stderr(&out));
}

#[test]
fn unreachable_remote_exits_4_with_stage_tag() {
    let f = Fixture::new();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = run(&[
        "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--mask", &f.path("mask.png"),
        "--out", &f.path("o.png"), "--backbone", "remote", "--backbone-url", &format!("http://127.0.0.1:{port}"),
        "--timeout", "0.5",
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("error[probe]"), "{}", stderr(&out));
    assert!(!Path::new(&f.path("o.png")).exists());
}

#[test]
fn missing_input_exits_3_and_bad_quad_exits_5() {
    let f = Fixture::new();
    let out = run(&[
        "relight", "--frame", &f.path("nope.png"), "--banner", &f.path("banner.png"), "--mask", &f.path("mask.png"),
        "--out", &f.path("o.png"),
    ]);
    assert_eq!(code(&out), 3);
    fs::write(f.path("far.json"), r#"{"corners": [[50, 50], [150, 50], [150, 90], [50, 90]]}"#).unwrap();
    let out = run(&[
        "relight", "--frame", &f.path("frame.png"), "--banner", &f.path("banner.png"), "--quad", &f.path("far.json"),
        "--out", &f.path("o.png"),
    ]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn synth_lamp_maps_replay_the_frame() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scene.json");
    fs::write(
        &spec,
        r#"{
            "width": 64, "height": 48,
            "albedo": {"kind": "checker", "tile": 8, "a": [0.8, 0.7, 0.6], "b": [0.4, 0.5, 0.6]},
            "lamps": [
                {"center": [16, 20], "radius": 10, "color": [1, 0.9, 0.8], "intensity": 0.6},
                {"center": [48, 30], "radius": 14, "color": [0.7, 0.8, 1], "intensity": 0.5}
            ]
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["synth", "--spec", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let frame = read_rgb_png(out_dir.join("frame.png")).unwrap();
    let lamps: Vec<Vec<f32>> = (0..2)
        .map(|i| {
            fs::read(out_dir.join(format!("lamp_{i}.f32")))
                .unwrap()
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect()
        })
        .collect();
    for y in 0..48 {
        for x in 0..64 {
            let albedo = if (x / 8 + y / 8) % 2 == 0 { [0.8, 0.7, 0.6] } else { [0.4, 0.5, 0.6] };
            for c in 0..3 {
                let i = (y * 64 + x) * 3 + c;
                let replay = albedo[c] * (lamps[0][i] as f64 + lamps[1][i] as f64);
                assert!((replay.min(1.0) - frame.data()[i]).abs() <= 0.5 / 255.0 + 1e-6);
            }
        }
    }
    for name in ["mask.png", "quad.json", "spec.json", "lamp_0.png", "lamp_1.png", "albedo.png"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
}

#[test]
fn synth_zero_lamps_is_black_and_malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("dark.json");
    fs::write(&spec, r#"{"width": 16, "height": 16, "albedo": {"kind": "constant", "rgb": [1, 1, 1]}}"#).unwrap();
    let out_dir = dir.path().join("dark");
    assert_eq!(code(&run(&["synth", "--spec", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])), 0);
    let frame = read_rgb_png(out_dir.join("frame.png")).unwrap();
    assert!(frame.data().iter().all(|&v| v == 0.0));

    fs::write(&spec, "{\"width\": 16,\n \"height\": }").unwrap();
    let out = run(&["synth", "--spec", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn probe_with_identity_is_flat_gray() {
    let f = Fixture::new();
    let out = run(&[
        "probe", "--frame", &f.path("frame.png"), "--mask", &f.path("mask.png"), "--out", &f.path("p"),
        "--backbone", "identity",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let png = decode_rgb_png(&fs::read(f.path("p/epsilon.png")).unwrap()).unwrap();
    assert!(png.data().iter().all(|&v| v == 128.0 / 255.0));
    let stats: Value = serde_json::from_str(&fs::read_to_string(f.path("p/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["stats"]["max_abs"], 0.0);
}

/// Direct 2-D Gaussian with replicate border, sigma = k / 6.
fn blur_direct(data: &[f64], w: usize, h: usize, k: usize) -> Vec<f64> {
    let r = (k / 2) as i64;
    let sigma = k as f64 / 6.0;
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut acc, mut norm) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                    let sx = (x + dx).clamp(0, w as i64 - 1) as usize;
                    let sy = (y + dy).clamp(0, h as i64 - 1) as usize;
                    acc += wgt * data[sy * w + sx];
                    norm += wgt;
                }
            }
            out[y as usize * w + x as usize] = acc / norm;
        }
    }
    out
}

#[test]
fn probe_with_synthetic_matches_oracle() {
    let f = Fixture::new();
    let out = run(&["probe", "--frame", &f.path("frame.png"), "--mask", &f.path("mask.png"), "--out", &f.path("p")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let frame = read_rgb_png(f.path("frame.png")).unwrap();
    let region = frame.crop(16, 12, 64, 56).unwrap();
    let (w, h) = (64, 56);
    let mut oracle = vec![0.0; w * h * 3];
    for c in 0..3 {
        let diff: Vec<f64> = region.channel(c).data().iter().map(|v| v - 0.5).collect();
        let b = blur_direct(&diff, w, h, 9);
        for i in 0..w * h {
            oracle[i * 3 + c] = 0.5 * b[i];
        }
    }
    let max_abs = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let stats: Value = serde_json::from_str(&fs::read_to_string(f.path("p/stats.json")).unwrap()).unwrap();
    assert!((stats["stats"]["max_abs"].as_f64().unwrap() - max_abs).abs() < 1e-5);
    let raw = Residual::from_f32_le(w, h, &fs::read(f.path("p/epsilon.f32")).unwrap()).unwrap();
    for (a, b) in raw.data().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn probe_mask_of_wrong_size_exits_5() {
    let f = Fixture::new();
    fs::write(f.path("small.png"), encode_gray_png(&IlluminanceMap::filled(10, 10, 1.0)).unwrap()).unwrap();
    let out = run(&["probe", "--frame", &f.path("frame.png"), "--mask", &f.path("small.png"), "--out", &f.path("p")]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn eval_identical_pair_scores_one() {
    let f = Fixture::new();
    fs::write(
        f.path("cases.json"),
        r#"[{"id": "same", "frame": "frame.png", "mask": "mask.png", "quad": "quad.json", "relit": "frame.png"}]"#,
    )
    .unwrap();
    let out = run(&["eval", "--cases", &f.path("cases.json"), "--out", &f.path("report.json"), "--table", &f.path("t.txt")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("same") && l.contains("1.0000")), "{table}");
    assert_eq!(fs::read_to_string(f.path("t.txt")).unwrap(), table);
    let report: Value = serde_json::from_str(&fs::read_to_string(f.path("report.json")).unwrap()).unwrap();
    assert_eq!(report["ssim"], 1.0);
    assert!((report["ill_sim"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn eval_variant_m5_is_recorded() {
    let f = Fixture::new();
    fs::write(
        f.path("cases.json"),
        r#"[{"frame": "frame.png", "quad": {"corners": [[16, 12], [80, 12], [80, 68], [16, 68]]}, "banner": "banner.png"}]"#,
    )
    .unwrap();
    let out = run(&["eval", "--cases", &f.path("cases.json"), "--out", &f.path("r.json"), "--variant", "M5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(f.path("r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["pipeline"]["alpha_eps"], 1.0);
    assert_eq!(report["config"]["pipeline"]["variant"], "M5");
    assert_eq!(report["cases"][0]["id"], "case0");
}

#[test]
fn eval_empty_list_exits_2_and_missing_file_exits_3() {
    let f = Fixture::new();
    fs::write(f.path("empty.json"), "[]").unwrap();
    assert_eq!(code(&run(&["eval", "--cases", &f.path("empty.json"), "--out", &f.path("r.json")])), 2);
    fs::write(f.path("missing.json"), r#"[{"frame": "gone.png", "quad": "quad.json", "relit": "gone.png"}]"#).unwrap();
    let out = run(&["eval", "--cases", &f.path("missing.json"), "--out", &f.path("r.json")]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(!Path::new(&f.path("r.json")).exists());
}

#[test]
fn preset_files_match_variants() {
    for (file, variant) in [
        ("paper.json", Variant::Paper),
        ("m1.json", Variant::M1),
        ("m2.json", Variant::M2),
        ("m3.json", Variant::M3),
        ("m4.json", Variant::M4),
        ("m5.json", Variant::M5),
    ] {
        let text = fs::read_to_string(presets().join(file)).unwrap();
        let cfg = PipelineConfig::from_json(&text).unwrap();
        assert_eq!(cfg, PipelineConfig::default().with_variant(variant), "{file}");
    }
}
