use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use adrelight::backbone::{render_scene, SceneDescription};
use adrelight::imgcore::{Mask, RgbImage};
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_gray, write_json, write_rgb};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Scene description JSON
    #[arg(long, value_name = "JSON")]
    pub spec: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SpecEcho<'a> {
    scene: &'a SceneDescription,
    lamp_maps: Vec<String>,
    /// Raw little-endian f32 RGB irradiance per lamp, row-major.
    lamp_maps_raw: Vec<String>,
}

fn f32_le(img: &RgbImage) -> Vec<u8> {
    img.data().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.spec).map_err(|e| CliError::io(&args.spec, e))?;
    let desc = SceneDescription::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", args.spec.display())))?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let spec = desc.to_spec(base).map_err(|e| {
        if e.is_io() {
            CliError::from_core("input", e)
        } else {
            CliError::usage(format!("{}: {e}", args.spec.display()))
        }
    })?;
    let quad = desc.region().map_err(|e| CliError::usage(format!("{}: {e}", args.spec.display())))?;

    let frame = render_scene(&spec, &BTreeSet::new()).map_err(|e| CliError::from_core("synth", e))?;
    let out = &args.out;
    write_rgb(&out.join("frame.png"), &frame)?;
    write_rgb(&out.join("albedo.png"), &spec.base_albedo)?;
    let mask: Mask = quad.coverage(spec.width, spec.height);
    write_gray(&out.join("mask.png"), mask.as_map())?;
    write_json(&out.join("quad.json"), &quad)?;

    let mut lamp_maps = Vec::new();
    let mut lamp_maps_raw = Vec::new();
    for i in 0..spec.lamps.len() {
        let light = spec.lamp_map(i).map_err(|e| CliError::from_core("synth", e))?;
        let png = format!("lamp_{i}.png");
        let raw = format!("lamp_{i}.f32");
        write_rgb(&out.join(&png), &light.clamped())?;
        write_atomic(&out.join(&raw), &f32_le(&light))?;
        lamp_maps.push(png);
        lamp_maps_raw.push(raw);
    }
    write_json(
        &out.join("spec.json"),
        &SpecEcho {
            scene: &desc,
            lamp_maps,
            lamp_maps_raw,
        },
    )?;
    eprintln!("synth: wrote {}x{} scene with {} lamps to {}", spec.width, spec.height, spec.lamps.len(), out.display());
    Ok(())
}
