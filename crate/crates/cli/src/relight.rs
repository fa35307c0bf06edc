use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adrelight::backbone::BackboneInfo;
use adrelight::imgcore::RegionQuad;
use adrelight::probe::FeatureStats;
use adrelight::relight::{run_pipeline, PipelineConfig, PipelineResult, StageTimings};
use adrelight::shading::{ShadingDecomposition, STRUCTURE_MAX};
use clap::Args;
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{digest_inputs, file_name, write_atomic, write_gray, write_json, write_rgb, FileDigest, ToolInfo, TOOL};
use crate::settings::{build_backbone, load_mask, load_quad, load_rgb, resolve_geometry, ConfigArgs};

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("region").required(true).multiple(true).args(["mask", "quad"]))]
pub struct RelightArgs {
    #[arg(long, value_name = "PNG")]
    pub frame: PathBuf,
    #[arg(long, value_name = "PNG")]
    pub banner: PathBuf,
    /// Region mask; its bounding box is the target quad unless --quad is given
    #[arg(long, value_name = "PNG")]
    pub mask: Option<PathBuf>,
    /// quad.json with four clockwise corners
    #[arg(long, value_name = "JSON")]
    pub quad: Option<PathBuf>,
    #[arg(long, value_name = "PNG")]
    pub texture: Option<PathBuf>,
    /// Composited frame
    #[arg(long, value_name = "PNG")]
    pub out: PathBuf,
    /// Run manifest (defaults to the output path with a .json extension)
    #[arg(long, value_name = "JSON")]
    pub manifest: Option<PathBuf>,
    /// Write every intermediate map plus a JSON summary into this directory
    #[arg(long, value_name = "DIR")]
    pub dump_intermediates: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Everything needed to reproduce a run. Contains no timings, so two runs
/// with a deterministic backbone serialise to identical bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: ToolInfo,
    pub command: &'static str,
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, FileDigest>,
    pub quad: RegionQuad,
    pub region_size: [usize; 2],
    pub backbone: BackboneInfo,
    pub thr: f64,
    pub epsilon: FeatureStats,
    pub outputs: BTreeMap<String, FileDigest>,
}

#[derive(Debug, Serialize)]
struct IntermediatesSummary<'a> {
    config: &'a PipelineConfig,
    thr: f64,
    epsilon: FeatureStats,
    timings_s: BTreeMap<&'static str, f64>,
    files: Vec<String>,
}

fn timings_map(t: &StageTimings) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("stage1", t.stage1.as_secs_f64()),
        ("stage2", t.stage2.as_secs_f64()),
        ("stage3", t.stage3.as_secs_f64()),
        ("composite", t.composite.as_secs_f64()),
        ("total", t.total().as_secs_f64()),
    ])
}

fn dump_decomposition(dir: &Path, prefix: &str, d: &ShadingDecomposition, files: &mut Vec<String>) -> CliResult<()> {
    let shading = format!("{prefix}_shading.png");
    write_gray(&dir.join(&shading), &d.shading)?;
    let structure = format!("{prefix}_structure.png");
    write_gray(&dir.join(&structure), &d.structure.map(|v| v / STRUCTURE_MAX))?;
    files.extend([shading, structure]);
    Ok(())
}

pub fn dump_intermediates(dir: &Path, cfg: &PipelineConfig, res: &PipelineResult) -> CliResult<()> {
    let im = &res.intermediates;
    let mut files = Vec::new();
    for (name, img) in [
        ("region.png", &im.region),
        ("banner.png", &im.banner),
        ("textured.png", &im.textured),
        ("aligned.png", &im.aligned),
        ("probe_full.png", &im.probe_full),
        ("probe_masked.png", &im.probe_masked),
        ("probe_card.png", &im.probe_card),
        ("epsilon.png", &im.feature.normalized),
        ("b_eps.png", &im.b_eps),
        ("relit_raw.png", &im.relit_raw),
        ("relit.png", &res.relit_banner),
    ] {
        write_rgb(&dir.join(name), img)?;
        files.push(name.to_string());
    }
    for (name, map) in [("gradient.png", &im.gradient), ("df.png", &im.df)] {
        write_gray(&dir.join(name), map)?;
        files.push(name.to_string());
    }
    dump_decomposition(dir, "region", &im.region_shading, &mut files)?;
    dump_decomposition(dir, "banner", &im.banner_shading, &mut files)?;
    write_atomic(&dir.join("epsilon.f32"), &im.feature.residual.to_f32_le())?;
    files.push("epsilon.f32".into());
    files.sort();
    write_json(
        &dir.join("intermediates.json"),
        &IntermediatesSummary {
            config: cfg,
            thr: im.thr,
            epsilon: im.feature.stats,
            timings_s: timings_map(&res.timings),
            files,
        },
    )
}

pub fn manifest_path(out: &Path, manifest: Option<&PathBuf>) -> PathBuf {
    manifest.cloned().unwrap_or_else(|| out.with_extension("json"))
}

pub fn run(args: &RelightArgs) -> CliResult<()> {
    let cfg = args.config.resolve()?;
    let backbone = build_backbone(&cfg)?;
    let frame = load_rgb(&args.frame)?;
    let banner = load_rgb(&args.banner)?;
    let texture = args.texture.as_deref().map(load_rgb).transpose()?;
    let mask = args.mask.as_deref().map(load_mask).transpose()?;
    let quad = args.quad.as_deref().map(load_quad).transpose()?;
    let (mask, quad) = resolve_geometry(&frame, mask, quad)?;

    let res = run_pipeline(&frame, &banner, &mask, &quad, texture.as_ref(), &cfg, &*backbone)?;
    write_rgb(&args.out, &res.final_frame)?;
    if let Some(dir) = &args.dump_intermediates {
        dump_intermediates(dir, &cfg, &res)?;
    }

    let (w, h) = quad.bounds_size();
    let manifest = RunManifest {
        tool: TOOL,
        command: "relight",
        config: cfg.clone(),
        inputs: digest_inputs(&[
            ("frame", Some(&args.frame)),
            ("banner", Some(&args.banner)),
            ("mask", args.mask.as_ref()),
            ("quad", args.quad.as_ref()),
            ("texture", args.texture.as_ref()),
        ])?,
        quad,
        region_size: [w, h],
        backbone: backbone.info(),
        thr: res.intermediates.thr,
        epsilon: res.intermediates.feature.stats,
        outputs: BTreeMap::from([("frame".to_string(), FileDigest::of_output(&args.out)?)]),
    };
    let manifest_path = manifest_path(&args.out, args.manifest.as_ref());
    write_json(&manifest_path, &manifest)?;

    let t = timings_map(&res.timings);
    eprintln!(
        "relight: wrote {} and {} (stage1 {:.3}s, stage2 {:.3}s, stage3 {:.3}s, total {:.3}s)",
        file_name(&args.out),
        file_name(&manifest_path),
        t["stage1"],
        t["stage2"],
        t["stage3"],
        t["total"],
    );
    Ok(())
}
