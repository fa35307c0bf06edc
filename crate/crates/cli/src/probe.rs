use std::path::PathBuf;

use adrelight::backbone::BackboneInfo;
use adrelight::imgcore::{resize_rgb, RegionQuad};
use adrelight::probe::{FeatureStats, ProbeMode};
use adrelight::relight::{probe_region, PipelineConfig};
use adrelight::shading::transfer_shading;
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json, write_rgb};
use crate::settings::{build_backbone, load_mask, load_quad, load_rgb, resolve_geometry, ConfigArgs};

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long, value_name = "PNG")]
    pub frame: PathBuf,
    #[arg(long, value_name = "PNG")]
    pub mask: PathBuf,
    /// Probe region; defaults to the mask's bounding box
    #[arg(long, value_name = "JSON")]
    pub quad: Option<PathBuf>,
    /// Banner used as the probe foreground in banner mode
    #[arg(long, value_name = "PNG")]
    pub banner: Option<PathBuf>,
    /// Output directory for epsilon.f32, epsilon.png and stats.json
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Serialize)]
struct ProbeStats {
    width: usize,
    height: usize,
    quad: RegionQuad,
    stats: FeatureStats,
    backbone: BackboneInfo,
    config: PipelineConfig,
}

pub fn run(args: &ProbeArgs) -> CliResult<()> {
    let cfg = args.config.resolve()?;
    let backbone = build_backbone(&cfg)?;
    let frame = load_rgb(&args.frame)?;
    let mask = load_mask(&args.mask)?;
    let quad = args.quad.as_deref().map(load_quad).transpose()?;
    let (mask, quad) = resolve_geometry(&frame, Some(mask), quad)?;
    let (w, h) = quad.bounds_size();

    let banner = match (cfg.probe_mode, &args.banner) {
        (ProbeMode::Banner, None) => return Err(CliError::usage("probe mode 'banner' needs --banner")),
        (ProbeMode::Banner, Some(path)) => {
            let geo = |e| CliError::from_core("probe", e);
            let b = resize_rgb(&load_rgb(path)?, w, h).map_err(geo)?;
            Some(if cfg.shade_align {
                let region = adrelight::imgcore::rectify_quad(&frame, &quad, w, h).map_err(geo)?;
                transfer_shading(&b, &region, cfg.k).map_err(geo)?
            } else {
                b
            })
        }
        (ProbeMode::Gray, _) => None,
    };

    let probe = probe_region(&frame, &mask, &quad, cfg.probe_mode, banner.as_ref(), &*backbone)
        .map_err(|e| CliError::from_core("probe", e))?;
    let out = &args.out;
    write_atomic(&out.join("epsilon.f32"), &probe.feature.residual.to_f32_le())?;
    write_rgb(&out.join("epsilon.png"), &probe.feature.normalized)?;
    write_json(
        &out.join("stats.json"),
        &ProbeStats {
            width: w,
            height: h,
            quad,
            stats: probe.feature.stats,
            backbone: backbone.info(),
            config: cfg,
        },
    )?;
    eprintln!("probe: max |eps| = {:.6} over {w}x{h}", probe.feature.stats.max_abs);
    Ok(())
}
