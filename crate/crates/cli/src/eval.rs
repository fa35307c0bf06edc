use std::fs;
use std::path::{Path, PathBuf};

use adrelight::backbone::RelightBackbone;
use adrelight::imgcore::RegionQuad;
use adrelight::metrics::{evaluate_case, CaseMetrics, MetricsReport};
use adrelight::relight::{run_pipeline, PipelineConfig};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json};
use crate::settings::{build_backbone, load_mask, load_quad, load_rgb, parse_quad, resolve_geometry, ConfigArgs};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// JSON list of cases; relative paths resolve against its directory
    #[arg(long, value_name = "JSON")]
    pub cases: PathBuf,
    /// MetricsReport JSON
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Plain-text table (printed to stdout as well)
    #[arg(long, value_name = "TXT")]
    pub table: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum QuadRef {
    Inline(RegionQuad),
    File(PathBuf),
}

/// One evaluation case. Either `relit` (a finished frame) or `banner`
/// (run the pipeline with the resolved config) must be present.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub id: Option<String>,
    pub frame: PathBuf,
    pub mask: Option<PathBuf>,
    pub quad: Option<QuadRef>,
    pub relit: Option<PathBuf>,
    pub banner: Option<PathBuf>,
    pub texture: Option<PathBuf>,
}

fn eval_case(
    index: usize,
    case: &CaseSpec,
    base: &Path,
    cfg: &PipelineConfig,
    backbone: &dyn RelightBackbone,
) -> CliResult<CaseMetrics> {
    let id = case.id.clone().unwrap_or_else(|| format!("case{index}"));
    let tag = |e: CliError| CliError {
        message: format!("case '{id}': {}", e.message),
        ..e
    };
    let p = |rel: &Path| base.join(rel);
    let frame = load_rgb(&p(&case.frame)).map_err(tag)?;
    let mask = case.mask.as_ref().map(|m| load_mask(&p(m))).transpose().map_err(tag)?;
    let quad = match &case.quad {
        Some(QuadRef::Inline(q)) => Some(parse_quad(&serde_json::to_string(q).expect("quad serialises")).map_err(tag)?),
        Some(QuadRef::File(f)) => Some(load_quad(&p(f)).map_err(tag)?),
        None => None,
    };
    let (mask, quad) = resolve_geometry(&frame, mask, quad).map_err(tag)?;
    let relit = match (&case.relit, &case.banner) {
        (Some(r), _) => load_rgb(&p(r)).map_err(tag)?,
        (None, Some(b)) => {
            let banner = load_rgb(&p(b)).map_err(tag)?;
            let texture = case.texture.as_ref().map(|t| load_rgb(&p(t))).transpose().map_err(tag)?;
            run_pipeline(&frame, &banner, &mask, &quad, texture.as_ref(), cfg, backbone)
                .map_err(|e| tag(e.into()))?
                .final_frame
        }
        (None, None) => return Err(tag(CliError::usage("needs 'relit' or 'banner'"))),
    };
    let (ssim, ill_sim) = evaluate_case(&frame, Some(&mask), &quad, &relit).map_err(|e| tag(CliError::from_core("eval", e)))?;
    Ok(CaseMetrics { id, ssim, ill_sim })
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let cfg = args.config.resolve()?;
    let text = fs::read_to_string(&args.cases).map_err(|e| CliError::io(&args.cases, e))?;
    let cases: Vec<CaseSpec> =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", args.cases.display())))?;
    if cases.is_empty() {
        return Err(CliError::usage(format!("{}: case list is empty", args.cases.display())));
    }
    let backbone = build_backbone(&cfg)?;
    let base = args.cases.parent().unwrap_or(Path::new("."));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let results: Vec<CliResult<CaseMetrics>> = pool.install(|| {
        cases
            .par_iter()
            .enumerate()
            .map(|(i, c)| eval_case(i, c, base, &cfg, &*backbone))
            .collect()
    });
    let metrics = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let pipeline_cases = cases.iter().filter(|c| c.relit.is_none()).count();
    let config = serde_json::json!({
        "pipeline": cfg,
        "backbone": backbone.info(),
        "pipeline_cases": pipeline_cases,
    });
    let report = MetricsReport::from_cases(metrics, config);
    write_json(&args.out, &report)?;
    let table = report.to_table();
    if let Some(t) = &args.table {
        write_atomic(t, table.as_bytes())?;
    }
    print!("{table}");
    Ok(())
}
