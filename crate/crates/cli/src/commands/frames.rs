use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use shipcast_core::corpus::{encode_attribute_video, write_frameset, FrameAttribute};
use shipcast_core::grid::Variable;

use crate::commands::corpus::{parse_size, resolve_areas};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext, Status};
use crate::pipeline::load_fields;

#[derive(Args, Debug, Clone, Default)]
pub struct FramesArgs {
    #[arg(long)]
    pub grids: Option<PathBuf>,
    /// wind, wind_speed, wind_direction, wave_height, visibility, weather_code or pressure (repeatable).
    #[arg(long = "attribute")]
    pub attributes: Vec<FrameAttribute>,
    /// Mask to these areas (repeatable); pressure always covers the full domain.
    #[arg(long)]
    pub area: Vec<String>,
    #[arg(long)]
    pub size: Option<String>,
}

/// Writes `out/<attribute>/frame_000.png…` plus `frameset.json`.
pub fn cmd_render_frames(args: &FramesArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let grids = args
        .grids
        .clone()
        .or_else(|| cfg.paths.grids.clone())
        .ok_or_else(|| CliError::input(anyhow!("no grids directory (use --grids or [paths] grids)")))?;
    let attributes = if args.attributes.is_empty() {
        FrameAttribute::CORPUS.to_vec()
    } else {
        args.attributes.clone()
    };
    let mut needed: Vec<Variable> = attributes.iter().flat_map(|a| a.variables()).collect();
    needed.sort();
    needed.dedup();
    let fields = load_fields(&grids, cfg, &needed, &[])?;
    let areas = resolve_areas(&args.area, cfg)?;
    let size = match &args.size {
        Some(s) => parse_size(s)?,
        None => cfg.raster,
    };
    for attr in attributes {
        let fs = encode_attribute_video(&fields, attr, &areas, cfg.mode, &cfg.scales, size).input(format!("rendering {attr}"))?;
        write_frameset(&cfg.out.join(attr.as_str()), &fs).map_err(CliError::input)?;
        log::info!("{attr}: {} frames", fs.frames.len());
    }
    Ok(Status::Ok)
}
