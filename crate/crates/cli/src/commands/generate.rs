use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use shipcast_core::generator::{DataSummary, Forecast, AREA_VARIABLES};
use shipcast_core::grid::{GridField, Variable};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, Status};
use crate::pipeline::{load_fields, write_file, FORECAST_FILE};

pub const BULLETINS_FILE: &str = "bulletins.jsonl";
pub const SUMMARY_FILE: &str = "data_summary.txt";
/// Every `n`-th pressure row and column goes into the data summary.
pub const SUMMARY_PRESSURE_STRIDE: usize = 4;

#[derive(Args, Debug, Clone, Default)]
pub struct GenerateArgs {
    /// Directory of grid bundles, one per variable.
    #[arg(long)]
    pub grids: Option<PathBuf>,
    /// Also write the textual data summary.
    #[arg(long)]
    pub summary: bool,
}

pub fn issue_of(fields: &BTreeMap<Variable, GridField>) -> Option<String> {
    fields
        .values()
        .next()
        .and_then(|f| f.times.first())
        .map(|t| t.format("%Y-%m-%dT%H:%MZ").to_string())
}

/// Loads, reduces, crops and generates. Pressure is optional.
pub fn forecast_for_dir(dir: &Path, cfg: &PipelineConfig) -> CliResult<(Forecast, BTreeMap<Variable, GridField>)> {
    let fields = load_fields(dir, cfg, &AREA_VARIABLES, &[Variable::Pressure])?;
    let forecast = cfg
        .generator()
        .forecast(&fields, &cfg.registry)
        .map_err(|e| CliError::input(anyhow!("generating from {}: {e}", dir.display())))?;
    Ok((forecast, fields))
}

pub fn bulletins_jsonl(forecast: &Forecast) -> String {
    forecast.per_area.iter().map(|b| b.to_json() + "\n").collect()
}

/// Writes `forecast.txt` and `bulletins.jsonl` (one bulletin per area).
pub fn cmd_generate(args: &GenerateArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let grids = args
        .grids
        .clone()
        .or_else(|| cfg.paths.grids.clone())
        .ok_or_else(|| CliError::input(anyhow!("no grids directory (use --grids or [paths] grids)")))?;
    let (forecast, fields) = forecast_for_dir(&grids, cfg)?;
    write_file(&cfg.out.join(FORECAST_FILE), forecast.render())?;
    write_file(&cfg.out.join(BULLETINS_FILE), bulletins_jsonl(&forecast))?;
    if args.summary {
        let summary = DataSummary::from_fields(&fields, &cfg.registry, issue_of(&fields), SUMMARY_PRESSURE_STRIDE)
            .map_err(CliError::input)?;
        write_file(&cfg.out.join(SUMMARY_FILE), summary.render())?;
    }
    log::info!(
        "{} area groups written to {}",
        forecast.groups.len(),
        cfg.out.join(FORECAST_FILE).display()
    );
    Ok(Status::Ok)
}
