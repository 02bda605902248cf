use std::path::Path;

use anyhow::anyhow;
use chrono::{Duration, NaiveDate, TimeZone, Utc};
use clap::Args;
use shipcast_core::grid::{write_ensemble_bundle, write_grid_bundle};
use shipcast_core::synthetic::{synthetic_ensemble, synthetic_fields, SyntheticConfig};

use crate::commands::generate::forecast_for_dir;
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext, Status};
use crate::pipeline::{write_file, FORECAST_FILE};

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    /// Number of consecutive issue days.
    #[arg(long, default_value_t = 1)]
    pub days: usize,
    /// Ensemble members per bundle; 0 writes deterministic fields.
    #[arg(long, default_value_t = 0)]
    pub members: usize,
    /// Grid spacing in degrees.
    #[arg(long, default_value_t = 0.5)]
    pub resolution: f64,
    /// First issue date (YYYY-MM-DD).
    #[arg(long, default_value = "2024-01-01")]
    pub start: String,
    /// Archive a rules-generated forecast.txt in every day directory.
    #[arg(long)]
    pub bulletins: bool,
}

impl Default for SynthArgs {
    fn default() -> Self {
        SynthArgs {
            days: 1,
            members: 0,
            resolution: 0.5,
            start: "2024-01-01".into(),
            bulletins: false,
        }
    }
}

pub fn day_seed(seed: u64, day: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(day as u64)
}

/// Writes `out/<date>/<variable>/` bundles for each day.
pub fn cmd_synth(args: &SynthArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let seed = cfg.seed.unwrap_or(0);
    if !(args.resolution > 0.0) {
        return Err(CliError::input(anyhow!("resolution must be positive")));
    }
    let start = NaiveDate::parse_from_str(&args.start, "%Y-%m-%d").input("--start")?;
    for day in 0..args.days {
        let date = start + Duration::days(day as i64);
        let issue = Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"));
        let sc = SyntheticConfig {
            seed: day_seed(seed, day),
            issue,
            resolution_deg: args.resolution,
            ..SyntheticConfig::default()
        };
        let dir = cfg.out.join(date.format("%Y-%m-%d").to_string());
        write_day(&dir, &sc, args.members)?;
        if args.bulletins {
            let (forecast, _) = forecast_for_dir(&dir, cfg)?;
            write_file(&dir.join(FORECAST_FILE), forecast.render())?;
        }
    }
    log::info!("{} synthetic day(s) written to {}", args.days, cfg.out.display());
    Ok(Status::Ok)
}

fn write_day(dir: &Path, sc: &SyntheticConfig, members: usize) -> CliResult<()> {
    if members == 0 {
        for (v, f) in synthetic_fields(sc) {
            write_grid_bundle(&dir.join(v.as_str()), &f).input(format!("writing {v}"))?;
        }
    } else {
        for (v, f) in synthetic_ensemble(sc, members) {
            write_ensemble_bundle(&dir.join(v.as_str()), &f).input(format!("writing {v}"))?;
        }
    }
    Ok(())
}
