use std::fs;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use shipcast_core::bulletin::{parse_bulletin, parse_synopsis, validate, validate_synopsis, Bulletin, Violation};
use shipcast_core::overlay::LabelGrid;

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext, Status};

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    /// Bulletin text (one bulletin per line) or Bulletin JSON / JSON lines.
    pub file: PathBuf,
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Violations per input line, numbered from 1.
pub fn check_text(text: &str, cfg: &PipelineConfig) -> CliResult<Vec<(usize, Violation)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 1;
        let violations = if is_json(line) {
            let b = Bulletin::from_json(line).map_err(|e| CliError::input(anyhow!("line {n}: {e}")))?;
            validate(&b, &cfg.registry)
        } else if line.trim_start().starts_with("General synopsis") {
            let s = parse_synopsis(line.trim()).map_err(|e| CliError::input(anyhow!("line {n}: {e}")))?;
            validate_synopsis(&s, &LabelGrid::from(cfg.synopsis.grid))
        } else {
            let b = parse_bulletin(line.trim(), &cfg.registry).map_err(|e| {
                let span = e.span();
                CliError::input(anyhow!("line {n}, bytes {}..{}: {e}", span.start, span.end))
            })?;
            validate(&b, &cfg.registry)
        };
        out.extend(violations.into_iter().map(|v| (n, v)));
    }
    Ok(out)
}

/// Prints each violation; exit 1 when any are found.
pub fn cmd_validate(args: &ValidateArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let text = fs::read_to_string(&args.file).input(format!("reading {}", args.file.display()))?;
    let whole_json = is_json(&text) && serde_json::from_str::<serde_json::Value>(&text).is_ok();
    let findings = if whole_json {
        let b = Bulletin::from_json(&text).input(format!("parsing {}", args.file.display()))?;
        validate(&b, &cfg.registry).into_iter().map(|v| (1, v)).collect()
    } else {
        check_text(&text, cfg)?
    };
    for (line, v) in &findings {
        println!("{}:{line}: {v}", args.file.display());
    }
    if findings.is_empty() {
        println!("{}: ok", args.file.display());
        Ok(Status::Ok)
    } else {
        Ok(Status::Findings)
    }
}
