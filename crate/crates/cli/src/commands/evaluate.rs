use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use shipcast_core::bulletin::Attribute;
use shipcast_core::corpus::FrameAttribute;
use shipcast_core::eval::{evaluate_systems, expected_records, EvalError, EvalKey, EvalRecord};
use shipcast_core::generator::{DataSummary, AREA_VARIABLES};
use shipcast_core::grid::Variable;
use shipcast_gateway::{
    batch_generate, Gateway, GenerationRequest, LocalBackend, PromptProfiles, RemoteBackend, RequestInput,
};

use crate::commands::generate::{issue_of, SUMMARY_PRESSURE_STRIDE};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext, Status};
use crate::pipeline::{day_dirs, load_fields, slug, write_file, FORECAST_FILE};

pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const EXPECTED_FILE: &str = "expected.jsonl";
/// Backend id that runs no generation, for scoring `--system` files alone.
pub const NO_BACKEND: &str = "none";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputKind {
    #[default]
    Text,
    Frames,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EvaluateArgs {
    /// Day directories with grid bundles and the reference forecast.txt.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pre-generated output as NAME=FILE.jsonl (repeatable).
    #[arg(long = "system")]
    pub systems: Vec<String>,
    /// What backends receive: a textual data summary or frame-set directories.
    #[arg(long, value_enum, default_value_t = InputKind::Text)]
    pub input_kind: InputKind,
    /// Corpus root holding `frames/<issue>/<area>/<attribute>/`.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Requests in flight per backend.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Prompt profile id.
    #[arg(long)]
    pub profile: Option<String>,
}

fn frame_attribute(attribute: Attribute) -> FrameAttribute {
    match attribute {
        Attribute::Wind => FrameAttribute::Wind,
        Attribute::SeaState => FrameAttribute::WaveHeight,
        Attribute::Weather => FrameAttribute::WeatherCode,
        Attribute::Visibility => FrameAttribute::Visibility,
    }
}

pub fn build_gateway(cfg: &PipelineConfig) -> CliResult<Gateway> {
    let mut profiles = PromptProfiles::builtin();
    if let Some(dir) = &cfg.paths.prompts {
        profiles.load_dir(dir).input(format!("prompt profiles in {}", dir.display()))?;
    }
    let mut gateway = Gateway::new(profiles);
    gateway.register(Arc::new(LocalBackend::new("local", cfg.generator(), cfg.registry.clone())));
    for id in &cfg.backends {
        if id == "local" || id == NO_BACKEND {
            continue;
        }
        if !id.starts_with("remote") {
            return Err(CliError::input(anyhow!("unknown backend {id:?} (local, remote or {NO_BACKEND})")));
        }
        gateway.register(Arc::new(RemoteBackend::http(id, cfg.remote.clone()).map_err(CliError::input)?));
    }
    Ok(gateway)
}

pub fn read_records(path: &Path) -> CliResult<Vec<EvalRecord>> {
    let text = fs::read_to_string(path).input(format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).input(format!("{}:{}", path.display(), i + 1)))
        .collect()
}

pub fn records_jsonl(records: &[EvalRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

struct Day {
    issue: String,
    summary: Option<String>,
}

fn requests_for(
    days: &[Day],
    keys: &[EvalKey],
    kind: InputKind,
    frames: &Option<PathBuf>,
    profile: &str,
) -> CliResult<Vec<GenerationRequest>> {
    keys.iter()
        .map(|k| {
            let input = match kind {
                InputKind::Text => {
                    let day = days.iter().find(|d| d.issue == k.issue_time).expect("key from a loaded day");
                    RequestInput::Text(day.summary.clone().unwrap_or_default())
                }
                InputKind::Frames => {
                    let root = frames
                        .as_ref()
                        .ok_or_else(|| CliError::input(anyhow!("--input-kind frames needs --frames")))?;
                    RequestInput::Frames(
                        root.join("frames")
                            .join(&k.issue_time)
                            .join(slug(&k.area))
                            .join(frame_attribute(k.attribute).as_str()),
                    )
                }
            };
            Ok(GenerationRequest {
                attribute: k.attribute,
                area: k.area.clone(),
                input,
                prompt_profile: profile.to_string(),
            })
        })
        .collect()
}

/// Scores backends and pre-generated outputs against archived forecasts.
pub fn cmd_evaluate(args: &EvaluateArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let input = args
        .input
        .clone()
        .or_else(|| cfg.paths.input.clone())
        .ok_or_else(|| CliError::input(anyhow!("no input directory (use --input or [paths] input)")))?;
    let backends: Vec<&String> = cfg.backends.iter().filter(|b| *b != NO_BACKEND).collect();
    let need_summary = !backends.is_empty() && args.input_kind == InputKind::Text;

    let mut expected = Vec::new();
    let mut days = Vec::new();
    for (issue, dir) in day_dirs(&input)? {
        let path = dir.join(FORECAST_FILE);
        if !path.is_file() {
            log::warn!("{issue}: no {FORECAST_FILE}, skipped");
            continue;
        }
        let text = fs::read_to_string(&path).input(format!("reading {}", path.display()))?;
        expected.extend(expected_records(&text, &issue, &cfg.registry).input(format!("segmenting {}", path.display()))?);
        let summary = if need_summary {
            let fields = load_fields(&dir, cfg, &AREA_VARIABLES, &[Variable::Pressure])?;
            let s = DataSummary::from_fields(&fields, &cfg.registry, issue_of(&fields), SUMMARY_PRESSURE_STRIDE)
                .map_err(CliError::input)?;
            Some(s.render())
        } else {
            None
        };
        days.push(Day { issue, summary });
    }
    if days.is_empty() {
        return Err(CliError::input(anyhow!("no {FORECAST_FILE} under {}", input.display())));
    }

    let keys: Vec<EvalKey> = expected.iter().filter(|r| !r.excluded).map(|r| r.key.clone()).collect();
    let mut outputs: Vec<(String, Vec<EvalRecord>)> = Vec::new();
    if !backends.is_empty() {
        let gateway = build_gateway(cfg)?;
        let profile = args.profile.clone().unwrap_or_else(|| cfg.prompt_profile.clone());
        gateway.profiles().get(&profile).map_err(CliError::input)?;
        let requests = requests_for(&days, &keys, args.input_kind, &args.frames, &profile)?;
        let parallelism = args.parallelism.unwrap_or(cfg.parallelism);
        for id in backends {
            let results = batch_generate(&gateway, &requests, id, parallelism);
            let mut failures = 0;
            let records = keys
                .iter()
                .zip(results)
                .map(|(key, r)| EvalRecord {
                    key: key.clone(),
                    text: r
                        .map(|r| r.text)
                        .unwrap_or_else(|e| {
                            failures += 1;
                            log::warn!("{id} {key}: {e}");
                            String::new()
                        }),
                    excluded: false,
                })
                .collect();
            if failures > 0 {
                log::warn!("{id}: {failures} of {} requests failed and score as empty", keys.len());
            }
            outputs.push((id.clone(), records));
        }
    }
    for spec in &args.systems {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::input(anyhow!("--system {spec:?} is not NAME=FILE")))?;
        outputs.push((name.to_string(), read_records(Path::new(path))?));
    }
    if outputs.is_empty() {
        return Err(CliError::input(anyhow!("nothing to evaluate: no backend and no --system")));
    }

    let report = match evaluate_systems(&expected, &outputs) {
        Ok(r) => r,
        Err(e @ EvalError::AlignmentError { .. }) => return Err(CliError::alignment(e)),
        Err(e) => return Err(CliError::input(e)),
    };
    let table = report.render_table();
    write_file(&cfg.out.join(REPORT_TEXT_FILE), &table)?;
    write_file(&cfg.out.join(REPORT_JSON_FILE), report.to_json() + "\n")?;
    write_file(&cfg.out.join(EXPECTED_FILE), records_jsonl(&expected))?;
    for (name, records) in &outputs {
        write_file(&cfg.out.join("generated").join(format!("{}.jsonl", slug(name))), records_jsonl(records))?;
    }
    for a in &report.aggregate {
        log::info!("{}: average F1 {:.1}%", a.system, a.average_f1 * 100.0);
    }
    log::info!(
        "{} fragments scored, {} multi-area fragments excluded; report in {}",
        report.scored_count,
        report.excluded_count,
        cfg.out.join(REPORT_TEXT_FILE).display()
    );
    Ok(Status::Ok)
}
