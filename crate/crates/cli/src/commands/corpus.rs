use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use shipcast_core::area::SeaArea;
use shipcast_core::bulletin::{parse_bulletin, Bulletin};
use shipcast_core::corpus::{
    build_corpus, encode_attribute_video, render_pressure_frames, write_frameset, FrameAttribute, Orphan,
    PairedEntry, Pairing, RasterSize, CORPUS_FILE,
};
use shipcast_core::generator::AREA_VARIABLES;
use shipcast_core::grid::{GridField, Variable};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext, Status};
use crate::pipeline::{day_dirs, load_fields, slug, write_file, FORECAST_FILE};

/// Per-area videos of a corpus entry; pressure is shared per issue.
pub const AREA_FRAME_ATTRIBUTES: [FrameAttribute; 4] = [
    FrameAttribute::Wind,
    FrameAttribute::WaveHeight,
    FrameAttribute::WeatherCode,
    FrameAttribute::Visibility,
];

#[derive(Args, Debug, Clone, Default)]
pub struct CorpusArgs {
    /// Directory of day directories, each with bundles and an archived forecast.txt.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pair bulletins per single area or per consolidated area group.
    #[arg(long)]
    pub pairing: Option<Pairing>,
    /// Restrict to these areas (repeatable).
    #[arg(long)]
    pub area: Vec<String>,
    /// Raster size as WIDTHxHEIGHT (10:6).
    #[arg(long)]
    pub size: Option<String>,
}

pub fn parse_size(spec: &str) -> CliResult<RasterSize> {
    let (w, h) = spec
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::input(anyhow!("size {spec:?} is not WIDTHxHEIGHT")))?;
    let w: u32 = w.trim().parse().input(format!("size {spec:?}"))?;
    let h: u32 = h.trim().parse().input(format!("size {spec:?}"))?;
    RasterSize::new(w, h).map_err(CliError::input)
}

pub fn resolve_areas<'a>(names: &[String], cfg: &'a PipelineConfig) -> CliResult<Vec<&'a SeaArea>> {
    names
        .iter()
        .map(|n| {
            cfg.registry
                .get(n)
                .ok_or_else(|| CliError::input(anyhow!("unknown sea area {n:?}")))
        })
        .collect()
}

/// Archived bulletins of one forecast, skipping the synopsis line.
fn archived_bulletins(text: &str, cfg: &PipelineConfig) -> Result<Vec<Bulletin>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with("General synopsis"))
        .map(|(i, l)| parse_bulletin(l.trim(), &cfg.registry).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

struct Unit {
    id: String,
    dir: String,
    bulletin: Bulletin,
}

fn units(issue: &str, groups: &[Bulletin], pairing: Pairing, filter: &Option<BTreeSet<String>>) -> Vec<Unit> {
    let keep = |a: &String| filter.as_ref().is_none_or(|f| f.contains(a));
    let mut out = Vec::new();
    for g in groups {
        match pairing {
            Pairing::Area => {
                for a in g.areas.iter().filter(|a| keep(a)) {
                    let bulletin = Bulletin {
                        areas: vec![a.clone()],
                        ..g.clone()
                    };
                    out.push(Unit {
                        id: format!("{issue}/{}", slug(a)),
                        dir: slug(a),
                        bulletin,
                    });
                }
            }
            Pairing::Group => {
                if g.areas.iter().any(keep) {
                    let dir = g.areas.iter().map(|a| slug(a)).collect::<Vec<_>>().join("+");
                    out.push(Unit {
                        id: format!("{issue}/{dir}"),
                        dir,
                        bulletin: g.clone(),
                    });
                }
            }
        }
    }
    out
}

fn rel(root: &Path, path: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).to_string_lossy().into_owned()
}

fn render_unit(
    unit: &Unit,
    issue: &str,
    fields: &BTreeMap<Variable, GridField>,
    cfg: &PipelineConfig,
    size: RasterSize,
) -> CliResult<BTreeMap<String, String>> {
    let areas = resolve_areas(&unit.bulletin.areas, cfg)?;
    let mut refs = BTreeMap::new();
    for attr in AREA_FRAME_ATTRIBUTES {
        let fs = encode_attribute_video(fields, attr, &areas, cfg.mode, &cfg.scales, size).input(format!("{} {attr}", unit.id))?;
        let dir = cfg.out.join("frames").join(issue).join(&unit.dir).join(attr.as_str());
        write_frameset(&dir, &fs).map_err(CliError::input)?;
        refs.insert(attr.as_str().to_string(), rel(&cfg.out, &dir));
    }
    Ok(refs)
}

/// Renders frames, writes bulletin JSON and `corpus.json` with the split.
pub fn cmd_corpus(args: &CorpusArgs, cfg: &PipelineConfig) -> CliResult<Status> {
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::input(anyhow!("corpus builds need a seed (--seed, FF_SEED or config)")))?;
    let input = args
        .input
        .clone()
        .or_else(|| cfg.paths.input.clone())
        .ok_or_else(|| CliError::input(anyhow!("no input directory (use --input or [paths] input)")))?;
    let pairing = args.pairing.unwrap_or(cfg.pairing);
    let size = match &args.size {
        Some(s) => parse_size(s)?,
        None => cfg.raster,
    };
    let filter = if args.area.is_empty() {
        None
    } else {
        Some(resolve_areas(&args.area, cfg)?.into_iter().map(|a| a.name.clone()).collect())
    };

    let days: Vec<_> = day_dirs(&input)?
        .into_iter()
        .filter(|(_, d)| d.join(FORECAST_FILE).is_file())
        .collect();
    if days.is_empty() {
        return Err(CliError::input(anyhow!("no archived {FORECAST_FILE} under {}", input.display())));
    }

    let mut entries = Vec::new();
    let mut orphans = Vec::new();
    for (issue, dir) in &days {
        let text = fs::read_to_string(dir.join(FORECAST_FILE)).input(format!("reading {}", dir.display()))?;
        let groups = match archived_bulletins(&text, cfg) {
            Ok(g) => g,
            Err(reason) => {
                orphans.push(Orphan { id: issue.clone(), reason });
                continue;
            }
        };
        let units = units(issue, &groups, pairing, &filter);
        if units.is_empty() {
            continue;
        }
        let fields = match load_fields(dir, cfg, &AREA_VARIABLES, &[Variable::Pressure]) {
            Ok(f) => f,
            Err(e) => {
                let reason = e.to_string();
                orphans.extend(units.iter().map(|u| Orphan {
                    id: u.id.clone(),
                    reason: reason.clone(),
                }));
                continue;
            }
        };
        let pressure_ref = match fields.get(&Variable::Pressure) {
            Some(p) => {
                let fs = render_pressure_frames(p, cfg.mode, &cfg.scales, size).input(format!("{issue} pressure"))?;
                let pdir = cfg.out.join("frames").join(issue).join("pressure");
                write_frameset(&pdir, &fs).map_err(CliError::input)?;
                Some(rel(&cfg.out, &pdir))
            }
            None => None,
        };
        for unit in units {
            let mut refs = match render_unit(&unit, issue, &fields, cfg, size) {
                Ok(r) => r,
                Err(e) => {
                    orphans.push(Orphan {
                        id: unit.id.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            if let Some(p) = &pressure_ref {
                refs.insert(FrameAttribute::Pressure.as_str().to_string(), p.clone());
            }
            let bpath = cfg.out.join("bulletins").join(issue).join(format!("{}.json", unit.dir));
            write_file(&bpath, unit.bulletin.to_json() + "\n")?;
            entries.push(PairedEntry {
                id: unit.id,
                issue_time: issue.clone(),
                areas: unit.bulletin.areas.clone(),
                frame_sets: refs,
                bulletin: rel(&cfg.out, &bpath),
            });
        }
    }

    for o in &orphans {
        log::warn!("orphan {}: {}", o.id, o.reason);
    }
    let manifest = build_corpus(entries, seed, pairing, orphans).map_err(CliError::input)?;
    fs::create_dir_all(&cfg.out).input(format!("creating {}", cfg.out.display()))?;
    manifest.save(&cfg.out).map_err(CliError::input)?;
    log::info!(
        "{} entries (train {}, validation {}, test {}), {} orphans -> {}",
        manifest.counts.total(),
        manifest.counts.train,
        manifest.counts.validation,
        manifest.counts.test,
        manifest.orphans.len(),
        cfg.out.join(CORPUS_FILE).display()
    );
    Ok(Status::Ok)
}
