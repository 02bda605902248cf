//! Pipeline configuration. Precedence: flags, then `FF_*` environment
//! variables, then the TOML file, then defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use serde::Deserialize;
use shipcast_core::area::AreaRegistry;
use shipcast_core::categorical::{ScaleMode, ScaleSet, WeatherCodeMap};
use shipcast_core::corpus::{Pairing, RasterSize};
use shipcast_core::generator::{Generator, SynopsisConfig};
use shipcast_core::grid::Variable;
use shipcast_gateway::RemoteConfig;

use crate::error::{CliError, CliResult, InputContext};

pub const ENV_CONFIG: &str = "FF_CONFIG";
pub const ENV_OUT: &str = "FF_OUT";
pub const ENV_SEED: &str = "FF_SEED";
pub const ENV_MODE: &str = "FF_MODE";
pub const ENV_BACKEND: &str = "FF_BACKEND";
pub const ENV_PERCENTILE: &str = "FF_PERCENTILE";

pub const DEFAULT_PERCENTILE: f64 = 50.0;

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; every file a command writes goes under it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for corpus shuffles and synthetic data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// categorical or continuous colour scales.
    #[arg(long, global = true)]
    pub mode: Option<ScaleMode>,
    /// `attribute=p` (repeatable) or a bare `p` for every attribute.
    #[arg(long, global = true)]
    pub percentile: Vec<String>,
    /// Backend ids, comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub backend: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsFile {
    pub grids: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub areas: Option<PathBuf>,
    pub scales: Option<PathBuf>,
    pub weather_codes: Option<PathBuf>,
    pub prompts: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterFile {
    pub width: u32,
    pub height: u32,
}

/// On-disk TOML document.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<ScaleMode>,
    pub backend: Option<Vec<String>>,
    pub pairing: Option<Pairing>,
    pub parallelism: Option<usize>,
    pub prompt_profile: Option<String>,
    pub paths: PathsFile,
    pub percentile: BTreeMap<String, f64>,
    pub raster: Option<RasterFile>,
    pub remote: Option<RemoteConfig>,
    pub synopsis: Option<SynopsisConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).input(format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).input(format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(v) = p.as_mut() {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        };
        rebase(&mut cfg.out);
        rebase(&mut cfg.paths.grids);
        rebase(&mut cfg.paths.input);
        rebase(&mut cfg.paths.areas);
        rebase(&mut cfg.paths.scales);
        rebase(&mut cfg.paths.weather_codes);
        rebase(&mut cfg.paths.prompts);
        Ok(cfg)
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub mode: ScaleMode,
    pub backends: Vec<String>,
    pub percentile: BTreeMap<Variable, f64>,
    pub pairing: Pairing,
    pub parallelism: usize,
    pub prompt_profile: String,
    pub paths: PathsFile,
    pub raster: RasterSize,
    pub remote: RemoteConfig,
    pub synopsis: SynopsisConfig,
    pub registry: AreaRegistry,
    pub scales: ScaleSet,
    pub codes: WeatherCodeMap,
}

/// Applies `attribute=p` or bare `p` specs onto `map`.
pub fn apply_percentiles(map: &mut BTreeMap<Variable, f64>, specs: &[String]) -> CliResult<()> {
    for spec in specs.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let (targets, value) = match spec.split_once('=') {
            Some((name, v)) if name.trim() == "all" => (Variable::ALL.to_vec(), v),
            Some((name, v)) => (vec![name.trim().parse::<Variable>().input("--percentile")?], v),
            None => (Variable::ALL.to_vec(), spec),
        };
        let p: f64 = value.trim().parse().input(format!("percentile {spec:?}"))?;
        if !(0.0..=100.0).contains(&p) {
            return Err(CliError::input(anyhow!("percentile {p} is outside [0, 100]")));
        }
        for v in targets {
            map.insert(v, p);
        }
    }
    Ok(())
}

fn existing(path: &Option<PathBuf>, what: &str) -> CliResult<()> {
    match path {
        Some(p) if !p.exists() => Err(CliError::input(anyhow!("{what} path {} does not exist", p.display()))),
        _ => Ok(()),
    }
}

impl PipelineConfig {
    pub fn resolve(args: &CommonArgs, env: &dyn Fn(&str) -> Option<String>) -> CliResult<Self> {
        let config_path = args.config.clone().or_else(|| env(ENV_CONFIG).map(PathBuf::from));
        let file = match &config_path {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };

        let out = args
            .out
            .clone()
            .or_else(|| env(ENV_OUT).map(PathBuf::from))
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let seed = match (args.seed, env(ENV_SEED)) {
            (Some(s), _) => Some(s),
            (None, Some(s)) => Some(s.parse().input(format!("{ENV_SEED}={s:?}"))?),
            (None, None) => file.seed,
        };
        let mode = match (args.mode, env(ENV_MODE)) {
            (Some(m), _) => m,
            (None, Some(m)) => m.parse::<ScaleMode>().map_err(|e| CliError::input(anyhow!(e)))?,
            (None, None) => file.mode.unwrap_or(ScaleMode::Categorical),
        };
        let backends = if !args.backend.is_empty() {
            args.backend.clone()
        } else if let Some(b) = env(ENV_BACKEND) {
            b.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        } else {
            file.backend.clone().unwrap_or_else(|| vec!["local".to_string()])
        };

        let mut percentile: BTreeMap<Variable, f64> = Variable::ALL.iter().map(|&v| (v, DEFAULT_PERCENTILE)).collect();
        let file_specs: Vec<String> = file.percentile.iter().map(|(k, v)| format!("{k}={v}")).collect();
        apply_percentiles(&mut percentile, &file_specs)?;
        if let Some(e) = env(ENV_PERCENTILE) {
            apply_percentiles(&mut percentile, &[e])?;
        }
        apply_percentiles(&mut percentile, &args.percentile)?;

        let mut remote = file.remote.clone().unwrap_or_default();
        remote.apply_env(env).map_err(CliError::input)?;

        let raster = match &file.raster {
            Some(r) => RasterSize::new(r.width, r.height).input("[raster]")?,
            None => RasterSize::DEFAULT,
        };

        let paths = file.paths.clone();
        existing(&paths.grids, "grids")?;
        existing(&paths.input, "input")?;
        existing(&paths.prompts, "prompts")?;
        let registry = match &paths.areas {
            Some(p) => AreaRegistry::load(p).input(format!("areas {}", p.display()))?,
            None => AreaRegistry::builtin(),
        };
        let codes = match &paths.weather_codes {
            Some(p) => WeatherCodeMap::load(p).input(format!("weather codes {}", p.display()))?,
            None => WeatherCodeMap::builtin(),
        };
        let scales = match &paths.scales {
            Some(p) => ScaleSet::load(p).input(format!("scales {}", p.display()))?,
            None => ScaleSet::standard(&codes),
        };

        Ok(PipelineConfig {
            out,
            seed,
            mode,
            backends,
            percentile,
            pairing: file.pairing.unwrap_or_default(),
            parallelism: file.parallelism.unwrap_or(4).max(1),
            prompt_profile: file.prompt_profile.clone().unwrap_or_else(|| "default".to_string()),
            paths,
            raster,
            remote,
            synopsis: file.synopsis.unwrap_or_default(),
            registry,
            scales,
            codes,
        })
    }

    pub fn from_process_env(args: &CommonArgs) -> CliResult<Self> {
        Self::resolve(args, &|k| std::env::var(k).ok())
    }

    pub fn generator(&self) -> Generator {
        let mut g = Generator::new(self.scales.clone(), self.codes.clone());
        g.synopsis = self.synopsis;
        g
    }

    pub fn percentile_for(&self, v: Variable) -> f64 {
        self.percentile.get(&v).copied().unwrap_or(DEFAULT_PERCENTILE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn resolve(args: CommonArgs, env: &[(&str, &str)]) -> CliResult<PipelineConfig> {
        let env: HashMap<String, String> = env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        PipelineConfig::resolve(&args, &move |k| env.get(k).cloned())
    }

    #[test]
    fn defaults() {
        let c = resolve(CommonArgs::default(), &[]).unwrap();
        assert_eq!(c.out, PathBuf::from("out"));
        assert_eq!(c.seed, None);
        assert_eq!(c.mode, ScaleMode::Categorical);
        assert_eq!(c.backends, vec!["local"]);
        assert!(c.percentile.values().all(|&p| p == 50.0));
        assert_eq!(c.raster, RasterSize::DEFAULT);
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(
            &path,
            "seed = 1\nmode = \"continuous\"\nout = \"o\"\nbackend = [\"remote\"]\n[percentile]\nwind_speed = 85\nvisibility = 5\n[remote]\nendpoint_url = \"http://file\"\n",
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path.clone()),
            ..Default::default()
        };
        let c = resolve(args.clone(), &[]).unwrap();
        assert_eq!((c.seed, c.mode), (Some(1), ScaleMode::Continuous));
        assert_eq!(c.out, dir.path().join("o"));
        assert_eq!(c.percentile[&Variable::WindSpeed], 85.0);
        assert_eq!(c.percentile[&Variable::Visibility], 5.0);
        assert_eq!(c.percentile[&Variable::Pressure], 50.0);
        assert_eq!(c.remote.endpoint_url, "http://file");

        let env = [
            (ENV_SEED, "2"),
            (ENV_MODE, "categorical"),
            (ENV_PERCENTILE, "wind_speed=90"),
            ("FF_ENDPOINT_URL", "http://env"),
            (ENV_BACKEND, "local,remote"),
        ];
        let c = resolve(args.clone(), &env).unwrap();
        assert_eq!((c.seed, c.mode), (Some(2), ScaleMode::Categorical));
        assert_eq!(c.percentile[&Variable::WindSpeed], 90.0);
        assert_eq!(c.remote.endpoint_url, "http://env");
        assert_eq!(c.backends, vec!["local", "remote"]);

        let flags = CommonArgs {
            seed: Some(3),
            mode: Some(ScaleMode::Continuous),
            percentile: vec!["wind_speed=95".into()],
            backend: vec!["local".into()],
            ..args
        };
        let c = resolve(flags, &env).unwrap();
        assert_eq!((c.seed, c.mode), (Some(3), ScaleMode::Continuous));
        assert_eq!(c.percentile[&Variable::WindSpeed], 95.0);
        assert_eq!(c.backends, vec!["local"]);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |p: &str| {
            resolve(
                CommonArgs {
                    percentile: vec![p.into()],
                    ..Default::default()
                },
                &[],
            )
        };
        assert_eq!(bad("101").unwrap_err().status, crate::Status::Input);
        assert!(bad("gusts=5").is_err());
        assert!(bad("wind_speed=x").is_err());
        let all = bad("85").unwrap();
        assert!(all.percentile.values().all(|&p| p == 85.0));
        let missing = CommonArgs {
            config: Some("/nonexistent/c.toml".into()),
            ..Default::default()
        };
        assert!(resolve(missing, &[]).is_err());
        assert!(resolve(CommonArgs::default(), &[(ENV_SEED, "x")]).is_err());
    }

    #[test]
    fn missing_paths_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "[paths]\ngrids = \"nowhere\"\n").unwrap();
        let err = resolve(
            CommonArgs {
                config: Some(path),
                ..Default::default()
            },
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("nowhere"));
        fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
        assert!(FileConfig::load(&dir.path().join("bad.toml")).is_err());
    }
}
