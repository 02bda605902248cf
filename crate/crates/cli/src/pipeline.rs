//! Loading gridded inputs and locating day directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use shipcast_core::grid::{crop_domain, load_grid_bundle, BBox, GridField, Variable};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext};

pub const FORECAST_FILE: &str = "forecast.txt";

/// Reads `dir/<variable>/` bundles, reduces ensembles at the configured
/// percentile and crops to the forecast domain. Missing `required` bundles
/// are input errors naming the attribute; missing `optional` ones are skipped.
pub fn load_fields(
    dir: &Path,
    cfg: &PipelineConfig,
    required: &[Variable],
    optional: &[Variable],
) -> CliResult<BTreeMap<Variable, GridField>> {
    let mut out = BTreeMap::new();
    for (&variable, needed) in required.iter().map(|v| (v, true)).chain(optional.iter().map(|v| (v, false))) {
        let bundle = dir.join(variable.as_str());
        if !bundle.is_dir() {
            if needed {
                return Err(CliError::input(anyhow!(
                    "missing grid bundle for {variable}: {}",
                    bundle.display()
                )));
            }
            continue;
        }
        let field = load_grid_bundle(&bundle)
            .and_then(|g| g.into_field(cfg.percentile_for(variable)))
            .and_then(|f| crop_domain(&f, &BBox::FORECAST_DOMAIN))
            .input(format!("grid bundle for {variable} at {}", bundle.display()))?;
        if field.variable != variable {
            return Err(CliError::input(anyhow!(
                "{} holds {}, expected {variable}",
                bundle.display(),
                field.variable
            )));
        }
        out.insert(variable, field);
    }
    Ok(out)
}

/// Day directories under `input`, sorted by name. A directory that itself
/// holds a forecast or bundles counts as a single day.
pub fn day_dirs(input: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let is_day = |p: &Path| p.join(FORECAST_FILE).is_file() || Variable::ALL.iter().any(|v| p.join(v.as_str()).is_dir());
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if !input.is_dir() {
        return Err(CliError::input(anyhow!("input directory {} does not exist", input.display())));
    }
    if is_day(input) {
        return Ok(vec![(name(input), input.to_path_buf())]);
    }
    let mut days: Vec<(String, PathBuf)> = fs::read_dir(input)
        .input(format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && is_day(p))
        .map(|p| (name(&p), p))
        .collect();
    days.sort();
    Ok(days)
}

/// File-system friendly form of an area name.
pub fn slug(name: &str) -> String {
    name.to_lowercase().replace(' ', "-")
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).input(format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).input(format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("German Bight"), "german-bight");
        assert_eq!(slug("FitzRoy"), "fitzroy");
    }

    #[test]
    fn day_discovery() {
        let dir = tempfile::tempdir().unwrap();
        assert!(day_dirs(&dir.path().join("x")).is_err());
        assert!(day_dirs(dir.path()).unwrap().is_empty());
        for d in ["2024-01-02", "2024-01-01"] {
            fs::create_dir_all(dir.path().join(d).join("pressure")).unwrap();
        }
        fs::create_dir_all(dir.path().join("misc")).unwrap();
        let days = day_dirs(dir.path()).unwrap();
        assert_eq!(days.iter().map(|d| d.0.as_str()).collect::<Vec<_>>(), ["2024-01-01", "2024-01-02"]);
        assert_eq!(day_dirs(&days[0].1).unwrap().len(), 1);
    }
}
