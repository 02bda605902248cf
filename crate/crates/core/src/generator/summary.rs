//! Plain-text data summary: per-area hourly series plus two pressure
//! snapshots. Used as text input for language-model backends and read back
//! by the local backend.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::{s, Array2, Axis};
use thiserror::Error;

use crate::area::AreaRegistry;
use crate::bulletin::Synopsis;
use crate::grid::{AreaSeries, GridField, Variable};

use super::synopsis::synopsis_between;
use super::{default_reducer, GenerateError, Generator, SynopsisConfig, AREA_VARIABLES};

const TITLE: &str = "DATA SUMMARY";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("data summary line {line}: {message}")]
pub struct SummaryError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaData {
    pub area: String,
    pub values: BTreeMap<Variable, Vec<f64>>,
}

impl AreaData {
    pub fn series(&self) -> Vec<AreaSeries> {
        self.values
            .iter()
            .map(|(&variable, values)| AreaSeries {
                area: self.area.clone(),
                variable,
                values: values.clone(),
                reducer: default_reducer(variable),
            })
            .collect()
    }
}

/// Pressure at the first and last timestep, `hours` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSnapshot {
    pub lats: Vec<f64>,
    pub lons: Vec<f64>,
    pub hours: f64,
    pub start: Array2<f64>,
    pub end: Array2<f64>,
}

impl PressureSnapshot {
    /// Takes every `stride`-th row and column of the field.
    pub fn from_field(field: &GridField, stride: usize) -> Self {
        let stride = stride.max(1) as isize;
        let nt = field.values.len_of(Axis(0));
        let hours = match (field.times.first(), field.times.last()) {
            (Some(a), Some(b)) if b > a => (*b - *a).num_minutes() as f64 / 60.0,
            _ => nt.saturating_sub(1) as f64,
        };
        let pick = |t: usize| {
            field
                .values
                .index_axis(Axis(0), t)
                .slice(s![..;stride, ..;stride])
                .to_owned()
        };
        PressureSnapshot {
            lats: field.lats.iter().step_by(stride as usize).copied().collect(),
            lons: field.lons.iter().step_by(stride as usize).copied().collect(),
            hours,
            start: pick(0),
            end: pick(nt - 1),
        }
    }

    pub fn synopsis(&self, config: &SynopsisConfig) -> Result<Synopsis, GenerateError> {
        synopsis_between(&self.lats, &self.lons, self.start.view(), self.end.view(), self.hours, config)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataSummary {
    pub issue: Option<String>,
    pub areas: Vec<AreaData>,
    pub pressure: Option<PressureSnapshot>,
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl DataSummary {
    /// Reduces every area-bulletin attribute over every registry area.
    pub fn from_fields(
        fields: &BTreeMap<Variable, GridField>,
        registry: &AreaRegistry,
        issue: Option<String>,
        pressure_stride: usize,
    ) -> Result<Self, GenerateError> {
        let generator = Generator::default();
        let areas = registry
            .iter()
            .map(|area| {
                let series = generator.area_series(fields, area)?;
                Ok(AreaData {
                    area: area.name.clone(),
                    values: series.into_iter().map(|s| (s.variable, s.values)).collect(),
                })
            })
            .collect::<Result<Vec<_>, GenerateError>>()?;
        Ok(DataSummary {
            issue,
            areas,
            pressure: fields
                .get(&Variable::Pressure)
                .map(|f| PressureSnapshot::from_field(f, pressure_stride)),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(TITLE);
        out.push('\n');
        if let Some(issue) = &self.issue {
            let _ = writeln!(out, "issue: {issue}");
        }
        for a in &self.areas {
            let _ = writeln!(out, "area: {}", a.area);
            for (v, values) in &a.values {
                let _ = writeln!(out, "{} {}: {}", v.as_str(), v.units(), join(values.iter().copied()));
            }
        }
        if let Some(p) = &self.pressure {
            let _ = writeln!(out, "pressure lats: {}", join(p.lats.iter().copied()));
            let _ = writeln!(out, "pressure lons: {}", join(p.lons.iter().copied()));
            let _ = writeln!(out, "pressure hours: {}", p.hours);
            let _ = writeln!(out, "pressure start hPa: {}", join(p.start.iter().copied()));
            let _ = writeln!(out, "pressure end hPa: {}", join(p.end.iter().copied()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SummaryError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == TITLE => {}
            _ => {
                return Err(SummaryError {
                    line: 1,
                    message: format!("expected {TITLE:?} header"),
                })
            }
        }
        let mut out = DataSummary::default();
        let mut pressure: BTreeMap<&str, (usize, Vec<f64>)> = BTreeMap::new();
        for (i, line) in lines {
            let n = i + 1;
            let err = |message: String| SummaryError { line: n, message };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| err("expected 'key: value'".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let numbers = || {
                value
                    .split_whitespace()
                    .map(|w| w.parse::<f64>().map_err(|_| err(format!("bad number {w:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            };
            if key == "issue" {
                out.issue = Some(value.to_string());
            } else if key == "area" {
                out.areas.push(AreaData {
                    area: value.to_string(),
                    values: BTreeMap::new(),
                });
            } else if let Some(rest) = key.strip_prefix("pressure ") {
                let slot = match rest {
                    "lats" | "lons" | "hours" => rest,
                    "start hPa" => "start",
                    "end hPa" => "end",
                    _ => return Err(err(format!("unknown pressure key {rest:?}"))),
                };
                pressure.insert(slot, (n, numbers()?));
            } else {
                let name = key.split_whitespace().next().unwrap_or_default();
                let variable = name
                    .parse::<Variable>()
                    .ok()
                    .filter(|v| AREA_VARIABLES.contains(v))
                    .ok_or_else(|| err(format!("unknown key {key:?}")))?;
                let area = out
                    .areas
                    .last_mut()
                    .ok_or_else(|| err("series before any 'area:' line".into()))?;
                area.values.insert(variable, numbers()?);
            }
        }
        if !pressure.is_empty() {
            let get = |k: &str| {
                pressure.get(k).cloned().ok_or_else(|| SummaryError {
                    line: 0,
                    message: format!("pressure block lacks {k:?}"),
                })
            };
            let (_, lats) = get("lats")?;
            let (_, lons) = get("lons")?;
            let (_, hours) = get("hours")?;
            let grid = |k: &str| {
                let (line, v) = get(k)?;
                Array2::from_shape_vec((lats.len(), lons.len()), v).map_err(|_| SummaryError {
                    line,
                    message: format!("pressure {k} does not match {}x{} grid", lats.len(), lons.len()),
                })
            };
            out.pressure = Some(PressureSnapshot {
                start: grid("start")?,
                end: grid("end")?,
                hours: hours.first().copied().unwrap_or(23.0),
                lats,
                lons,
            });
        }
        Ok(out)
    }
}
