//! Gridded forecast fields: bundle I/O, ensemble percentile reduction,
//! domain cropping, sea-area masking and per-area hourly series.
//!
//! Values are stored time-major (`time × lat × lon`, or
//! `member × time × lat × lon` for ensembles). Missing data is NaN and
//! every reducer skips it.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::area::SeaArea;

/// Number of hourly timesteps in every field.
pub const HOURS: usize = 24;

pub const HEADER_FILE: &str = "header.json";
pub const VALUES_FILE: &str = "values.f64le";

#[derive(Debug, Error)]
pub enum GridError {
    #[error("malformed grid bundle: {0}")]
    BundleMalformed(String),
    #[error("payload holds {actual} bytes, header implies {expected}")]
    PayloadSizeMismatch { expected: usize, actual: usize },
    #[error("invalid time axis: {0}")]
    TimeAxisInvalid(String),
    #[error("values shape {actual:?} does not match axes {expected:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("percentile {0} outside [0, 100]")]
    PercentileOutOfRange(f64),
    #[error("crop box does not intersect the grid")]
    EmptyDomain,
    #[error("no cell centre of the grid lies inside sea area {0}")]
    EmptyMask(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("sea-area registry: {0}")]
    Registry(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The gridded attributes the pipeline knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    WindSpeed,
    WindDirection,
    WaveHeight,
    Visibility,
    WeatherCode,
    Pressure,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::WindSpeed,
        Variable::WindDirection,
        Variable::WaveHeight,
        Variable::Visibility,
        Variable::WeatherCode,
        Variable::Pressure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::WindSpeed => "wind_speed",
            Variable::WindDirection => "wind_direction",
            Variable::WaveHeight => "wave_height",
            Variable::Visibility => "visibility",
            Variable::WeatherCode => "weather_code",
            Variable::Pressure => "pressure",
        }
    }

    /// Units the classifiers expect.
    pub fn units(self) -> &'static str {
        match self {
            Variable::WindSpeed => "kn",
            Variable::WindDirection => "deg",
            Variable::WaveHeight => "m",
            Variable::Visibility => "m",
            Variable::WeatherCode => "code",
            Variable::Pressure => "hPa",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| GridError::UnknownVariable(s.to_string()))
    }
}

/// Latitude/longitude bounds, inclusive on every side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BBox {
    /// 30°N–70°N, 20°W–10°E: the North-East Atlantic forecast domain.
    pub const FORECAST_DOMAIN: BBox = BBox {
        lat_min: 30.0,
        lat_max: 70.0,
        lon_min: -20.0,
        lon_max: 10.0,
    };

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

/// One attribute on a regular lat/lon grid over 24 hourly timesteps.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub variable: Variable,
    pub units: String,
    pub lats: Vec<f64>,
    pub lons: Vec<f64>,
    pub times: Vec<DateTime<Utc>>,
    /// `time × lat × lon`
    pub values: Array3<f64>,
    pub percentile: Option<f64>,
}

/// Ensemble counterpart of [`GridField`]; `values` is `member × time × lat × lon`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleField {
    pub variable: Variable,
    pub units: String,
    pub lats: Vec<f64>,
    pub lons: Vec<f64>,
    pub times: Vec<DateTime<Utc>>,
    pub values: Array4<f64>,
}

/// What a bundle directory holds.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedGrid {
    Deterministic(GridField),
    Ensemble(EnsembleField),
}

impl LoadedGrid {
    /// Collapse to a deterministic field, reducing ensembles at `percentile`.
    pub fn into_field(self, percentile: f64) -> Result<GridField, GridError> {
        match self {
            LoadedGrid::Deterministic(f) => Ok(f),
            LoadedGrid::Ensemble(e) => reduce_percentile(&e, percentile),
        }
    }
}

fn check_time_axis(times: &[DateTime<Utc>]) -> Result<(), GridError> {
    if times.len() != HOURS {
        return Err(GridError::TimeAxisInvalid(format!(
            "expected {HOURS} timesteps, found {}",
            times.len()
        )));
    }
    for w in times.windows(2) {
        if w[1] - w[0] != Duration::hours(1) {
            return Err(GridError::TimeAxisInvalid(format!(
                "step {} -> {} is not one hour",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn check_ascending(name: &str, axis: &[f64]) -> Result<(), GridError> {
    if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GridError::BundleMalformed(format!(
            "{name} axis must be non-empty and strictly ascending"
        )));
    }
    Ok(())
}

impl GridField {
    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), GridError> {
        check_time_axis(&self.times)?;
        check_ascending("lat", &self.lats)?;
        check_ascending("lon", &self.lons)?;
        let expected = vec![self.times.len(), self.lats.len(), self.lons.len()];
        if self.values.shape() != expected.as_slice() {
            return Err(GridError::ShapeMismatch {
                expected,
                actual: self.values.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        let s = self.values.dim();
        (s.0, s.1, s.2)
    }

    /// Grid spacing assuming a regular grid (1.0 for single-point axes).
    pub fn spacing(&self) -> (f64, f64) {
        fn step(axis: &[f64]) -> f64 {
            if axis.len() > 1 {
                (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
            } else {
                1.0
            }
        }
        (step(&self.lats), step(&self.lons))
    }

    /// Geographic extent covered by the cells (centres ± half a cell).
    pub fn extent(&self) -> BBox {
        let (dlat, dlon) = self.spacing();
        BBox {
            lat_min: self.lats[0] - dlat / 2.0,
            lat_max: self.lats[self.lats.len() - 1] + dlat / 2.0,
            lon_min: self.lons[0] - dlon / 2.0,
            lon_max: self.lons[self.lons.len() - 1] + dlon / 2.0,
        }
    }

    /// Indices `(lat, lon)` of the cells whose centre falls inside `area`.
    pub fn cells_in(&self, area: &SeaArea) -> Vec<(usize, usize)> {
        if area.signed_area() == 0.0 {
            return Vec::new();
        }
        let mut cells = Vec::new();
        for (i, &lat) in self.lats.iter().enumerate() {
            for (j, &lon) in self.lons.iter().enumerate() {
                if area.contains(lat, lon) {
                    cells.push((i, j));
                }
            }
        }
        cells
    }
}

impl EnsembleField {
    pub fn validate(&self) -> Result<(), GridError> {
        check_time_axis(&self.times)?;
        check_ascending("lat", &self.lats)?;
        check_ascending("lon", &self.lons)?;
        let members = self.values.shape()[0];
        if members == 0 {
            return Err(GridError::BundleMalformed("ensemble has no members".into()));
        }
        let expected = vec![members, self.times.len(), self.lats.len(), self.lons.len()];
        if self.values.shape() != expected.as_slice() {
            return Err(GridError::ShapeMismatch {
                expected,
                actual: self.values.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn members(&self) -> usize {
        self.values.shape()[0]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BundleHeader {
    variable: Variable,
    units: String,
    percentile: Option<f64>,
    members: usize,
    lats: Vec<f64>,
    lons: Vec<f64>,
    times: Vec<DateTime<Utc>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GridError + '_ {
    move |source| GridError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Read a grid-bundle directory (`header.json` + `values.f64le`).
///
/// A header declaring one member yields a [`LoadedGrid::Deterministic`]
/// field; more than one yields an ensemble.
pub fn load_grid_bundle(dir: &Path) -> Result<LoadedGrid, GridError> {
    let header_path = dir.join(HEADER_FILE);
    let header_text = fs::read_to_string(&header_path).map_err(|e| {
        GridError::BundleMalformed(format!("cannot read {}: {e}", header_path.display()))
    })?;
    let header: BundleHeader = serde_json::from_str(&header_text)
        .map_err(|e| GridError::BundleMalformed(format!("{}: {e}", header_path.display())))?;
    if header.members == 0 {
        return Err(GridError::BundleMalformed("members must be >= 1".into()));
    }
    check_time_axis(&header.times)?;
    check_ascending("lat", &header.lats)?;
    check_ascending("lon", &header.lons)?;

    let values_path = dir.join(VALUES_FILE);
    let bytes = fs::read(&values_path).map_err(io_err(&values_path))?;
    let count = header.members * header.times.len() * header.lats.len() * header.lons.len();
    if bytes.len() != count * 8 {
        return Err(GridError::PayloadSizeMismatch {
            expected: count * 8,
            actual: bytes.len(),
        });
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();

    let (nt, ny, nx) = (header.times.len(), header.lats.len(), header.lons.len());
    if header.members == 1 {
        let values = Array3::from_shape_vec((nt, ny, nx), data)
            .map_err(|e| GridError::BundleMalformed(e.to_string()))?;
        let field = GridField {
            variable: header.variable,
            units: header.units,
            lats: header.lats,
            lons: header.lons,
            times: header.times,
            values,
            percentile: header.percentile,
        };
        Ok(LoadedGrid::Deterministic(field))
    } else {
        let values = Array4::from_shape_vec((header.members, nt, ny, nx), data)
            .map_err(|e| GridError::BundleMalformed(e.to_string()))?;
        Ok(LoadedGrid::Ensemble(EnsembleField {
            variable: header.variable,
            units: header.units,
            lats: header.lats,
            lons: header.lons,
            times: header.times,
            values,
        }))
    }
}

fn write_bundle(dir: &Path, header: &BundleHeader, values: impl Iterator<Item = f64>) -> Result<(), GridError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let header_path = dir.join(HEADER_FILE);
    let text = serde_json::to_string_pretty(header).expect("header serializes");
    fs::write(&header_path, text).map_err(io_err(&header_path))?;
    let mut bytes = Vec::new();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let values_path = dir.join(VALUES_FILE);
    fs::write(&values_path, bytes).map_err(io_err(&values_path))
}

/// Write a deterministic field as a one-member bundle.
pub fn write_grid_bundle(dir: &Path, field: &GridField) -> Result<(), GridError> {
    field.validate()?;
    let header = BundleHeader {
        variable: field.variable,
        units: field.units.clone(),
        percentile: field.percentile,
        members: 1,
        lats: field.lats.clone(),
        lons: field.lons.clone(),
        times: field.times.clone(),
    };
    write_bundle(dir, &header, field.values.iter().copied())
}

pub fn write_ensemble_bundle(dir: &Path, field: &EnsembleField) -> Result<(), GridError> {
    field.validate()?;
    let header = BundleHeader {
        variable: field.variable,
        units: field.units.clone(),
        percentile: None,
        members: field.members(),
        lats: field.lats.clone(),
        lons: field.lons.clone(),
        times: field.times.clone(),
    };
    write_bundle(dir, &header, field.values.iter().copied())
}

/// Percentile of `values` with linear interpolation between closest ranks
/// (rank `(n - 1) * p / 100`, zero based). NaNs are ignored; an all-NaN
/// input yields NaN.
pub fn percentile_of(values: &[f64], p: f64) -> f64 {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.sort_by(f64::total_cmp);
    let rank = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Collapse the member axis to the `p`-th percentile, cell by cell.
pub fn reduce_percentile(field: &EnsembleField, p: f64) -> Result<GridField, GridError> {
    if !(0.0..=100.0).contains(&p) {
        return Err(GridError::PercentileOutOfRange(p));
    }
    field.validate()?;
    let (_, nt, ny, nx) = field.values.dim();
    let mut out = Array3::<f64>::zeros((nt, ny, nx));
    let mut members = Vec::with_capacity(field.members());
    for t in 0..nt {
        for y in 0..ny {
            for x in 0..nx {
                members.clear();
                members.extend((0..field.members()).map(|m| field.values[[m, t, y, x]]));
                out[[t, y, x]] = percentile_of(&members, p);
            }
        }
    }
    Ok(GridField {
        variable: field.variable,
        units: field.units.clone(),
        lats: field.lats.clone(),
        lons: field.lons.clone(),
        times: field.times.clone(),
        values: out,
        percentile: Some(p),
    })
}

fn index_range(axis: &[f64], lo: f64, hi: f64) -> Option<(usize, usize)> {
    let start = axis.iter().position(|&v| v >= lo)?;
    let end = axis.iter().rposition(|&v| v <= hi)?;
    (start <= end).then_some((start, end + 1))
}

/// Keep exactly the grid points inside `bbox` (bounds inclusive).
pub fn crop_domain(field: &GridField, bbox: &BBox) -> Result<GridField, GridError> {
    let (y0, y1) = index_range(&field.lats, bbox.lat_min, bbox.lat_max).ok_or(GridError::EmptyDomain)?;
    let (x0, x1) = index_range(&field.lons, bbox.lon_min, bbox.lon_max).ok_or(GridError::EmptyDomain)?;
    let values = field
        .values
        .slice(ndarray::s![.., y0..y1, x0..x1])
        .to_owned();
    Ok(GridField {
        lats: field.lats[y0..y1].to_vec(),
        lons: field.lons[x0..x1].to_vec(),
        values,
        ..field.clone()
    })
}

/// Set every cell whose centre lies outside `area` to NaN.
pub fn mask_sea_area(field: &GridField, area: &SeaArea) -> Result<GridField, GridError> {
    let cells = field.cells_in(area);
    if cells.is_empty() {
        return Err(GridError::EmptyMask(area.name.clone()));
    }
    let (_, ny, nx) = field.values.dim();
    let mut keep = vec![false; ny * nx];
    for (i, j) in cells {
        keep[i * nx + j] = true;
    }
    let mut out = field.clone();
    for mut slab in out.values.outer_iter_mut() {
        for ((i, j), v) in slab.indexed_iter_mut() {
            if !keep[i * nx + j] {
                *v = f64::NAN;
            }
        }
    }
    Ok(out)
}

/// How the cells of an area collapse to one value per hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reducer {
    ArealMean,
    ArealMax,
    /// Mean of unit vectors, for directions in degrees.
    CircularMean,
}

impl Reducer {
    fn reduce(self, values: &[f64]) -> f64 {
        let finite: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        if finite.is_empty() {
            return f64::NAN;
        }
        match self {
            Reducer::ArealMean => finite.iter().sum::<f64>() / finite.len() as f64,
            Reducer::ArealMax => finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Reducer::CircularMean => {
                let (s, c) = finite.iter().fold((0.0, 0.0), |(s, c), d| {
                    let r = d.to_radians();
                    (s + r.sin(), c + r.cos())
                });
                if s.hypot(c) < 1e-9 * finite.len() as f64 {
                    // No resultant direction; fall back to the first sample.
                    return finite[0];
                }
                let deg = s.atan2(c).to_degrees();
                if deg < 0.0 {
                    deg + 360.0
                } else {
                    deg
                }
            }
        }
    }
}

/// 24 hourly values summarising one attribute over one sea area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaSeries {
    pub area: String,
    pub variable: Variable,
    pub values: Vec<f64>,
    pub reducer: Reducer,
}

pub fn area_series(field: &GridField, area: &SeaArea, reducer: Reducer) -> Result<AreaSeries, GridError> {
    let cells = field.cells_in(area);
    if cells.is_empty() {
        return Err(GridError::EmptyMask(area.name.clone()));
    }
    let mut buf = Vec::with_capacity(cells.len());
    let values = field
        .values
        .outer_iter()
        .map(|slab| {
            buf.clear();
            buf.extend(cells.iter().map(|&(i, j)| slab[[i, j]]));
            reducer.reduce(&buf)
        })
        .collect();
    Ok(AreaSeries {
        area: area.name.clone(),
        variable: field.variable,
        values,
        reducer,
    })
}

/// Hourly timestamps starting at `start`.
pub fn hourly_axis(start: DateTime<Utc>) -> Vec<DateTime<Utc>> {
    (0..HOURS as i64).map(|h| start + Duration::hours(h)).collect()
}

/// Evenly spaced axis `start, start + step, …` with `n` points.
pub fn regular_axis(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2025, 1, 15, 0, 0, 0).unwrap()
    }

    fn field(lats: Vec<f64>, lons: Vec<f64>, f: impl Fn(usize, usize, usize) -> f64) -> GridField {
        let values = Array3::from_shape_fn((HOURS, lats.len(), lons.len()), |(t, y, x)| f(t, y, x));
        GridField {
            variable: Variable::WaveHeight,
            units: "m".into(),
            lats,
            lons,
            times: hourly_axis(t0()),
            values,
            percentile: None,
        }
    }

    fn ensemble(members: usize, ny: usize, nx: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> EnsembleField {
        EnsembleField {
            variable: Variable::WindSpeed,
            units: "kn".into(),
            lats: regular_axis(50.0, 1.0, ny),
            lons: regular_axis(0.0, 1.0, nx),
            times: hourly_axis(t0()),
            values: Array4::from_shape_fn((members, HOURS, ny, nx), |(m, t, y, x)| f(m, t, y, x)),
        }
    }

    #[test]
    fn bundle_round_trip_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let f = field(regular_axis(30.0, 1.0, 40), regular_axis(-20.0, 1.0, 30), |t, y, x| {
            if (t + y + x) % 17 == 0 {
                f64::NAN
            } else {
                (t * 100 + y * 10 + x) as f64
            }
        });
        write_grid_bundle(dir.path(), &f).unwrap();
        match load_grid_bundle(dir.path()).unwrap() {
            LoadedGrid::Deterministic(g) => {
                assert_eq!(g.shape(), (24, 40, 30));
                assert_eq!(g.lats, f.lats);
                for (a, b) in g.values.iter().zip(f.values.iter()) {
                    assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
                }
            }
            other => panic!("expected deterministic field, got {other:?}"),
        }
    }

    #[test]
    fn bundle_with_members_loads_as_ensemble() {
        let dir = tempfile::tempdir().unwrap();
        let e = ensemble(18, 3, 4, |m, _, _, _| m as f64);
        write_ensemble_bundle(dir.path(), &e).unwrap();
        match load_grid_bundle(dir.path()).unwrap() {
            LoadedGrid::Ensemble(g) => assert_eq!(g.members(), 18),
            other => panic!("expected ensemble, got {other:?}"),
        }
    }

    #[test]
    fn short_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = field(vec![50.0, 51.0], vec![0.0, 1.0], |_, _, _| 1.0);
        write_grid_bundle(dir.path(), &f).unwrap();
        let path = dir.path().join(VALUES_FILE);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(
            load_grid_bundle(dir.path()),
            Err(GridError::PayloadSizeMismatch { .. })
        ));
    }

    #[test]
    fn missing_header_and_bad_time_axis() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_grid_bundle(dir.path()), Err(GridError::BundleMalformed(_))));

        let mut f = field(vec![50.0], vec![0.0], |_, _, _| 1.0);
        write_grid_bundle(dir.path(), &f).unwrap();
        let header_path = dir.path().join(HEADER_FILE);
        let mut header: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&header_path).unwrap()).unwrap();
        header["times"].as_array_mut().unwrap().pop();
        fs::write(&header_path, header.to_string()).unwrap();
        assert!(matches!(load_grid_bundle(dir.path()), Err(GridError::TimeAxisInvalid(_))));

        f.times[5] = f.times[4];
        assert!(matches!(f.validate(), Err(GridError::TimeAxisInvalid(_))));
    }

    #[test]
    fn percentile_worked_examples() {
        assert_eq!(percentile_of(&[1.0, 2.0, 3.0], 50.0), 2.0);
        assert_eq!(percentile_of(&[1.0, 3.0], 50.0), 2.0);
        // rank 0.85 * 3 = 2.55 between 30 and 40
        assert!((percentile_of(&[10.0, 20.0, 30.0, 40.0], 85.0) - 35.5).abs() < 1e-12);
        assert!(percentile_of(&[f64::NAN, f64::NAN], 50.0).is_nan());
        assert_eq!(percentile_of(&[f64::NAN, 4.0], 50.0), 4.0);
    }

    #[test]
    fn reduce_single_member_is_identity() {
        let e = ensemble(1, 2, 3, |_, t, y, x| (t + y * 7 + x * 3) as f64 * 0.1);
        let r = reduce_percentile(&e, 50.0).unwrap();
        assert_eq!(r.percentile, Some(50.0));
        for ((t, y, x), v) in r.values.indexed_iter() {
            assert_eq!(*v, e.values[[0, t, y, x]]);
        }
        assert!(matches!(
            reduce_percentile(&e, 101.0),
            Err(GridError::PercentileOutOfRange(_))
        ));
    }

    #[test]
    fn crop_to_forecast_domain() {
        let lats = regular_axis(-90.0, 0.25, 721);
        let lons = regular_axis(-180.0, 0.25, 1440);
        let mut g = field(lats, lons, |_, _, _| 0.0);
        g.values = Array3::zeros((HOURS, 721, 1440));
        let c = crop_domain(&g, &BBox::FORECAST_DOMAIN).unwrap();
        assert_eq!(c.lats.first(), Some(&30.0));
        assert_eq!(c.lats.last(), Some(&70.0));
        assert_eq!(c.lons.first(), Some(&-20.0));
        assert_eq!(c.lons.last(), Some(&10.0));
        assert_eq!(c.shape(), (24, 161, 121));
        let again = crop_domain(&c, &BBox::FORECAST_DOMAIN).unwrap();
        assert_eq!(again, c);

        let outside = BBox { lat_min: -80.0, lat_max: -70.0, lon_min: 100.0, lon_max: 110.0 };
        let small = field(vec![50.0, 51.0], vec![0.0, 1.0], |_, _, _| 0.0);
        assert!(matches!(crop_domain(&small, &outside), Err(GridError::EmptyDomain)));
    }

    #[test]
    fn masking() {
        let g = field(regular_axis(50.0, 1.0, 5), regular_axis(0.0, 1.0, 5), |t, y, x| (t + y + x) as f64);
        let whole = SeaArea::rectangle("All", 0, (40.0, 60.0), (-5.0, 10.0));
        assert_eq!(mask_sea_area(&g, &whole).unwrap(), g);

        let one = SeaArea::rectangle("One", 1, (51.5, 52.5), (2.5, 3.5));
        let m = mask_sea_area(&g, &one).unwrap();
        for slab in m.values.outer_iter() {
            assert_eq!(slab.iter().filter(|v| !v.is_nan()).count(), 1);
            assert!(!slab[[2, 3]].is_nan());
        }
        let m2 = mask_sea_area(&m, &one).unwrap();
        assert!(m2.values.iter().zip(m.values.iter()).all(|(a, b)| a == b || (a.is_nan() && b.is_nan())));

        let flat = SeaArea::new("Flat", 2, vec![[51.0, 0.0], [52.0, 0.0], [53.0, 0.0], [51.0, 0.0]]);
        assert!(matches!(mask_sea_area(&g, &flat), Err(GridError::EmptyMask(_))));
    }

    #[test]
    fn area_series_reducers() {
        let g = field(regular_axis(50.0, 1.0, 3), regular_axis(0.0, 1.0, 3), |_, _, _| 7.0);
        let a = SeaArea::rectangle("A", 0, (49.0, 53.0), (-1.0, 3.0));
        for r in [Reducer::ArealMean, Reducer::ArealMax] {
            let s = area_series(&g, &a, r).unwrap();
            assert_eq!(s.values, vec![7.0; 24]);
            assert_eq!(s.reducer, r);
        }

        let g = field(vec![50.0], vec![0.0, 1.0], |t, _, x| {
            if t == 5 {
                f64::NAN
            } else if x == 0 {
                4.0
            } else {
                8.0
            }
        });
        let a = SeaArea::rectangle("Two", 0, (49.5, 50.5), (-0.5, 1.5));
        let mean = area_series(&g, &a, Reducer::ArealMean).unwrap();
        let max = area_series(&g, &a, Reducer::ArealMax).unwrap();
        assert_eq!(mean.values[0], 6.0);
        assert_eq!(max.values[0], 8.0);
        assert!(mean.values[5].is_nan() && max.values[5].is_nan());
        assert_eq!(mean.values.iter().filter(|v| v.is_nan()).count(), 1);
    }

    #[test]
    fn circular_mean_wraps_north() {
        assert!((Reducer::CircularMean.reduce(&[350.0, 10.0]) - 0.0).abs() < 1e-9
            || (Reducer::CircularMean.reduce(&[350.0, 10.0]) - 360.0).abs() < 1e-9);
        assert!((Reducer::CircularMean.reduce(&[80.0, 100.0]) - 90.0).abs() < 1e-9);
    }
}
