//! Pressure centres, their tendency and motion, from a pressure field.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::bulletin::{Motion, PressureSystem, Speed, Synopsis, SystemKind, Tendency};
use crate::categorical::compass_8;
use crate::grid::GridField;
use crate::overlay::LabelGrid;

use super::GenerateError;

const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynopsisConfig {
    /// Apply a 3x3 mean filter before looking for extrema.
    pub smooth: bool,
    /// Pressure change that counts as deepening or filling.
    pub tendency_threshold_hpa: f64,
    /// Displacement below which a centre is stationary.
    pub stationary_km: f64,
    pub max_systems: usize,
    pub grid: LabelGridConfig,
}

/// Serializable mirror of [`LabelGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelGridConfig {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub step_deg: f64,
}

impl From<LabelGridConfig> for LabelGrid {
    fn from(c: LabelGridConfig) -> Self {
        LabelGrid {
            bbox: crate::grid::BBox {
                lat_min: c.lat_min,
                lat_max: c.lat_max,
                lon_min: c.lon_min,
                lon_max: c.lon_max,
            },
            step_deg: c.step_deg,
        }
    }
}

impl Default for SynopsisConfig {
    fn default() -> Self {
        let g = LabelGrid::STANDARD;
        SynopsisConfig {
            smooth: true,
            tendency_threshold_hpa: 2.0,
            stationary_km: 50.0,
            max_systems: 4,
            grid: LabelGridConfig {
                lat_min: g.bbox.lat_min,
                lat_max: g.bbox.lat_max,
                lon_min: g.bbox.lon_min,
                lon_max: g.bbox.lon_max,
                step_deg: g.step_deg,
            },
        }
    }
}

/// 3x3 mean with edge cells averaging only the neighbours they have.
pub fn smooth3(field: ArrayView2<f64>) -> Array2<f64> {
    let (ny, nx) = field.dim();
    Array2::from_shape_fn((ny, nx), |(y, x)| {
        let mut sum = 0.0;
        let mut n = 0.0;
        for yy in y.saturating_sub(1)..(y + 2).min(ny) {
            for xx in x.saturating_sub(1)..(x + 2).min(nx) {
                sum += field[[yy, xx]];
                n += 1.0;
            }
        }
        sum / n
    })
}

fn neighbours(y: usize, x: usize, ny: usize, nx: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1i64..=1)
        .flat_map(move |dy| (-1i64..=1).map(move |dx| (dy, dx)))
        .filter(|&d| d != (0, 0))
        .map(move |(dy, dx)| (y as i64 + dy, x as i64 + dx))
        .filter(move |&(yy, xx)| yy >= 0 && xx >= 0 && (yy as usize) < ny && (xx as usize) < nx)
        .map(|(yy, xx)| (yy as usize, xx as usize))
}

/// Interior cells strictly below (lows) or above (highs) all 8 neighbours.
pub fn find_extrema(field: ArrayView2<f64>) -> Vec<(SystemKind, usize, usize)> {
    let (ny, nx) = field.dim();
    let mut out = Vec::new();
    for y in 1..ny.saturating_sub(1) {
        for x in 1..nx.saturating_sub(1) {
            let v = field[[y, x]];
            if !v.is_finite() {
                continue;
            }
            let ns: Vec<f64> = neighbours(y, x, ny, nx).map(|(a, b)| field[[a, b]]).collect();
            if ns.iter().all(|&n| v < n) {
                out.push((SystemKind::Low, y, x));
            } else if ns.iter().all(|&n| v > n) {
                out.push((SystemKind::High, y, x));
            }
        }
    }
    out
}

/// Follows the steepest descent (lows) or ascent (highs) to a local extremum.
fn climb(field: ArrayView2<f64>, kind: SystemKind, mut y: usize, mut x: usize) -> (usize, usize) {
    let (ny, nx) = field.dim();
    let better = |a: f64, b: f64| match kind {
        SystemKind::Low => a < b,
        SystemKind::High => a > b,
    };
    loop {
        let mut best = (y, x);
        for (a, b) in neighbours(y, x, ny, nx) {
            if better(field[[a, b]], field[[best.0, best.1]]) {
                best = (a, b);
            }
        }
        if best == (y, x) {
            return best;
        }
        (y, x) = best;
    }
}

pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Initial great-circle bearing from `a` to `b`, degrees clockwise from north.
pub fn bearing_deg(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lat2) = (a.0.to_radians(), b.0.to_radians());
    let dlon = (b.1 - a.1).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    y.atan2(x).to_degrees().rem_euclid(360.0)
}

/// Synopsis from the first and last pressure snapshots `hours` apart.
pub fn synopsis_between(
    lats: &[f64],
    lons: &[f64],
    start: ArrayView2<f64>,
    end: ArrayView2<f64>,
    hours: f64,
    config: &SynopsisConfig,
) -> Result<Synopsis, GenerateError> {
    let grid: LabelGrid = config.grid.into();
    let (s0, s1) = if config.smooth {
        (smooth3(start), smooth3(end))
    } else {
        (start.to_owned(), end.to_owned())
    };
    let finite: Vec<f64> = s0.iter().copied().filter(|v| v.is_finite()).collect();
    let mean = finite.iter().sum::<f64>() / finite.len().max(1) as f64;

    let mut centres = find_extrema(s0.view());
    centres.sort_by(|a, b| {
        let da = (s0[[a.1, a.2]] - mean).abs();
        let db = (s0[[b.1, b.2]] - mean).abs();
        db.total_cmp(&da).then((a.1, a.2).cmp(&(b.1, b.2)))
    });

    let mut systems = Vec::new();
    for (kind, y, x) in centres {
        if systems.len() == config.max_systems {
            break;
        }
        let from = (lats[y], lons[x]);
        let Some(position) = grid.label_at(from.0, from.1) else {
            continue;
        };
        let (y1, x1) = climb(s1.view(), kind, y, x);
        let to = (lats[y1], lons[x1]);
        let p0 = start[[y, x]];
        let p1 = end[[y1, x1]];
        let distance = haversine_km(from, to);
        let motion = if distance < config.stationary_km {
            None
        } else {
            Some(Motion {
                toward: compass_8(bearing_deg(from, to))?,
                speed: Speed::from_kmh(distance / hours.max(1.0)),
            })
        };
        systems.push(PressureSystem {
            kind,
            position,
            pressure_hpa: p0.round() as i32,
            tendency: Tendency::from_change(kind, p1 - p0, config.tendency_threshold_hpa),
            motion,
        });
    }
    Ok(Synopsis { systems })
}

/// Synopsis from a pressure field's first and last timesteps. A field with no
/// extrema yields an empty synopsis ("nothing significant").
pub fn generate_synopsis(pressure: &GridField, config: &SynopsisConfig) -> Result<Synopsis, GenerateError> {
    let nt = pressure.values.len_of(Axis(0));
    if nt == 0 {
        return Ok(Synopsis::default());
    }
    let hours = match (pressure.times.first(), pressure.times.last()) {
        (Some(a), Some(b)) if b > a => (*b - *a).num_minutes() as f64 / 60.0,
        _ => (nt - 1) as f64,
    };
    synopsis_between(
        &pressure.lats,
        &pressure.lons,
        pressure.values.index_axis(Axis(0), 0),
        pressure.values.index_axis(Axis(0), nt - 1),
        hours,
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::categorical::Compass;
    use crate::grid::{hourly_axis, regular_axis, Variable};
    use chrono::{TimeZone, Utc};
    use ndarray::Array3;

    fn gaussian_low(
        lats: &[f64],
        lons: &[f64],
        centre: impl Fn(usize) -> (f64, f64),
        depth: impl Fn(usize) -> f64,
    ) -> GridField {
        let values = Array3::from_shape_fn((24, lats.len(), lons.len()), |(t, y, x)| {
            let (clat, clon) = centre(t);
            let d2 = (lats[y] - clat).powi(2) + (lons[x] - clon).powi(2);
            1013.0 - depth(t) * (-d2 / 50.0).exp()
        });
        GridField {
            variable: Variable::Pressure,
            units: "hPa".into(),
            lats: lats.to_vec(),
            lons: lons.to_vec(),
            times: hourly_axis(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()),
            values,
            percentile: None,
        }
    }

    #[test]
    fn stationary_symmetric_low() {
        let lats = regular_axis(30.0, 1.0, 41);
        let lons = regular_axis(-20.0, 1.0, 31);
        let f = gaussian_low(&lats, &lons, |_| (55.0, -10.0), |_| 25.0);
        let s = generate_synopsis(&f, &SynopsisConfig::default()).unwrap();
        assert_eq!(s.systems.len(), 1);
        let p = &s.systems[0];
        assert_eq!(p.kind, SystemKind::Low);
        assert_eq!(p.tendency, Tendency::Steady);
        assert_eq!(p.motion, None);
        assert_eq!(p.position, "C4");
        assert_eq!(p.pressure_hpa, 988);
    }

    #[test]
    fn deepening_low_moving_east() {
        let lats = regular_axis(30.0, 1.0, 41);
        let lons = regular_axis(-20.0, 1.0, 31);
        let f = gaussian_low(
            &lats,
            &lons,
            |t| (55.0, -15.0 + 10.0 * t as f64 / 23.0),
            |t| 20.0 + 6.0 * t as f64 / 23.0,
        );
        let s = generate_synopsis(&f, &SynopsisConfig::default()).unwrap();
        assert_eq!(s.systems.len(), 1);
        let p = &s.systems[0];
        assert_eq!(p.tendency, Tendency::Deepening);
        let m = p.motion.unwrap();
        assert_eq!(m.toward, Compass::Easterly);
        // 10 degrees of longitude at 55N is about 640 km in 23 h.
        assert_eq!(m.speed, Speed::Steadily);
    }

    #[test]
    fn uniform_field_is_nothing_significant() {
        let lats = regular_axis(30.0, 1.0, 41);
        let lons = regular_axis(-20.0, 1.0, 31);
        let f = gaussian_low(&lats, &lons, |_| (0.0, 0.0), |_| 0.0);
        let s = generate_synopsis(&f, &SynopsisConfig::default()).unwrap();
        assert!(s.systems.is_empty());
        assert_eq!(crate::bulletin::render_synopsis(&s), "General synopsis. Nothing significant.");
    }

    #[test]
    fn geodesy() {
        assert!((haversine_km((0.0, 0.0), (0.0, 1.0)) - 111.19).abs() < 0.01);
        assert!((bearing_deg((50.0, 0.0), (50.0, 1.0)) - 90.0).abs() < 1.0);
        assert!((bearing_deg((50.0, 0.0), (49.0, 0.0)) - 180.0).abs() < 1e-9);
    }
}
