//! Seeded synthetic weather: moving Gaussian lows and highs drive pressure,
//! geostrophic-style wind, wind-sea waves, precipitation codes and
//! visibility. Used for demos, property tests and few-shot examples.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{DateTime, TimeZone, Utc};
use ndarray::{Array3, Array4, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{hourly_axis, regular_axis, BBox, EnsembleField, GridField, Variable, HOURS};

const BASE_HPA: f64 = 1013.0;
const WIND_PER_GRADIENT: f64 = 11.0;
const MAX_WIND_KN: f64 = 70.0;
const CLEAR_VIS_M: f64 = 30_000.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub issue: DateTime<Utc>,
    pub resolution_deg: f64,
    pub domain: BBox,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            issue: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            resolution_deg: 0.5,
            domain: BBox::FORECAST_DOMAIN,
        }
    }
}

impl SyntheticConfig {
    pub fn with_seed(seed: u64) -> Self {
        SyntheticConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn lats(&self) -> Vec<f64> {
        axis(self.domain.lat_min, self.domain.lat_max, self.resolution_deg)
    }

    pub fn lons(&self) -> Vec<f64> {
        axis(self.domain.lon_min, self.domain.lon_max, self.resolution_deg)
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    regular_axis(lo, step, n)
}

/// One pressure system; `amplitude_hpa` is negative for lows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub lat: f64,
    pub lon: f64,
    pub amplitude_hpa: f64,
    pub radius_deg: f64,
    /// Degrees per hour.
    pub velocity: (f64, f64),
    /// hPa per hour added to the amplitude.
    pub deepening: f64,
    /// Precipitation intensity carried by the system (0 for highs).
    pub rain: f64,
}

impl System {
    fn at(&self, t: f64) -> (f64, f64, f64) {
        (
            self.lat + self.velocity.0 * t,
            self.lon + self.velocity.1 * t,
            self.amplitude_hpa + self.deepening * t,
        )
    }
}

/// A reproducible weather situation over one 24-hour period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub systems: Vec<System>,
    /// Background flow, knots towards (east, north).
    pub background_kn: (f64, f64),
    pub swell_m: f64,
    /// Fog patch centre and radius in degrees.
    pub fog: Option<(f64, f64, f64)>,
    /// Latitude north of which precipitation falls as snow.
    pub snow_line: f64,
}

/// Gridded values at one point and hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub pressure: f64,
    pub wind_speed: f64,
    pub wind_direction: f64,
    pub wave_height: f64,
    pub visibility: f64,
    pub weather_code: f64,
}

impl Sample {
    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::Pressure => self.pressure,
            Variable::WindSpeed => self.wind_speed,
            Variable::WindDirection => self.wind_direction,
            Variable::WaveHeight => self.wave_height,
            Variable::Visibility => self.visibility,
            Variable::WeatherCode => self.weather_code,
        }
    }
}

fn weather_code(rain: f64, snow: bool, fog: bool) -> i64 {
    match (rain, snow) {
        (r, _) if r < 0.15 => {
            if fog {
                6
            } else {
                1
            }
        }
        (r, false) if r < 0.3 => 11,
        (r, false) if r < 0.45 => 10,
        (r, false) if r < 0.65 => 12,
        (r, false) if r < 0.8 => 13,
        (r, false) if r < 0.95 => 15,
        (_, false) => 28,
        (r, true) if r < 0.4 => 22,
        (r, true) if r < 0.7 => 24,
        (_, true) => 27,
    }
}

impl Scenario {
    pub fn random(rng: &mut impl Rng, domain: &BBox) -> Self {
        let lows = rng.random_range(1..=3);
        let highs = rng.random_range(0..=2);
        let mut systems = Vec::new();
        for i in 0..lows + highs {
            let low = i < lows;
            let amplitude = rng.random_range(6.0..34.0);
            systems.push(System {
                lat: rng.random_range(domain.lat_min..domain.lat_max),
                lon: rng.random_range(domain.lon_min..domain.lon_max),
                amplitude_hpa: if low { -amplitude } else { amplitude * 0.6 },
                radius_deg: rng.random_range(4.0..10.0),
                velocity: (rng.random_range(-0.25..0.35), rng.random_range(-0.2..0.6)),
                deepening: rng.random_range(-0.6..0.6),
                rain: if low { rng.random_range(0.3..1.2) } else { 0.0 },
            });
        }
        Scenario {
            systems,
            background_kn: (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
            swell_m: rng.random_range(0.0..2.0),
            fog: rng
                .random_bool(0.4)
                .then(|| {
                    (
                        rng.random_range(domain.lat_min..domain.lat_max),
                        rng.random_range(domain.lon_min..domain.lon_max),
                        rng.random_range(1.0..5.0),
                    )
                }),
            snow_line: rng.random_range(58.0..75.0),
        }
    }

    /// Member-sized jitter of positions, depths and background flow.
    pub fn perturbed(&self, rng: &mut impl Rng) -> Self {
        let mut out = self.clone();
        for s in &mut out.systems {
            s.lat += rng.random_range(-1.0..1.0);
            s.lon += rng.random_range(-1.0..1.0);
            s.amplitude_hpa *= rng.random_range(0.85..1.15);
            s.deepening += rng.random_range(-0.1..0.1);
        }
        out.background_kn.0 += rng.random_range(-3.0..3.0);
        out.background_kn.1 += rng.random_range(-3.0..3.0);
        out
    }

    pub fn sample(&self, t: f64, lat: f64, lon: f64) -> Sample {
        let mut p = BASE_HPA;
        let (mut dpdy, mut dpdx) = (0.0, 0.0);
        let mut rain: f64 = 0.0;
        for s in &self.systems {
            let (clat, clon, amp) = s.at(t);
            let (dy, dx) = (lat - clat, lon - clon);
            let r2 = s.radius_deg * s.radius_deg;
            let g = (-(dy * dy + dx * dx) / (2.0 * r2)).exp();
            p += amp * g;
            dpdy += -amp * g * dy / r2;
            dpdx += -amp * g * dx / r2;
            rain += s.rain * g * (1.0 + 0.3 * (0.7 * dx + 0.4 * t).sin());
        }
        // Flow keeps low pressure on its left.
        let u = -dpdy * WIND_PER_GRADIENT + self.background_kn.0;
        let v = dpdx * WIND_PER_GRADIENT + self.background_kn.1;
        let speed = u.hypot(v).min(MAX_WIND_KN);
        let direction = (u.atan2(v) * 180.0 / PI + 180.0).rem_euclid(360.0);
        let rain = rain.clamp(0.0, 1.5);
        let fog = self.fog.is_some_and(|(flat, flon, r)| {
            let d2 = (lat - flat).powi(2) + (lon - flon).powi(2);
            d2 < r * r * (0.6 + 0.4 * (t / HOURS as f64 * PI).sin())
        });
        let mut visibility = CLEAR_VIS_M * (1.0 - rain.min(1.0) * 0.95).powi(2) + 200.0;
        if fog && rain < 0.15 {
            visibility = visibility.min(600.0);
        }
        Sample {
            pressure: p,
            wind_speed: speed,
            wind_direction: direction,
            wave_height: self.swell_m + 0.0045 * speed.powf(1.8),
            visibility,
            weather_code: weather_code(rain, lat > self.snow_line, fog) as f64,
        }
    }

    /// `time × lat × lon` arrays for every variable.
    pub fn render(&self, lats: &[f64], lons: &[f64]) -> BTreeMap<Variable, Array3<f64>> {
        let shape = (HOURS, lats.len(), lons.len());
        let mut out: BTreeMap<Variable, Array3<f64>> =
            Variable::ALL.iter().map(|&v| (v, Array3::zeros(shape))).collect();
        for t in 0..HOURS {
            for (y, &lat) in lats.iter().enumerate() {
                for (x, &lon) in lons.iter().enumerate() {
                    let s = self.sample(t as f64, lat, lon);
                    for (v, a) in out.iter_mut() {
                        a[[t, y, x]] = s.get(*v);
                    }
                }
            }
        }
        out
    }
}

fn scenario(cfg: &SyntheticConfig) -> (Scenario, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = Scenario::random(&mut rng, &cfg.domain);
    (s, rng)
}

/// One deterministic field per variable.
pub fn synthetic_fields(cfg: &SyntheticConfig) -> BTreeMap<Variable, GridField> {
    let (scenario, _) = scenario(cfg);
    let (lats, lons) = (cfg.lats(), cfg.lons());
    let times = hourly_axis(cfg.issue);
    scenario
        .render(&lats, &lons)
        .into_iter()
        .map(|(variable, values)| {
            let field = GridField {
                variable,
                units: variable.units().to_string(),
                lats: lats.clone(),
                lons: lons.clone(),
                times: times.clone(),
                values,
                percentile: None,
            };
            (variable, field)
        })
        .collect()
}

/// `members` perturbed realisations of the seed's scenario, per variable.
pub fn synthetic_ensemble(cfg: &SyntheticConfig, members: usize) -> BTreeMap<Variable, EnsembleField> {
    let (base, mut rng) = scenario(cfg);
    let (lats, lons) = (cfg.lats(), cfg.lons());
    let times = hourly_axis(cfg.issue);
    let renders: Vec<_> = (0..members)
        .map(|_| base.perturbed(&mut rng).render(&lats, &lons))
        .collect();
    Variable::ALL
        .iter()
        .map(|&variable| {
            let views: Vec<_> = renders.iter().map(|r| r[&variable].view()).collect();
            let values: Array4<f64> = ndarray::stack(Axis(0), &views).expect("members share a shape");
            let field = EnsembleField {
                variable,
                units: variable.units().to_string(),
                lats: lats.clone(),
                lons: lons.clone(),
                times: times.clone(),
                values,
            };
            (variable, field)
        })
        .collect()
}
