//! Rules-based data-to-text: per-area attribute series to bulletins.

mod consolidate;
mod summarize;
mod summary;
mod synopsis;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::area::{AreaRegistry, SeaArea};
use crate::bulletin::{
    render_body, render_synopsis, validate, Bulletin, GaleSeverity, GaleTiming, GaleWarning, StateClause, Synopsis,
    Violation, WeatherClause, WindClause,
};
use crate::categorical::{
    classify_beaufort, classify_weather, compass_8, Compass, Label, ScaleError, ScaleMode, ScaleSet, SeaState,
    VisibilityClass, WeatherCodeMap, GALE_FORCE,
};
use crate::grid::{area_series, AreaSeries, GridError, GridField, Reducer, Variable, HOURS};

pub use consolidate::consolidate;
pub use summarize::{
    assign_timing, segment_categories, summarize_attribute, summarize_categories, Emphasis, SubPeriod, SummaryRule,
    TimedPeriod, AT_FIRST_CUTOFF_HOUR, MAX_SUBPERIODS, MIN_SUBPERIOD_HOURS,
};
pub use summary::{AreaData, DataSummary, PressureSnapshot, SummaryError};
pub use synopsis::{generate_synopsis, SynopsisConfig};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("missing {0} series")]
    MissingAttribute(Variable),
    #[error("{variable} series for {area} has {len} values, expected {HOURS}")]
    SeriesLength { area: String, variable: Variable, len: usize },
    #[error("area {0:?} appears in more than one bulletin")]
    DuplicateArea(String),
    #[error("area {0:?} is not in the registry")]
    UnknownArea(String),
    #[error("generated bulletin for {area} breaks format rules: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidOutput { area: String, violations: Vec<Violation> },
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Attributes an area bulletin is built from.
pub const AREA_VARIABLES: [Variable; 5] = [
    Variable::WindSpeed,
    Variable::WindDirection,
    Variable::WaveHeight,
    Variable::Visibility,
    Variable::WeatherCode,
];

/// Spatial reducer applied over an area for each attribute.
pub fn default_reducer(variable: Variable) -> Reducer {
    match variable {
        Variable::WindSpeed | Variable::WeatherCode => Reducer::ArealMax,
        Variable::WindDirection => Reducer::CircularMean,
        Variable::WaveHeight | Variable::Visibility | Variable::Pressure => Reducer::ArealMean,
    }
}

/// Gale warning for hourly Beaufort forces.
pub fn detect_gales_forces(forces: &[u8]) -> Option<GaleWarning> {
    let first = forces.iter().position(|&f| f >= GALE_FORCE)?;
    let peak = *forces.iter().max()?;
    let timing = match first {
        0..6 => GaleTiming::Imminent,
        6..=12 => GaleTiming::Soon,
        _ => GaleTiming::Later,
    };
    Some(GaleWarning {
        severity: GaleSeverity::from_force(peak)?,
        timing,
    })
}

/// Gale warning for an hourly wind-speed series in knots.
pub fn detect_gales(wind_speed: &AreaSeries) -> Result<Option<GaleWarning>, GenerateError> {
    let forces = wind_speed
        .values
        .iter()
        .map(|&v| classify_beaufort(v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(detect_gales_forces(&forces))
}

/// Scales, weather phrases and synopsis settings used for generation.
#[derive(Debug, Clone)]
pub struct Generator {
    pub scales: ScaleSet,
    pub codes: WeatherCodeMap,
    pub synopsis: SynopsisConfig,
}

impl Default for Generator {
    fn default() -> Self {
        let codes = WeatherCodeMap::builtin();
        Generator {
            scales: ScaleSet::standard(&codes),
            codes,
            synopsis: SynopsisConfig::default(),
        }
    }
}

fn find<'a>(series: &'a [AreaSeries], variable: Variable, area: &str) -> Result<&'a AreaSeries, GenerateError> {
    let s = series
        .iter()
        .find(|s| s.variable == variable)
        .ok_or(GenerateError::MissingAttribute(variable))?;
    if s.values.len() != HOURS {
        return Err(GenerateError::SeriesLength {
            area: area.to_string(),
            variable,
            len: s.values.len(),
        });
    }
    Ok(s)
}

fn dominant_direction(directions: &[Compass]) -> Compass {
    let mut counts = [0usize; 8];
    for d in directions {
        counts[d.index()] += 1;
    }
    // max_by_key keeps the last maximum, so scan in reverse for the lowest index.
    let best = (0..8).rev().max_by_key(|&i| counts[i]).expect("eight bins");
    Compass::from_index(best).expect("index below 8")
}

fn state_clauses<L: Label>(periods: &[TimedPeriod]) -> Vec<StateClause<L>> {
    periods
        .iter()
        .map(|t| StateClause {
            label: L::from_index(t.period.low).expect("bin index within label set"),
            label_high: (t.period.high > t.period.low)
                .then(|| L::from_index(t.period.high).expect("bin index within label set")),
            timing: t.timing,
        })
        .collect()
}

impl Generator {
    pub fn new(scales: ScaleSet, codes: WeatherCodeMap) -> Self {
        Generator {
            scales,
            codes,
            synopsis: SynopsisConfig::default(),
        }
    }

    /// Builds one area's bulletin from its attribute series.
    pub fn area_bulletin(&self, series: &[AreaSeries], area: &SeaArea) -> Result<Bulletin, GenerateError> {
        let speed = find(series, Variable::WindSpeed, &area.name)?;
        let direction = find(series, Variable::WindDirection, &area.name)?;
        let waves = find(series, Variable::WaveHeight, &area.name)?;
        let visibility = find(series, Variable::Visibility, &area.name)?;
        let weather = find(series, Variable::WeatherCode, &area.name)?;

        let forces = speed
            .values
            .iter()
            .map(|&v| classify_beaufort(v))
            .collect::<Result<Vec<_>, _>>()?;
        let directions = direction
            .values
            .iter()
            .map(|&d| compass_8(d))
            .collect::<Result<Vec<_>, _>>()?;
        let wind = summarize_categories(&forces.iter().map(|&f| f as usize).collect::<Vec<_>>(), SummaryRule::WIND)
            .into_iter()
            .map(|t| WindClause {
                direction: dominant_direction(&directions[t.period.start_hour..t.period.end_hour]),
                force_low: t.period.low as u8,
                force_high: t.period.high as u8,
                timing: t.timing,
            })
            .collect();

        let sea_scale = self.scales.get(Variable::WaveHeight, ScaleMode::Categorical)?;
        let sea_state: Vec<StateClause<SeaState>> =
            state_clauses(&summarize_attribute(waves, sea_scale, SummaryRule::SEA_STATE)?);
        let vis_scale = self.scales.get(Variable::Visibility, ScaleMode::Categorical)?;
        let visibility: Vec<StateClause<VisibilityClass>> =
            state_clauses(&summarize_attribute(visibility, vis_scale, SummaryRule::VISIBILITY)?);

        let phrases = self.codes.phrases();
        let ranks = weather
            .values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    return Err(ScaleError::ValueOutOfRange {
                        what: "weather code",
                        value: v,
                    });
                }
                let phrase = classify_weather(v.round() as i64, &self.codes)?;
                Ok(phrases.iter().position(|p| *p == phrase).expect("phrase listed"))
            })
            .collect::<Result<Vec<_>, ScaleError>>()?;
        let periods = summarize_categories(&ranks, SummaryRule::WEATHER);
        let weather = if periods.len() == 1 && phrases[periods[0].period.high] == "fair" {
            Vec::new()
        } else {
            periods
                .iter()
                .map(|t| WeatherClause {
                    phrase: phrases[t.period.high].to_string(),
                    timing: t.timing,
                })
                .collect()
        };

        let bulletin = Bulletin {
            areas: vec![area.name.clone()],
            wind,
            sea_state,
            weather,
            visibility,
            gale: detect_gales_forces(&forces),
        };
        Ok(bulletin)
    }

    /// Series for every area-bulletin attribute over one area.
    pub fn area_series(
        &self,
        fields: &BTreeMap<Variable, GridField>,
        area: &SeaArea,
    ) -> Result<Vec<AreaSeries>, GenerateError> {
        AREA_VARIABLES
            .iter()
            .map(|&v| {
                let field = fields.get(&v).ok_or(GenerateError::MissingAttribute(v))?;
                Ok(area_series(field, area, default_reducer(v))?)
            })
            .collect()
    }

    /// Full forecast: optional synopsis, per-area bulletins and consolidated
    /// groups.
    pub fn forecast(
        &self,
        fields: &BTreeMap<Variable, GridField>,
        registry: &AreaRegistry,
    ) -> Result<Forecast, GenerateError> {
        let areas: Vec<&SeaArea> = registry.iter().collect();
        let per_area = areas
            .par_iter()
            .map(|area| {
                let series = self.area_series(fields, area)?;
                generate_area_bulletin_with(self, &series, area, registry)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let synopsis = match fields.get(&Variable::Pressure) {
            Some(p) => Some(generate_synopsis(p, &self.synopsis)?),
            None => None,
        };
        Forecast::assemble(synopsis, per_area, registry)
    }

    /// Forecast from pre-reduced area series.
    pub fn forecast_from_summary(
        &self,
        summary: &DataSummary,
        registry: &AreaRegistry,
    ) -> Result<Forecast, GenerateError> {
        let per_area = summary
            .areas
            .par_iter()
            .map(|a| {
                let area = registry.get(&a.area).ok_or_else(|| GenerateError::UnknownArea(a.area.clone()))?;
                generate_area_bulletin_with(self, &a.series(), area, registry)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let synopsis = match &summary.pressure {
            Some(p) => Some(p.synopsis(&self.synopsis)?),
            None => None,
        };
        Forecast::assemble(synopsis, per_area, registry)
    }
}

fn generate_area_bulletin_with(
    generator: &Generator,
    series: &[AreaSeries],
    area: &SeaArea,
    registry: &AreaRegistry,
) -> Result<Bulletin, GenerateError> {
    let b = generator.area_bulletin(series, area)?;
    let violations = validate(&b, registry);
    if !violations.is_empty() {
        return Err(GenerateError::InvalidOutput {
            area: area.name.clone(),
            violations,
        });
    }
    Ok(b)
}

/// Builds a bulletin with the built-in scales and phrases.
pub fn generate_area_bulletin(series: &[AreaSeries], area: &SeaArea) -> Result<Bulletin, GenerateError> {
    Generator::default().area_bulletin(series, area)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synopsis: Option<Synopsis>,
    pub per_area: Vec<Bulletin>,
    pub groups: Vec<Bulletin>,
}

impl Forecast {
    pub fn assemble(
        synopsis: Option<Synopsis>,
        per_area: Vec<Bulletin>,
        registry: &AreaRegistry,
    ) -> Result<Self, GenerateError> {
        let groups = consolidate(&per_area, registry)?;
        Ok(Forecast {
            synopsis,
            per_area,
            groups,
        })
    }

    /// One line per group, preceded by the synopsis line when present.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(s) = &self.synopsis {
            out.push_str(&render_synopsis(s));
            out.push('\n');
        }
        for g in &self.groups {
            out.push_str(&g.areas.join(", "));
            out.push_str(". ");
            out.push_str(&render_body(g));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulletin::{parse_bulletin, Timing};

    fn series(area: &str, variable: Variable, values: Vec<f64>) -> AreaSeries {
        AreaSeries {
            area: area.into(),
            variable,
            values,
            reducer: default_reducer(variable),
        }
    }

    fn benign(area: &str) -> Vec<AreaSeries> {
        vec![
            series(area, Variable::WindSpeed, vec![12.0; 24]),
            series(area, Variable::WindDirection, vec![225.0; 24]),
            series(area, Variable::WaveHeight, vec![0.8; 24]),
            series(area, Variable::Visibility, vec![20_000.0; 24]),
            series(area, Variable::WeatherCode, vec![0.0; 24]),
        ]
    }

    #[test]
    fn gale_examples() {
        assert_eq!(detect_gales_forces(&[7; 24]), None);
        let mut f = [5u8; 24];
        f[3] = 8;
        assert_eq!(
            detect_gales_forces(&f),
            Some(GaleWarning {
                severity: GaleSeverity::Gale,
                timing: GaleTiming::Imminent
            })
        );
        let mut f = [5u8; 24];
        f[20] = 9;
        assert_eq!(
            detect_gales_forces(&f),
            Some(GaleWarning {
                severity: GaleSeverity::SevereGale,
                timing: GaleTiming::Later
            })
        );
        let mut f = [5u8; 24];
        f[6] = 8;
        assert_eq!(detect_gales_forces(&f).unwrap().timing, GaleTiming::Soon);
        f[6] = 5;
        f[12] = 8;
        assert_eq!(detect_gales_forces(&f).unwrap().timing, GaleTiming::Soon);
        f[12] = 5;
        f[13] = 8;
        assert_eq!(detect_gales_forces(&f).unwrap().timing, GaleTiming::Later);
    }

    #[test]
    fn benign_inputs_give_a_single_clause_bulletin() {
        let reg = AreaRegistry::builtin();
        let area = reg.get("Dover").unwrap();
        let b = generate_area_bulletin(&benign("Dover"), area).unwrap();
        assert!(validate(&b, &reg).is_empty());
        assert_eq!(b.wind, vec![WindClause::new(Compass::Southwesterly, 4, 4)]);
        assert_eq!(b.sea_state, vec![StateClause::new(SeaState::Slight)]);
        assert!(b.weather.is_empty());
        assert_eq!(b.gale, None);
        let text = crate::bulletin::render_bulletin(&b, &reg).unwrap();
        assert_eq!(text, "Dover. Southwesterly 4. Slight. Fair. Good.");
        assert_eq!(parse_bulletin(&text, &reg).unwrap(), b);
    }

    #[test]
    fn force_nine_peak_carries_a_warning() {
        let reg = AreaRegistry::builtin();
        let mut s = benign("Dover");
        s[0].values = (0..24).map(|h| if (14..20).contains(&h) { 44.0 } else { 20.0 }).collect();
        let b = generate_area_bulletin(&s, reg.get("Dover").unwrap()).unwrap();
        assert_eq!(
            b.gale,
            Some(GaleWarning {
                severity: GaleSeverity::SevereGale,
                timing: GaleTiming::Later
            })
        );
        assert!(validate(&b, &reg).is_empty());
        assert_eq!(b.wind.last().unwrap().timing, Some(Timing::Later));
    }

    #[test]
    fn missing_wave_height() {
        let reg = AreaRegistry::builtin();
        let mut s = benign("Dover");
        s.retain(|s| s.variable != Variable::WaveHeight);
        assert!(matches!(
            generate_area_bulletin(&s, reg.get("Dover").unwrap()),
            Err(GenerateError::MissingAttribute(Variable::WaveHeight))
        ));
    }

    #[test]
    fn changing_weather_keeps_timed_fair() {
        let reg = AreaRegistry::builtin();
        let mut s = benign("Dover");
        s[4].values = (0..24).map(|h| if h < 10 { 0.0 } else { 15.0 }).collect();
        let b = generate_area_bulletin(&s, reg.get("Dover").unwrap()).unwrap();
        assert_eq!(b.weather.len(), 2);
        assert_eq!(b.weather[0], WeatherClause::new("fair").with_timing(Timing::AtFirst));
        assert!(validate(&b, &reg).is_empty());
    }

    #[test]
    fn dominant_direction_ties_go_clockwise_from_north() {
        use Compass::*;
        assert_eq!(dominant_direction(&[Westerly, Easterly]), Easterly);
        assert_eq!(dominant_direction(&[Westerly, Westerly, Northerly]), Westerly);
    }
}
