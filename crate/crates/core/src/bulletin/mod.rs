//! Structured sea-area bulletins.
//!
//! A bulletin names one or more sea areas and carries four clause lists in
//! fixed order (wind, sea state, weather, visibility) plus an optional gale
//! warning. [`render_bulletin`] produces the canonical text and
//! [`parse_bulletin`] reads it back; [`validate`] checks the format rules.

mod parse;
mod render;
mod segment;
mod synopsis;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::categorical::{Compass, SeaState, VisibilityClass};

pub use parse::{parse_bulletin, ParseError, Section};
pub use render::{render_attribute, render_body, render_bulletin, RenderError};
pub use segment::{segment_forecast, Fragment, FragmentKind, SegmentError};
pub use synopsis::{
    parse_synopsis, render_synopsis, validate_synopsis, Motion, PressureSystem, Speed, Synopsis, SystemKind,
    Tendency,
};
pub use validate::{validate, Violation, MAX_FORCE_SPAN, MAX_STATE_SPAN};

/// The four attributes every area bulletin reports, in broadcast order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Wind,
    SeaState,
    Weather,
    Visibility,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Wind,
        Attribute::SeaState,
        Attribute::Weather,
        Attribute::Visibility,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Wind => "wind",
            Attribute::SeaState => "sea_state",
            Attribute::Weather => "weather",
            Attribute::Visibility => "visibility",
        }
    }

    /// Heading used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Attribute::Wind => "Wind",
            Attribute::SeaState => "Sea State",
            Attribute::Weather => "Weather",
            Attribute::Visibility => "Visibility",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown attribute {s:?} (expected wind|sea_state|weather|visibility)"))
    }
}

/// Closed set of timing phrases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Timing {
    #[serde(rename = "at first")]
    AtFirst,
    #[serde(rename = "later")]
    Later,
    #[serde(rename = "soon")]
    Soon,
    #[serde(rename = "occasionally")]
    Occasionally,
    #[serde(rename = "becoming")]
    Becoming,
}

impl Timing {
    pub const ALL: [Timing; 5] = [
        Timing::AtFirst,
        Timing::Later,
        Timing::Soon,
        Timing::Occasionally,
        Timing::Becoming,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Timing::AtFirst => "at first",
            Timing::Later => "later",
            Timing::Soon => "soon",
            Timing::Occasionally => "occasionally",
            Timing::Becoming => "becoming",
        }
    }

    /// "becoming" and "occasionally" precede the value; the rest follow it.
    pub fn is_prefix(self) -> bool {
        matches!(self, Timing::Becoming | Timing::Occasionally)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindClause {
    pub direction: Compass,
    pub force_low: u8,
    pub force_high: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl WindClause {
    pub fn new(direction: Compass, force_low: u8, force_high: u8) -> Self {
        WindClause {
            direction,
            force_low,
            force_high,
            timing: None,
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = Some(timing);
        self
    }
}

/// A sea-state or visibility clause, optionally a two-label range
/// ("moderate or rough").
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(deserialize = "L: Deserialize<'de>"))]
pub struct StateClause<L> {
    pub label: L,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_high: Option<L>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl<L> StateClause<L> {
    pub fn new(label: L) -> Self {
        StateClause {
            label,
            label_high: None,
            timing: None,
        }
    }

    pub fn range(label: L, label_high: L) -> Self {
        StateClause {
            label,
            label_high: Some(label_high),
            timing: None,
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = Some(timing);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeatherClause {
    pub phrase: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl WeatherClause {
    pub fn new(phrase: impl Into<String>) -> Self {
        WeatherClause {
            phrase: phrase.into(),
            timing: None,
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = Some(timing);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaleSeverity {
    Gale,
    #[serde(rename = "severe gale")]
    SevereGale,
    Storm,
    #[serde(rename = "violent storm")]
    ViolentStorm,
    #[serde(rename = "hurricane force")]
    HurricaneForce,
}

impl GaleSeverity {
    pub const ALL: [GaleSeverity; 5] = [
        GaleSeverity::Gale,
        GaleSeverity::SevereGale,
        GaleSeverity::Storm,
        GaleSeverity::ViolentStorm,
        GaleSeverity::HurricaneForce,
    ];

    /// Beaufort force this severity names (8 to 12).
    pub fn force(self) -> u8 {
        8 + self as u8
    }

    /// Severity for a peak force; `None` below gale force.
    pub fn from_force(force: u8) -> Option<Self> {
        match force {
            0..=7 => None,
            f => Some(GaleSeverity::ALL[(f.min(12) - 8) as usize]),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GaleSeverity::Gale => "gale",
            GaleSeverity::SevereGale => "severe gale",
            GaleSeverity::Storm => "storm",
            GaleSeverity::ViolentStorm => "violent storm",
            GaleSeverity::HurricaneForce => "hurricane force",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaleTiming {
    Imminent,
    Soon,
    Later,
}

impl GaleTiming {
    pub const ALL: [GaleTiming; 3] = [GaleTiming::Imminent, GaleTiming::Soon, GaleTiming::Later];

    pub fn as_str(self) -> &'static str {
        match self {
            GaleTiming::Imminent => "imminent",
            GaleTiming::Soon => "soon",
            GaleTiming::Later => "later",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaleWarning {
    pub severity: GaleSeverity,
    pub timing: GaleTiming,
}

/// One area group's forecast.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bulletin {
    pub areas: Vec<String>,
    pub wind: Vec<WindClause>,
    pub sea_state: Vec<StateClause<SeaState>>,
    /// Empty means fair weather.
    #[serde(default)]
    pub weather: Vec<WeatherClause>,
    pub visibility: Vec<StateClause<VisibilityClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gale: Option<GaleWarning>,
}

impl Bulletin {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bulletin serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Highest upper force across the wind clauses.
    pub fn max_force(&self) -> Option<u8> {
        self.wind.iter().map(|w| w.force_high).max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_force_mapping() {
        assert_eq!(GaleSeverity::from_force(7), None);
        assert_eq!(GaleSeverity::from_force(8), Some(GaleSeverity::Gale));
        assert_eq!(GaleSeverity::from_force(12), Some(GaleSeverity::HurricaneForce));
        for s in GaleSeverity::ALL {
            assert_eq!(GaleSeverity::from_force(s.force()), Some(s));
        }
    }

    #[test]
    fn json_shape() {
        let b = Bulletin {
            areas: vec!["Dover".into()],
            wind: vec![WindClause::new(Compass::Southwesterly, 5, 7)],
            sea_state: vec![StateClause::range(SeaState::Moderate, SeaState::Rough)],
            weather: vec![WeatherClause::new("rain").with_timing(Timing::Later)],
            visibility: vec![StateClause::new(VisibilityClass::Good)],
            gale: Some(GaleWarning {
                severity: GaleSeverity::SevereGale,
                timing: GaleTiming::Soon,
            }),
        };
        let v: serde_json::Value = serde_json::from_str(&b.to_json()).unwrap();
        assert_eq!(v["wind"][0]["direction"], "southwesterly");
        assert_eq!(v["sea_state"][0]["label_high"], "rough");
        assert_eq!(v["weather"][0]["timing"], "later");
        assert_eq!(v["gale"]["severity"], "severe gale");
        assert_eq!(Bulletin::from_json(&b.to_json()).unwrap(), b);
    }
}
