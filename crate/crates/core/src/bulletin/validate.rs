use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Attribute, Bulletin, StateClause, Timing};
use crate::area::AreaRegistry;
use crate::categorical::{word_count, Label, MAX_WEATHER_WORDS};

/// Widest permitted force range, in Beaufort steps ("5 to 8").
pub const MAX_FORCE_SPAN: u8 = 3;
/// Widest permitted label range in scale steps ("slight or rough").
pub const MAX_STATE_SPAN: usize = 2;

/// A broken format rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    NoAreas,
    UnknownArea { name: String },
    DuplicateArea { name: String },
    AreasOutOfOrder,
    EmptyClauses { attribute: Attribute },
    WeatherTooLong { phrase: String, words: usize },
    WeatherPhraseInvalid { phrase: String },
    /// A lone untimed "fair" clause; fair weather is an empty clause list.
    RedundantFair,
    ForceOutOfRange { force: u8 },
    ForceRangeInverted { low: u8, high: u8 },
    ForceSpanTooWide { low: u8, high: u8 },
    StateRangeInvalid { attribute: Attribute, low: String, high: String },
    MissingGaleWarning { max_force: u8 },
    UnexpectedGaleWarning,
    GaleSeverityMismatch { severity_force: u8, max_force: u8 },
    SynopsisPositionInvalid { position: String },
    SynopsisPressureOutOfRange { pressure_hpa: i32 },
    SynopsisTendencyMismatch { kind: String, tendency: String },
}

impl Violation {
    /// Short rule name, stable for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NoAreas => "NoAreas",
            Violation::UnknownArea { .. } => "UnknownArea",
            Violation::DuplicateArea { .. } => "DuplicateArea",
            Violation::AreasOutOfOrder => "AreasOutOfOrder",
            Violation::EmptyClauses { .. } => "EmptyClauses",
            Violation::WeatherTooLong { .. } => "WeatherTooLong",
            Violation::WeatherPhraseInvalid { .. } => "WeatherPhraseInvalid",
            Violation::RedundantFair => "RedundantFair",
            Violation::ForceOutOfRange { .. } => "ForceOutOfRange",
            Violation::ForceRangeInverted { .. } => "ForceRangeInverted",
            Violation::ForceSpanTooWide { .. } => "ForceSpanTooWide",
            Violation::StateRangeInvalid { .. } => "StateRangeInvalid",
            Violation::MissingGaleWarning { .. } => "MissingGaleWarning",
            Violation::UnexpectedGaleWarning => "UnexpectedGaleWarning",
            Violation::GaleSeverityMismatch { .. } => "GaleSeverityMismatch",
            Violation::SynopsisPositionInvalid { .. } => "SynopsisPositionInvalid",
            Violation::SynopsisPressureOutOfRange { .. } => "SynopsisPressureOutOfRange",
            Violation::SynopsisTendencyMismatch { .. } => "SynopsisTendencyMismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAreas => write!(f, "NoAreas: bulletin names no sea area"),
            Violation::UnknownArea { name } => write!(f, "UnknownArea: {name:?}"),
            Violation::DuplicateArea { name } => write!(f, "DuplicateArea: {name:?}"),
            Violation::AreasOutOfOrder => write!(f, "AreasOutOfOrder: areas not in broadcast order"),
            Violation::EmptyClauses { attribute } => write!(f, "EmptyClauses: no {attribute} clause"),
            Violation::WeatherTooLong { phrase, words } => {
                write!(f, "WeatherTooLong: {phrase:?} has {words} words (max {MAX_WEATHER_WORDS})")
            }
            Violation::WeatherPhraseInvalid { phrase } => write!(f, "WeatherPhraseInvalid: {phrase:?}"),
            Violation::RedundantFair => write!(f, "RedundantFair: fair weather is written as an empty weather list"),
            Violation::ForceOutOfRange { force } => write!(f, "ForceOutOfRange: force {force}"),
            Violation::ForceRangeInverted { low, high } => write!(f, "ForceRangeInverted: {low} to {high}"),
            Violation::ForceSpanTooWide { low, high } => {
                write!(f, "ForceSpanTooWide: {low} to {high} spans more than {MAX_FORCE_SPAN}")
            }
            Violation::StateRangeInvalid { attribute, low, high } => {
                write!(f, "StateRangeInvalid: {attribute} range {low:?} or {high:?}")
            }
            Violation::MissingGaleWarning { max_force } => {
                write!(f, "MissingGaleWarning: force {max_force} forecast without a gale warning")
            }
            Violation::UnexpectedGaleWarning => write!(f, "UnexpectedGaleWarning: no wind clause reaches force 8"),
            Violation::GaleSeverityMismatch { severity_force, max_force } => write!(
                f,
                "GaleSeverityMismatch: warning names force {severity_force} but wind peaks at {max_force}"
            ),
            Violation::SynopsisPositionInvalid { position } => write!(f, "SynopsisPositionInvalid: {position:?}"),
            Violation::SynopsisPressureOutOfRange { pressure_hpa } => {
                write!(f, "SynopsisPressureOutOfRange: {pressure_hpa} hPa")
            }
            Violation::SynopsisTendencyMismatch { kind, tendency } => {
                write!(f, "SynopsisTendencyMismatch: {kind} cannot be {tendency}")
            }
        }
    }
}

fn check_state<L: Label>(attribute: Attribute, clauses: &[StateClause<L>], out: &mut Vec<Violation>) {
    if clauses.is_empty() {
        out.push(Violation::EmptyClauses { attribute });
    }
    for c in clauses {
        if let Some(high) = c.label_high {
            let (lo, hi) = (c.label.index(), high.index());
            if hi <= lo || hi - lo > MAX_STATE_SPAN {
                out.push(Violation::StateRangeInvalid {
                    attribute,
                    low: c.label.as_str().to_string(),
                    high: high.as_str().to_string(),
                });
            }
        }
    }
}

/// True when `phrase` renders and re-parses to itself.
fn phrase_is_canonical(phrase: &str) -> bool {
    let words: Vec<&str> = phrase.split(' ').collect();
    if words.iter().any(|w| w.is_empty()) {
        return false;
    }
    if !phrase
        .chars()
        .all(|c| c.is_lowercase() || c.is_ascii_digit() || c == ' ' || c == '-' || c == '\'')
    {
        return false;
    }
    let first = words[0];
    let last = words[words.len() - 1];
    let starts_with_timing = Timing::ALL.iter().any(|t| t.is_prefix() && t.as_str() == first);
    let ends_with_timing = matches!(last, "later" | "soon") || phrase == "first" || phrase.ends_with(" at first");
    !starts_with_timing && !ends_with_timing
}

/// Every rule the bulletin breaks; empty when the bulletin is well formed.
pub fn validate(b: &Bulletin, registry: &AreaRegistry) -> Vec<Violation> {
    let mut out = Vec::new();

    if b.areas.is_empty() {
        out.push(Violation::NoAreas);
    }
    let mut seen = HashSet::new();
    let mut orders = Vec::new();
    for name in &b.areas {
        match registry.get(name) {
            Some(a) if a.name == *name => orders.push(a.order_index),
            _ => out.push(Violation::UnknownArea { name: name.clone() }),
        }
        if !seen.insert(name.to_lowercase()) {
            out.push(Violation::DuplicateArea { name: name.clone() });
        }
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) && seen.len() == b.areas.len() {
        out.push(Violation::AreasOutOfOrder);
    }

    if b.wind.is_empty() {
        out.push(Violation::EmptyClauses {
            attribute: Attribute::Wind,
        });
    }
    for w in &b.wind {
        for force in [w.force_low, w.force_high] {
            if force > 12 {
                out.push(Violation::ForceOutOfRange { force });
            }
        }
        if w.force_low > w.force_high {
            out.push(Violation::ForceRangeInverted {
                low: w.force_low,
                high: w.force_high,
            });
        } else if w.force_high - w.force_low > MAX_FORCE_SPAN {
            out.push(Violation::ForceSpanTooWide {
                low: w.force_low,
                high: w.force_high,
            });
        }
    }

    check_state(Attribute::SeaState, &b.sea_state, &mut out);
    check_state(Attribute::Visibility, &b.visibility, &mut out);

    for w in &b.weather {
        let words = word_count(&w.phrase);
        if words > MAX_WEATHER_WORDS {
            out.push(Violation::WeatherTooLong {
                phrase: w.phrase.clone(),
                words,
            });
        }
        if words == 0 || !phrase_is_canonical(&w.phrase) {
            out.push(Violation::WeatherPhraseInvalid {
                phrase: w.phrase.clone(),
            });
        }
    }
    if let [only] = b.weather.as_slice() {
        if only.phrase == "fair" && only.timing.is_none() {
            out.push(Violation::RedundantFair);
        }
    }

    let max_force = b.max_force().unwrap_or(0);
    match (&b.gale, max_force >= 8) {
        (None, true) => out.push(Violation::MissingGaleWarning { max_force }),
        (Some(_), false) => out.push(Violation::UnexpectedGaleWarning),
        (Some(g), true) if g.severity.force() > max_force => out.push(Violation::GaleSeverityMismatch {
            severity_force: g.severity.force(),
            max_force,
        }),
        _ => {}
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulletin::{GaleSeverity, GaleTiming, GaleWarning, WeatherClause, WindClause};
    use crate::categorical::{Compass, SeaState, VisibilityClass};

    fn dover() -> Bulletin {
        Bulletin {
            areas: vec!["Dover".into()],
            wind: vec![WindClause::new(Compass::Southwesterly, 5, 7)],
            sea_state: vec![StateClause::range(SeaState::Moderate, SeaState::Rough)],
            weather: vec![WeatherClause::new("rain")],
            visibility: vec![
                StateClause::new(VisibilityClass::Good),
                StateClause::new(VisibilityClass::Moderate).with_timing(Timing::Becoming),
            ],
            gale: None,
        }
    }

    fn codes(v: &[Violation]) -> Vec<&'static str> {
        v.iter().map(Violation::code).collect()
    }

    #[test]
    fn valid_bulletin_has_no_violations() {
        assert!(validate(&dover(), &AreaRegistry::builtin()).is_empty());
    }

    #[test]
    fn six_word_weather_is_too_long() {
        let mut b = dover();
        b.weather = vec![WeatherClause::new("rain then squally showers with hail")];
        assert_eq!(codes(&validate(&b, &AreaRegistry::builtin())), vec!["WeatherTooLong"]);
    }

    #[test]
    fn gale_rules() {
        let reg = AreaRegistry::builtin();
        let mut b = dover();
        b.wind = vec![WindClause::new(Compass::Westerly, 7, 9)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["MissingGaleWarning"]);
        b.gale = Some(GaleWarning {
            severity: GaleSeverity::SevereGale,
            timing: GaleTiming::Soon,
        });
        assert!(validate(&b, &reg).is_empty());
        b.gale.as_mut().unwrap().severity = GaleSeverity::Storm;
        assert_eq!(codes(&validate(&b, &reg)), vec!["GaleSeverityMismatch"]);
        b.wind = vec![WindClause::new(Compass::Westerly, 4, 5)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["UnexpectedGaleWarning"]);
    }

    #[test]
    fn area_rules() {
        let reg = AreaRegistry::builtin();
        let mut b = dover();
        b.areas = vec!["Wight".into(), "Dover".into()];
        assert_eq!(codes(&validate(&b, &reg)), vec!["AreasOutOfOrder"]);
        b.areas = vec!["Dover".into(), "Dover".into()];
        assert_eq!(codes(&validate(&b, &reg)), vec!["DuplicateArea"]);
        b.areas = vec![];
        assert_eq!(codes(&validate(&b, &reg)), vec!["NoAreas"]);
        b.areas = vec!["Atlantis".into()];
        assert_eq!(codes(&validate(&b, &reg)), vec!["UnknownArea"]);
        b.areas = vec!["dover".into()];
        assert_eq!(codes(&validate(&b, &reg)), vec!["UnknownArea"]);
    }

    #[test]
    fn clause_rules() {
        let reg = AreaRegistry::builtin();
        let mut b = dover();
        b.wind = vec![WindClause::new(Compass::Westerly, 3, 7)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["ForceSpanTooWide"]);
        b.wind = vec![WindClause::new(Compass::Westerly, 6, 5)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["ForceRangeInverted"]);
        b.wind = vec![];
        assert_eq!(codes(&validate(&b, &reg)), vec!["EmptyClauses"]);

        let mut b = dover();
        b.sea_state = vec![StateClause::range(SeaState::Slight, SeaState::VeryRough)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["StateRangeInvalid"]);
        b.sea_state = vec![StateClause::range(SeaState::Rough, SeaState::Moderate)];
        assert_eq!(codes(&validate(&b, &reg)), vec!["StateRangeInvalid"]);
        b.sea_state = vec![StateClause::range(SeaState::Slight, SeaState::Rough)];
        assert!(validate(&b, &reg).is_empty());

        let mut b = dover();
        b.weather = vec![WeatherClause::new("fair")];
        assert_eq!(codes(&validate(&b, &reg)), vec!["RedundantFair"]);
        b.weather = vec![WeatherClause::new("fair").with_timing(Timing::AtFirst), WeatherClause::new("rain").with_timing(Timing::Later)];
        assert!(validate(&b, &reg).is_empty());
        b.weather = vec![WeatherClause::new("rain later")];
        assert_eq!(codes(&validate(&b, &reg)), vec!["WeatherPhraseInvalid"]);
        b.weather = vec![WeatherClause::new("Rain")];
        assert_eq!(codes(&validate(&b, &reg)), vec!["WeatherPhraseInvalid"]);
    }

    #[test]
    fn clause_order_does_not_change_violations() {
        let reg = AreaRegistry::builtin();
        let mut b = dover();
        b.wind = vec![
            WindClause::new(Compass::Westerly, 3, 8),
            WindClause::new(Compass::Northerly, 9, 7),
        ];
        let mut forward = validate(&b, &reg);
        b.wind.reverse();
        let mut backward = validate(&b, &reg);
        forward.sort_by_key(|v| format!("{v:?}"));
        backward.sort_by_key(|v| format!("{v:?}"));
        assert_eq!(forward, backward);
    }
}
