use std::fmt;

use serde::{Deserialize, Serialize};

use super::parse::{span_of, syntax, Piece};
use super::{ParseError, Section, Violation};
use crate::categorical::{Compass, Label};
use crate::overlay::LabelGrid;

const HEADER: &str = "General synopsis";
const NOTHING: &str = "Nothing significant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Low,
    High,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Low => "low",
            SystemKind::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tendency {
    /// Low with falling central pressure.
    Deepening,
    /// Low with rising central pressure.
    Filling,
    /// High with rising central pressure.
    Building,
    /// High with falling central pressure.
    Declining,
    Steady,
}

impl Tendency {
    pub const ALL: [Tendency; 5] = [
        Tendency::Deepening,
        Tendency::Filling,
        Tendency::Building,
        Tendency::Declining,
        Tendency::Steady,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tendency::Deepening => "deepening",
            Tendency::Filling => "filling",
            Tendency::Building => "building",
            Tendency::Declining => "declining",
            Tendency::Steady => "steady",
        }
    }

    /// Tendency word for a centre whose pressure changed by `delta_hpa`;
    /// changes within `threshold_hpa` are steady.
    pub fn from_change(kind: SystemKind, delta_hpa: f64, threshold_hpa: f64) -> Self {
        match kind {
            _ if delta_hpa.abs() <= threshold_hpa => Tendency::Steady,
            SystemKind::Low if delta_hpa < 0.0 => Tendency::Deepening,
            SystemKind::Low => Tendency::Filling,
            SystemKind::High if delta_hpa > 0.0 => Tendency::Building,
            SystemKind::High => Tendency::Declining,
        }
    }

    pub fn fits(self, kind: SystemKind) -> bool {
        match self {
            Tendency::Steady => true,
            Tendency::Deepening | Tendency::Filling => kind == SystemKind::Low,
            Tendency::Building | Tendency::Declining => kind == SystemKind::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speed {
    Slowly,
    Steadily,
    Quickly,
}

impl Speed {
    pub const ALL: [Speed; 3] = [Speed::Slowly, Speed::Steadily, Speed::Quickly];

    pub fn as_str(self) -> &'static str {
        match self {
            Speed::Slowly => "slowly",
            Speed::Steadily => "steadily",
            Speed::Quickly => "quickly",
        }
    }

    /// Below 15 km/h slowly, below 30 km/h steadily, otherwise quickly.
    pub fn from_kmh(kmh: f64) -> Self {
        if kmh < 15.0 {
            Speed::Slowly
        } else if kmh < 30.0 {
            Speed::Steadily
        } else {
            Speed::Quickly
        }
    }
}

/// Direction of travel, written as a compass point ("northeast").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Motion {
    pub toward: Compass,
    pub speed: Speed,
}

const POINTS: [&str; 8] = [
    "north",
    "northeast",
    "east",
    "southeast",
    "south",
    "southwest",
    "west",
    "northwest",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PressureSystem {
    pub kind: SystemKind,
    /// Overlay cell label, for example "C4".
    pub position: String,
    pub pressure_hpa: i32,
    pub tendency: Tendency,
    /// `None` when stationary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Motion>,
}

impl fmt::Display for PressureSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SystemKind::Low => "Low",
            SystemKind::High => "High",
        };
        write!(f, "{kind} {} {} {}, ", self.position, self.pressure_hpa, self.tendency.as_str())?;
        match self.motion {
            None => f.write_str("stationary"),
            Some(m) => write!(f, "moving {} {}", m.speed.as_str(), POINTS[m.toward.index()]),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Synopsis {
    pub systems: Vec<PressureSystem>,
}

pub fn render_synopsis(s: &Synopsis) -> String {
    if s.systems.is_empty() {
        return format!("{HEADER}. {NOTHING}.");
    }
    let body = s.systems.iter().map(|p| format!("{p}.")).collect::<Vec<_>>().join(" ");
    format!("{HEADER}. {body}")
}

fn parse_system(sentence: Piece) -> Result<PressureSystem, ParseError> {
    let bad = |msg: &str| syntax(Section::Synopsis, sentence.span(), msg.to_string());
    let (head, motion) = sentence
        .text
        .split_once(',')
        .ok_or_else(|| bad("expected '<kind> <cell> <hPa> <tendency>, <motion>'"))?;
    let words: Vec<&str> = head.split_whitespace().collect();
    let [kind, position, pressure, tendency] = words.as_slice() else {
        return Err(bad("expected '<kind> <cell> <hPa> <tendency>'"));
    };
    let kind = match kind.to_lowercase().as_str() {
        "low" => SystemKind::Low,
        "high" => SystemKind::High,
        _ => return Err(bad("system kind must be low or high")),
    };
    let pressure_hpa = pressure.parse::<i32>().map_err(|_| bad("pressure must be an integer hPa"))?;
    let tendency = Tendency::ALL
        .into_iter()
        .find(|t| t.as_str().eq_ignore_ascii_case(tendency))
        .ok_or_else(|| bad("unknown tendency"))?;
    let motion_words: Vec<String> = motion.split_whitespace().map(str::to_lowercase).collect();
    let motion = match motion_words.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["stationary"] => None,
        ["moving", speed, toward] => Some(Motion {
            speed: Speed::ALL
                .into_iter()
                .find(|s| s.as_str() == *speed)
                .ok_or_else(|| bad("unknown speed"))?,
            toward: POINTS
                .iter()
                .position(|p| p == toward)
                .and_then(Compass::from_index)
                .ok_or_else(|| bad("unknown compass point"))?,
        }),
        _ => return Err(bad("expected 'stationary' or 'moving <speed> <point>'")),
    };
    Ok(PressureSystem {
        kind,
        position: position.to_uppercase(),
        pressure_hpa,
        tendency,
        motion,
    })
}

pub fn parse_synopsis(text: &str) -> Result<Synopsis, ParseError> {
    let whole = Piece::new(text, 0);
    let mut sentences = whole.split('.');
    let tail = sentences.pop().expect("split yields at least one piece");
    if !tail.text.is_empty() {
        return Err(syntax(Section::Structure, tail.span(), "synopsis must end with a period"));
    }
    match sentences.first() {
        Some(h) if h.text.eq_ignore_ascii_case(HEADER) => {}
        _ => return Err(syntax(Section::Synopsis, whole.span(), "synopsis must start with 'General synopsis.'")),
    }
    let body = &sentences[1..];
    if body.is_empty() {
        return Err(syntax(Section::Synopsis, whole.span(), "synopsis has no content"));
    }
    if let [only] = body {
        if only.text.eq_ignore_ascii_case(NOTHING) {
            return Ok(Synopsis::default());
        }
    }
    if body.iter().any(|s| s.text.is_empty()) {
        return Err(syntax(Section::Structure, span_of(body), "empty sentence"));
    }
    Ok(Synopsis {
        systems: body.iter().map(|s| parse_system(*s)).collect::<Result<_, _>>()?,
    })
}

pub fn validate_synopsis(s: &Synopsis, grid: &LabelGrid) -> Vec<Violation> {
    let mut out = Vec::new();
    for p in &s.systems {
        if grid.parse_label(&p.position).is_none() || p.position != p.position.to_uppercase() {
            out.push(Violation::SynopsisPositionInvalid {
                position: p.position.clone(),
            });
        }
        if !(880..=1080).contains(&p.pressure_hpa) {
            out.push(Violation::SynopsisPressureOutOfRange {
                pressure_hpa: p.pressure_hpa,
            });
        }
        if !p.tendency.fits(p.kind) {
            out.push(Violation::SynopsisTendencyMismatch {
                kind: p.kind.as_str().to_string(),
                tendency: p.tendency.as_str().to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_and_parse() {
        let s = Synopsis {
            systems: vec![
                PressureSystem {
                    kind: SystemKind::Low,
                    position: "C3".into(),
                    pressure_hpa: 988,
                    tendency: Tendency::Deepening,
                    motion: Some(Motion {
                        toward: Compass::Northeasterly,
                        speed: Speed::Steadily,
                    }),
                },
                PressureSystem {
                    kind: SystemKind::High,
                    position: "F7".into(),
                    pressure_hpa: 1032,
                    tendency: Tendency::Steady,
                    motion: None,
                },
            ],
        };
        let text = render_synopsis(&s);
        assert_eq!(
            text,
            "General synopsis. Low C3 988 deepening, moving steadily northeast. High F7 1032 steady, stationary."
        );
        assert_eq!(parse_synopsis(&text).unwrap(), s);
        assert!(validate_synopsis(&s, &LabelGrid::STANDARD).is_empty());
        assert_eq!(render_synopsis(&Synopsis::default()), "General synopsis. Nothing significant.");
        assert_eq!(parse_synopsis("General synopsis. Nothing significant.").unwrap(), Synopsis::default());
    }

    #[test]
    fn rejects_and_flags() {
        assert!(parse_synopsis("Low C3 988 deepening, stationary.").is_err());
        assert!(parse_synopsis("General synopsis. Low C3 deep, stationary.").is_err());
        let s = Synopsis {
            systems: vec![PressureSystem {
                kind: SystemKind::High,
                position: "Z9".into(),
                pressure_hpa: 1200,
                tendency: Tendency::Deepening,
                motion: None,
            }],
        };
        let codes: Vec<_> = validate_synopsis(&s, &LabelGrid::STANDARD).iter().map(Violation::code).collect();
        assert_eq!(
            codes,
            vec!["SynopsisPositionInvalid", "SynopsisPressureOutOfRange", "SynopsisTendencyMismatch"]
        );
    }

    #[test]
    fn tendency_and_speed_thresholds() {
        assert_eq!(Tendency::from_change(SystemKind::Low, -2.1, 2.0), Tendency::Deepening);
        assert_eq!(Tendency::from_change(SystemKind::Low, -2.0, 2.0), Tendency::Steady);
        assert_eq!(Tendency::from_change(SystemKind::High, -3.0, 2.0), Tendency::Declining);
        assert_eq!(Speed::from_kmh(14.9), Speed::Slowly);
        assert_eq!(Speed::from_kmh(15.0), Speed::Steadily);
        assert_eq!(Speed::from_kmh(30.0), Speed::Quickly);
    }

    proptest! {
        #[test]
        fn synopsis_round_trip(
            systems in proptest::collection::vec(
                (any::<bool>(), 0usize..6, 0usize..8, 900i32..1060, 0usize..5, proptest::option::of((0usize..8, 0usize..3))),
                0..5,
            )
        ) {
            let grid = LabelGrid::STANDARD;
            let s = Synopsis {
                systems: systems
                    .into_iter()
                    .map(|(low, c, r, hpa, t, m)| PressureSystem {
                        kind: if low { SystemKind::Low } else { SystemKind::High },
                        position: grid.label(c, r),
                        pressure_hpa: hpa,
                        tendency: Tendency::ALL[t],
                        motion: m.map(|(d, sp)| Motion { toward: Compass::from_index(d).unwrap(), speed: Speed::ALL[sp] }),
                    })
                    .collect(),
            };
            prop_assert_eq!(parse_synopsis(&render_synopsis(&s)).unwrap(), s);
        }
    }
}
