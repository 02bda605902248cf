use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parse::Piece;
use super::Attribute;
use crate::area::AreaRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    Synopsis,
    Gale,
    Wind,
    SeaState,
    Weather,
    Visibility,
}

impl FragmentKind {
    pub fn attribute(self) -> Option<Attribute> {
        match self {
            FragmentKind::Wind => Some(Attribute::Wind),
            FragmentKind::SeaState => Some(Attribute::SeaState),
            FragmentKind::Weather => Some(Attribute::Weather),
            FragmentKind::Visibility => Some(Attribute::Visibility),
            FragmentKind::Synopsis | FragmentKind::Gale => None,
        }
    }

    fn of(attribute: Attribute) -> Self {
        match attribute {
            Attribute::Wind => FragmentKind::Wind,
            Attribute::SeaState => FragmentKind::SeaState,
            Attribute::Weather => FragmentKind::Weather,
            Attribute::Visibility => FragmentKind::Visibility,
        }
    }
}

/// One sentence of a full forecast, tagged with the areas it covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub areas: Vec<String>,
    pub kind: FragmentKind,
    pub text: String,
    /// Set for fragments shared by several areas; these are left out of
    /// per-area scoring.
    pub excluded: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("forecast structure error on line {line}: {message}")]
    ForecastStructureError { line: usize, message: String },
}

fn structure(line: usize, message: impl Into<String>) -> SegmentError {
    SegmentError::ForecastStructureError {
        line,
        message: message.into(),
    }
}

/// Splits a full forecast (one area group per line, optionally a
/// "General synopsis" line) into attribute fragments.
pub fn segment_forecast(text: &str, registry: &AreaRegistry) -> Result<Vec<Fragment>, SegmentError> {
    let mut out = Vec::new();
    let mut groups = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.to_lowercase().starts_with("general synopsis") {
            out.push(Fragment {
                areas: Vec::new(),
                kind: FragmentKind::Synopsis,
                text: line.to_string(),
                excluded: false,
            });
            continue;
        }

        let mut sentences = Piece::new(line, 0).split('.');
        if sentences.last().is_some_and(|s| s.text.is_empty()) {
            sentences.pop();
        }
        let Some((head, body)) = sentences.split_first() else {
            return Err(structure(line_no, "empty line"));
        };
        let mut areas = Vec::new();
        for name in head.split(',') {
            match registry.get(name.text) {
                Some(a) => areas.push(a.name.clone()),
                None => {
                    return Err(structure(
                        line_no,
                        format!("{:?} is not a recognised sea-area header", head.text),
                    ))
                }
            }
        }
        let (gale, attrs) = match body.len() {
            5 => (Some(body[0]), &body[1..]),
            4 => (None, body),
            n => return Err(structure(line_no, format!("expected 4 or 5 sentences after the areas, found {n}"))),
        };
        let excluded = areas.len() > 1;
        let mut push = |kind, piece: &Piece| {
            out.push(Fragment {
                areas: areas.clone(),
                kind,
                text: format!("{}.", piece.text),
                excluded,
            })
        };
        if let Some(g) = gale {
            push(FragmentKind::Gale, &g);
        }
        for (attribute, piece) in Attribute::ALL.into_iter().zip(attrs) {
            push(FragmentKind::of(attribute), piece);
        }
        groups += 1;
    }
    if groups == 0 {
        return Err(structure(0, "no sea-area bulletins found"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FORECAST: &str = "General synopsis. Low C3 988 deepening, moving steadily northeast.\n\
        Dover. Southwesterly 5 to 7. Moderate or rough. Rain. Good, becoming moderate.\n\
        Fisher, German Bight. Gale imminent. Westerly 6 to 8. Rough. Fair. Good.\n";

    #[test]
    fn segments_lines() {
        let frags = segment_forecast(FORECAST, &AreaRegistry::builtin()).unwrap();
        assert_eq!(frags.len(), 1 + 4 + 5);
        assert_eq!(frags[0].kind, FragmentKind::Synopsis);
        assert_eq!(frags[1].areas, vec!["Dover"]);
        assert_eq!(frags[1].text, "Southwesterly 5 to 7.");
        assert!(!frags[1].excluded);
        assert_eq!(frags[4].text, "Good, becoming moderate.");
        assert_eq!(frags[5].kind, FragmentKind::Gale);
        assert!(frags[5..].iter().all(|f| f.excluded && f.areas.len() == 2));
        assert_eq!(frags[8].kind, FragmentKind::Weather);
        assert_eq!(frags[8].text, "Fair.");
    }

    #[test]
    fn structure_errors() {
        let reg = AreaRegistry::builtin();
        assert!(matches!(
            segment_forecast("Winds will be strong everywhere today.", &reg),
            Err(SegmentError::ForecastStructureError { line: 1, .. })
        ));
        assert!(segment_forecast("", &reg).is_err());
        assert!(segment_forecast("General synopsis. Nothing significant.", &reg).is_err());
        assert!(segment_forecast("Dover. Westerly 4. Slight.", &reg).is_err());
    }
}
