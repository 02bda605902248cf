use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use super::{Bulletin, GaleSeverity, GaleTiming, GaleWarning, StateClause, Timing, WeatherClause, WindClause};
use crate::area::AreaRegistry;
use crate::categorical::{Compass, Label};

/// Which part of a bulletin a parse error points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Structure,
    Areas,
    Gale,
    Wind,
    SeaState,
    Weather,
    Visibility,
    Synopsis,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Structure => "structure",
            Section::Areas => "areas",
            Section::Gale => "gale",
            Section::Wind => "wind",
            Section::SeaState => "sea_state",
            Section::Weather => "weather",
            Section::Visibility => "visibility",
            Section::Synopsis => "synopsis",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown sea area {name:?} at bytes {}..{}", .span.start, .span.end)]
    UnknownArea { name: String, span: Range<usize> },
    #[error("{section} syntax error at bytes {}..{}: {message}", .span.start, .span.end)]
    ClauseSyntaxError {
        section: Section,
        span: Range<usize>,
        message: String,
    },
    #[error("force {value} outside 0..=12 at bytes {}..{}", .span.start, .span.end)]
    ValueOutOfRange { value: i64, span: Range<usize> },
}

impl ParseError {
    pub fn span(&self) -> Range<usize> {
        match self {
            ParseError::UnknownArea { span, .. }
            | ParseError::ClauseSyntaxError { span, .. }
            | ParseError::ValueOutOfRange { span, .. } => span.clone(),
        }
    }
}

/// A trimmed slice of the input with its absolute byte offset.
#[derive(Clone, Copy)]
pub(super) struct Piece<'a> {
    pub(super) text: &'a str,
    pub(super) start: usize,
}

impl<'a> Piece<'a> {
    pub(super) fn new(text: &'a str, start: usize) -> Self {
        let lead = text.len() - text.trim_start().len();
        Piece {
            text: text.trim(),
            start: start + lead,
        }
    }

    pub(super) fn span(&self) -> Range<usize> {
        self.start..self.start + self.text.len()
    }

    pub(super) fn split(&self, sep: char) -> Vec<Piece<'a>> {
        let mut out = Vec::new();
        let mut from = 0;
        for (i, _) in self.text.match_indices(sep) {
            out.push(Piece::new(&self.text[from..i], self.start + from));
            from = i + sep.len_utf8();
        }
        out.push(Piece::new(&self.text[from..], self.start + from));
        out
    }

    pub(super) fn words(&self) -> Vec<Piece<'a>> {
        let base = self.text.as_ptr() as usize;
        self.text
            .split_whitespace()
            .map(|w| Piece {
                text: w,
                start: self.start + (w.as_ptr() as usize - base),
            })
            .collect()
    }
}

pub(super) fn span_of(words: &[Piece]) -> Range<usize> {
    match (words.first(), words.last()) {
        (Some(a), Some(b)) => a.start..b.start + b.text.len(),
        _ => 0..0,
    }
}

pub(super) fn syntax(section: Section, span: Range<usize>, message: impl Into<String>) -> ParseError {
    ParseError::ClauseSyntaxError {
        section,
        span,
        message: message.into(),
    }
}

fn lower_eq(p: &Piece, s: &str) -> bool {
    p.text.eq_ignore_ascii_case(s)
}

/// Splits a leading or trailing timing phrase off a clause's words.
fn strip_timing<'w, 'a>(
    section: Section,
    clause: &Piece,
    words: &'w [Piece<'a>],
) -> Result<(Option<Timing>, &'w [Piece<'a>]), ParseError> {
    let mut rest = words;
    let mut timing = None;
    if let Some(first) = rest.first() {
        if let Some(t) = Timing::ALL.into_iter().find(|t| t.is_prefix() && lower_eq(first, t.as_str())) {
            timing = Some(t);
            rest = &rest[1..];
        }
    }
    let suffix = match rest {
        [.., a, b] if lower_eq(a, "at") && lower_eq(b, "first") => Some((Timing::AtFirst, 2)),
        [.., b] if lower_eq(b, "later") => Some((Timing::Later, 1)),
        [.., b] if lower_eq(b, "soon") => Some((Timing::Soon, 1)),
        _ => None,
    };
    if let Some((t, n)) = suffix {
        if timing.is_some() {
            return Err(syntax(section, clause.span(), "clause carries two timing phrases"));
        }
        timing = Some(t);
        rest = &rest[..rest.len() - n];
    }
    if rest.is_empty() {
        return Err(syntax(section, clause.span(), "clause has a timing phrase but no value"));
    }
    Ok((timing, rest))
}

fn parse_force(word: &Piece) -> Result<u8, ParseError> {
    if word.text.is_empty() || !word.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(Section::Wind, word.span(), format!("expected a force, found {:?}", word.text)));
    }
    match word.text.parse::<i64>() {
        Ok(v) if (0..=12).contains(&v) => Ok(v as u8),
        Ok(v) => Err(ParseError::ValueOutOfRange { value: v, span: word.span() }),
        Err(_) => Err(ParseError::ValueOutOfRange {
            value: i64::MAX,
            span: word.span(),
        }),
    }
}

fn parse_wind(clause: Piece) -> Result<WindClause, ParseError> {
    let words = clause.words();
    let (timing, rest) = strip_timing(Section::Wind, &clause, &words)?;
    let direction = Compass::parse_label(rest[0].text)
        .ok_or_else(|| syntax(Section::Wind, rest[0].span(), format!("unknown direction {:?}", rest[0].text)))?;
    let (force_low, force_high) = match rest {
        [_, f] => {
            let f = parse_force(f)?;
            (f, f)
        }
        [_, lo, to, hi] if lower_eq(to, "to") => (parse_force(lo)?, parse_force(hi)?),
        _ => {
            return Err(syntax(
                Section::Wind,
                span_of(rest),
                "expected '<direction> <force>' or '<direction> <force> to <force>'",
            ))
        }
    };
    Ok(WindClause {
        direction,
        force_low,
        force_high,
        timing,
    })
}

fn parse_state<L: Label>(section: Section, clause: Piece) -> Result<StateClause<L>, ParseError> {
    let words = clause.words();
    let (timing, rest) = strip_timing(section, &clause, &words)?;
    let label_of = |ws: &[Piece]| -> Result<L, ParseError> {
        let text = ws.iter().map(|w| w.text).collect::<Vec<_>>().join(" ");
        L::parse_label(&text).ok_or_else(|| syntax(section, span_of(ws), format!("unknown {section} label {text:?}")))
    };
    let (label, label_high) = match rest.iter().position(|w| lower_eq(w, "or")) {
        Some(i) if i > 0 && i + 1 < rest.len() => (label_of(&rest[..i])?, Some(label_of(&rest[i + 1..])?)),
        Some(_) => return Err(syntax(section, span_of(rest), "dangling 'or'")),
        None => (label_of(rest)?, None),
    };
    Ok(StateClause {
        label,
        label_high,
        timing,
    })
}

fn parse_weather(sentence: Piece) -> Result<Vec<WeatherClause>, ParseError> {
    if lower_eq(&sentence, "fair") {
        return Ok(Vec::new());
    }
    sentence
        .split(',')
        .into_iter()
        .map(|clause| {
            if clause.text.is_empty() {
                return Err(syntax(Section::Weather, clause.span(), "empty clause"));
            }
            let words = clause.words();
            let (timing, rest) = strip_timing(Section::Weather, &clause, &words)?;
            let phrase = rest.iter().map(|w| w.text.to_lowercase()).collect::<Vec<_>>().join(" ");
            Ok(WeatherClause { phrase, timing })
        })
        .collect()
}

fn parse_gale(sentence: Piece) -> Result<GaleWarning, ParseError> {
    let words = sentence.words();
    let bad = || syntax(Section::Gale, sentence.span(), format!("expected a gale warning, found {:?}", sentence.text));
    let (last, head) = words.split_last().ok_or_else(bad)?;
    let timing = GaleTiming::ALL
        .into_iter()
        .find(|t| lower_eq(last, t.as_str()))
        .ok_or_else(bad)?;
    let name = head.iter().map(|w| w.text.to_lowercase()).collect::<Vec<_>>().join(" ");
    let severity = GaleSeverity::ALL
        .into_iter()
        .find(|s| s.as_str() == name)
        .ok_or_else(bad)?;
    Ok(GaleWarning { severity, timing })
}

fn clauses<T>(sentence: Piece, section: Section, f: impl Fn(Piece) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
    sentence
        .split(',')
        .into_iter()
        .map(|c| {
            if c.text.is_empty() {
                Err(syntax(section, c.span(), "empty clause"))
            } else {
                f(c)
            }
        })
        .collect()
}

/// Reads one bulletin. Area names come back in their registry spelling.
pub fn parse_bulletin(text: &str, registry: &AreaRegistry) -> Result<Bulletin, ParseError> {
    let whole = Piece::new(text, 0);
    let mut sentences = whole.split('.');
    let tail = sentences.pop().expect("split yields at least one piece");
    if !tail.text.is_empty() {
        return Err(syntax(Section::Structure, tail.span(), "bulletin must end with a period"));
    }
    if let Some(empty) = sentences.iter().find(|s| s.text.is_empty()) {
        return Err(syntax(Section::Structure, empty.start..empty.start, "empty sentence"));
    }
    let Some((area_sentence, body)) = sentences.split_first() else {
        return Err(syntax(Section::Structure, whole.span(), "empty bulletin"));
    };

    let mut areas = Vec::new();
    for piece in area_sentence.split(',') {
        if piece.text.is_empty() {
            return Err(syntax(Section::Areas, piece.start..piece.start, "empty area name"));
        }
        match registry.get(piece.text) {
            Some(a) => areas.push(a.name.clone()),
            None => {
                return Err(ParseError::UnknownArea {
                    name: piece.text.to_string(),
                    span: piece.span(),
                })
            }
        }
    }

    let (gale, body) = match body.len() {
        5 => (Some(parse_gale(body[0])?), &body[1..]),
        4 => (None, body),
        n => {
            let span = span_of(body);
            return Err(syntax(
                Section::Structure,
                if body.is_empty() { area_sentence.span() } else { span },
                format!("expected 4 or 5 sentences after the area list, found {n}"),
            ));
        }
    };

    Ok(Bulletin {
        areas,
        gale,
        wind: clauses(body[0], Section::Wind, parse_wind)?,
        sea_state: clauses(body[1], Section::SeaState, |c| parse_state(Section::SeaState, c))?,
        weather: parse_weather(body[2])?,
        visibility: clauses(body[3], Section::Visibility, |c| parse_state(Section::Visibility, c))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bulletin::{render_bulletin, validate};
    use crate::categorical::{SeaState, VisibilityClass};
    use proptest::prelude::*;

    const DOVER: &str = "Dover. Southwesterly 5 to 7. Moderate or rough. Rain. Good, becoming moderate.";

    #[test]
    fn parses_reference_bulletin() {
        let reg = AreaRegistry::builtin();
        let b = parse_bulletin(DOVER, &reg).unwrap();
        assert_eq!(b.areas, vec!["Dover"]);
        assert_eq!(b.wind, vec![WindClause::new(Compass::Southwesterly, 5, 7)]);
        assert_eq!(b.sea_state, vec![StateClause::range(SeaState::Moderate, SeaState::Rough)]);
        assert_eq!(b.weather, vec![WeatherClause::new("rain")]);
        assert_eq!(
            b.visibility,
            vec![
                StateClause::new(VisibilityClass::Good),
                StateClause::new(VisibilityClass::Moderate).with_timing(Timing::Becoming)
            ]
        );
        assert_eq!(render_bulletin(&b, &reg).unwrap(), DOVER);
    }

    #[test]
    fn unknown_area_reports_span() {
        let err = parse_bulletin("Atlantis. Northerly 4. Slight. Fair. Good.", &AreaRegistry::builtin()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownArea {
                name: "Atlantis".into(),
                span: 0..8
            }
        );
    }

    #[test]
    fn bad_clauses() {
        let reg = AreaRegistry::builtin();
        let err = parse_bulletin("Dover. Southwesterly 5 to 14. Slight. Fair. Good.", &reg).unwrap_err();
        assert_eq!(err, ParseError::ValueOutOfRange { value: 14, span: 26..28 });
        let err = parse_bulletin("Dover. Sideways 5. Slight. Fair. Good.", &reg).unwrap_err();
        assert!(matches!(err, ParseError::ClauseSyntaxError { section: Section::Wind, span, .. } if span == (7..15)));
        let err = parse_bulletin("Dover. Westerly 5. Choppy. Fair. Good.", &reg).unwrap_err();
        assert!(matches!(err, ParseError::ClauseSyntaxError { section: Section::SeaState, .. }));
        let err = parse_bulletin("Dover. Westerly 5. Slight. Fair. Good", &reg).unwrap_err();
        assert!(matches!(err, ParseError::ClauseSyntaxError { section: Section::Structure, .. }));
        let err = parse_bulletin("Dover. Westerly 5. Slight. Good.", &reg).unwrap_err();
        assert!(matches!(err, ParseError::ClauseSyntaxError { section: Section::Structure, .. }));
        let err = parse_bulletin("Dover. Squall soon. Westerly 5. Slight. Fair. Good.", &reg).unwrap_err();
        assert!(matches!(err, ParseError::ClauseSyntaxError { section: Section::Gale, .. }));
    }

    #[test]
    fn fair_and_timings() {
        let reg = AreaRegistry::builtin();
        let text = "Fisher, German Bight. Severe gale soon. Westerly 7 to 9 at first, occasionally northwesterly 6. \
                    Rough or very rough. Fair at first, squally showers later. Good, occasionally poor.";
        let b = parse_bulletin(text, &reg).unwrap();
        assert!(validate(&b, &reg).is_empty(), "{:?}", validate(&b, &reg));
        assert_eq!(b.gale.unwrap().severity, GaleSeverity::SevereGale);
        assert_eq!(b.wind[1].timing, Some(Timing::Occasionally));
        assert_eq!(b.weather[1], WeatherClause::new("squally showers").with_timing(Timing::Later));
        assert_eq!(render_bulletin(&b, &reg).unwrap(), text);

        let b = parse_bulletin("Dover. Westerly 4. Slight. Fair. Good.", &reg).unwrap();
        assert!(b.weather.is_empty());
    }

    #[test]
    fn parser_accepts_overlong_weather_for_validation() {
        let reg = AreaRegistry::builtin();
        let b = parse_bulletin("Dover. Westerly 4. Slight. Rain then squally showers with hail. Good.", &reg).unwrap();
        let v = validate(&b, &reg);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "WeatherTooLong");
    }

    fn timing() -> impl Strategy<Value = Option<Timing>> {
        prop_oneof![Just(None), proptest::sample::select(Timing::ALL.to_vec()).prop_map(Some)]
    }

    fn wind() -> impl Strategy<Value = WindClause> {
        (0usize..8, 0u8..=12, 0u8..=3, timing()).prop_map(|(d, lo, span, timing)| WindClause {
            direction: Compass::from_index(d).unwrap(),
            force_low: lo.min(12 - span),
            force_high: lo.min(12 - span) + span,
            timing,
        })
    }

    fn state<L: Label>() -> impl Strategy<Value = StateClause<L>> {
        (0..L::ALL.len(), 0usize..=2, timing()).prop_map(|(i, span, timing)| {
            let lo = i.min(L::ALL.len() - 1 - span);
            StateClause {
                label: L::from_index(lo).unwrap(),
                label_high: (span > 0).then(|| L::from_index(lo + span).unwrap()),
                timing,
            }
        })
    }

    fn weather() -> impl Strategy<Value = WeatherClause> {
        let phrases = crate::categorical::WeatherCodeMap::builtin()
            .phrases()
            .into_iter()
            .filter(|p| *p != "fair")
            .map(String::from)
            .collect::<Vec<_>>();
        (proptest::sample::select(phrases), timing()).prop_map(|(phrase, timing)| WeatherClause { phrase, timing })
    }

    prop_compose! {
        fn bulletin()(
            areas in proptest::sample::subsequence((0..31usize).collect::<Vec<_>>(), 1..4),
            wind in proptest::collection::vec(wind(), 1..4),
            sea_state in proptest::collection::vec(state::<SeaState>(), 1..4),
            weather in proptest::collection::vec(weather(), 0..4),
            visibility in proptest::collection::vec(state::<VisibilityClass>(), 1..4),
            gale_timing in proptest::sample::select(GaleTiming::ALL.to_vec()),
        ) -> Bulletin {
            let reg = AreaRegistry::builtin();
            let names: Vec<String> = reg.iter().map(|a| a.name.clone()).collect();
            let max = wind.iter().map(|w| w.force_high).max().unwrap();
            Bulletin {
                areas: areas.into_iter().map(|i| names[i].clone()).collect(),
                gale: GaleSeverity::from_force(max).map(|severity| GaleWarning { severity, timing: gale_timing }),
                wind, sea_state, weather, visibility,
            }
        }
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(b in bulletin()) {
            let reg = AreaRegistry::builtin();
            prop_assert!(validate(&b, &reg).is_empty(), "{:?}", validate(&b, &reg));
            let text = render_bulletin(&b, &reg).unwrap();
            prop_assert_eq!(parse_bulletin(&text, &reg).unwrap(), b);
        }

        #[test]
        fn parse_never_panics(s in "\\PC{0,80}") {
            let _ = parse_bulletin(&s, &AreaRegistry::builtin());
        }

        #[test]
        fn error_spans_stay_in_bounds(s in "[A-Za-z0-9 ,.]{0,60}") {
            if let Err(e) = parse_bulletin(&s, &AreaRegistry::builtin()) {
                let span = e.span();
                prop_assert!(span.start <= span.end && span.end <= s.len());
            }
        }
    }
}
