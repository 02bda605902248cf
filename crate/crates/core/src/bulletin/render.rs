use thiserror::Error;

use super::{validate, Attribute, Bulletin, StateClause, Timing, Violation, WeatherClause, WindClause};
use crate::area::AreaRegistry;
use crate::categorical::Label;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("bulletin fails validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Violation>),
}

fn with_timing(body: String, timing: Option<Timing>) -> String {
    match timing {
        None => body,
        Some(t) if t.is_prefix() => format!("{} {body}", t.as_str()),
        Some(t) => format!("{body} {}", t.as_str()),
    }
}

fn wind_clause(w: &WindClause) -> String {
    let body = if w.force_low == w.force_high {
        format!("{} {}", w.direction.as_str(), w.force_low)
    } else {
        format!("{} {} to {}", w.direction.as_str(), w.force_low, w.force_high)
    };
    with_timing(body, w.timing)
}

fn state_clause<L: Label>(c: &StateClause<L>) -> String {
    let body = match c.label_high {
        Some(h) => format!("{} or {}", c.label.as_str(), h.as_str()),
        None => c.label.as_str().to_string(),
    };
    with_timing(body, c.timing)
}

fn weather_clause(w: &WeatherClause) -> String {
    with_timing(w.phrase.clone(), w.timing)
}

fn sentence(clauses: impl IntoIterator<Item = String>) -> String {
    let joined = clauses.into_iter().collect::<Vec<_>>().join(", ");
    let mut chars = joined.chars();
    match chars.next() {
        Some(c) => format!("{}{}.", c.to_uppercase(), chars.as_str()),
        None => String::new(),
    }
}

/// The sentence for one attribute, e.g. "Moderate or rough.".
pub fn render_attribute(b: &Bulletin, attribute: Attribute) -> String {
    match attribute {
        Attribute::Wind => sentence(b.wind.iter().map(wind_clause)),
        Attribute::SeaState => sentence(b.sea_state.iter().map(state_clause)),
        Attribute::Weather if b.weather.is_empty() => "Fair.".to_string(),
        Attribute::Weather => sentence(b.weather.iter().map(weather_clause)),
        Attribute::Visibility => sentence(b.visibility.iter().map(state_clause)),
    }
}

/// Renders everything after the area list, without validating.
pub fn render_body(b: &Bulletin) -> String {
    let mut parts = Vec::with_capacity(5);
    if let Some(g) = &b.gale {
        parts.push(sentence([format!("{} {}", g.severity.as_str(), g.timing.as_str())]));
    }
    parts.extend(Attribute::ALL.iter().map(|&a| render_attribute(b, a)));
    parts.join(" ")
}

/// Canonical text for a valid bulletin.
pub fn render_bulletin(b: &Bulletin, registry: &AreaRegistry) -> Result<String, RenderError> {
    let violations = validate(b, registry);
    if !violations.is_empty() {
        return Err(RenderError::ValidationFailed(violations));
    }
    Ok(format!("{}. {}", b.areas.join(", "), render_body(b)))
}
