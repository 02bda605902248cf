//! Classification of continuous values into the bulletin vocabularies
//! (Beaufort force, Douglas sea state, visibility class, 8-point compass,
//! weather phrase) and the colour scales used when rendering frames.
//!
//! All bins are lower-inclusive, upper-exclusive.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::grid::Variable;

const BUILTIN_WEATHER_CODES: &str = include_str!("../data/weather_codes.json");

/// Longest permitted weather phrase, in words.
pub const MAX_WEATHER_WORDS: usize = 5;

/// One nautical mile in metres.
pub const NAUTICAL_MILE_M: f64 = 1852.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("{what} value {value} is outside the valid range")]
    ValueOutOfRange { what: &'static str, value: f64 },
    #[error("weather code {0} is not in the code map")]
    UnknownWeatherCode(i64),
    #[error("no {mode} scale for attribute {attribute:?}")]
    UnknownAttribute { attribute: String, mode: ScaleMode },
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("invalid weather code map: {0}")]
    InvalidCodeMap(String),
}

/// Lower bounds, in knots, of Beaufort forces 0 to 12.
pub const BEAUFORT_LOWER_KN: [f64; 13] = [
    0.0, 1.0, 4.0, 7.0, 11.0, 17.0, 22.0, 28.0, 34.0, 41.0, 48.0, 56.0, 64.0,
];

/// Force at which a gale warning is required.
pub const GALE_FORCE: u8 = 8;

pub fn classify_beaufort(speed_kn: f64) -> Result<u8, ScaleError> {
    if !(speed_kn >= 0.0) {
        return Err(ScaleError::ValueOutOfRange {
            what: "wind speed",
            value: speed_kn,
        });
    }
    let force = BEAUFORT_LOWER_KN.iter().rposition(|&lo| speed_kn >= lo).unwrap_or(0);
    Ok(force as u8)
}

/// A vocabulary with a fixed scale order.
pub trait Label: Copy + Eq + fmt::Debug + 'static {
    const ALL: &'static [Self];

    fn as_str(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("label in ALL")
    }

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Case-insensitive, whitespace-normalised match.
    fn parse_label(s: &str) -> Option<Self> {
        let norm: String = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        Self::ALL.iter().copied().find(|l| l.as_str() == norm)
    }
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl Label for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <$name as Label>::parse_label(&s)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown {} label {s:?}", stringify!($name))))
            }
        }
    };
}

label_enum!(
    /// Douglas sea state, calmest first.
    SeaState {
        Smooth => "smooth",
        Slight => "slight",
        Moderate => "moderate",
        Rough => "rough",
        VeryRough => "very rough",
        High => "high",
        VeryHigh => "very high",
        Phenomenal => "phenomenal",
    }
);

label_enum!(
    /// Visibility class, worst first.
    VisibilityClass {
        Fog => "fog",
        Poor => "poor",
        Moderate => "moderate",
        Good => "good",
    }
);

label_enum!(
    /// 8-point wind-from direction, clockwise from north.
    Compass {
        Northerly => "northerly",
        Northeasterly => "northeasterly",
        Easterly => "easterly",
        Southeasterly => "southeasterly",
        Southerly => "southerly",
        Southwesterly => "southwesterly",
        Westerly => "westerly",
        Northwesterly => "northwesterly",
    }
);

/// Lower bounds in metres of each [`SeaState`].
pub const DOUGLAS_LOWER_M: [f64; 8] = [0.0, 0.5, 1.25, 2.5, 4.0, 6.0, 9.0, 14.0];

/// Lower bounds in metres of each [`VisibilityClass`]: fog below 1000 m,
/// poor below 2 nmi, moderate below 5 nmi, good beyond.
pub const VISIBILITY_LOWER_M: [f64; 4] = [0.0, 1000.0, 2.0 * NAUTICAL_MILE_M, 5.0 * NAUTICAL_MILE_M];

fn lower_bound_index(bounds: &[f64], value: f64) -> usize {
    bounds.iter().rposition(|&lo| value >= lo).unwrap_or(0)
}

pub fn classify_douglas(height_m: f64) -> Result<SeaState, ScaleError> {
    if !(height_m >= 0.0) {
        return Err(ScaleError::ValueOutOfRange {
            what: "wave height",
            value: height_m,
        });
    }
    Ok(SeaState::ALL[lower_bound_index(&DOUGLAS_LOWER_M, height_m)])
}

pub fn classify_visibility(vis_m: f64) -> Result<VisibilityClass, ScaleError> {
    if !(vis_m >= 0.0) {
        return Err(ScaleError::ValueOutOfRange {
            what: "visibility",
            value: vis_m,
        });
    }
    Ok(VisibilityClass::ALL[lower_bound_index(&VISIBILITY_LOWER_M, vis_m)])
}

/// 45° sectors centred on the eight headings; north is `[337.5, 360] ∪ [0, 22.5)`.
pub fn compass_8(direction_deg: f64) -> Result<Compass, ScaleError> {
    if !(0.0..=360.0).contains(&direction_deg) {
        return Err(ScaleError::ValueOutOfRange {
            what: "wind direction",
            value: direction_deg,
        });
    }
    let sector = ((direction_deg + 22.5) / 45.0).floor() as usize % 8;
    Ok(Compass::ALL[sector])
}

/// Integer weather code → short phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherCodeMap {
    entries: BTreeMap<i64, String>,
}

#[derive(Serialize, Deserialize)]
struct CodeEntry {
    code: i64,
    phrase: String,
}

pub fn word_count(phrase: &str) -> usize {
    phrase.split_whitespace().count()
}

impl WeatherCodeMap {
    pub fn new(pairs: impl IntoIterator<Item = (i64, String)>) -> Result<Self, ScaleError> {
        let mut entries = BTreeMap::new();
        for (code, phrase) in pairs {
            let phrase = phrase.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if phrase.is_empty() || word_count(&phrase) > MAX_WEATHER_WORDS {
                return Err(ScaleError::InvalidCodeMap(format!(
                    "phrase for code {code} must have 1 to {MAX_WEATHER_WORDS} words"
                )));
            }
            if entries.insert(code, phrase).is_some() {
                return Err(ScaleError::InvalidCodeMap(format!("duplicate code {code}")));
            }
        }
        if entries.is_empty() {
            return Err(ScaleError::InvalidCodeMap("empty map".into()));
        }
        Ok(WeatherCodeMap { entries })
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_WEATHER_CODES).expect("shipped weather_codes.json is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ScaleError> {
        let raw: Vec<CodeEntry> =
            serde_json::from_str(text).map_err(|e| ScaleError::InvalidCodeMap(e.to_string()))?;
        Self::new(raw.into_iter().map(|e| (e.code, e.phrase)))
    }

    pub fn load(path: &Path) -> Result<Self, ScaleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScaleError::InvalidCodeMap(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<CodeEntry> = self
            .entries
            .iter()
            .map(|(&code, phrase)| CodeEntry {
                code,
                phrase: phrase.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("code map serializes")
    }

    pub fn phrase(&self, code: i64) -> Option<&str> {
        self.entries.get(&code).map(String::as_str)
    }

    pub fn codes(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    /// Distinct phrases ordered by their lowest code. Position in this list is
    /// the phrase's place in scale order, which the summariser uses when it
    /// has to merge neighbouring sub-periods.
    pub fn phrases(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.entries
            .values()
            .filter(|p| seen.insert(p.as_str()))
            .map(String::as_str)
            .collect()
    }
}

pub fn classify_weather(code: i64, map: &WeatherCodeMap) -> Result<&str, ScaleError> {
    map.phrase(code).ok_or(ScaleError::UnknownWeatherCode(code))
}

/// 8-bit RGB colour, serialised as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    /// Reserved for NaN / masked-out cells; never part of a palette.
    pub const BACKGROUND: Rgb = Rgb([128, 128, 128]);
    /// Reserved for graticule lines and labels.
    pub const OVERLAY: Rgb = Rgb([0, 0, 0]);

    pub fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mut out = [0u8; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.0[i] as f64;
            let b = other.0[i] as f64;
            *o = (a + (b - a) * t).round() as u8;
        }
        Rgb(out)
    }

    fn from_hsv(h: f64, s: f64, v: f64) -> Rgb {
        let c = v * s;
        let hp = (h % 360.0) / 60.0;
        let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
        let (r, g, b) = match hp as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = v - c;
        let to8 = |u: f64| ((u + m) * 255.0).round() as u8;
        Rgb([to8(r), to8(g), to8(b)])
    }

    /// Relative luminance proxy (Rec. 601 weights).
    pub fn luma(self) -> f64 {
        0.299 * self.0[0] as f64 + 0.587 * self.0[1] as f64 + 0.114 * self.0[2] as f64
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for Rgb {
    type Err = ScaleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        let bad = || ScaleError::InvalidScale(format!("bad colour {s:?}"));
        if hex.len() != 6 {
            return Err(bad());
        }
        let mut out = [0u8; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        Ok(Rgb(out))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMode {
    Categorical,
    Continuous,
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMode::Categorical => "categorical",
            ScaleMode::Continuous => "continuous",
        })
    }
}

impl FromStr for ScaleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "categorical" => Ok(ScaleMode::Categorical),
            "continuous" => Ok(ScaleMode::Continuous),
            other => Err(format!("unknown mode {other:?} (expected categorical|continuous)")),
        }
    }
}

mod bound {
    //! Infinite bounds travel as JSON `null`.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn lower<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }

    pub fn upper<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    #[serde(serialize_with = "bound::serialize", deserialize_with = "bound::lower")]
    pub lower: f64,
    #[serde(serialize_with = "bound::serialize", deserialize_with = "bound::upper")]
    pub upper: f64,
    pub label: String,
    pub color: Rgb,
}

/// Ordered value bins with labels and display colours.
///
/// In continuous mode the bins are ramp segments and [`color_for`] blends
/// from a bin's colour towards the next one.
///
/// [`color_for`]: CategoricalScale::color_for
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalScale {
    pub attribute: Variable,
    pub mode: ScaleMode,
    /// Values wrap with this period (directions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    pub bins: Vec<Bin>,
}

impl CategoricalScale {
    pub fn validate(&self) -> Result<(), ScaleError> {
        let err = |m: String| Err(ScaleError::InvalidScale(format!("{} {}: {m}", self.attribute, self.mode)));
        if self.bins.is_empty() {
            return err("no bins".into());
        }
        let mut labels = HashSet::new();
        for (i, b) in self.bins.iter().enumerate() {
            if !(b.lower < b.upper) {
                return err(format!("bin {i} bounds not ascending"));
            }
            if i > 0 && self.bins[i - 1].upper != b.lower {
                return err(format!("bin {i} not contiguous with bin {}", i - 1));
            }
            if i > 0 && b.lower.is_infinite() || i + 1 < self.bins.len() && b.upper.is_infinite() {
                return err(format!("bin {i} has an interior infinite bound"));
            }
            if !labels.insert(b.label.as_str()) {
                return err(format!("duplicate label {:?}", b.label));
            }
            if b.color == Rgb::BACKGROUND || b.color == Rgb::OVERLAY {
                return err(format!("bin {i} uses a reserved colour"));
            }
        }
        if let Some(p) = self.period {
            let span = self.bins.last().unwrap().upper - self.bins[0].lower;
            if (span - p).abs() > 1e-9 {
                return err("periodic bins must span exactly one period".into());
            }
        }
        Ok(())
    }

    fn normalize(&self, value: f64) -> f64 {
        match self.period {
            Some(p) => {
                let start = self.bins[0].lower;
                start + (value - start).rem_euclid(p)
            }
            None => value,
        }
    }

    /// Index of the bin holding `value`.
    pub fn classify(&self, value: f64) -> Result<usize, ScaleError> {
        if value.is_nan() {
            return Err(ScaleError::ValueOutOfRange {
                what: "scale input",
                value,
            });
        }
        let v = self.normalize(value);
        self.bins
            .iter()
            .position(|b| v >= b.lower && v < b.upper)
            .ok_or(ScaleError::ValueOutOfRange {
                what: "scale input",
                value,
            })
    }

    pub fn label_for(&self, value: f64) -> Result<&str, ScaleError> {
        Ok(&self.bins[self.classify(value)?].label)
    }

    pub fn color_for(&self, value: f64) -> Result<Rgb, ScaleError> {
        let i = self.classify(value)?;
        let bin = &self.bins[i];
        match self.mode {
            ScaleMode::Categorical => Ok(bin.color),
            ScaleMode::Continuous => {
                let next = self.bins.get(i + 1).map(|b| b.color).unwrap_or(bin.color);
                if bin.lower.is_finite() && bin.upper.is_finite() {
                    let t = (self.normalize(value) - bin.lower) / (bin.upper - bin.lower);
                    Ok(bin.color.lerp(next, t))
                } else {
                    Ok(bin.color)
                }
            }
        }
    }

    pub fn palette(&self) -> Vec<Rgb> {
        self.bins.iter().map(|b| b.color).collect()
    }
}

/// `n` evenly spaced, saturated hues.
fn distinct_hues(n: usize) -> Vec<Rgb> {
    (0..n)
        .map(|i| Rgb::from_hsv(i as f64 * 360.0 / n as f64, 0.8, 0.9))
        .collect()
}

/// Dark-to-light ramp through blue, teal and yellow.
fn luminance_ramp(n: usize) -> Vec<Rgb> {
    const STOPS: [Rgb; 4] = [
        Rgb([20, 24, 82]),
        Rgb([33, 113, 181]),
        Rgb([65, 182, 160]),
        Rgb([250, 235, 140]),
    ];
    (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let pos = t * (STOPS.len() - 1) as f64;
            let k = (pos.floor() as usize).min(STOPS.len() - 2);
            STOPS[k].lerp(STOPS[k + 1], pos - k as f64)
        })
        .collect()
}

fn bins_from_bounds(lowers: &[f64], labels: &[String], colors: &[Rgb], last_upper: f64) -> Vec<Bin> {
    lowers
        .iter()
        .enumerate()
        .map(|(i, &lower)| Bin {
            lower,
            upper: lowers.get(i + 1).copied().unwrap_or(last_upper),
            label: labels[i].clone(),
            color: colors[i],
        })
        .collect()
}

/// Pressure bin edges: 4 hPa bins from 940 to 1048 hPa, open-ended outside.
pub const PRESSURE_BIN_HPA: f64 = 4.0;
pub const PRESSURE_MIN_HPA: f64 = 940.0;
pub const PRESSURE_MAX_HPA: f64 = 1050.0;

fn pressure_categorical() -> CategoricalScale {
    let mut lowers = vec![f64::NEG_INFINITY];
    let mut edge = PRESSURE_MIN_HPA;
    while edge < PRESSURE_MAX_HPA {
        lowers.push(edge);
        edge += PRESSURE_BIN_HPA;
    }
    let labels: Vec<String> = lowers
        .iter()
        .enumerate()
        .map(|(i, &lo)| {
            if i == 0 {
                format!("<{PRESSURE_MIN_HPA}")
            } else if i + 1 == lowers.len() {
                format!(">={lo}")
            } else {
                format!("{lo}-{}", lo + PRESSURE_BIN_HPA)
            }
        })
        .collect();
    let colors = luminance_ramp(lowers.len());
    CategoricalScale {
        attribute: Variable::Pressure,
        mode: ScaleMode::Categorical,
        period: None,
        bins: bins_from_bounds(&lowers, &labels, &colors, f64::INFINITY),
    }
}

fn categorical_from_labels(attribute: Variable, lowers: &[f64], labels: Vec<String>) -> CategoricalScale {
    let colors = distinct_hues(lowers.len());
    CategoricalScale {
        attribute,
        mode: ScaleMode::Categorical,
        period: None,
        bins: bins_from_bounds(lowers, &labels, &colors, f64::INFINITY),
    }
}

fn direction_scale(mode: ScaleMode) -> CategoricalScale {
    let lowers: Vec<f64> = (0..8).map(|i| -22.5 + 45.0 * i as f64).collect();
    let labels = Compass::ALL.iter().map(|c| c.as_str().to_string()).collect::<Vec<_>>();
    let colors = distinct_hues(8);
    let mut bins = bins_from_bounds(&lowers, &labels, &colors, 337.5);
    if mode == ScaleMode::Continuous {
        // Continuous directions blend around the circle; the last segment
        // blends back into the first colour via the period.
        for b in bins.iter_mut() {
            b.label = format!("{}", b.lower + 22.5);
        }
    }
    CategoricalScale {
        attribute: Variable::WindDirection,
        mode,
        period: Some(360.0),
        bins,
    }
}

/// Physical range covered by each continuous ramp.
pub fn continuous_range(attribute: Variable) -> (f64, f64) {
    match attribute {
        Variable::WindSpeed => (0.0, 70.0),
        Variable::WindDirection => (0.0, 360.0),
        Variable::WaveHeight => (0.0, 15.0),
        Variable::Visibility => (0.0, 20_000.0),
        Variable::WeatherCode => (0.0, 30.0),
        Variable::Pressure => (PRESSURE_MIN_HPA, PRESSURE_MAX_HPA),
    }
}

const RAMP_SEGMENTS: usize = 10;

fn continuous(attribute: Variable) -> CategoricalScale {
    if attribute == Variable::WindDirection {
        return direction_scale(ScaleMode::Continuous);
    }
    let (lo, hi) = continuous_range(attribute);
    let step = (hi - lo) / RAMP_SEGMENTS as f64;
    let mut lowers = vec![f64::NEG_INFINITY];
    lowers.extend((0..=RAMP_SEGMENTS).map(|i| lo + step * i as f64));
    let labels = lowers
        .iter()
        .map(|l| if l.is_finite() { format!("{l}") } else { "below".to_string() })
        .collect::<Vec<_>>();
    let mut colors = luminance_ramp(RAMP_SEGMENTS + 1);
    colors.insert(0, colors[0]);
    CategoricalScale {
        attribute,
        mode: ScaleMode::Continuous,
        period: None,
        bins: bins_from_bounds(&lowers, &labels, &colors, f64::INFINITY),
    }
}

fn categorical(attribute: Variable, codes: &WeatherCodeMap) -> CategoricalScale {
    match attribute {
        Variable::WindSpeed => categorical_from_labels(
            attribute,
            &BEAUFORT_LOWER_KN,
            (0..=12).map(|f| f.to_string()).collect(),
        ),
        Variable::WindDirection => direction_scale(ScaleMode::Categorical),
        Variable::WaveHeight => categorical_from_labels(
            attribute,
            &DOUGLAS_LOWER_M,
            SeaState::ALL.iter().map(|s| s.as_str().to_string()).collect(),
        ),
        Variable::Visibility => categorical_from_labels(
            attribute,
            &VISIBILITY_LOWER_M,
            VisibilityClass::ALL.iter().map(|s| s.as_str().to_string()).collect(),
        ),
        Variable::WeatherCode => {
            let codes: Vec<i64> = codes.codes().collect();
            let lowers: Vec<f64> = codes.iter().map(|&c| c as f64).collect();
            let labels = codes.iter().map(|c| c.to_string()).collect();
            let mut scale = categorical_from_labels(attribute, &lowers, labels);
            // Integer codes: the last bin is one code wide.
            if let Some(last) = scale.bins.last_mut() {
                last.upper = last.lower + 1.0;
            }
            scale
        }
        Variable::Pressure => pressure_categorical(),
    }
}

/// Every scale used for rendering, keyed by attribute and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    pub scales: Vec<CategoricalScale>,
}

impl ScaleSet {
    /// Scales derived from the classifier tables and the given code map.
    pub fn standard(codes: &WeatherCodeMap) -> Self {
        let mut scales = Vec::new();
        for v in Variable::ALL {
            scales.push(categorical(v, codes));
            scales.push(continuous(v));
        }
        ScaleSet { scales }
    }

    pub fn builtin() -> Self {
        Self::standard(&WeatherCodeMap::builtin())
    }

    pub fn from_json(text: &str) -> Result<Self, ScaleError> {
        let set: ScaleSet = serde_json::from_str(text).map_err(|e| ScaleError::InvalidScale(e.to_string()))?;
        for s in &set.scales {
            s.validate()?;
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, ScaleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScaleError::InvalidScale(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scales serialize")
    }

    pub fn get(&self, attribute: Variable, mode: ScaleMode) -> Result<&CategoricalScale, ScaleError> {
        self.scales
            .iter()
            .find(|s| s.attribute == attribute && s.mode == mode)
            .ok_or(ScaleError::UnknownAttribute {
                attribute: attribute.to_string(),
                mode,
            })
    }

    /// Lookup by attribute name as written in config files and headers.
    pub fn scale_for(&self, attribute: &str, mode: ScaleMode) -> Result<&CategoricalScale, ScaleError> {
        let unknown = || ScaleError::UnknownAttribute {
            attribute: attribute.to_string(),
            mode,
        };
        let v: Variable = attribute.parse().map_err(|_| unknown())?;
        self.get(v, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beaufort_examples() {
        assert_eq!(classify_beaufort(0.0), Ok(0));
        assert_eq!(classify_beaufort(35.0), Ok(8));
        assert_eq!(classify_beaufort(64.0), Ok(12));
        assert_eq!(classify_beaufort(63.99), Ok(11));
        assert_eq!(classify_beaufort(200.0), Ok(12));
        assert!(classify_beaufort(-0.1).is_err());
        assert!(classify_beaufort(f64::NAN).is_err());
    }

    #[test]
    fn douglas_examples() {
        assert_eq!(classify_douglas(0.05), Ok(SeaState::Smooth));
        assert_eq!(classify_douglas(3.0), Ok(SeaState::Rough));
        assert_eq!(classify_douglas(15.0), Ok(SeaState::Phenomenal));
        assert!(classify_douglas(-1.0).is_err());
    }

    #[test]
    fn visibility_examples() {
        assert_eq!(classify_visibility(999.0), Ok(VisibilityClass::Fog));
        assert_eq!(classify_visibility(1000.0), Ok(VisibilityClass::Poor));
        assert_eq!(classify_visibility(3704.0), Ok(VisibilityClass::Moderate));
        assert_eq!(classify_visibility(12000.0), Ok(VisibilityClass::Good));
        assert!(classify_visibility(-5.0).is_err());
    }

    #[test]
    fn compass_examples() {
        assert_eq!(compass_8(0.0), Ok(Compass::Northerly));
        assert_eq!(compass_8(200.0), Ok(Compass::Southerly));
        assert_eq!(compass_8(22.5), Ok(Compass::Northeasterly));
        assert_eq!(compass_8(337.5), Ok(Compass::Northerly));
        assert_eq!(compass_8(360.0), Ok(Compass::Northerly));
        assert!(compass_8(360.5).is_err());
        assert!(compass_8(-1.0).is_err());
    }

    #[test]
    fn weather_lookup() {
        let map = WeatherCodeMap::new([(12, "rain".to_string()), (29, "Thundery  showers".to_string())]).unwrap();
        assert_eq!(classify_weather(12, &map), Ok("rain"));
        assert_eq!(classify_weather(29, &map), Ok("thundery showers"));
        assert_eq!(classify_weather(255, &map), Err(ScaleError::UnknownWeatherCode(255)));
        assert!(WeatherCodeMap::new([(1, "one two three four five six".to_string())]).is_err());
        assert!(WeatherCodeMap::new([(1, "a".to_string()), (1, "b".to_string())]).is_err());
    }

    #[test]
    fn builtin_code_map_phrases_are_short() {
        let map = WeatherCodeMap::builtin();
        assert_eq!(map.codes().count(), 31);
        assert!(map.phrases().iter().all(|p| word_count(p) <= MAX_WEATHER_WORDS));
        assert_eq!(map.phrases()[0], "fair");
    }

    #[test]
    fn scale_shapes() {
        let set = ScaleSet::builtin();
        let vis = set.get(Variable::Visibility, ScaleMode::Categorical).unwrap();
        assert_eq!(vis.bins.len(), 4);
        let colors: HashSet<Rgb> = vis.palette().into_iter().collect();
        assert_eq!(colors.len(), 4);
        assert_eq!(set.get(Variable::WindSpeed, ScaleMode::Categorical).unwrap().bins.len(), 13);
        let p = set.get(Variable::Pressure, ScaleMode::Categorical).unwrap();
        assert_eq!(p.bins[1].lower, 940.0);
        assert!(p.bins[1..p.bins.len() - 1].iter().all(|b| b.upper - b.lower == 4.0));
        assert_eq!(p.bins.last().unwrap().lower, 1048.0);
        for s in &set.scales {
            s.validate().unwrap();
        }
        assert!(matches!(
            set.scale_for("sea_temperature", ScaleMode::Categorical),
            Err(ScaleError::UnknownAttribute { .. })
        ));
    }

    #[test]
    fn pressure_palette_darkens_with_lower_pressure() {
        let p = ScaleSet::builtin().get(Variable::Pressure, ScaleMode::Categorical).unwrap().clone();
        let lumas: Vec<f64> = p.palette().iter().map(|c| c.luma()).collect();
        assert!(lumas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn direction_scale_wraps() {
        let set = ScaleSet::builtin();
        let d = set.get(Variable::WindDirection, ScaleMode::Categorical).unwrap();
        assert_eq!(d.label_for(350.0).unwrap(), "northerly");
        assert_eq!(d.label_for(360.0).unwrap(), "northerly");
        assert_eq!(d.label_for(10.0).unwrap(), "northerly");
        assert_eq!(d.label_for(200.0).unwrap(), "southerly");
    }

    #[test]
    fn continuous_ramp_interpolates() {
        let set = ScaleSet::builtin();
        let s = set.get(Variable::WaveHeight, ScaleMode::Continuous).unwrap();
        let a = s.color_for(0.0).unwrap();
        let b = s.color_for(0.75).unwrap();
        let c = s.color_for(1.5).unwrap();
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_eq!(s.color_for(100.0).unwrap(), s.color_for(15.0).unwrap());
    }

    #[test]
    fn shipped_scales_json_matches_builtin() {
        let shipped = include_str!("../data/scales.json");
        // regenerate with `cargo run --example dump_scales > data/scales.json`
        assert!(ScaleSet::from_json(shipped).unwrap() == ScaleSet::builtin(), "data/scales.json is stale");
    }

    #[test]
    fn rgb_hex_round_trip() {
        let c: Rgb = "#0a80ff".parse().unwrap();
        assert_eq!(c, Rgb([10, 128, 255]));
        assert_eq!(c.to_string(), "#0a80ff");
        assert!("#12345".parse::<Rgb>().is_err());
    }
}
