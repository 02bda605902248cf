//! Video-frame corpora: per-attribute frame sets and shuffled split manifests.

mod manifest;
mod raster;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ImageFormat, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::area::SeaArea;
use crate::categorical::{CategoricalScale, Rgb, ScaleError, ScaleMode, ScaleSet};
use crate::grid::{crop_domain, BBox, GridError, GridField, Variable, HOURS};
use crate::overlay::LabelGrid;

pub use manifest::{
    build_corpus, split_sizes, CorpusEntry, CorpusManifest, Orphan, PairedEntry, Pairing, Split,
    SplitCounts, CORPUS_FILE, SPLIT_PERCENT,
};
pub use raster::{
    pixel_to_col, pixel_to_row_from_north, rasterize_frame, rasterize_slice, OverlayMask, RasterSize,
};

pub const FPS: u32 = 24;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("raster size {width}x{height} is not 10:6")]
    AspectRatioInvalid { width: u32, height: u32 },
    #[error("duplicate corpus entry id {0:?}")]
    DuplicateEntry(String),
    #[error("corpus has no entries")]
    EmptyCorpus,
    #[error("no field for {0}")]
    MissingField(Variable),
    #[error("no grid cells fall inside {0}")]
    EmptyMask(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("image encoding failed: {0}")]
    Image(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// What a frame set encodes: one gridded variable, or wind direction and
/// speed together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameAttribute {
    Wind,
    WindSpeed,
    WindDirection,
    WaveHeight,
    Visibility,
    WeatherCode,
    Pressure,
}

impl FrameAttribute {
    /// The attribute videos of an area corpus entry, plus pressure.
    pub const CORPUS: [FrameAttribute; 5] = [
        FrameAttribute::Wind,
        FrameAttribute::WaveHeight,
        FrameAttribute::WeatherCode,
        FrameAttribute::Visibility,
        FrameAttribute::Pressure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FrameAttribute::Wind => "wind",
            FrameAttribute::WindSpeed => "wind_speed",
            FrameAttribute::WindDirection => "wind_direction",
            FrameAttribute::WaveHeight => "wave_height",
            FrameAttribute::Visibility => "visibility",
            FrameAttribute::WeatherCode => "weather_code",
            FrameAttribute::Pressure => "pressure",
        }
    }

    /// Variables rendered, in block order.
    pub fn variables(self) -> Vec<Variable> {
        match self {
            FrameAttribute::Wind => vec![Variable::WindDirection, Variable::WindSpeed],
            FrameAttribute::WindSpeed => vec![Variable::WindSpeed],
            FrameAttribute::WindDirection => vec![Variable::WindDirection],
            FrameAttribute::WaveHeight => vec![Variable::WaveHeight],
            FrameAttribute::Visibility => vec![Variable::Visibility],
            FrameAttribute::WeatherCode => vec![Variable::WeatherCode],
            FrameAttribute::Pressure => vec![Variable::Pressure],
        }
    }

    pub fn duration_s(self) -> u32 {
        self.variables().len() as u32
    }
}

impl From<Variable> for FrameAttribute {
    fn from(v: Variable) -> Self {
        match v {
            Variable::WindSpeed => FrameAttribute::WindSpeed,
            Variable::WindDirection => FrameAttribute::WindDirection,
            Variable::WaveHeight => FrameAttribute::WaveHeight,
            Variable::Visibility => FrameAttribute::Visibility,
            Variable::WeatherCode => FrameAttribute::WeatherCode,
            Variable::Pressure => FrameAttribute::Pressure,
        }
    }
}

impl fmt::Display for FrameAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FrameAttribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "wind" {
            return Ok(FrameAttribute::Wind);
        }
        s.parse::<Variable>()
            .map(FrameAttribute::from)
            .map_err(|_| format!("unknown frame attribute {s:?}"))
    }
}

/// Block order of a multi-variable video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Sequential,
}

/// Rendered frames of one attribute for one area group (or the full domain).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub attribute: FrameAttribute,
    pub areas: Vec<String>,
    pub mode: ScaleMode,
    pub fps: u32,
    pub duration_s: u32,
    pub size: RasterSize,
    pub layout: Option<Layout>,
    pub palette: Vec<Rgb>,
    pub frames: Vec<RgbImage>,
}

impl FrameSet {
    pub fn area(&self) -> Option<String> {
        (!self.areas.is_empty()).then(|| self.areas.join(", "))
    }

    pub fn check(&self) -> Result<(), String> {
        if self.frames.len() != (self.fps * self.duration_s) as usize {
            return Err(format!(
                "{} frames for {} fps x {} s",
                self.frames.len(),
                self.fps,
                self.duration_s
            ));
        }
        if self.size.width * 6 != self.size.height * 10 {
            return Err(format!("{}x{} is not 10:6", self.size.width, self.size.height));
        }
        if let Some(f) = self
            .frames
            .iter()
            .find(|f| f.dimensions() != (self.size.width, self.size.height))
        {
            return Err(format!("frame is {:?}", f.dimensions()));
        }
        Ok(())
    }
}

fn check_hours(field: &GridField) -> Result<(), CorpusError> {
    let nt = field.values.dim().0;
    if nt != HOURS || field.times.len() != HOURS {
        return Err(GridError::TimeAxisInvalid(format!(
            "{} has {nt} timesteps, expected {HOURS}",
            field.variable
        ))
        .into());
    }
    Ok(())
}

/// Union bounding box of the area rings, padded by `pad` degrees.
fn areas_bbox(areas: &[&SeaArea], pad: (f64, f64)) -> BBox {
    let mut b = BBox {
        lat_min: f64::INFINITY,
        lat_max: f64::NEG_INFINITY,
        lon_min: f64::INFINITY,
        lon_max: f64::NEG_INFINITY,
    };
    for [lat, lon] in areas.iter().flat_map(|a| a.ring.iter().copied()) {
        b.lat_min = b.lat_min.min(lat);
        b.lat_max = b.lat_max.max(lat);
        b.lon_min = b.lon_min.min(lon);
        b.lon_max = b.lon_max.max(lon);
    }
    BBox {
        lat_min: b.lat_min - pad.0,
        lat_max: b.lat_max + pad.0,
        lon_min: b.lon_min - pad.1,
        lon_max: b.lon_max + pad.1,
    }
}

/// Cropped field and its cell mask for a group of areas.
fn area_view(field: &GridField, areas: &[&SeaArea]) -> Result<(GridField, Vec<bool>), CorpusError> {
    let cropped = crop_domain(field, &areas_bbox(areas, field.spacing()))?;
    let (_, ny, nx) = cropped.values.dim();
    let mut keep = vec![false; ny * nx];
    for area in areas {
        for (i, j) in cropped.cells_in(area) {
            keep[i * nx + j] = true;
        }
    }
    if !keep.contains(&true) {
        let names: Vec<&str> = areas.iter().map(|a| a.name.as_str()).collect();
        return Err(CorpusError::EmptyMask(names.join(", ")));
    }
    Ok((cropped, keep))
}

fn render_block(
    field: &GridField,
    keep: Option<&[bool]>,
    scale: &CategoricalScale,
    size: RasterSize,
) -> Result<Vec<RgbImage>, CorpusError> {
    (0..HOURS)
        .into_par_iter()
        .map(|t| rasterize_frame(field, t, keep, scale, size))
        .collect()
}

fn palette_of(scales: &[&CategoricalScale]) -> Vec<Rgb> {
    let mut out: Vec<Rgb> = Vec::new();
    for c in scales.iter().flat_map(|s| s.palette()) {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Masked frames of `attribute` over a group of sea areas. Pressure is
/// routed to [`render_pressure_frames`] and ignores `areas`.
pub fn encode_attribute_video(
    fields: &BTreeMap<Variable, GridField>,
    attribute: FrameAttribute,
    areas: &[&SeaArea],
    mode: ScaleMode,
    scales: &ScaleSet,
    size: RasterSize,
) -> Result<FrameSet, CorpusError> {
    if attribute == FrameAttribute::Pressure {
        let field = fields
            .get(&Variable::Pressure)
            .ok_or(CorpusError::MissingField(Variable::Pressure))?;
        return render_pressure_frames(field, mode, scales, size);
    }
    let size = RasterSize::new(size.width, size.height)?;
    let mut frames = Vec::with_capacity(HOURS * attribute.variables().len());
    let mut used = Vec::new();
    for variable in attribute.variables() {
        let field = fields.get(&variable).ok_or(CorpusError::MissingField(variable))?;
        check_hours(field)?;
        let scale = scales.get(variable, mode)?;
        used.push(scale);
        if areas.is_empty() {
            frames.extend(render_block(field, None, scale, size)?);
        } else {
            let (cropped, keep) = area_view(field, areas)?;
            frames.extend(render_block(&cropped, Some(&keep), scale, size)?);
        }
    }
    Ok(FrameSet {
        attribute,
        areas: areas.iter().map(|a| a.name.clone()).collect(),
        mode,
        fps: FPS,
        duration_s: attribute.duration_s(),
        size,
        layout: (attribute == FrameAttribute::Wind).then_some(Layout::Sequential),
        palette: palette_of(&used),
        frames,
    })
}

/// Full-domain pressure frames with the labelled 5° graticule burned in.
pub fn render_pressure_frames(
    field: &GridField,
    mode: ScaleMode,
    scales: &ScaleSet,
    size: RasterSize,
) -> Result<FrameSet, CorpusError> {
    let size = RasterSize::new(size.width, size.height)?;
    check_hours(field)?;
    let cropped = crop_domain(field, &BBox::FORECAST_DOMAIN)?;
    let scale = scales.get(Variable::Pressure, mode)?;
    let grid = LabelGrid::STANDARD;
    let overlay = OverlayMask::new(&grid, &cropped.extent(), size);
    let frames = (0..HOURS)
        .into_par_iter()
        .map(|t| {
            let mut img = rasterize_frame(&cropped, t, None, scale, size)?;
            overlay.apply(&mut img);
            Ok(img)
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    let mut palette = scale.palette();
    palette.push(Rgb::OVERLAY);
    Ok(FrameSet {
        attribute: FrameAttribute::Pressure,
        areas: Vec::new(),
        mode,
        fps: FPS,
        duration_s: 1,
        size,
        layout: None,
        palette,
        frames,
    })
}

/// Lossless PNG bytes of one frame.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, CorpusError> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| CorpusError::Image(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn frame_file_name(i: usize) -> String {
    format!("frame_{i:03}.png")
}

pub const FRAMESET_FILE: &str = "frameset.json";

/// Contents of `frameset.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSetManifest {
    pub attribute: FrameAttribute,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub areas: Vec<String>,
    pub mode: ScaleMode,
    pub fps: u32,
    pub duration_s: u32,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<Variable>,
    pub frame_order: String,
    pub frames: Vec<String>,
    pub palette: Vec<String>,
    pub background: String,
}

impl FrameSetManifest {
    pub fn of(fs: &FrameSet) -> Self {
        FrameSetManifest {
            attribute: fs.attribute,
            area: fs.area(),
            areas: fs.areas.clone(),
            mode: fs.mode,
            fps: fs.fps,
            duration_s: fs.duration_s,
            width: fs.size.width,
            height: fs.size.height,
            layout: fs.layout,
            blocks: if fs.layout.is_some() {
                fs.attribute.variables()
            } else {
                Vec::new()
            },
            frame_order: "chronological".to_string(),
            frames: (0..fs.frames.len()).map(frame_file_name).collect(),
            palette: fs.palette.iter().map(|c| c.to_string()).collect(),
            background: Rgb::BACKGROUND.to_string(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let path = dir.join(FRAMESET_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| CorpusError::Manifest {
            path,
            message: e.to_string(),
        })
    }
}

/// Writes `frame_000.png`… and `frameset.json` into `dir`.
pub fn write_frameset(dir: &Path, fs_: &FrameSet) -> Result<FrameSetManifest, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let encoded = fs_
        .frames
        .par_iter()
        .map(encode_png)
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = FrameSetManifest::of(fs_);
    for (name, bytes) in manifest.frames.iter().zip(&encoded) {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let path = dir.join(FRAMESET_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}
