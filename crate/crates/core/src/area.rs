//! Sea-area registry.
//!
//! Geometry is configuration: the shipped `data/areas.json` holds coarse
//! rectangular outlines for the 31 areas in broadcast order. Replace it with
//! surveyed polygons when they are available; nothing in the code depends on
//! the shapes being rectangles.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grid::GridError;

const BUILTIN_AREAS: &str = include_str!("../data/areas.json");

/// A named sea area with a closed `[lat, lon]` ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaArea {
    pub name: String,
    pub order_index: u32,
    pub ring: Vec<[f64; 2]>,
}

impl SeaArea {
    pub fn new(name: impl Into<String>, order_index: u32, ring: Vec<[f64; 2]>) -> Self {
        SeaArea {
            name: name.into(),
            order_index,
            ring,
        }
    }

    /// Axis-aligned rectangle helper, mostly for tests and synthetic data.
    pub fn rectangle(
        name: impl Into<String>,
        order_index: u32,
        lat: (f64, f64),
        lon: (f64, f64),
    ) -> Self {
        let ring = vec![
            [lat.0, lon.0],
            [lat.0, lon.1],
            [lat.1, lon.1],
            [lat.1, lon.0],
            [lat.0, lon.0],
        ];
        SeaArea::new(name, order_index, ring)
    }

    pub fn is_closed(&self) -> bool {
        self.ring.len() >= 4 && self.ring.first() == self.ring.last()
    }

    /// Shoelace area in square degrees.
    pub fn signed_area(&self) -> f64 {
        self.ring
            .windows(2)
            .map(|w| w[0][1] * w[1][0] - w[1][1] * w[0][0])
            .sum::<f64>()
            / 2.0
    }

    /// Crossing-number test; `lat`/`lon` in degrees.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        let mut inside = false;
        for w in self.ring.windows(2) {
            let (y0, x0) = (w[0][0], w[0][1]);
            let (y1, x1) = (w[1][0], w[1][1]);
            if (y0 > lat) != (y1 > lat) {
                let x_cross = x0 + (lat - y0) / (y1 - y0) * (x1 - x0);
                if lon < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Geometric centroid of the ring vertices (closing vertex excluded).
    pub fn vertex_centroid(&self) -> (f64, f64) {
        let pts = &self.ring[..self.ring.len().saturating_sub(1)];
        let n = pts.len().max(1) as f64;
        let lat = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let lon = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        (lat, lon)
    }
}

/// All known sea areas, kept sorted by `order_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaRegistry {
    areas: Vec<SeaArea>,
}

impl AreaRegistry {
    pub fn new(mut areas: Vec<SeaArea>) -> Result<Self, GridError> {
        let mut names = HashSet::new();
        let mut orders = HashSet::new();
        for a in &areas {
            if !a.is_closed() {
                return Err(GridError::Registry(format!("ring of {} is not closed", a.name)));
            }
            if !names.insert(a.name.to_lowercase()) {
                return Err(GridError::Registry(format!("duplicate area name {}", a.name)));
            }
            if !orders.insert(a.order_index) {
                return Err(GridError::Registry(format!(
                    "duplicate order_index {}",
                    a.order_index
                )));
            }
        }
        areas.sort_by_key(|a| a.order_index);
        Ok(AreaRegistry { areas })
    }

    /// The registry shipped with the crate (31 areas).
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_AREAS).expect("shipped areas.json is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let areas: Vec<SeaArea> =
            serde_json::from_str(text).map_err(|e| GridError::Registry(e.to_string()))?;
        Self::new(areas)
    }

    pub fn load(path: &Path) -> Result<Self, GridError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GridError::Registry(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.areas).expect("areas serialize")
    }

    /// Case-insensitive lookup, ignoring surrounding whitespace.
    pub fn get(&self, name: &str) -> Option<&SeaArea> {
        let key = name.trim();
        self.areas.iter().find(|a| a.name.eq_ignore_ascii_case(key))
    }

    pub fn order_of(&self, name: &str) -> Option<u32> {
        self.get(name).map(|a| a.order_index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SeaArea> {
        self.areas.iter()
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }
}
