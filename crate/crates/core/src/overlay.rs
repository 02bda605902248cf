//! Labelled reference grid drawn over pressure frames and used to name
//! positions in the general synopsis.
//!
//! Cells are `step_deg` squares. Columns are lettered from the west edge
//! (A, B, ...), rows numbered from the north edge (1, 2, ...), so "C4" is
//! the third column and fourth row.

use crate::grid::BBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelGrid {
    pub bbox: BBox,
    pub step_deg: f64,
}

impl LabelGrid {
    /// 5 degree cells over the forecast domain: columns A to F, rows 1 to 8.
    pub const STANDARD: LabelGrid = LabelGrid {
        bbox: BBox::FORECAST_DOMAIN,
        step_deg: 5.0,
    };

    pub fn ncols(&self) -> usize {
        ((self.bbox.lon_max - self.bbox.lon_min) / self.step_deg).ceil() as usize
    }

    pub fn nrows(&self) -> usize {
        ((self.bbox.lat_max - self.bbox.lat_min) / self.step_deg).ceil() as usize
    }

    pub fn label(&self, col: usize, row: usize) -> String {
        format!("{}{}", (b'A' + col as u8) as char, row + 1)
    }

    /// `(col, row)` of the cell holding a point; `None` outside the box.
    pub fn cell_at(&self, lat: f64, lon: f64) -> Option<(usize, usize)> {
        if !self.bbox.contains(lat, lon) {
            return None;
        }
        let col = (((lon - self.bbox.lon_min) / self.step_deg) as usize).min(self.ncols() - 1);
        let row = (((self.bbox.lat_max - lat) / self.step_deg) as usize).min(self.nrows() - 1);
        Some((col, row))
    }

    pub fn label_at(&self, lat: f64, lon: f64) -> Option<String> {
        self.cell_at(lat, lon).map(|(c, r)| self.label(c, r))
    }

    /// Parses "C4" back to `(col, row)`.
    pub fn parse_label(&self, label: &str) -> Option<(usize, usize)> {
        let mut chars = label.chars();
        let letter = chars.next()?.to_ascii_uppercase();
        if !letter.is_ascii_uppercase() {
            return None;
        }
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
            return None;
        }
        let col = (letter as u8 - b'A') as usize;
        let row = rest.parse::<usize>().ok()? - 1;
        (col < self.ncols() && row < self.nrows()).then_some((col, row))
    }

    /// Centre `(lat, lon)` of a cell.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.bbox.lat_max - (row as f64 + 0.5) * self.step_deg,
            self.bbox.lon_min + (col as f64 + 0.5) * self.step_deg,
        )
    }

    /// Interior and boundary meridians, west to east.
    pub fn meridians(&self) -> Vec<f64> {
        (0..=self.ncols())
            .map(|i| (self.bbox.lon_min + i as f64 * self.step_deg).min(self.bbox.lon_max))
            .collect()
    }

    /// Parallels, north to south.
    pub fn parallels(&self) -> Vec<f64> {
        (0..=self.nrows())
            .map(|i| (self.bbox.lat_max - i as f64 * self.step_deg).max(self.bbox.lat_min))
            .collect()
    }
}
