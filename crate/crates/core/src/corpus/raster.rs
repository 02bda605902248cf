//! Nearest-cell rasterization of gridded fields and the pressure overlay.

use image::{Rgb as Pixel, RgbImage};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::categorical::{CategoricalScale, Rgb};
use crate::grid::{BBox, GridField};
use crate::overlay::LabelGrid;

use super::CorpusError;

/// Raster dimensions, locked to a 10:6 aspect ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterSize {
    pub width: u32,
    pub height: u32,
}

impl RasterSize {
    pub const DEFAULT: RasterSize = RasterSize {
        width: 1000,
        height: 600,
    };

    pub fn new(width: u32, height: u32) -> Result<Self, CorpusError> {
        if width == 0 || height == 0 || width as u64 * 6 != height as u64 * 10 {
            return Err(CorpusError::AspectRatioInvalid { width, height });
        }
        Ok(RasterSize { width, height })
    }
}

impl Default for RasterSize {
    fn default() -> Self {
        RasterSize::DEFAULT
    }
}

/// Column of the grid cell sampled by pixel column `px`.
pub fn pixel_to_col(px: u32, width: u32, ncols: usize) -> usize {
    (((px as f64 + 0.5) * ncols as f64 / width as f64) as usize).min(ncols - 1)
}

/// Row counted from the north edge for pixel row `py`.
pub fn pixel_to_row_from_north(py: u32, height: u32, nrows: usize) -> usize {
    (((py as f64 + 0.5) * nrows as f64 / height as f64) as usize).min(nrows - 1)
}

fn px(c: Rgb) -> Pixel<u8> {
    Pixel(c.0)
}

/// Paints one timestep. `keep[y * nx + x]` false (or a NaN value) paints the
/// background colour. Latitudes ascend, so image row 0 is the last grid row.
pub fn rasterize_slice(
    values: ArrayView2<f64>,
    keep: Option<&[bool]>,
    scale: &CategoricalScale,
    size: RasterSize,
) -> Result<RgbImage, CorpusError> {
    let (ny, nx) = values.dim();
    let mut colors = vec![Rgb::BACKGROUND; ny * nx];
    for y in 0..ny {
        for x in 0..nx {
            let v = values[[y, x]];
            if v.is_nan() || keep.is_some_and(|k| !k[y * nx + x]) {
                continue;
            }
            colors[y * nx + x] = scale.color_for(v)?;
        }
    }
    let cols: Vec<usize> = (0..size.width).map(|p| pixel_to_col(p, size.width, nx)).collect();
    let mut img = RgbImage::new(size.width, size.height);
    for py in 0..size.height {
        let y = ny - 1 - pixel_to_row_from_north(py, size.height, ny);
        for (pxi, &x) in cols.iter().enumerate() {
            img.put_pixel(pxi as u32, py, px(colors[y * nx + x]));
        }
    }
    Ok(img)
}

/// One frame of `field` at hour `t`.
pub fn rasterize_frame(
    field: &GridField,
    t: usize,
    keep: Option<&[bool]>,
    scale: &CategoricalScale,
    size: RasterSize,
) -> Result<RgbImage, CorpusError> {
    rasterize_slice(field.values.index_axis(ndarray::Axis(0), t), keep, scale, size)
}

/// 3x5 glyphs, one row per byte, most significant of the low three bits on
/// the left.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        'A' => [0b010, 0b101, 0b111, 0b101, 0b101],
        'B' => [0b110, 0b101, 0b110, 0b101, 0b110],
        'C' => [0b011, 0b100, 0b100, 0b100, 0b011],
        'D' => [0b110, 0b101, 0b101, 0b101, 0b110],
        'E' => [0b111, 0b100, 0b110, 0b100, 0b111],
        'F' => [0b111, 0b100, 0b110, 0b100, 0b100],
        'G' => [0b011, 0b100, 0b101, 0b101, 0b011],
        'H' => [0b101, 0b101, 0b111, 0b101, 0b101],
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b110, 0b001, 0b010, 0b100, 0b111],
        '3' => [0b110, 0b001, 0b010, 0b001, 0b110],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b110, 0b001, 0b110],
        '6' => [0b011, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b110],
        _ => return None,
    })
}

const GLYPH_SCALE: u32 = 2;
const LINE_PX: u32 = 2;
const LABEL_INSET_PX: u32 = 4;

/// Pixels covered by the labelled graticule for a raster spanning `extent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayMask {
    pub size: RasterSize,
    pub bits: Vec<bool>,
}

impl OverlayMask {
    pub fn new(grid: &LabelGrid, extent: &BBox, size: RasterSize) -> Self {
        let (w, h) = (size.width, size.height);
        let mut bits = vec![false; (w * h) as usize];
        let mut set = |x: i64, y: i64| {
            if x >= 0 && y >= 0 && (x as u32) < w && (y as u32) < h {
                bits[(y as u32 * w + x as u32) as usize] = true;
            }
        };
        let to_x = |lon: f64| ((lon - extent.lon_min) / (extent.lon_max - extent.lon_min) * w as f64).round() as i64;
        let to_y = |lat: f64| ((extent.lat_max - lat) / (extent.lat_max - extent.lat_min) * h as f64).round() as i64;

        for lon in grid.meridians() {
            let x = to_x(lon);
            for dx in 0..LINE_PX as i64 {
                for y in 0..h as i64 {
                    set(x - 1 + dx, y);
                }
            }
        }
        for lat in grid.parallels() {
            let y = to_y(lat);
            for dy in 0..LINE_PX as i64 {
                for x in 0..w as i64 {
                    set(x, y - 1 + dy);
                }
            }
        }
        for row in 0..grid.nrows() {
            for col in 0..grid.ncols() {
                let lon = grid.bbox.lon_min + col as f64 * grid.step_deg;
                let lat = grid.bbox.lat_max - row as f64 * grid.step_deg;
                let mut x0 = to_x(lon) + (LINE_PX + LABEL_INSET_PX) as i64;
                let y0 = to_y(lat) + (LINE_PX + LABEL_INSET_PX) as i64;
                for ch in grid.label(col, row).chars() {
                    let Some(rows) = glyph(ch) else { continue };
                    for (gy, bitsrow) in rows.iter().enumerate() {
                        for gx in 0..3 {
                            if bitsrow & (0b100 >> gx) != 0 {
                                for sy in 0..GLYPH_SCALE {
                                    for sx in 0..GLYPH_SCALE {
                                        set(
                                            x0 + (gx * GLYPH_SCALE + sx) as i64,
                                            y0 + (gy as u32 * GLYPH_SCALE + sy) as i64,
                                        );
                                    }
                                }
                            }
                        }
                    }
                    x0 += (4 * GLYPH_SCALE) as i64;
                }
            }
        }
        OverlayMask { size, bits }
    }

    pub fn apply(&self, img: &mut RgbImage) {
        let w = self.size.width;
        for (i, &on) in self.bits.iter().enumerate() {
            if on {
                img.put_pixel(i as u32 % w, i as u32 / w, px(Rgb::OVERLAY));
            }
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}
