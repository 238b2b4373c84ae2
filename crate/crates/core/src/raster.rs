//! Fixed-resolution 2D grids of real values.
//!
//! Pixel `(col, row)` is stored at `row * width + col`. Row indices grow with
//! the world `y` coordinate, so row 0 sits along the bottom of the bounding
//! box and "north" means increasing row.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// World coordinates of the center of pixel (0, 0).
    pub origin: (f64, f64),
    pub pixel_size: f64,
    pub values: Vec<f64>,
}

impl Raster {
    /// A raster with unit pixels centred on integer coordinates.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Raster {
            width,
            height,
            origin: (0.0, 0.0),
            pixel_size: 1.0,
            values: vec![value; width * height],
        }
    }

    /// Builds a unit-pixel raster from rows, `rows[0]` being row 0.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Validation("ragged raster rows".into()));
        }
        let raster = Raster {
            width,
            height,
            origin: (0.0, 0.0),
            pixel_size: 1.0,
            values: rows.concat(),
        };
        raster.validate()?;
        Ok(raster)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Validation(format!(
                "raster must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.pixel_size > 0.0 && self.pixel_size.is_finite()) {
            return Err(Error::Validation(format!(
                "pixel size must be positive, got {}",
                self.pixel_size
            )));
        }
        if self.values.len() != self.width * self.height {
            return Err(Error::Validation(format!(
                "raster has {} values, expected {}",
                self.values.len(),
                self.width * self.height
            )));
        }
        if let Some(v) = self.values.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
            return Err(Error::Validation(format!("raster contains non-finite value {v}")));
        }
        Ok(())
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[self.index(col, row)]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        let i = self.index(col, row);
        self.values[i] = value;
    }

    /// World coordinates of a pixel center.
    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin.0 + col as f64 * self.pixel_size,
            self.origin.1 + row as f64 * self.pixel_size,
        )
    }

    /// Same grid geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Raster {
        debug_assert_eq!(values.len(), self.values.len());
        Raster {
            width: self.width,
            height: self.height,
            origin: self.origin,
            pixel_size: self.pixel_size,
            values,
        }
    }

    pub fn load_json(path: &Path) -> Result<Raster> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raster: Raster = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        raster.validate()?;
        Ok(raster)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("raster serializes")
    }
}
