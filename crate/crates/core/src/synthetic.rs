//! Deterministic synthetic cities built from square tracts.
//!
//! Each archetype assigns a group composition to every cell of an `n x n`
//! tract grid. The compositions are fixed, so the same archetype and size
//! always produce the same bundle.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geo::{CityDemographics, Polygon, Race, Tract};

/// Side length of one tract in world units.
pub const TRACT_SIZE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Archetype {
    /// Black and Hispanic tracts in a central disk surrounded by White tracts.
    Enclave,
    /// White west half, Black east half.
    Divided,
    /// Alternating 2x2 blocks of White and Hispanic majority.
    Checkerboard,
    /// White share rising west to east, Black share falling.
    Gradient,
    /// Three small Black enclaves and an Asian corridor inside a White city.
    Polycentric,
}

impl Archetype {
    pub const ALL: [Archetype; 5] = [
        Archetype::Enclave,
        Archetype::Divided,
        Archetype::Checkerboard,
        Archetype::Gradient,
        Archetype::Polycentric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Archetype::Enclave => "enclave",
            Archetype::Divided => "divided",
            Archetype::Checkerboard => "checkerboard",
            Archetype::Gradient => "gradient",
            Archetype::Polycentric => "polycentric",
        }
    }

    /// Percent shares (W, B, A, H) of tract `(i, j)`, column `i` and row `j`.
    fn shares(self, i: usize, j: usize, n: usize) -> [f64; 4] {
        let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
        match self {
            Archetype::Enclave => {
                let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
                if r < 0.3 {
                    [4.0, 78.0, 6.0, 12.0]
                } else {
                    [88.0, 4.0, 4.0, 4.0]
                }
            }
            Archetype::Divided => {
                if x < 0.5 {
                    [90.0, 4.0, 3.0, 3.0]
                } else {
                    [4.0, 88.0, 3.0, 5.0]
                }
            }
            Archetype::Checkerboard => {
                if (i / 2 + j / 2).is_multiple_of(2) {
                    [80.0, 6.0, 4.0, 10.0]
                } else {
                    [10.0, 8.0, 7.0, 75.0]
                }
            }
            Archetype::Gradient => {
                let w = 10.0 + 80.0 * x;
                [w, 90.0 - w, 5.0, 5.0]
            }
            Archetype::Polycentric => {
                let centers = [(0.25, 0.25), (0.75, 0.3), (0.45, 0.75)];
                let near = centers
                    .iter()
                    .any(|&(cx, cy)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() < 0.13);
                if near {
                    [6.0, 82.0, 4.0, 8.0]
                } else if (y - 0.55).abs() < 0.08 {
                    [30.0, 5.0, 60.0, 5.0]
                } else {
                    [85.0, 5.0, 5.0, 5.0]
                }
            }
        }
    }
}

/// Builds an `n x n` city of the given archetype.
pub fn archetype_city(id: &str, archetype: Archetype, n: usize) -> Result<CityDemographics> {
    if n < 2 {
        return Err(Error::Parameter(format!("tract grid side must be at least 2, got {n}")));
    }
    let mut tracts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let total = 1000 + 37 * ((7 * i + 3 * j) % 11) as u64;
            let shares = archetype.shares(i, j, n);
            let counts = shares.map(|s| (s * total as f64 / 100.0).floor() as u64);
            let geom = Polygon::rect(
                i as f64 * TRACT_SIZE,
                j as f64 * TRACT_SIZE,
                (i + 1) as f64 * TRACT_SIZE,
                (j + 1) as f64 * TRACT_SIZE,
            );
            let tract = Tract::new(
                format!("{id}-{j:02}{i:02}"),
                geom,
                total,
                [
                    (Race::White, counts[0]),
                    (Race::Black, counts[1]),
                    (Race::Asian, counts[2]),
                    (Race::Hispanic, counts[3]),
                ],
            )?;
            tracts.push(tract);
        }
    }
    CityDemographics::new(id, tracts)
}

/// `count` cities cycling through the archetypes, with grid sides varying
/// between 9 and 13 tracts.
pub fn corpus(count: usize) -> Result<Vec<CityDemographics>> {
    (0..count)
        .map(|k| {
            let arch = Archetype::ALL[k % Archetype::ALL.len()];
            let n = 9 + (k * 3) % 5;
            archetype_city(&format!("{}{k:02}", arch.name()), arch, n)
        })
        .collect()
}

/// Writes one `{city_id}.json` bundle per city and returns the paths.
pub fn write_bundles(dir: &Path, cities: &[CityDemographics]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    cities
        .iter()
        .map(|c| {
            let path = dir.join(format!("{}.json", c.city_id));
            fs::write(&path, c.to_bundle_json()).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
