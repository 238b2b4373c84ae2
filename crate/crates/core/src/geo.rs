//! City bundles: tract polygons joined with per-race population counts, and
//! their rasterization into majority masks and percentage rasters.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// The four tracked groups, in the fixed feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Race {
    White,
    Black,
    Asian,
    Hispanic,
}

impl Race {
    pub const ALL: [Race; 4] = [Race::White, Race::Black, Race::Asian, Race::Hispanic];

    pub fn name(self) -> &'static str {
        match self {
            Race::White => "white",
            Race::Black => "black",
            Race::Asian => "asian",
            Race::Hispanic => "hispanic",
        }
    }

    pub fn initial(self) -> char {
        match self {
            Race::White => 'W',
            Race::Black => 'B',
            Race::Asian => 'A',
            Race::Hispanic => 'H',
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Race {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "white" | "w" => Ok(Race::White),
            "black" | "b" => Ok(Race::Black),
            "asian" | "a" => Ok(Race::Asian),
            "hispanic" | "h" => Ok(Race::Hispanic),
            other => Err(Error::Parameter(format!("unknown race '{other}'"))),
        }
    }
}

pub type Point = (f64, f64);

/// A closed ring: first point equals last point.
pub type Ring = Vec<Point>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Ring,
    pub interiors: Vec<Ring>,
}

impl Polygon {
    pub fn new(exterior: Ring, interiors: Vec<Ring>) -> Self {
        Polygon {
            exterior,
            interiors,
        }
    }

    /// Axis-aligned rectangle as a closed counter-clockwise ring.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Polygon::new(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)], Vec::new())
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(self.interiors.iter())
    }

    /// (min_x, min_y, max_x, max_y) of the exterior ring.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        ring_bbox(&self.exterior)
    }

    /// Even-odd containment test over all rings.
    pub fn contains(&self, p: Point) -> bool {
        let mut crossings = 0usize;
        for ring in self.rings() {
            for w in ring.windows(2) {
                if let Some(x) = crossing_x(w[0], w[1], p.1) {
                    if x > p.0 {
                        crossings += 1;
                    }
                }
            }
        }
        crossings % 2 == 1
    }

    fn validate(&self) -> std::result::Result<(), String> {
        validate_ring(&self.exterior).map_err(|e| format!("exterior ring: {e}"))?;
        for (k, hole) in self.interiors.iter().enumerate() {
            validate_ring(hole).map_err(|e| format!("interior ring {k}: {e}"))?;
            let escapes = hole
                .iter()
                .any(|&p| !self.exterior_contains_or_touches(p));
            if escapes {
                return Err(format!("interior ring {k} is not enclosed by the exterior ring"));
            }
        }
        Ok(())
    }

    fn exterior_contains_or_touches(&self, p: Point) -> bool {
        let on_edge = self
            .exterior
            .windows(2)
            .any(|w| on_segment(w[0], w[1], p));
        on_edge || Polygon::new(self.exterior.clone(), Vec::new()).contains(p)
    }
}

/// x coordinate where segment `a`-`b` crosses the horizontal line at `y`,
/// using the half-open rule so shared vertices are counted once.
#[inline]
fn crossing_x(a: Point, b: Point, y: f64) -> Option<f64> {
    if (a.1 > y) != (b.1 > y) {
        Some(a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1))
    } else {
        None
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).abs() + (b.1 - a.1).abs() + 1.0;
    cross.abs() <= 1e-9 * scale
        && p.0 >= a.0.min(b.0) - 1e-12
        && p.0 <= a.0.max(b.0) + 1e-12
        && p.1 >= a.1.min(b.1) - 1e-12
        && p.1 <= a.1.max(b.1) + 1e-12
}

fn ring_bbox(ring: &Ring) -> (f64, f64, f64, f64) {
    ring.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x0, y0, x1, y1), &(x, y)| (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
    )
}

fn validate_ring(ring: &Ring) -> std::result::Result<(), String> {
    if ring.len() < 4 {
        return Err(format!("ring has {} points, need at least 4", ring.len()));
    }
    if ring.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err("ring has non-finite coordinates".into());
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tract {
    pub tract_id: String,
    pub geometry: Polygon,
    pub total: u64,
    counts: [u64; 4],
}

impl Tract {
    /// Builds a tract, checking that every race count fits in the total.
    pub fn new(
        tract_id: impl Into<String>,
        geometry: Polygon,
        total: u64,
        counts: [(Race, u64); 4],
    ) -> Result<Self> {
        let tract_id = tract_id.into();
        let mut slots = [0u64; 4];
        for (race, n) in counts {
            slots[race.slot()] = n;
        }
        let tract = Tract {
            tract_id,
            geometry,
            total,
            counts: slots,
        };
        tract.validate().map_err(Error::Validation)?;
        Ok(tract)
    }

    pub fn count(&self, race: Race) -> u64 {
        self.counts[race.slot()]
    }

    /// 100 * count / total, or 0 for an empty tract.
    pub fn percentage(&self, race: Race) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.count(race) as f64 / self.total as f64
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let label = format!("tract '{}'", self.tract_id);
        for race in Race::ALL {
            if self.count(race) > self.total {
                return Err(format!(
                    "{label}: {race} count {} exceeds total {}",
                    self.count(race),
                    self.total
                ));
            }
        }
        self.geometry
            .validate()
            .map_err(|e| format!("{label}: invalid polygon: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CityDemographics {
    pub city_id: String,
    pub tracts: Vec<Tract>,
}

impl CityDemographics {
    pub fn new(city_id: impl Into<String>, tracts: Vec<Tract>) -> Result<Self> {
        let city = CityDemographics {
            city_id: city_id.into(),
            tracts,
        };
        if city.tracts.is_empty() {
            return Err(Error::Validation(format!(
                "city '{}' has no tracts",
                city.city_id
            )));
        }
        Ok(city)
    }

    /// Number of tracts.
    pub fn n(&self) -> usize {
        self.tracts.len()
    }

    /// Citywide count of one group (sum over tracts).
    pub fn race_total(&self, race: Race) -> u64 {
        self.tracts.iter().map(|t| t.count(race)).sum()
    }

    pub fn population(&self) -> u64 {
        self.tracts.iter().map(|t| t.total).sum()
    }

    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.tracts.iter().map(|t| t.geometry.bbox()).fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3)),
        )
    }

    pub fn to_bundle_json(&self) -> String {
        let file = BundleFile {
            city_id: self.city_id.clone(),
            tracts: self
                .tracts
                .iter()
                .map(|t| BundleTract {
                    tract_id: t.tract_id.clone(),
                    total: t.total as i64,
                    counts: BundleCounts {
                        white: t.count(Race::White) as i64,
                        black: t.count(Race::Black) as i64,
                        asian: t.count(Race::Asian) as i64,
                        hispanic: t.count(Race::Hispanic) as i64,
                    },
                    polygon: BundlePolygon {
                        exterior: t.geometry.exterior.iter().map(|&(x, y)| [x, y]).collect(),
                        interiors: t
                            .geometry
                            .interiors
                            .iter()
                            .map(|r| r.iter().map(|&(x, y)| [x, y]).collect())
                            .collect(),
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("bundle serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    city_id: String,
    tracts: Vec<BundleTract>,
}

#[derive(Serialize, Deserialize)]
struct BundleTract {
    tract_id: String,
    total: i64,
    counts: BundleCounts,
    polygon: BundlePolygon,
}

#[derive(Serialize, Deserialize)]
struct BundleCounts {
    white: i64,
    black: i64,
    asian: i64,
    hispanic: i64,
}

#[derive(Serialize, Deserialize)]
struct BundlePolygon {
    exterior: Vec<[f64; 2]>,
    #[serde(default)]
    interiors: Vec<Vec<[f64; 2]>>,
}

/// Parses a city bundle from JSON text. `origin` labels parse errors.
pub fn parse_city_bundle(text: &str, origin: &Path) -> Result<CityDemographics> {
    let file: BundleFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let city_id = file.city_id;
    let mut tracts = Vec::with_capacity(file.tracts.len());
    for (i, bt) in file.tracts.into_iter().enumerate() {
        let ctx = |msg: String| {
            Error::Validation(format!(
                "city '{city_id}', tract '{}' (index {i}): {msg}",
                bt.tract_id
            ))
        };
        let c = &bt.counts;
        let raw = [
            (Race::White, c.white),
            (Race::Black, c.black),
            (Race::Asian, c.asian),
            (Race::Hispanic, c.hispanic),
        ];
        if bt.total < 0 {
            return Err(ctx(format!("negative total {}", bt.total)));
        }
        if let Some((race, n)) = raw.iter().find(|(_, n)| *n < 0) {
            return Err(ctx(format!("negative {race} count {n}")));
        }
        let to_ring = |r: &[[f64; 2]]| -> Ring { r.iter().map(|p| (p[0], p[1])).collect() };
        let geometry = Polygon::new(
            to_ring(&bt.polygon.exterior),
            bt.polygon.interiors.iter().map(|r| to_ring(r)).collect(),
        );
        let counts = raw.map(|(race, n)| (race, n as u64));
        let tract = Tract::new(bt.tract_id.clone(), geometry, bt.total as u64, counts).map_err(
            |e| match e {
                Error::Validation(m) => Error::Validation(format!("city '{city_id}', index {i}: {m}")),
                other => other,
            },
        )?;
        tracts.push(tract);
    }
    CityDemographics::new(city_id, tracts)
}

pub fn load_city_bundle(path: &Path) -> Result<CityDemographics> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_city_bundle(&text, path)
}

/// Raster grid sizing: the longest side of the city bounding box spans
/// `long_side` square pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterConfig {
    pub long_side: usize,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig { long_side: 500 }
    }
}

/// Empty raster covering the city bounding box.
pub fn city_grid(city: &CityDemographics, cfg: RasterConfig) -> Result<Raster> {
    if cfg.long_side == 0 {
        return Err(Error::Parameter("raster long side must be at least 1".into()));
    }
    let (x0, y0, x1, y1) = city.bbox();
    let extent = (x1 - x0).max(y1 - y0);
    let pixel_size = if extent > 0.0 {
        extent / cfg.long_side as f64
    } else {
        1.0
    };
    let cells = |span: f64| ((span / pixel_size - 1e-9).ceil() as usize).clamp(1, cfg.long_side);
    let width = cells(x1 - x0);
    let height = cells(y1 - y0);
    Ok(Raster {
        width,
        height,
        origin: (x0 + pixel_size / 2.0, y0 + pixel_size / 2.0),
        pixel_size,
        values: vec![0.0; width * height],
    })
}

/// For each pixel, the index of the first tract (bundle order) whose polygon
/// contains the pixel center.
pub fn tract_owners(city: &CityDemographics, grid: &Raster) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; grid.width * grid.height];
    let mut xs: Vec<f64> = Vec::new();
    for (ti, tract) in city.tracts.iter().enumerate() {
        let (bx0, by0, bx1, by1) = tract.geometry.bbox();
        let Some((r0, r1)) = index_span(by0, by1, grid.origin.1, grid.pixel_size, grid.height)
        else {
            continue;
        };
        let Some((c0, c1)) = index_span(bx0, bx1, grid.origin.0, grid.pixel_size, grid.width)
        else {
            continue;
        };
        for row in r0..=r1 {
            let y = grid.origin.1 + row as f64 * grid.pixel_size;
            xs.clear();
            for ring in tract.geometry.rings() {
                xs.extend(ring.windows(2).filter_map(|w| crossing_x(w[0], w[1], y)));
            }
            if xs.is_empty() {
                continue;
            }
            xs.sort_by(f64::total_cmp);
            // `passed` counts crossings at or left of the current center.
            let mut passed = 0usize;
            for col in c0..=c1 {
                let x = grid.origin.0 + col as f64 * grid.pixel_size;
                while passed < xs.len() && xs[passed] <= x {
                    passed += 1;
                }
                if (xs.len() - passed) % 2 == 1 {
                    let slot = &mut owner[row * grid.width + col];
                    if slot.is_none() {
                        *slot = Some(ti);
                    }
                }
            }
        }
    }
    owner
}

/// Range of pixel indices whose centers fall in `[lo, hi]`.
fn index_span(lo: f64, hi: f64, origin: f64, step: f64, n: usize) -> Option<(usize, usize)> {
    let first = ((lo - origin) / step).ceil().max(0.0);
    let last = ((hi - origin) / step).floor().min(n as f64 - 1.0);
    if first > last {
        None
    } else {
        Some((first as usize, last as usize))
    }
}

/// Per-pixel race percentage; 0 outside every tract.
pub fn rasterize_percentage(city: &CityDemographics, race: Race, cfg: RasterConfig) -> Result<Raster> {
    let grid = city_grid(city, cfg)?;
    let pct: Vec<f64> = city.tracts.iter().map(|t| t.percentage(race)).collect();
    let values = tract_owners(city, &grid)
        .into_iter()
        .map(|o| o.map_or(0.0, |ti| pct[ti]))
        .collect();
    Ok(grid.with_values(values))
}

/// 1 where the containing tract's race percentage is at least `threshold`.
pub fn rasterize_majority_mask(
    city: &CityDemographics,
    race: Race,
    threshold: f64,
    cfg: RasterConfig,
) -> Result<Raster> {
    if !(0.0..=100.0).contains(&threshold) {
        return Err(Error::Parameter(format!(
            "majority threshold must be in [0, 100], got {threshold}"
        )));
    }
    let grid = city_grid(city, cfg)?;
    let hit: Vec<bool> = city
        .tracts
        .iter()
        .map(|t| t.total > 0 && t.percentage(race) >= threshold)
        .collect();
    let values = tract_owners(city, &grid)
        .into_iter()
        .map(|o| match o {
            Some(ti) if hit[ti] => 1.0,
            _ => 0.0,
        })
        .collect();
    Ok(grid.with_values(values))
}
