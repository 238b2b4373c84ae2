//! Persistence images: diagrams in birth-persistence coordinates, smoothed by
//! weighted Gaussians and integrated over a fixed grid.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::geo::Race;
use crate::homology::PersistenceDiagram;

/// Which filtration produced a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    #[serde(rename = "levelset")]
    LevelSet,
    Cubical,
}

impl ComplexKind {
    /// Infinite deaths are capped here; the image grid spans `[0, cap]`.
    pub fn cap(self) -> f64 {
        match self {
            ComplexKind::LevelSet => 20.0,
            ComplexKind::Cubical => 100.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::LevelSet => "levelset",
            ComplexKind::Cubical => "cubical",
        }
    }
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "levelset" | "level-set" | "ls" => Ok(ComplexKind::LevelSet),
            "cubical" | "cub" => Ok(ComplexKind::Cubical),
            other => Err(Error::Parameter(format!("unknown complex kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIConfig {
    pub sigma: f64,
    /// The image is `resolution x resolution`.
    pub resolution: usize,
    pub birth_range: (f64, f64),
    pub persistence_range: (f64, f64),
}

impl PIConfig {
    pub fn level_set() -> Self {
        PIConfig::for_kind(ComplexKind::LevelSet)
    }

    pub fn cubical() -> Self {
        PIConfig::for_kind(ComplexKind::Cubical)
    }

    pub fn for_kind(kind: ComplexKind) -> Self {
        let cap = kind.cap();
        let (sigma, resolution) = match kind {
            ComplexKind::LevelSet => (1.0, 20),
            ComplexKind::Cubical => (5.0, 100),
        };
        PIConfig {
            sigma,
            resolution,
            birth_range: (0.0, cap),
            persistence_range: (0.0, cap),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.resolution == 0 {
            return Err(Error::Parameter("resolution must be at least 1".into()));
        }
        for (name, (lo, hi)) in [("birth", self.birth_range), ("persistence", self.persistence_range)] {
            if hi.is_nan() || lo.is_nan() || hi <= lo {
                return Err(Error::Parameter(format!("{name} range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    /// Linear ramp: zero at zero lifespan, one at the top of the persistence range.
    pub fn weight(&self, lifespan: f64) -> f64 {
        (lifespan / self.persistence_range.1).max(0.0)
    }
}

/// Where an image came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub city: String,
    pub race: Race,
    pub dim: usize,
    pub kind: ComplexKind,
}

/// `pixels[row * resolution + col]`, where columns index birth and rows index
/// persistence, both increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub config: PIConfig,
    pub pixels: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl PersistenceImage {
    pub fn resolution(&self) -> usize {
        self.config.resolution
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.config.resolution + col]
    }

    pub fn total(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// `{ city, race, dim, kind, resolution, sigma, pixels }`.
    pub fn to_json(&self) -> Result<String> {
        let p = self
            .provenance
            .as_ref()
            .ok_or_else(|| Error::Contract("persistence image has no provenance".into()))?;
        let doc = PiJson {
            city: p.city.clone(),
            race: p.race,
            dim: p.dim,
            kind: p.kind,
            resolution: self.config.resolution,
            sigma: self.config.sigma,
            pixels: self.pixels.clone(),
        };
        Ok(serde_json::to_string(&doc).expect("image serializes"))
    }

    /// Parses the JSON form. Grid ranges follow from `kind`.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let doc: PiJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let config = PIConfig {
            sigma: doc.sigma,
            resolution: doc.resolution,
            ..PIConfig::for_kind(doc.kind)
        };
        config.validate()?;
        if doc.pixels.len() != doc.resolution * doc.resolution {
            return Err(Error::Validation(format!(
                "{}: {} pixels for resolution {}",
                origin.display(),
                doc.pixels.len(),
                doc.resolution
            )));
        }
        Ok(PersistenceImage {
            config,
            pixels: doc.pixels,
            provenance: Some(Provenance {
                city: doc.city,
                race: doc.race,
                dim: doc.dim,
                kind: doc.kind,
            }),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PersistenceImage::from_json(&text, path)
    }
}

#[derive(Serialize, Deserialize)]
struct PiJson {
    city: String,
    race: Race,
    dim: usize,
    kind: ComplexKind,
    resolution: usize,
    sigma: f64,
    pixels: Vec<f64>,
}

/// Maps each `(birth, death)` to `(birth, |death - birth|)`.
pub fn birth_persistence_transform(pd: &PersistenceDiagram) -> Result<Vec<(f64, f64)>> {
    pd.points
        .iter()
        .map(|p| {
            if p.is_infinite() {
                Err(Error::Contract(format!(
                    "H{} diagram has an uncapped infinite death (birth {})",
                    pd.dim, p.birth
                )))
            } else {
                Ok((p.birth, p.lifespan()))
            }
        })
        .collect()
}

/// Mass of a 1-D Gaussian over each of `n` equal cells spanning `[lo, hi]`.
fn cell_masses(center: f64, sigma: f64, lo: f64, hi: f64, n: usize, out: &mut Vec<f64>) {
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let step = (hi - lo) / n as f64;
    out.clear();
    let mut prev = erf((lo - center) * scale);
    for k in 1..=n {
        let edge = if k == n { hi } else { lo + k as f64 * step };
        let next = erf((edge - center) * scale);
        out.push(0.5 * (next - prev));
        prev = next;
    }
}

/// Integrates the weighted Gaussian surface over each grid cell.
pub fn persistence_image(points: &[(f64, f64)], cfg: &PIConfig) -> Result<PersistenceImage> {
    cfg.validate()?;
    let n = cfg.resolution;
    let mut pixels = vec![0.0; n * n];
    let (mut mx, mut my) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for &(birth, lifespan) in points {
        if !(birth.is_finite() && lifespan.is_finite()) {
            return Err(Error::Contract(format!("non-finite point ({birth}, {lifespan})")));
        }
        let w = cfg.weight(lifespan);
        if w == 0.0 {
            continue;
        }
        cell_masses(birth, cfg.sigma, cfg.birth_range.0, cfg.birth_range.1, n, &mut mx);
        cell_masses(lifespan, cfg.sigma, cfg.persistence_range.0, cfg.persistence_range.1, n, &mut my);
        for (row, &py) in my.iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            let base = row * n;
            for (col, &px) in mx.iter().enumerate() {
                pixels[base + col] += w * px * py;
            }
        }
    }
    Ok(PersistenceImage {
        config: *cfg,
        pixels,
        provenance: None,
    })
}

/// Convenience: transform and rasterize a capped diagram.
pub fn diagram_image(pd: &PersistenceDiagram, cfg: &PIConfig) -> Result<PersistenceImage> {
    persistence_image(&birth_persistence_transform(pd)?, cfg)
}

/// Which groups are concatenated into a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "WBAH")]
    Wbah,
    #[serde(rename = "WB")]
    Wb,
    #[serde(rename = "B")]
    B,
}

impl Group {
    pub fn races(self) -> &'static [Race] {
        match self {
            Group::Wbah => &Race::ALL,
            Group::Wb => &[Race::White, Race::Black],
            Group::B => &[Race::Black],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Wbah => "WBAH",
            Group::Wb => "WB",
            Group::B => "B",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WBAH" => Ok(Group::Wbah),
            "WB" => Ok(Group::Wb),
            "B" => Ok(Group::B),
            other => Err(Error::Parameter(format!("unknown group '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub city_id: String,
    pub group: Group,
    pub values: Vec<f64>,
}

/// Concatenates row-major images: races in W, B, A, H order restricted to the
/// group, H0 before H1 within each race.
pub fn concatenate_features(
    city_id: &str,
    pis: &HashMap<(Race, usize), PersistenceImage>,
    group: Group,
) -> Result<FeatureVector> {
    let mut values = Vec::new();
    let mut config: Option<PIConfig> = None;
    for &race in group.races() {
        for dim in [0, 1] {
            let pi = pis.get(&(race, dim)).ok_or_else(|| {
                Error::Missing(format!("city '{city_id}': no H{dim} image for {race}"))
            })?;
            match config {
                None => config = Some(pi.config),
                Some(c) if c != pi.config => {
                    return Err(Error::Validation(format!(
                        "city '{city_id}': {race} H{dim} image config differs from the others"
                    )))
                }
                Some(_) => {}
            }
            values.extend_from_slice(&pi.pixels);
        }
    }
    Ok(FeatureVector {
        city_id: city_id.to_string(),
        group,
        values,
    })
}

/// One row per city: `city_id,f0,f1,...`.
pub fn feature_matrix_csv(rows: &[FeatureVector]) -> String {
    let width = rows.first().map_or(0, |r| r.values.len());
    let mut out = String::from("city_id");
    for k in 0..width {
        let _ = write!(out, ",f{k}");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r.city_id);
        for v in &r.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_feature_matrix(text: &str, group: Group, origin: &Path) -> Result<Vec<FeatureVector>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        location: format!("line {line}"),
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with("city_id") => {}
        _ => return Err(err(1, "expected header starting with 'city_id'".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let mut fields = line.split(',');
        let city_id = fields.next().unwrap_or_default().to_string();
        let values = fields
            .map(|f| f.trim().parse::<f64>().map_err(|_| err(i + 1, format!("bad value '{f}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureVector {
            city_id,
            group,
            values,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{Direction, PersistencePoint};

    #[test]
    fn transform_examples() {
        let pd = PersistenceDiagram {
            dim: 0,
            direction: Direction::Ascending,
            points: vec![PersistencePoint::new(2.0, 5.0), PersistencePoint::new(0.0, 0.0)],
        };
        assert_eq!(birth_persistence_transform(&pd).unwrap(), vec![(2.0, 3.0), (0.0, 0.0)]);
        let cub = PersistenceDiagram {
            dim: 0,
            direction: Direction::Descending,
            points: vec![PersistencePoint::new(80.0, 0.0)],
        };
        assert_eq!(birth_persistence_transform(&cub).unwrap(), vec![(80.0, 80.0)]);
        let inf = PersistenceDiagram {
            dim: 0,
            direction: Direction::Ascending,
            points: vec![PersistencePoint::new(0.0, f64::INFINITY)],
        };
        assert!(matches!(birth_persistence_transform(&inf), Err(Error::Contract(_))));
    }

    #[test]
    fn empty_and_zero_lifespan_images_vanish() {
        let cfg = PIConfig::level_set();
        assert!(persistence_image(&[], &cfg).unwrap().pixels.iter().all(|&p| p == 0.0));
        let img = persistence_image(&[(4.0, 0.0)], &cfg).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0.0));
        assert_eq!(img.pixels.len(), 400);
    }

    #[test]
    fn mass_peaks_at_the_point() {
        let cfg = PIConfig::level_set();
        let img = persistence_image(&[(10.5, 6.5)], &cfg).unwrap();
        let (argmax, _) = img
            .pixels
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!((argmax / 20, argmax % 20), (6, 10));
    }

    #[test]
    fn config_validation() {
        let mut cfg = PIConfig::cubical();
        cfg.sigma = 0.0;
        assert!(persistence_image(&[], &cfg).is_err());
        let mut cfg = PIConfig::cubical();
        cfg.birth_range = (5.0, 5.0);
        assert!(cfg.validate().is_err());
    }

    fn image(city: &str, race: Race, dim: usize, fill: f64, n: usize) -> PersistenceImage {
        PersistenceImage {
            config: PIConfig { resolution: n, ..PIConfig::level_set() },
            pixels: vec![fill; n * n],
            provenance: Some(Provenance {
                city: city.into(),
                race,
                dim,
                kind: ComplexKind::LevelSet,
            }),
        }
    }

    #[test]
    fn concatenation_order_and_length() {
        let mut pis = HashMap::new();
        for (k, race) in Race::ALL.into_iter().enumerate() {
            for dim in [0, 1] {
                pis.insert((race, dim), image("c", race, dim, (2 * k + dim) as f64, 20));
            }
        }
        let fv = concatenate_features("c", &pis, Group::Wbah).unwrap();
        assert_eq!(fv.values.len(), 3200);
        for block in 0..8 {
            assert_eq!(fv.values[block * 400], block as f64);
        }
        let wb = concatenate_features("c", &pis, Group::Wb).unwrap();
        assert_eq!(wb.values.len(), 1600);
        let b = concatenate_features("c", &pis, Group::B).unwrap();
        assert_eq!(b.values[0], 2.0);
        assert_eq!(b.values[400], 3.0);

        pis.remove(&(Race::Asian, 1));
        let err = concatenate_features("c", &pis, Group::Wbah).unwrap_err();
        assert!(err.to_string().contains("H1") && err.to_string().contains("asian"));
        assert!(concatenate_features("c", &pis, Group::Wb).is_ok());
    }

    #[test]
    fn cubical_b_length() {
        let mut pis = HashMap::new();
        for dim in [0, 1] {
            pis.insert((Race::Black, dim), image("c", Race::Black, dim, 0.0, 100));
        }
        assert_eq!(concatenate_features("c", &pis, Group::B).unwrap().values.len(), 20000);
    }

    #[test]
    fn json_and_matrix_round_trip() {
        let img = persistence_image(&[(3.0, 4.0)], &PIConfig::level_set())
            .unwrap()
            .with_provenance(Provenance {
                city: "x".into(),
                race: Race::Hispanic,
                dim: 1,
                kind: ComplexKind::LevelSet,
            });
        let text = img.to_json().unwrap();
        assert!(text.contains("\"kind\":\"levelset\"") && text.contains("\"race\":\"hispanic\""));
        assert_eq!(PersistenceImage::from_json(&text, Path::new("m")).unwrap(), img);

        let rows = vec![
            FeatureVector { city_id: "a".into(), group: Group::B, values: vec![0.5, 1e-300] },
            FeatureVector { city_id: "b".into(), group: Group::B, values: vec![2.0, 3.0] },
        ];
        let csv = feature_matrix_csv(&rows);
        assert!(csv.starts_with("city_id,f0,f1\n"));
        assert_eq!(parse_feature_matrix(&csv, Group::B, Path::new("m")).unwrap(), rows);
    }
}
