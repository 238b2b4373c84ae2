//! Directory-level orchestration: bundles in, diagrams, images, features,
//! clusterings and statistics out, with a content-hashed manifest.
//!
//! Every stage is also exposed on its own so that each can be rerun from the
//! files written by the previous one.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{distortion_curve_on, elbow_csv, kmedoids_on, medoid_images, Clustering, DistanceMatrix, Partition};
use crate::cubical::build_cubical_filtration;
use crate::error::{Error, Result};
use crate::geo::{load_city_bundle, rasterize_majority_mask, rasterize_percentage, CityDemographics, Race, RasterConfig};
use crate::homology::{compute_persistence, PersistenceDiagram};
use crate::levelset::{propagate_front, triangulate, FrontConfig};
use crate::pimage::{concatenate_features, diagram_image, feature_matrix_csv, ComplexKind, FeatureVector, Group, PIConfig, PersistenceImage, Provenance};
use crate::raster::Raster;
use crate::render::{heatmap_svg, image_svg};
use crate::segstats::{adjusted_rand_index, cluster_mean_stats, zscore_table, StatsTable};

/// Environment variable that replaces `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "SEGTOPO_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub complex_kind: ComplexKind,
    pub group: Group,
    pub k: usize,
    pub raster_long_side: usize,
    pub velocity: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Lattice stride of the level-set triangulation.
    pub stride: usize,
    /// Overrides the kind's default Gaussian width.
    pub sigma: Option<f64>,
    /// Overrides the kind's default image side.
    pub resolution: Option<usize>,
    pub threshold: f64,
    /// Largest K on the elbow curve; defaults to `min(cities, 10)`.
    pub k_max: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let front = FrontConfig::default();
        PipelineConfig {
            input_dir: PathBuf::from("bundles"),
            output_dir: PathBuf::from("out"),
            complex_kind: ComplexKind::LevelSet,
            group: Group::Wbah,
            k: 4,
            raster_long_side: RasterConfig::default().long_side,
            velocity: front.velocity,
            dt: front.dt,
            t_max: front.t_max,
            stride: 5,
            sigma: None,
            resolution: None,
            threshold: 50.0,
            k_max: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::from_json(&text, path)
    }

    /// Applies [`OUTPUT_DIR_ENV`] if set and non-empty.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn front(&self) -> FrontConfig {
        FrontConfig {
            velocity: self.velocity,
            dt: self.dt,
            t_max: self.t_max,
        }
    }

    pub fn raster(&self) -> RasterConfig {
        RasterConfig {
            long_side: self.raster_long_side,
        }
    }

    pub fn pi_config(&self) -> PIConfig {
        let base = PIConfig::for_kind(self.complex_kind);
        PIConfig {
            sigma: self.sigma.unwrap_or(base.sigma),
            resolution: self.resolution.unwrap_or(base.resolution),
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.raster_long_side == 0 {
            return Err(Error::Parameter("raster_long_side must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::Parameter("stride must be at least 1".into()));
        }
        if !(0.0..=100.0).contains(&self.threshold) {
            return Err(Error::Parameter(format!("threshold must be in [0, 100], got {}", self.threshold)));
        }
        if self.k_max == Some(0) {
            return Err(Error::Parameter("k_max must be at least 1".into()));
        }
        self.front().validate()?;
        self.pi_config().validate()
    }
}

/// Loads every `*.json` bundle in `dir`, ordered by file name.
pub fn ingest(dir: &Path) -> Result<Vec<CityDemographics>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Missing(format!("no *.json bundles in {}", dir.display())));
    }
    let cities: Vec<CityDemographics> = paths.iter().map(|p| load_city_bundle(p)).collect::<Result<_>>()?;
    let mut seen: HashMap<&str, &Path> = HashMap::new();
    for (c, p) in cities.iter().zip(&paths) {
        if let Some(first) = seen.insert(&c.city_id, p) {
            return Err(Error::Validation(format!(
                "city '{}' appears in both {} and {}",
                c.city_id,
                first.display(),
                p.display()
            )));
        }
    }
    Ok(cities)
}

/// Majority mask for the level-set complex, percentage raster for the cubical one.
pub fn rasterize(city: &CityDemographics, race: Race, cfg: &PipelineConfig) -> Result<Raster> {
    match cfg.complex_kind {
        ComplexKind::LevelSet => rasterize_majority_mask(city, race, cfg.threshold, cfg.raster()),
        ComplexKind::Cubical => rasterize_percentage(city, race, cfg.raster()),
    }
}

/// H0 and H1 of a raster under the configured filtration, with infinite deaths
/// capped and zero-lifespan points dropped.
pub fn persist(raster: &Raster, cfg: &PipelineConfig) -> Result<Vec<PersistenceDiagram>> {
    let raw = match cfg.complex_kind {
        ComplexKind::LevelSet => {
            let times = propagate_front(raster, &cfg.front())?;
            compute_persistence(&triangulate(&times, cfg.stride)?)?
        }
        ComplexKind::Cubical => compute_persistence(&build_cubical_filtration(raster)?)?,
    };
    let cap = match cfg.complex_kind {
        ComplexKind::LevelSet => cfg.t_max,
        ComplexKind::Cubical => ComplexKind::Cubical.cap(),
    };
    raw.iter()
        .map(|d| {
            let mut capped = d.cap_infinite(cap)?;
            capped.points.retain(|p| p.lifespan() > 0.0);
            Ok(capped)
        })
        .collect()
}

/// One image per diagram, tagged with its city, race and dimension.
pub fn images(
    diagrams: &[PersistenceDiagram],
    city: &str,
    race: Race,
    cfg: &PipelineConfig,
) -> Result<Vec<PersistenceImage>> {
    let pi_cfg = cfg.pi_config();
    diagrams
        .iter()
        .map(|d| {
            Ok(diagram_image(d, &pi_cfg)?.with_provenance(Provenance {
                city: city.to_string(),
                race,
                dim: d.dim,
                kind: cfg.complex_kind,
            }))
        })
        .collect()
}

/// Diagrams of several dimensions in one CSV.
pub fn diagrams_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("dim,birth,death\n");
    for d in diagrams {
        out.push_str(d.to_csv().split_once('\n').map_or("", |(_, body)| body));
    }
    out
}

/// Clustering plus elbow curve over one distance matrix.
pub fn cluster_features(features: &[FeatureVector], k: usize, k_max: Option<usize>) -> Result<(Clustering, Vec<(usize, f64)>)> {
    let dist = DistanceMatrix::euclidean(&features.iter().map(|f| f.values.clone()).collect::<Vec<_>>())?;
    let ids: Vec<String> = features.iter().map(|f| f.city_id.clone()).collect();
    let clustering = kmedoids_on(&dist, ids, k)?;
    let k_max = k_max.unwrap_or(10).min(features.len());
    let curve = distortion_curve_on(&dist, k_max)?;
    Ok((clustering, curve))
}

/// `stats.csv`, `zscores.csv`, and `cluster_means.csv` contents; the last is
/// present only when a partition is given.
pub fn statistics(cities: &[CityDemographics], partition: Option<&Partition>) -> Result<Vec<(&'static str, String)>> {
    let stats = StatsTable::from_cities(cities);
    let z = zscore_table(&stats)?;
    let mut out = vec![("stats.csv", stats.to_csv()), ("zscores.csv", z.to_csv())];
    if let Some(p) = partition {
        out.push(("cluster_means.csv", cluster_mean_stats(p, &z)?.to_csv()));
    }
    Ok(out)
}

/// Pairwise ARI between labelled clusterings.
#[derive(Debug, Clone, PartialEq)]
pub struct AriMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl AriMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("clustering");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> String {
        heatmap_svg(&self.labels, &self.values)
    }
}

pub fn compare_clusterings(clusterings: &[(String, Partition)]) -> Result<AriMatrix> {
    if clusterings.len() < 2 {
        return Err(Error::Parameter("need at least 2 clusterings to compare".into()));
    }
    let n = clusterings.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (li, pi) = &clusterings[i];
            let (lj, pj) = &clusterings[j];
            let ari = adjusted_rand_index(pi, pj)
                .map_err(|e| Error::Validation(format!("comparing '{li}' with '{lj}': {e}")))?;
            values[i][j] = ari;
            values[j][i] = ari;
        }
    }
    Ok(AriMatrix {
        labels: clusterings.iter().map(|(l, _)| l.clone()).collect(),
        values,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Every emitted file relative to the output directory, sorted by path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub complex_kind: ComplexKind,
    pub group: Group,
    pub k: usize,
    pub cities: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}

/// Output of one city-race pair.
struct PairResult {
    diagrams: Vec<PersistenceDiagram>,
    images: Vec<PersistenceImage>,
}

fn run_pair(city: &CityDemographics, race: Race, cfg: &PipelineConfig) -> Result<PairResult> {
    let raster = rasterize(city, race, cfg)?;
    let diagrams = persist(&raster, cfg)?;
    let images = images(&diagrams, &city.city_id, race, cfg)?;
    Ok(PairResult { diagrams, images })
}

fn file_stem(city: &str, race: Race, dim: usize) -> String {
    format!("{city}_{}_h{dim}", race.name())
}

/// Runs every stage and writes the artifacts plus `manifest.json`.
///
/// All results are computed before anything is written. If a write fails,
/// the files written so far are removed.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    cfg.validate()?;
    let cities = ingest(&cfg.input_dir)?;
    if cities.len() < 2 {
        return Err(Error::Validation(format!(
            "{} holds {} city bundle(s); at least 2 are required",
            cfg.input_dir.display(),
            cities.len()
        )));
    }
    if cities.len() < cfg.k {
        return Err(Error::Parameter(format!("k = {} exceeds the {} cities", cfg.k, cities.len())));
    }

    let pairs: Vec<(usize, Race)> = (0..cities.len())
        .flat_map(|c| Race::ALL.into_iter().map(move |r| (c, r)))
        .collect();
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(c, race)| {
            run_pair(&cities[c], race, cfg).map_err(|e| Error::Stage {
                city: cities[c].city_id.clone(),
                race: race.name().to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut pis: HashMap<(String, Race, usize), PersistenceImage> = HashMap::new();
    for (&(c, race), res) in pairs.iter().zip(results) {
        let city = &cities[c].city_id;
        for d in &res.diagrams {
            files.insert(format!("diagrams/{}.csv", file_stem(city, race, d.dim)), d.to_csv().into_bytes());
        }
        for pi in res.images {
            let dim = pi.provenance.as_ref().map_or(0, |p| p.dim);
            files.insert(format!("pimages/{}.json", file_stem(city, race, dim)), pi.to_json()?.into_bytes());
            pis.insert((city.clone(), race, dim), pi);
        }
    }

    let features: Vec<FeatureVector> = cities
        .iter()
        .map(|city| {
            let own: HashMap<(Race, usize), PersistenceImage> = pis
                .iter()
                .filter(|((c, _, _), _)| *c == city.city_id)
                .map(|((_, r, d), pi)| ((*r, *d), pi.clone()))
                .collect();
            concatenate_features(&city.city_id, &own, cfg.group)
        })
        .collect::<Result<_>>()?;
    files.insert("features.csv".into(), feature_matrix_csv(&features).into_bytes());

    let (clustering, curve) = cluster_features(&features, cfg.k, cfg.k_max)?;
    files.insert("clustering.csv".into(), clustering.partition.to_csv().into_bytes());
    files.insert("medoids.csv".into(), clustering.medoids_csv().into_bytes());
    files.insert("elbow.csv".into(), elbow_csv(&curve).into_bytes());
    for medoid in medoid_images(&clustering, &pis, cfg.group)? {
        for pi in &medoid.images {
            let p = pi.provenance.as_ref().expect("pipeline images carry provenance");
            files.insert(
                format!("medoids/cluster{}_{}.svg", medoid.cluster, file_stem(&p.city, p.race, p.dim)),
                image_svg(pi).into_bytes(),
            );
        }
    }

    for (name, text) in statistics(&cities, Some(&clustering.partition))? {
        files.insert(name.into(), text.into_bytes());
    }

    let manifest = Manifest {
        complex_kind: cfg.complex_kind,
        group: cfg.group,
        k: cfg.k,
        cities: cities.iter().map(|c| c.city_id.clone()).collect(),
        files: files
            .iter()
            .map(|(path, bytes)| ManifestEntry {
                path: path.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            })
            .collect(),
    };
    files.insert("manifest.json".into(), manifest.to_json().into_bytes());
    write_all(&cfg.output_dir, &files)?;
    Ok(manifest)
}

/// Writes the files, removing those already written if any write fails.
pub fn write_all(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = files.iter().try_for_each(|(rel, bytes)| {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    });
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{archetype_city, write_bundles, Archetype};

    fn small_config(dir: &Path) -> PipelineConfig {
        PipelineConfig {
            input_dir: dir.join("in"),
            output_dir: dir.join("out"),
            k: 2,
            raster_long_side: 60,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn defaults_roundtrip_through_json() {
        let cfg = PipelineConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&text, Path::new("c.json")).unwrap(), cfg);
        let partial = PipelineConfig::from_json(r#"{"k": 3, "complex_kind": "cubical"}"#, Path::new("c")).unwrap();
        assert_eq!(partial.k, 3);
        assert_eq!(partial.pi_config(), PIConfig::cubical());
        assert!(PipelineConfig::from_json(r#"{"kk": 3}"#, Path::new("c")).is_err());
    }

    #[test]
    fn two_city_count_contract() {
        let tmp = tempfile::tempdir().unwrap();
        let cities = vec![
            archetype_city("a", Archetype::Enclave, 6).unwrap(),
            archetype_city("b", Archetype::Divided, 6).unwrap(),
        ];
        write_bundles(&tmp.path().join("in"), &cities).unwrap();
        let m = run_pipeline(&small_config(tmp.path())).unwrap();
        let diagrams = m.files.iter().filter(|f| f.path.starts_with("diagrams/")).count();
        assert_eq!(diagrams, 2 * 4 * 2);
        let features = fs::read_to_string(tmp.path().join("out/features.csv")).unwrap();
        assert_eq!(features.lines().count(), 3);
        assert!(tmp.path().join("out/clustering.csv").exists());
    }

    #[test]
    fn empty_mask_gives_empty_diagrams() {
        let city = archetype_city("d", Archetype::Divided, 6).unwrap();
        let cfg = PipelineConfig {
            raster_long_side: 30,
            ..PipelineConfig::default()
        };
        let mask = rasterize(&city, Race::Asian, &cfg).unwrap();
        assert!(mask.values.iter().all(|&v| v == 0.0));
        let d = persist(&mask, &cfg).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|d| d.is_empty()));
        let pis = images(&d, "d", Race::Asian, &cfg).unwrap();
        assert!(pis.iter().all(|p| p.total() == 0.0));
    }

    #[test]
    fn ari_matrix_is_symmetric_with_unit_diagonal() {
        let ids: Vec<String> = (0..6).map(|i| format!("c{i}")).collect();
        let a = Partition::new(ids.clone(), vec![1, 1, 2, 2, 3, 3]).unwrap();
        let b = Partition::new(ids.clone(), vec![1, 2, 1, 2, 1, 2]).unwrap();
        let m = compare_clusterings(&[("a".into(), a.clone()), ("b".into(), b), ("a2".into(), a)]).unwrap();
        for i in 0..3 {
            assert_eq!(m.values[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m.values[i][j], m.values[j][i]);
            }
        }
        assert_eq!(m.values[0][2], 1.0);
    }

    #[test]
    fn combined_csv_has_one_header() {
        let d0 = PersistenceDiagram::empty(0, crate::homology::Direction::Ascending);
        let d1 = PersistenceDiagram::empty(1, crate::homology::Direction::Ascending);
        assert_eq!(diagrams_csv(&[d0, d1]), "dim,birth,death\n");
    }
}
