use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use segtopo::cluster::{elbow_csv, Partition};
use segtopo::geo::{load_city_bundle, Race};
use segtopo::homology::{Barcode, Direction, PersistenceDiagram};
use segtopo::pimage::{parse_feature_matrix, ComplexKind, Group, PersistenceImage};
use segtopo::pipeline::{
    cluster_features, compare_clusterings, diagrams_csv, images, ingest, persist, rasterize, run_pipeline,
    statistics, write_all, PipelineConfig,
};
use segtopo::raster::Raster;
use segtopo::render::{render_svg, Artifact};
use segtopo::{Error, Result};

#[derive(Parser)]
#[command(name = "segtopo", version, about = "Topological summaries of city demographics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Pipeline settings: a JSON file, then `SEGTOPO_OUTPUT_DIR`, then flags.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    complex_kind: Option<ComplexKind>,
    #[arg(long)]
    group: Option<Group>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    raster_long_side: Option<usize>,
    #[arg(long)]
    velocity: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        cfg.apply_env();
        if let Some(v) = &self.input_dir {
            cfg.input_dir = v.clone();
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.complex_kind {
            cfg.complex_kind = v;
        }
        if let Some(v) = self.group {
            cfg.group = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.raster_long_side {
            cfg.raster_long_side = v;
        }
        if let Some(v) = self.velocity {
            cfg.velocity = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.stride {
            cfg.stride = v;
        }
        if self.sigma.is_some() {
            cfg.sigma = self.sigma;
        }
        if self.resolution.is_some() {
            cfg.resolution = self.resolution;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if self.k_max.is_some() {
            cfg.k_max = self.k_max;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate every bundle in the input directory and write `cities.csv`.
    Ingest {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Rasterize one group of one bundle (mask or percentage, by complex kind).
    Rasterize {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        race: Race,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Capped H0/H1 diagrams of a raster.
    Persist {
        #[arg(long)]
        raster: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Persistence images of a diagram CSV, one JSON per dimension.
    Pimage {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        city: String,
        #[arg(long)]
        race: Race,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// K-medoids clustering and elbow curve of a feature matrix.
    Cluster {
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Segregation statistics, Z-scores, and optional per-cluster means.
    Stats {
        #[arg(long)]
        clustering: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Pairwise ARI of clustering CSVs, as `ari.csv` and `ari.svg`.
    Ari {
        #[arg(required = true, num_args = 2..)]
        clusterings: Vec<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Render a diagram, barcode, or persistence image as SVG.
    Render {
        #[arg(long, conflicts_with_all = ["barcode", "image"])]
        diagram: Option<PathBuf>,
        #[arg(long, conflicts_with = "image")]
        barcode: Option<PathBuf>,
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Full pipeline over a directory of bundles.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn direction(kind: ComplexKind) -> Direction {
    match kind {
        ComplexKind::LevelSet => Direction::Ascending,
        ComplexKind::Cubical => Direction::Descending,
    }
}

/// Diagrams for dimensions 0 and 1, empty where the file has no rows.
fn load_diagrams(path: &Path, kind: ComplexKind) -> Result<Vec<PersistenceDiagram>> {
    let dir = direction(kind);
    let loaded = PersistenceDiagram::load_csv(path, dir)?;
    Ok((0..2)
        .map(|dim| {
            loaded
                .iter()
                .find(|d| d.dim == dim)
                .cloned()
                .unwrap_or_else(|| PersistenceDiagram::empty(dim, dir))
        })
        .collect())
}

fn text_files(files: Vec<(String, String)>) -> BTreeMap<String, Vec<u8>> {
    files.into_iter().map(|(k, v)| (k, v.into_bytes())).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { cfg } => {
            let cfg = cfg.resolve()?;
            let cities = ingest(&cfg.input_dir)?;
            let mut csv = String::from("city_id,tracts,population\n");
            for c in &cities {
                csv.push_str(&format!("{},{},{}\n", c.city_id, c.n(), c.population()));
            }
            write_all(&cfg.output_dir, &text_files(vec![("cities.csv".into(), csv)]))?;
            println!("{} bundles valid", cities.len());
        }
        Command::Rasterize { bundle, race, out, cfg } => {
            let cfg = cfg.resolve()?;
            let city = load_city_bundle(&bundle)?;
            let raster = rasterize(&city, race, &cfg)?;
            write(&out, &raster.to_json())?;
        }
        Command::Persist { raster, out, cfg } => {
            let cfg = cfg.resolve()?;
            let raster = Raster::load_json(&raster)?;
            write(&out, &diagrams_csv(&persist(&raster, &cfg)?))?;
        }
        Command::Pimage {
            diagram,
            city,
            race,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            let diagrams = load_diagrams(&diagram, cfg.complex_kind)?;
            let mut files = Vec::new();
            for pi in images(&diagrams, &city, race, &cfg)? {
                let dim = pi.provenance.as_ref().map_or(0, |p| p.dim);
                files.push((format!("{city}_{}_h{dim}.json", race.name()), pi.to_json()?));
            }
            write_all(&cfg.output_dir, &text_files(files))?;
        }
        Command::Cluster { features, cfg } => {
            let cfg = cfg.resolve()?;
            let text = fs::read_to_string(&features).map_err(|e| Error::Io {
                path: features.clone(),
                source: e,
            })?;
            let rows = parse_feature_matrix(&text, cfg.group, &features)?;
            let (clustering, curve) = cluster_features(&rows, cfg.k, cfg.k_max)?;
            write_all(
                &cfg.output_dir,
                &text_files(vec![
                    ("clustering.csv".into(), clustering.partition.to_csv()),
                    ("medoids.csv".into(), clustering.medoids_csv()),
                    ("elbow.csv".into(), elbow_csv(&curve)),
                ]),
            )?;
            println!("distortion {}", clustering.distortion);
        }
        Command::Stats { clustering, cfg } => {
            let cfg = cfg.resolve()?;
            let cities = ingest(&cfg.input_dir)?;
            let partition = clustering.as_deref().map(Partition::load).transpose()?;
            let files = statistics(&cities, partition.as_ref())?
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            write_all(&cfg.output_dir, &text_files(files))?;
        }
        Command::Ari { clusterings, cfg } => {
            let cfg = cfg.resolve()?;
            let parts = clusterings
                .iter()
                .map(|p| Ok((p.display().to_string(), Partition::load(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let m = compare_clusterings(&parts)?;
            write_all(
                &cfg.output_dir,
                &text_files(vec![("ari.csv".into(), m.to_csv()), ("ari.svg".into(), m.to_svg())]),
            )?;
        }
        Command::Render {
            diagram,
            barcode,
            image,
            out,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            let svg = if let Some(p) = diagram {
                render_svg(Artifact::Diagram(&load_diagrams(&p, cfg.complex_kind)?))
            } else if let Some(p) = barcode {
                let b = Barcode::from_diagrams(&load_diagrams(&p, cfg.complex_kind)?);
                render_svg(Artifact::Barcode(&b))
            } else if let Some(p) = image {
                render_svg(Artifact::Image(&PersistenceImage::load(&p)?))
            } else {
                return Err(Error::Parameter("one of --diagram, --barcode, --image is required".into()));
            };
            write(&out, &svg)?;
        }
        Command::Run { cfg } => {
            let cfg = cfg.resolve()?;
            let manifest = run_pipeline(&cfg)?;
            println!(
                "{} cities, {} files written to {}",
                manifest.cities.len(),
                manifest.files.len() + 1,
                cfg.output_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
