//! Clusters synthetic cities by their cubical persistence images.

use std::collections::HashMap;

use segtopo::cluster::{distortion_curve, kmedoids};
use segtopo::pimage::{concatenate_features, ComplexKind, Group};
use segtopo::pipeline::{images, persist, rasterize, PipelineConfig};
use segtopo::synthetic::corpus;

fn main() -> segtopo::Result<()> {
    let cfg = PipelineConfig {
        complex_kind: ComplexKind::Cubical,
        group: Group::Wb,
        raster_long_side: 80,
        ..PipelineConfig::default()
    };
    let cities = corpus(10)?;
    let mut features = Vec::new();
    for city in &cities {
        let mut pis = HashMap::new();
        for &race in cfg.group.races() {
            let diagrams = persist(&rasterize(city, race, &cfg)?, &cfg)?;
            for pi in images(&diagrams, &city.city_id, race, &cfg)? {
                let dim = pi.provenance.as_ref().map_or(0, |p| p.dim);
                pis.insert((race, dim), pi);
            }
        }
        features.push(concatenate_features(&city.city_id, &pis, cfg.group)?);
    }
    let clustering = kmedoids(&features, 4)?;
    for (id, label) in clustering.partition.city_ids.iter().zip(&clustering.partition.labels) {
        println!("{id:>16}  cluster {label}");
    }
    println!("medoids: {:?}", clustering.medoid_ids());
    for (k, d) in distortion_curve(&features, 6)? {
        println!("K={k} distortion {d:.3}");
    }
    Ok(())
}
