//! Clusters one corpus under both complexes and three groups and compares
//! the six partitions by adjusted Rand index.

use std::collections::HashMap;

use segtopo::cluster::kmedoids;
use segtopo::pimage::{concatenate_features, ComplexKind, Group};
use segtopo::pipeline::{compare_clusterings, images, persist, rasterize, PipelineConfig};
use segtopo::synthetic::corpus;

fn main() -> segtopo::Result<()> {
    let cities = corpus(10)?;
    let mut partitions = Vec::new();
    for kind in [ComplexKind::LevelSet, ComplexKind::Cubical] {
        let cfg = PipelineConfig {
            complex_kind: kind,
            raster_long_side: 80,
            ..PipelineConfig::default()
        };
        let mut pis = HashMap::new();
        for city in &cities {
            for race in segtopo::geo::Race::ALL {
                let diagrams = persist(&rasterize(city, race, &cfg)?, &cfg)?;
                for pi in images(&diagrams, &city.city_id, race, &cfg)? {
                    let dim = pi.provenance.as_ref().map_or(0, |p| p.dim);
                    pis.insert((city.city_id.clone(), race, dim), pi);
                }
            }
        }
        for group in [Group::Wbah, Group::Wb, Group::B] {
            let features = cities
                .iter()
                .map(|c| {
                    let own = pis
                        .iter()
                        .filter(|((id, _, _), _)| *id == c.city_id)
                        .map(|((_, r, d), pi)| ((*r, *d), pi.clone()))
                        .collect();
                    concatenate_features(&c.city_id, &own, group)
                })
                .collect::<segtopo::Result<Vec<_>>>()?;
            let clustering = kmedoids(&features, 4)?;
            partitions.push((format!("{kind}-{group}"), clustering.partition));
        }
    }
    let m = compare_clusterings(&partitions)?;
    print!("{}", m.to_csv());
    let path = std::env::temp_dir().join("ari_heatmap.svg");
    std::fs::write(&path, m.to_svg()).expect("write svg");
    println!("heatmap: {}", path.display());
    Ok(())
}
