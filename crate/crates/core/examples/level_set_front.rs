//! Grows a majority mask by level-set front propagation, triangulates the
//! first-inclusion times, and prints the level-set persistence.

use segtopo::geo::{rasterize_majority_mask, Race, RasterConfig};
use segtopo::homology::compute_persistence;
use segtopo::levelset::{propagate_front, triangulate, FrontConfig};
use segtopo::synthetic::{archetype_city, Archetype};

fn main() -> segtopo::Result<()> {
    let city = archetype_city("poly", Archetype::Polycentric, 12)?;
    let mask = rasterize_majority_mask(&city, Race::Black, 50.0, RasterConfig { long_side: 200 })?;
    let times = propagate_front(&mask, &FrontConfig::default())?;
    let reached = times.raster.values.iter().filter(|t| t.is_finite()).count();
    println!("{} of {} pixels reached by t = {}", reached, mask.values.len(), times.t_max);
    for t in [0.0, 5.0, 10.0, 20.0] {
        let n = times.sublevel(t).iter().filter(|&&b| b).count();
        println!("  |M_{t}| = {n}");
    }
    let complex = triangulate(&times, 5)?;
    println!(
        "triangulation: {} vertices, {} edges, {} triangles",
        complex.vertices.len(),
        complex.edges.len(),
        complex.triangles.len()
    );
    for d in compute_persistence(&complex)? {
        let d = d.cap_infinite(times.t_max)?;
        let mut features: Vec<_> = d.points.iter().filter(|p| p.lifespan() > 0.0).collect();
        features.sort_by(|a, b| b.lifespan().total_cmp(&a.lifespan()));
        println!("H{}: {} features with positive lifespan", d.dim, features.len());
        for p in features.iter().take(5) {
            println!("  [{}, {})", p.birth, p.death);
        }
    }
    Ok(())
}
