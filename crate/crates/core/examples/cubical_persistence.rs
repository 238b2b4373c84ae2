//! Superlevel cubical persistence of the White percentage raster for the
//! enclave and divided archetypes.

use segtopo::cubical::build_cubical_filtration;
use segtopo::geo::{rasterize_percentage, Race, RasterConfig};
use segtopo::homology::{compute_persistence, Barcode};
use segtopo::render::barcode_svg;
use segtopo::synthetic::{archetype_city, Archetype};

fn main() -> segtopo::Result<()> {
    for arch in [Archetype::Enclave, Archetype::Divided] {
        let city = archetype_city(arch.name(), arch, 10)?;
        let gray = rasterize_percentage(&city, Race::White, RasterConfig { long_side: 100 })?;
        let complex = build_cubical_filtration(&gray)?;
        let diagrams: Vec<_> = compute_persistence(&complex)?
            .iter()
            .map(|d| d.cap_infinite(100.0))
            .collect::<segtopo::Result<_>>()?;
        println!("{} ({} cells)", arch.name(), complex.cell_count());
        for d in &diagrams {
            let longest = d.points.iter().map(|p| p.lifespan()).fold(0.0, f64::max);
            println!("  H{}: {} points, longest lifespan {longest}", d.dim, d.len());
        }
        let mut kept = diagrams.clone();
        for d in &mut kept {
            d.points.retain(|p| p.lifespan() > 0.0);
        }
        let svg = barcode_svg(&Barcode::from_diagrams(&kept));
        let path = std::env::temp_dir().join(format!("{}_white_barcode.svg", arch.name()));
        std::fs::write(&path, svg).expect("write svg");
        println!("  barcode: {}", path.display());
    }
    Ok(())
}
