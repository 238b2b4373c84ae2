//! Rasterizes one synthetic city into percentage rasters and majority masks
//! and prints them as ASCII art.

use segtopo::geo::{rasterize_majority_mask, rasterize_percentage, Race, RasterConfig};
use segtopo::raster::Raster;
use segtopo::synthetic::{archetype_city, Archetype};

fn show(r: &Raster, ramp: &[char], scale: f64) {
    for row in (0..r.height).rev() {
        let line: String = (0..r.width)
            .map(|col| {
                let k = ((r.get(col, row) / scale) * (ramp.len() - 1) as f64).round() as usize;
                ramp[k.min(ramp.len() - 1)]
            })
            .collect();
        println!("{line}");
    }
}

fn main() -> segtopo::Result<()> {
    let city = archetype_city("enclave", Archetype::Enclave, 10)?;
    let cfg = RasterConfig { long_side: 40 };
    for race in [Race::White, Race::Black] {
        let pct = rasterize_percentage(&city, race, cfg)?;
        println!("{race} percentage ({}x{}):", pct.width, pct.height);
        show(&pct, &[' ', '.', ':', '*', '#'], 100.0);
        let mask = rasterize_majority_mask(&city, race, 50.0, cfg)?;
        let inside = mask.values.iter().filter(|&&v| v == 1.0).count();
        println!("{race} majority pixels: {inside}\n");
    }
    Ok(())
}
