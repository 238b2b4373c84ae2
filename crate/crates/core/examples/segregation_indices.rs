//! Dissimilarity and exposure indices for each archetype, and their Z-scores.

use segtopo::geo::Race;
use segtopo::segstats::{dissimilarity_index, exposure_index, zscore_table, StatsTable};
use segtopo::synthetic::{archetype_city, Archetype};

fn main() -> segtopo::Result<()> {
    let cities: Vec<_> = Archetype::ALL
        .iter()
        .map(|&a| archetype_city(a.name(), a, 10))
        .collect::<segtopo::Result<_>>()?;
    println!("{:>14} {:>9} {:>9} {:>9}", "city", "W-B IoD", "W-B EI", "B-B EI");
    for c in &cities {
        println!(
            "{:>14} {:>9.2} {:>9.2} {:>9.2}",
            c.city_id,
            dissimilarity_index(c, Race::White, Race::Black)?,
            exposure_index(c, Race::White, Race::Black)?,
            exposure_index(c, Race::Black, Race::Black)?,
        );
    }
    let z = zscore_table(&StatsTable::from_cities(&cities))?;
    print!("\n{}", z.to_csv());
    Ok(())
}
