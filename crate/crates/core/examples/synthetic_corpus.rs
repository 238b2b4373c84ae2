//! Writes a corpus of synthetic city bundles to a directory.
//!
//! cargo run --example synthetic_corpus -- [dir] [count]

use std::path::PathBuf;

use segtopo::synthetic::{corpus, write_bundles};

fn main() -> segtopo::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "bundles".into()));
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let cities = corpus(count)?;
    for path in write_bundles(&dir, &cities)? {
        println!("{}", path.display());
    }
    Ok(())
}
