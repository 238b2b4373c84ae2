//! Runs the whole pipeline on a synthetic corpus in a temporary directory
//! and prints the manifest.

use segtopo::pimage::ComplexKind;
use segtopo::pipeline::{run_pipeline, PipelineConfig};
use segtopo::synthetic::{corpus, write_bundles};

fn main() -> segtopo::Result<()> {
    let root = std::env::temp_dir().join("segtopo_full_pipeline");
    let input = root.join("bundles");
    write_bundles(&input, &corpus(8)?)?;
    let cfg = PipelineConfig {
        input_dir: input,
        output_dir: root.join("out"),
        complex_kind: ComplexKind::Cubical,
        raster_long_side: 120,
        ..PipelineConfig::default()
    };
    let manifest = run_pipeline(&cfg)?;
    for f in manifest.files.iter().filter(|f| !f.path.contains('/')) {
        println!("{:<20} {} {:>8} bytes", f.path, &f.sha256[..16], f.bytes);
    }
    let nested = manifest.files.iter().filter(|f| f.path.contains('/')).count();
    println!("plus {nested} per-pair files under {}", cfg.output_dir.display());
    print!("{}", std::fs::read_to_string(cfg.output_dir.join("clustering.csv")).expect("read"));
    Ok(())
}
