//! Turns a small diagram into a persistence image and checks its mass.

use segtopo::homology::{Direction, PersistenceDiagram, PersistencePoint};
use segtopo::pimage::{diagram_image, PIConfig};
use segtopo::render::image_svg;

fn main() -> segtopo::Result<()> {
    let diagram = PersistenceDiagram {
        dim: 1,
        direction: Direction::Ascending,
        points: vec![
            PersistencePoint::new(0.0, 12.0),
            PersistencePoint::new(3.0, 5.0),
            PersistencePoint::new(6.0, 6.0),
            PersistencePoint::new(2.0, f64::INFINITY),
        ],
    };
    let capped = diagram.cap_infinite(20.0)?;
    let cfg = PIConfig::level_set();
    let pi = diagram_image(&capped, &cfg)?;
    let expected: f64 = capped.points.iter().map(|p| cfg.weight(p.lifespan())).sum();
    println!("{}x{} image, total mass {:.4}", pi.resolution(), pi.resolution(), pi.total());
    println!("sum of weights {expected:.4} (mass outside the grid is lost)");
    let (mut best, mut at) = (0.0, (0, 0));
    for row in 0..pi.resolution() {
        for col in 0..pi.resolution() {
            if pi.get(row, col) > best {
                best = pi.get(row, col);
                at = (row, col);
            }
        }
    }
    println!("brightest pixel: persistence bin {}, birth bin {}", at.0, at.1);
    let path = std::env::temp_dir().join("persistence_image.svg");
    std::fs::write(&path, image_svg(&pi)).expect("write svg");
    println!("svg: {}", path.display());
    Ok(())
}
