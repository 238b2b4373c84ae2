//! Minimal self-contained SVG renderers.
//!
//! Coordinates are written with a fixed number of decimals so the same
//! artifact always yields the same bytes.

use std::fmt::Write as _;

use crate::homology::{Barcode, PersistenceDiagram};
use crate::pimage::PersistenceImage;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Anything [`render_svg`] can draw.
#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Diagram(&'a [PersistenceDiagram]),
    Barcode(&'a Barcode),
    Image(&'a PersistenceImage),
}

pub fn render_svg(artifact: Artifact<'_>) -> String {
    match artifact {
        Artifact::Diagram(d) => diagram_svg(d),
        Artifact::Barcode(b) => barcode_svg(b),
        Artifact::Image(pi) => image_svg(pi),
    }
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\" class=\"background\"/>\n"
    )
}

fn axes(out: &mut String) {
    let (lo, hi) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{lo:.2}\" y1=\"{hi:.2}\" x2=\"{hi:.2}\" y2=\"{hi:.2}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{lo:.2}\" y1=\"{hi:.2}\" x2=\"{lo:.2}\" y2=\"{lo:.2}\" stroke=\"black\"/>"
    );
}

/// Finite extent of a set of values, widened to a non-empty interval.
fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Birth on the x axis, death on the y axis, one colour per dimension.
/// Infinite deaths are drawn on the top edge.
pub fn diagram_svg(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = header(SIZE, SIZE);
    axes(&mut out);
    let (lo, hi) = extent(
        diagrams
            .iter()
            .flat_map(|d| d.points.iter().flat_map(|p| [p.birth, p.death])),
    );
    let span = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + (v - lo) / (hi - lo) * span;
    let sy = |v: f64| {
        if v.is_finite() {
            SIZE - MARGIN - (v - lo) / (hi - lo) * span
        } else {
            MARGIN
        }
    };
    if diagrams.iter().any(|d| !d.is_empty()) {
        let _ = writeln!(
            out,
            "<line class=\"diagonal\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4\"/>",
            sx(lo),
            sy(lo),
            sx(hi),
            sy(hi)
        );
    }
    for d in diagrams {
        let colour = dim_colour(d.dim);
        for p in &d.points {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{colour}\"/>",
                sx(p.birth),
                sy(p.death)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn dim_colour(dim: usize) -> &'static str {
    match dim {
        0 => "#1f77b4",
        1 => "#d62728",
        _ => "#2ca02c",
    }
}

/// One horizontal `<rect>` per interval, top to bottom in barcode order.
pub fn barcode_svg(barcode: &Barcode) -> String {
    let rows = barcode.len().max(1) as f64;
    let height = 2.0 * MARGIN + 8.0 * rows;
    let mut out = header(SIZE, height);
    let (lo, hi) = extent(barcode.intervals.iter().flat_map(|b| [b.start, b.end]));
    let span = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| {
        if v.is_finite() {
            MARGIN + (v - lo) / (hi - lo) * span
        } else if v > 0.0 {
            SIZE - MARGIN
        } else {
            MARGIN
        }
    };
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{MARGIN:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        height - MARGIN,
        SIZE - MARGIN,
        height - MARGIN
    );
    for (k, bar) in barcode.intervals.iter().enumerate() {
        let (a, b) = (sx(bar.start), sx(bar.end));
        let _ = writeln!(
            out,
            "<rect class=\"bar\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"6\" fill=\"{}\"/>",
            a.min(b),
            MARGIN + 8.0 * k as f64,
            (b - a).abs().max(1.0),
            dim_colour(bar.dim)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale grid, darker for more mass, persistence increasing upward.
pub fn image_svg(pi: &PersistenceImage) -> String {
    let n = pi.resolution();
    let mut out = header(SIZE, SIZE);
    let cell = (SIZE - 2.0 * MARGIN) / n.max(1) as f64;
    let max = pi.pixels.iter().copied().fold(0.0_f64, f64::max);
    for row in 0..n {
        for col in 0..n {
            let v = if max > 0.0 { pi.get(row, col) / max } else { 0.0 };
            let g = (255.0 * (1.0 - v)).round().clamp(0.0, 255.0) as u8;
            let _ = writeln!(
                out,
                "<rect class=\"cell\" x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                MARGIN + col as f64 * cell,
                SIZE - MARGIN - (row + 1) as f64 * cell
            );
        }
    }
    axes(&mut out);
    out.push_str("</svg>\n");
    out
}

/// Labelled square heatmap of values in `[-1, 1]`, e.g. pairwise ARI.
pub fn heatmap_svg(labels: &[String], matrix: &[Vec<f64>]) -> String {
    let n = labels.len();
    let cell = 60.0;
    let left = 160.0;
    let size = left + cell * n as f64 + MARGIN;
    let mut out = header(size, size);
    for (i, label) in labels.iter().enumerate() {
        let y = left + cell * i as f64 + cell / 2.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            escape(label)
        );
        let _ = writeln!(
            out,
            "<text x=\"{y:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"start\" transform=\"rotate(-60 {y:.2} {:.2})\">{}</text>",
            left - 6.0,
            left - 6.0,
            escape(label)
        );
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = v.clamp(0.0, 1.0);
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let (x, y) = (left + cell * j as f64, left + cell * i as f64);
            let _ = writeln!(
                out,
                "<rect class=\"cell\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb(255,{shade},{shade})\" stroke=\"white\"/>"
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{v:.3}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{Direction, PersistencePoint};
    use crate::pimage::{persistence_image, PIConfig};

    #[test]
    fn empty_diagram_has_axes_only() {
        let svg = diagram_svg(&[PersistenceDiagram::empty(0, Direction::Ascending)]);
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert!(!svg.contains("<circle"));
        assert!(!svg.contains("diagonal"));
    }

    #[test]
    fn one_interval_one_bar() {
        let d = PersistenceDiagram {
            dim: 1,
            direction: Direction::Descending,
            points: vec![PersistencePoint::new(80.0, 10.0)],
        };
        let svg = barcode_svg(&Barcode::from_diagrams(&[d]));
        assert_eq!(svg.matches("class=\"bar\"").count(), 1);
    }

    #[test]
    fn image_grid_and_determinism() {
        let pi = persistence_image(&[(3.0, 4.0)], &PIConfig::level_set()).unwrap();
        let a = render_svg(Artifact::Image(&pi));
        assert_eq!(a.matches("class=\"cell\"").count(), 400);
        assert_eq!(a, render_svg(Artifact::Image(&pi)));
    }

    #[test]
    fn heatmap_labels_escaped() {
        let svg = heatmap_svg(&["a<b".into()], &[vec![1.0]]);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("1.000"));
    }
}
