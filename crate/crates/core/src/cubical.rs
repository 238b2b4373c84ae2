//! Superlevel-set cubical complexes of percentage rasters.
//!
//! Pixels are vertices. Two 4-adjacent pixels span an edge, and each 2x2
//! block of pixels spans a square. Values are floored to whole percentages,
//! and an edge or square enters once all of its vertices have, i.e. at the
//! minimum of their values.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::homology::{Direction, FilteredComplex, Filtration};
use crate::raster::Raster;

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredCubicalComplex {
    pub width: usize,
    pub height: usize,
    /// Floored pixel values, row-major.
    pub vertices: Vec<f64>,
    /// Vertex pairs, horizontal edges first then vertical.
    pub edges: Vec<([usize; 2], f64)>,
    /// Vertex quadruples (lower-left, lower-right, upper-left, upper-right).
    pub squares: Vec<([usize; 4], f64)>,
}

impl FilteredCubicalComplex {
    /// Cells present at scale `eps`, as (vertices, edges, squares).
    pub fn counts_at(&self, eps: f64) -> (usize, usize, usize) {
        (
            self.vertices.iter().filter(|&&v| v >= eps).count(),
            self.edges.iter().filter(|(_, v)| *v >= eps).count(),
            self.squares.iter().filter(|(_, v)| *v >= eps).count(),
        )
    }

    pub fn cell_count(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.squares.len()
    }

    /// Diagnostic dump: `cell_dim,vertex_ids,value` with vertex ids joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_dim,vertex_ids,value\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "0,{i},{v}");
        }
        for ([a, b], v) in &self.edges {
            let _ = writeln!(out, "1,{a};{b},{v}");
        }
        for ([a, b, c, d], v) in &self.squares {
            let _ = writeln!(out, "2,{a};{b};{c};{d},{v}");
        }
        out
    }
}

/// Builds the descending filtration from a raster with values in `[0, 100]`.
pub fn build_cubical_filtration(gray: &Raster) -> Result<FilteredCubicalComplex> {
    gray.validate()?;
    if let Some(v) = gray.values.iter().find(|v| !(0.0..=100.0).contains(*v)) {
        return Err(Error::Validation(format!(
            "grayscale value {v} outside [0, 100]"
        )));
    }
    let (w, h) = (gray.width, gray.height);
    let vertices: Vec<f64> = gray.values.iter().map(|v| v.floor()).collect();
    let mut edges = Vec::with_capacity(2 * w * h);
    for row in 0..h {
        for col in 0..w.saturating_sub(1) {
            let (a, b) = (row * w + col, row * w + col + 1);
            edges.push(([a, b], vertices[a].min(vertices[b])));
        }
    }
    for row in 0..h.saturating_sub(1) {
        for col in 0..w {
            let (a, b) = (row * w + col, (row + 1) * w + col);
            edges.push(([a, b], vertices[a].min(vertices[b])));
        }
    }
    let mut squares = Vec::with_capacity(w * h);
    for row in 0..h.saturating_sub(1) {
        for col in 0..w.saturating_sub(1) {
            let ll = row * w + col;
            let q = [ll, ll + 1, ll + w, ll + w + 1];
            let value = q.iter().map(|&i| vertices[i]).fold(f64::INFINITY, f64::min);
            squares.push((q, value));
        }
    }
    Ok(FilteredCubicalComplex {
        width: w,
        height: h,
        vertices,
        edges,
        squares,
    })
}

impl Filtration for FilteredCubicalComplex {
    fn to_filtered_complex(&self) -> FilteredComplex {
        let w = self.width;
        let h = self.height;
        let mut fc = FilteredComplex::new(Direction::Descending);
        fc.cells.reserve(self.cell_count());
        for &v in &self.vertices {
            fc.push(0, Vec::new(), v);
        }
        let base = self.vertices.len();
        for ([a, b], v) in &self.edges {
            fc.push(1, vec![*a, *b], *v);
        }
        let horizontal = h * w.saturating_sub(1);
        let h_edge = |row: usize, col: usize| base + row * (w - 1) + col;
        let v_edge = |row: usize, col: usize| base + horizontal + row * w + col;
        for ([ll, ..], v) in &self.squares {
            let (row, col) = (ll / w, ll % w);
            let faces = vec![
                h_edge(row, col),
                h_edge(row + 1, col),
                v_edge(row, col),
                v_edge(row, col + 1),
            ];
            fc.push(2, faces, *v);
        }
        fc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::compute_persistence;

    #[test]
    fn constant_raster() {
        let c = build_cubical_filtration(&Raster::filled(4, 3, 70.0)).unwrap();
        assert!(c.edges.iter().all(|(_, v)| *v == 70.0));
        assert!(c.squares.iter().all(|(_, v)| *v == 70.0));
        assert_eq!(c.counts_at(71.0), (0, 0, 0));
        assert_eq!(c.counts_at(70.0), (12, 17, 6));
    }

    #[test]
    fn edge_min_rule() {
        let c = build_cubical_filtration(&Raster::from_rows(&[vec![90.0, 60.0]]).unwrap()).unwrap();
        assert_eq!(c.edges, vec![([0, 1], 60.0)]);
        assert!(c.squares.is_empty());
    }

    #[test]
    fn ring_around_a_hole() {
        let rows = vec![
            vec![80.0, 80.0, 80.0],
            vec![80.0, 0.0, 80.0],
            vec![80.0, 80.0, 80.0],
        ];
        let c = build_cubical_filtration(&Raster::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(c.counts_at(80.0), (8, 8, 0));
        assert_eq!(c.counts_at(0.0), (9, 12, 4));
        let d = compute_persistence(&c).unwrap();
        let loops: Vec<_> = d[1]
            .points
            .iter()
            .filter(|p| p.lifespan() > 0.0)
            .map(|p| (p.birth, p.death)).collect();
        assert_eq!(loops, vec![(80.0, 0.0)]);
    }

    #[test]
    fn floors_and_validates() {
        let c = build_cubical_filtration(&Raster::from_rows(&[vec![42.9, 0.5]]).unwrap()).unwrap();
        assert_eq!(c.vertices, vec![42.0, 0.0]);
        assert!(build_cubical_filtration(&Raster::from_rows(&[vec![101.0]]).unwrap()).is_err());
        assert!(build_cubical_filtration(&Raster::from_rows(&[vec![-1.0]]).unwrap()).is_err());
    }

    #[test]
    fn square_faces_are_its_edges() {
        let c = build_cubical_filtration(&Raster::filled(3, 2, 5.0)).unwrap();
        let fc = c.to_filtered_complex();
        fc.validate().unwrap();
        for cell in fc.cells.iter().filter(|c| c.dim == 2) {
            let mut verts: Vec<usize> = cell
                .boundary
                .iter()
                .flat_map(|&e| fc.cells[e].boundary.clone())
                .collect();
            verts.sort_unstable();
            verts.dedup();
            assert_eq!(verts.len(), 4);
        }
    }

    #[test]
    fn csv_dump() {
        let c = build_cubical_filtration(&Raster::from_rows(&[vec![90.0, 60.0]]).unwrap()).unwrap();
        assert_eq!(c.to_csv(), "cell_dim,vertex_ids,value\n0,0,90\n0,1,60\n1,0;1,60\n");
    }
}
