//! Persistent homology over Z/2 by boundary-matrix reduction.
//!
//! Any filtered cell complex (simplicial or cubical) is first flattened into a
//! [`FilteredComplex`]: a list of cells with a dimension, the indices of their
//! codimension-one faces, and a filtration value. Columns are ordered by
//! filtration value, then dimension, then cell index, and reduced with the
//! clearing (twist) optimization: higher dimensions are reduced first and the
//! pivot rows they claim are known creators, so their own columns are skipped.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether cells enter as the filtration value grows or shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Sublevel sets: a cell is present at `t` when its value is `<= t`.
    Ascending,
    /// Superlevel sets: a cell is present at `t` when its value is `>= t`.
    Descending,
}

impl Direction {
    /// Orders two filtration values by entry time.
    #[inline]
    pub fn cmp(self, a: f64, b: f64) -> Ordering {
        match self {
            Direction::Ascending => a.total_cmp(&b),
            Direction::Descending => b.total_cmp(&a),
        }
    }

    /// True when a cell of value `v` is present at parameter `t`.
    #[inline]
    pub fn present(self, v: f64, t: f64) -> bool {
        match self {
            Direction::Ascending => v <= t,
            Direction::Descending => v >= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dim: usize,
    /// Indices of codimension-one faces in the owning complex.
    pub boundary: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    pub direction: Direction,
    pub cells: Vec<Cell>,
}

impl FilteredComplex {
    pub fn new(direction: Direction) -> Self {
        FilteredComplex {
            direction,
            cells: Vec::new(),
        }
    }

    /// Appends a cell and returns its index.
    pub fn push(&mut self, dim: usize, boundary: Vec<usize>, value: f64) -> usize {
        self.cells.push(Cell {
            dim,
            boundary,
            value,
        });
        self.cells.len() - 1
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Alternating cell count of the subcomplex present at `t`.
    pub fn euler_characteristic_at(&self, t: f64) -> i64 {
        self.cells
            .iter()
            .filter(|c| self.direction.present(c.value, t))
            .map(|c| if c.dim % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Distinct filtration values in entry order.
    pub fn filtration_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.cells.iter().map(|c| c.value).collect();
        vals.sort_by(|a, b| self.direction.cmp(*a, *b));
        vals.dedup();
        vals
    }

    /// Checks that every face exists, has the right dimension, and enters no
    /// later than its coface.
    pub fn validate(&self) -> Result<()> {
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.value.is_nan() {
                return Err(Error::Structural(format!("cell {i} has NaN value")));
            }
            if cell.dim == 0 && !cell.boundary.is_empty() {
                return Err(Error::Structural(format!("vertex {i} has a boundary")));
            }
            for &f in &cell.boundary {
                let face = self.cells.get(f).ok_or_else(|| {
                    Error::Structural(format!("cell {i} refers to missing face {f}"))
                })?;
                if face.dim + 1 != cell.dim {
                    return Err(Error::Structural(format!(
                        "cell {i} (dim {}) has face {f} of dim {}",
                        cell.dim, face.dim
                    )));
                }
                if self.direction.cmp(face.value, cell.value) == Ordering::Greater {
                    return Err(Error::Structural(format!(
                        "face {f} (value {}) enters after coface {i} (value {})",
                        face.value, cell.value
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Anything that can be flattened into a [`FilteredComplex`].
pub trait Filtration {
    fn to_filtered_complex(&self) -> FilteredComplex;
}

impl Filtration for FilteredComplex {
    fn to_filtered_complex(&self) -> FilteredComplex {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub birth: f64,
    /// `f64::INFINITY` for a class that never dies.
    pub death: f64,
}

impl PersistencePoint {
    pub fn new(birth: f64, death: f64) -> Self {
        PersistencePoint { birth, death }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    /// `|death - birth|`, valid for both orientations.
    pub fn lifespan(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            (self.death - self.birth).abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub direction: Direction,
    pub points: Vec<PersistencePoint>,
}

impl PersistenceDiagram {
    pub fn empty(dim: usize, direction: Direction) -> Self {
        PersistenceDiagram {
            dim,
            direction,
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of classes alive at parameter `t` (born, not yet dead).
    pub fn alive_at(&self, t: f64) -> usize {
        let d = self.direction;
        self.points
            .iter()
            .filter(|p| d.present(p.birth, t) && (p.is_infinite() || !d.present(p.death, t)))
            .count()
    }

    fn sort(&mut self) {
        self.points.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
    }

    /// Replaces infinite deaths with the end of the capped range and clamps
    /// finite points so no lifespan exceeds `cap`.
    ///
    /// Ascending diagrams die at `cap` at the latest. Descending diagrams run
    /// down to 0, so an infinite class born at `b` dies at `max(b - cap, 0)`.
    pub fn cap_infinite(&self, cap: f64) -> Result<PersistenceDiagram> {
        if cap.is_nan() || cap <= 0.0 {
            return Err(Error::Parameter(format!("cap must be positive, got {cap}")));
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                let death = match self.direction {
                    Direction::Ascending if p.is_infinite() => cap.max(p.birth),
                    Direction::Ascending => p.death.min(p.birth + cap),
                    Direction::Descending if p.is_infinite() => (p.birth - cap).max(0.0).min(p.birth),
                    Direction::Descending => p.death.max(p.birth - cap),
                };
                PersistencePoint::new(p.birth, death)
            })
            .collect();
        Ok(PersistenceDiagram {
            dim: self.dim,
            direction: self.direction,
            points,
        })
    }

    /// CSV with header `dim,birth,death`; infinity spelled `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", self.dim, fmt_value(p.birth), fmt_value(p.death));
        }
        out
    }

    /// Parses a single-dimension diagram CSV. The direction is not stored in
    /// the file and must be supplied.
    pub fn from_csv(text: &str, direction: Direction, origin: &Path) -> Result<Vec<PersistenceDiagram>> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            location: format!("line {line}"),
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "dim,birth,death" => {}
            _ => return Err(parse_err(1, "expected header 'dim,birth,death'".into())),
        }
        let mut diagrams: Vec<PersistenceDiagram> = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(i + 1, format!("expected 3 fields, got {}", fields.len())));
            }
            let dim: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad dim '{}'", fields[0])))?;
            let birth = parse_value(fields[1]).ok_or_else(|| parse_err(i + 1, format!("bad birth '{}'", fields[1])))?;
            let death = parse_value(fields[2]).ok_or_else(|| parse_err(i + 1, format!("bad death '{}'", fields[2])))?;
            match diagrams.iter_mut().find(|d| d.dim == dim) {
                Some(d) => d.points.push(PersistencePoint::new(birth, death)),
                None => diagrams.push(PersistenceDiagram {
                    dim,
                    direction,
                    points: vec![PersistencePoint::new(birth, death)],
                }),
            }
        }
        Ok(diagrams)
    }

    pub fn load_csv(path: &Path, direction: Direction) -> Result<Vec<PersistenceDiagram>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PersistenceDiagram::from_csv(&text, direction, path)
    }
}

fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_value(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// One interval of a barcode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub start: f64,
    pub end: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    pub intervals: Vec<Bar>,
}

impl Barcode {
    /// Intervals sorted by dimension, then by entry order of their start.
    pub fn from_diagrams(diagrams: &[PersistenceDiagram]) -> Barcode {
        let mut intervals: Vec<(Direction, Bar)> = diagrams
            .iter()
            .flat_map(|d| {
                d.points.iter().map(move |p| {
                    (
                        d.direction,
                        Bar {
                            start: p.birth,
                            end: p.death,
                            dim: d.dim,
                        },
                    )
                })
            })
            .collect();
        intervals.sort_by(|(da, a), (_, b)| {
            a.dim
                .cmp(&b.dim)
                .then(da.cmp(a.start, b.start))
                .then(a.end.total_cmp(&b.end))
        });
        Barcode {
            intervals: intervals.into_iter().map(|(_, b)| b).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Computes the H0 and H1 diagrams of a filtered complex.
pub fn compute_persistence<F: Filtration + ?Sized>(complex: &F) -> Result<Vec<PersistenceDiagram>> {
    let complex = complex.to_filtered_complex();
    reduce(&complex)
}

/// Reduction on an already flattened complex.
pub fn reduce(complex: &FilteredComplex) -> Result<Vec<PersistenceDiagram>> {
    complex.validate()?;
    let direction = complex.direction;
    let cells = &complex.cells;
    let n = cells.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        direction
            .cmp(cells[a].value, cells[b].value)
            .then(cells[a].dim.cmp(&cells[b].dim))
            .then(a.cmp(&b))
    });
    let mut position = vec![0usize; n];
    for (p, &c) in order.iter().enumerate() {
        position[c] = p;
    }

    let max_dim = cells.iter().map(|c| c.dim).max().unwrap_or(0);
    // column (by position) -> reduced boundary, kept only for pivot columns
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    // row position -> column position whose pivot it is
    let mut pivot_of_row: Vec<usize> = vec![usize::MAX; n];
    let mut cleared = vec![false; n];
    let mut scratch: Vec<usize> = Vec::new();

    for dim in (1..=max_dim).rev() {
        for j in 0..n {
            let cell = &cells[order[j]];
            if cell.dim != dim || cleared[j] {
                continue;
            }
            let mut col: Vec<usize> = cell.boundary.iter().map(|&f| position[f]).collect();
            col.sort_unstable();
            // Z/2: a face listed twice cancels
            dedup_pairs(&mut col);
            while let Some(&low) = col.last() {
                let owner = pivot_of_row[low];
                if owner == usize::MAX {
                    break;
                }
                symmetric_difference(&col, &reduced[owner], &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_of_row[low] = j;
                cleared[low] = true;
                reduced[j] = col;
            }
        }
    }

    let mut diagrams = vec![
        PersistenceDiagram::empty(0, direction),
        PersistenceDiagram::empty(1, direction),
    ];
    let value_at = |p: usize| cells[order[p]].value;
    for i in 0..n {
        let dim = cells[order[i]].dim;
        if dim > 1 {
            continue;
        }
        let negative = !reduced[i].is_empty();
        if negative {
            continue;
        }
        let death = match pivot_of_row[i] {
            usize::MAX => f64::INFINITY,
            j => value_at(j),
        };
        diagrams[dim].points.push(PersistencePoint::new(value_at(i), death));
    }
    for d in &mut diagrams {
        d.sort();
    }
    Ok(diagrams)
}

fn dedup_pairs(sorted: &mut Vec<usize>) {
    let mut out = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(sorted[i]);
        }
        i = j;
    }
    *sorted = out;
}

fn symmetric_difference(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}
