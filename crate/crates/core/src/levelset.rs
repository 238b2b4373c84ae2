//! Level-set front propagation of a binary mask and triangulation of the
//! resulting first-inclusion times.
//!
//! The mask is used as the initial level-set function `phi` and evolved with
//! forward Euler steps of `d(phi)/dt = v |grad phi|`. A pixel belongs to the
//! grown region `M_t` once `phi >= 0.5`; since the update never decreases
//! `phi`, the regions are nested and the first time a pixel crosses the
//! threshold fully describes the filtration.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{Direction, FilteredComplex, Filtration};
use crate::raster::Raster;

/// Value of a pixel that is never reached within the time horizon.
pub const NEVER: f64 = f64::INFINITY;

/// Level at which `phi` counts as inside the front.
pub const MEMBERSHIP_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontConfig {
    pub velocity: f64,
    pub dt: f64,
    pub t_max: f64,
}

impl Default for FrontConfig {
    fn default() -> Self {
        FrontConfig {
            velocity: 1.0,
            dt: 0.5,
            t_max: 20.0,
        }
    }
}

impl FrontConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(Error::Parameter(format!("velocity must be positive, got {}", self.velocity)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        let ratio = self.t_max / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "t_max {} is not a whole number of dt {} steps",
                self.t_max, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Time of step `k` on the grid.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// Upwind gradient magnitude for an outward-moving front (`phi` high inside).
///
/// Per axis the Godunov term is `max(min(D-, 0)^2, max(D+, 0)^2)`, where `D-`
/// and `D+` are the backward and forward differences in pixel units. A missing
/// neighbor at the raster edge contributes a zero difference.
pub fn godunov_gradient_magnitude(phi: &Raster) -> Raster {
    let mut out = vec![0.0; phi.values.len()];
    gradient_into(phi.width, phi.height, &phi.values, &mut out);
    phi.with_values(out)
}

fn gradient_into(w: usize, h: usize, phi: &[f64], out: &mut [f64]) {
    let axis = |minus: f64, plus: f64| {
        let a = minus.min(0.0);
        let b = plus.max(0.0);
        (a * a).max(b * b)
    };
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let c = phi[i];
            let dxm = if col > 0 { c - phi[i - 1] } else { 0.0 };
            let dxp = if col + 1 < w { phi[i + 1] - c } else { 0.0 };
            let dym = if row > 0 { c - phi[i - w] } else { 0.0 };
            let dyp = if row + 1 < h { phi[i + w] - c } else { 0.0 };
            out[i] = (axis(dxm, dxp) + axis(dym, dyp)).sqrt();
        }
    }
}

/// Per-pixel first-inclusion time on the grid `{0, dt, ..., t_max}`, or [`NEVER`].
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionTimeField {
    pub raster: Raster,
    pub dt: f64,
    pub t_max: f64,
}

impl InclusionTimeField {
    pub fn width(&self) -> usize {
        self.raster.width
    }

    pub fn height(&self) -> usize {
        self.raster.height
    }

    pub fn time(&self, col: usize, row: usize) -> Option<f64> {
        let t = self.raster.get(col, row);
        (t != NEVER).then_some(t)
    }

    /// Pixels in `M_t`.
    pub fn sublevel(&self, t: f64) -> Vec<bool> {
        self.raster.values.iter().map(|&v| v <= t).collect()
    }

    /// Binary layout (little endian): magic `ITF1`, width u32, height u32,
    /// dt f32, t_max f32, then `width * height` f32 values in row-major order.
    /// [`NEVER`] is stored as +infinity.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 4 * self.raster.values.len());
        out.extend_from_slice(b"ITF1");
        out.extend_from_slice(&(self.width() as u32).to_le_bytes());
        out.extend_from_slice(&(self.height() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dt as f32).to_le_bytes());
        out.extend_from_slice(&(self.t_max as f32).to_le_bytes());
        for &v in &self.raster.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). World placement is not part of
    /// the format; the result uses unit pixels at the origin.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Validation(format!("inclusion-time file: {m}"));
        if bytes.len() < 20 || &bytes[..4] != b"ITF1" {
            return Err(bad("missing ITF1 header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let (width, height) = (u32_at(4) as usize, u32_at(8) as usize);
        let (dt, t_max) = (f32_at(12) as f64, f32_at(16) as f64);
        if bytes.len() != 20 + 4 * width * height {
            return Err(bad("payload length does not match header"));
        }
        let values = (0..width * height).map(|k| f32_at(20 + 4 * k) as f64).collect();
        let raster = Raster {
            width,
            height,
            origin: (0.0, 0.0),
            pixel_size: 1.0,
            values,
        };
        raster.validate()?;
        Ok(InclusionTimeField { raster, dt, t_max })
    }

    /// JSON form; [`NEVER`] is written as `null`.
    pub fn to_json(&self) -> String {
        let doc = TimeFieldJson {
            width: self.width(),
            height: self.height(),
            dt: self.dt,
            t_max: self.t_max,
            origin: self.raster.origin,
            pixel_size: self.raster.pixel_size,
            times: self.raster.values.iter().map(|&v| (v != NEVER).then_some(v)).collect(),
        };
        serde_json::to_string(&doc).expect("time field serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TimeFieldJson = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("inclusion-time JSON: {e}")))?;
        let raster = Raster {
            width: doc.width,
            height: doc.height,
            origin: doc.origin,
            pixel_size: doc.pixel_size,
            values: doc.times.into_iter().map(|t| t.unwrap_or(NEVER)).collect(),
        };
        raster.validate()?;
        Ok(InclusionTimeField {
            raster,
            dt: doc.dt,
            t_max: doc.t_max,
        })
    }

    /// Loads either format, chosen by the `.json` extension.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            InclusionTimeField::from_json(&text)
        } else {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            InclusionTimeField::from_bytes(&bytes)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TimeFieldJson {
    width: usize,
    height: usize,
    dt: f64,
    t_max: f64,
    origin: (f64, f64),
    pixel_size: f64,
    times: Vec<Option<f64>>,
}

/// Grows the mask outward and records when each pixel first joins the front.
pub fn propagate_front(mask: &Raster, cfg: &FrontConfig) -> Result<InclusionTimeField> {
    cfg.validate()?;
    mask.validate()?;
    if let Some(v) = mask.values.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::Validation(format!("mask must be 0/1 valued, found {v}")));
    }
    let (w, h) = (mask.width, mask.height);
    let mut phi = mask.values.clone();
    let mut times: Vec<f64> = phi
        .iter()
        .map(|&p| if p >= MEMBERSHIP_LEVEL { 0.0 } else { NEVER })
        .collect();
    let mut grad = vec![0.0; phi.len()];
    let step = cfg.dt * cfg.velocity;
    let mut outside = times.iter().filter(|&&t| t == NEVER).count();
    for k in 1..=cfg.steps() {
        if outside == 0 || outside == phi.len() {
            break;
        }
        gradient_into(w, h, &phi, &mut grad);
        let t = cfg.time(k);
        for ((p, g), time) in phi.iter_mut().zip(&grad).zip(times.iter_mut()) {
            *p += step * g;
            if *time == NEVER && *p >= MEMBERSHIP_LEVEL {
                *time = t;
                outside -= 1;
            }
        }
    }
    Ok(InclusionTimeField {
        raster: mask.with_values(times),
        dt: cfg.dt,
        t_max: cfg.t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridVertex {
    pub col: usize,
    pub row: usize,
    pub value: f64,
}

/// Vertices, edges, and triangles on a subsampled pixel lattice. Edges and
/// triangles refer to vertex indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredSimplicialComplex {
    pub vertices: Vec<GridVertex>,
    pub edges: Vec<([usize; 2], f64)>,
    pub triangles: Vec<([usize; 3], f64)>,
}

impl FilteredSimplicialComplex {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.triangles.len()
    }
}

impl Filtration for FilteredSimplicialComplex {
    fn to_filtered_complex(&self) -> FilteredComplex {
        let mut fc = FilteredComplex::new(Direction::Ascending);
        for v in &self.vertices {
            fc.push(0, Vec::new(), v.value);
        }
        let base = self.vertices.len();
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(self.edges.len());
        for (k, (e, value)) in self.edges.iter().enumerate() {
            edge_index.insert(*e, base + k);
            fc.push(1, e.to_vec(), *value);
        }
        for ([a, b, c], value) in &self.triangles {
            let faces = [[*a, *b], [*b, *c], [*a, *c]]
                .iter()
                .map(|e| edge_index[e])
                .collect();
            fc.push(2, faces, *value);
        }
        fc
    }
}

/// Samples every `stride`-th pixel in each direction as a vertex and joins
/// lattice neighbors to the east, west, north, south, and along the
/// north-west/south-east diagonal. Each lattice square is therefore split
/// into two triangles. Triangles are the 3-cliques of the edge graph.
///
/// Vertex values are inclusion times; vertices never reached are dropped.
/// Edge and triangle values are the max over their faces.
pub fn triangulate(times: &InclusionTimeField, stride: usize) -> Result<FilteredSimplicialComplex> {
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    let gw = (times.width() - 1) / stride + 1;
    let gh = (times.height() - 1) / stride + 1;
    let mut id = vec![usize::MAX; gw * gh];
    let mut out = FilteredSimplicialComplex::default();
    for gj in 0..gh {
        for gi in 0..gw {
            let (col, row) = (gi * stride, gj * stride);
            if let Some(value) = times.time(col, row) {
                id[gj * gw + gi] = out.vertices.len();
                out.vertices.push(GridVertex { col, row, value });
            }
        }
    }
    let lookup = |gi: isize, gj: isize| -> Option<usize> {
        if gi < 0 || gj < 0 || gi as usize >= gw || gj as usize >= gh {
            return None;
        }
        let v = id[gj as usize * gw + gi as usize];
        (v != usize::MAX).then_some(v)
    };

    // east, north, north-west; west/south/south-east are the same edges seen
    // from the other endpoint
    const STEPS: [(isize, isize); 3] = [(1, 0), (0, 1), (-1, 1)];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); out.vertices.len()];
    for gj in 0..gh as isize {
        for gi in 0..gw as isize {
            let Some(u) = lookup(gi, gj) else { continue };
            for (di, dj) in STEPS {
                if let Some(v) = lookup(gi + di, gj + dj) {
                    let value = out.vertices[u].value.max(out.vertices[v].value);
                    let e = if u < v { [u, v] } else { [v, u] };
                    out.edges.push((e, value));
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                }
            }
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    let mut edges_sorted = out.edges.clone();
    edges_sorted.sort_by_key(|(e, _)| *e);
    let edge_value: HashMap<[usize; 2], f64> = edges_sorted.iter().copied().collect();
    for &([u, v], _) in &edges_sorted {
        for &w in adjacency[u].iter().filter(|&&w| w > v) {
            if adjacency[v].binary_search(&w).is_ok() {
                let value = edge_value[&[u, v]]
                    .max(edge_value[&[v, w]])
                    .max(edge_value[&[u, w]]);
                out.triangles.push(([u, v, w], value));
            }
        }
    }
    Ok(out)
}
