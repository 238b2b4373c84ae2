//! Independent oracles and random instance generators shared by the
//! integration and acceptance tests.

#![allow(dead_code)]

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use segtopo::cluster::Partition;
use segtopo::homology::{Direction, FilteredComplex};
use segtopo::raster::Raster;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- H0 oracle

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Elder-rule H0 pairs from vertices and edges alone, sorted by (birth, death).
///
/// Roots are always the oldest vertex of their component, so merging two
/// components kills the one whose root entered later.
pub fn union_find_h0(fc: &FilteredComplex) -> Vec<(f64, f64)> {
    let dir = fc.direction;
    let mut order: Vec<usize> = (0..fc.cells.len()).filter(|&i| fc.cells[i].dim <= 1).collect();
    order.sort_by(|&a, &b| {
        dir.cmp(fc.cells[a].value, fc.cells[b].value)
            .then(fc.cells[a].dim.cmp(&fc.cells[b].dim))
            .then(a.cmp(&b))
    });
    let mut rank = vec![usize::MAX; fc.cells.len()];
    for (p, &c) in order.iter().enumerate() {
        rank[c] = p;
    }
    let mut uf = UnionFind::new(fc.cells.len());
    let mut pairs = Vec::new();
    for &c in &order {
        let cell = &fc.cells[c];
        if cell.dim != 1 {
            continue;
        }
        let (ra, rb) = (uf.find(cell.boundary[0]), uf.find(cell.boundary[1]));
        if ra == rb {
            continue;
        }
        let (old, young) = if rank[ra] < rank[rb] { (ra, rb) } else { (rb, ra) };
        pairs.push((fc.cells[young].value, cell.value));
        uf.parent[young] = old;
    }
    for &c in &order {
        if fc.cells[c].dim == 0 && uf.find(c) == c {
            pairs.push((fc.cells[c].value, f64::INFINITY));
        }
    }
    sort_pairs(&mut pairs);
    pairs
}

pub fn sort_pairs(pairs: &mut [(f64, f64)]) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
}

// ------------------------------------------------------- random complexes

/// A random filtered subcomplex of a triangulated `w x h` grid.
///
/// Values are small integers so that ties are frequent. Each cell enters no
/// earlier than its faces. The complex is planar, so it has no 2-cycles.
pub fn random_planar_complex(rng: &mut impl Rng, max_cells: usize, direction: Direction) -> FilteredComplex {
    let w = rng.gen_range(2..=8);
    let h = rng.gen_range(2..=8);
    let later = |rng: &mut ChaCha8Rng, v: f64| -> f64 {
        let step = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0..4) as f64 };
        match direction {
            Direction::Ascending => v + step,
            Direction::Descending => v - step,
        }
    };
    let mut inner: ChaCha8Rng = rand::SeedableRng::seed_from_u64(rng.gen());
    let combine = |a: f64, b: f64| match direction {
        Direction::Ascending => a.max(b),
        Direction::Descending => a.min(b),
    };

    let mut fc = FilteredComplex::new(direction);
    let mut vid = vec![usize::MAX; w * h];
    for slot in vid.iter_mut() {
        if fc.len() >= max_cells {
            break;
        }
        if inner.gen_bool(0.85) {
            *slot = fc.push(0, Vec::new(), inner.gen_range(0..20) as f64);
        }
    }
    let mut edge_of = std::collections::HashMap::new();
    let dirs: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            for (dc, dr) in dirs {
                let (c2, r2) = (c + dc, r + dr);
                if c2 >= w as i64 || r2 >= h as i64 {
                    continue;
                }
                let (a, b) = (vid[(r * w as i64 + c) as usize], vid[(r2 * w as i64 + c2) as usize]);
                if a == usize::MAX || b == usize::MAX || fc.len() >= max_cells || !inner.gen_bool(0.8) {
                    continue;
                }
                let base = combine(fc.cells[a].value, fc.cells[b].value);
                let v = later(&mut inner, base);
                let e = fc.push(1, vec![a, b], v);
                edge_of.insert((a.min(b), a.max(b)), e);
            }
        }
    }
    for r in 0..h.saturating_sub(1) {
        for c in 0..w.saturating_sub(1) {
            let ll = vid[r * w + c];
            let lr = vid[r * w + c + 1];
            let ul = vid[(r + 1) * w + c];
            let ur = vid[(r + 1) * w + c + 1];
            for tri in [[ll, lr, ur], [ll, ul, ur]] {
                if tri.contains(&usize::MAX) || fc.len() >= max_cells {
                    continue;
                }
                let key = |a: usize, b: usize| (a.min(b), a.max(b));
                let edges = [key(tri[0], tri[1]), key(tri[1], tri[2]), key(tri[0], tri[2])];
                let Some(faces) = edges.iter().map(|k| edge_of.get(k).copied()).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                if !inner.gen_bool(0.7) {
                    continue;
                }
                let base = faces.iter().map(|&f| fc.cells[f].value).reduce(combine).unwrap();
                let v = later(&mut inner, base);
                fc.push(2, faces, v);
            }
        }
    }
    fc
}

/// Random integer-valued raster in `[0, 100]` of at most `max_side x max_side`.
pub fn random_gray(rng: &mut impl Rng, max_side: usize) -> Raster {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let levels = rng.gen_range(2..=12);
    let values = (0..w * h).map(|_| (rng.gen_range(0..levels) * 100 / (levels - 1)) as f64).collect();
    Raster::filled(w, h, 0.0).with_values(values)
}

// ----------------------------------------------------- Betti numbers / Euler

/// Euler characteristic at every distinct filtration value, compared with
/// `beta0 - beta1` read off the diagrams. Returns the first failing value.
pub fn euler_mismatch(fc: &FilteredComplex, d: &[segtopo::homology::PersistenceDiagram]) -> Option<f64> {
    fc.filtration_values().into_iter().find(|&t| {
        let b0 = d[0].alive_at(t) as i64;
        let b1 = d[1].alive_at(t) as i64;
        b0 - b1 != fc.euler_characteristic_at(t)
    })
}

// ------------------------------------------------------------------ masks

/// Union of a few disks and rectangles, each at least 6 pixels in radius or
/// half-side, on a `w x h` grid.
pub fn random_blob_mask(rng: &mut impl Rng, w: usize, h: usize, shapes: usize) -> Raster {
    let mut m = Raster::filled(w, h, 0.0);
    for _ in 0..shapes {
        let cx = rng.gen_range(0.0..w as f64);
        let cy = rng.gen_range(0.0..h as f64);
        let disk = rng.gen_bool(0.5);
        let r = rng.gen_range(6.0..14.0);
        let r2 = rng.gen_range(6.0..14.0);
        for row in 0..h {
            for col in 0..w {
                let (dx, dy) = (col as f64 - cx, row as f64 - cy);
                let inside = if disk { dx * dx + dy * dy <= r * r } else { dx.abs() <= r && dy.abs() <= r2 };
                if inside {
                    m.set(col, row, 1.0);
                }
            }
        }
    }
    m
}

/// Random sparse mask: each pixel is set with probability `p`.
pub fn random_speckle_mask(rng: &mut impl Rng, w: usize, h: usize, p: f64) -> Raster {
    let values = (0..w * h).map(|_| if rng.gen_bool(p) { 1.0 } else { 0.0 }).collect();
    Raster::filled(w, h, 0.0).with_values(values)
}

// -------------------------------------------------- Euclidean distance map

fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inf = 1e20;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q].min(inf) + (q * q) as f64) - (f[p].min(inf) + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p].min(inf);
    }
}

/// Exact Euclidean distance from every pixel center to the nearest mask pixel
/// (separable lower-envelope transform). Infinite when the mask is empty.
pub fn euclidean_distance_transform(mask: &Raster) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    if mask.values.iter().all(|&v| v == 0.0) {
        return vec![f64::INFINITY; w * h];
    }
    let big = 1e20;
    let mut g: Vec<f64> = mask.values.iter().map(|&v| if v == 1.0 { 0.0 } else { big }).collect();
    let mut col_buf = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            col_buf[r] = g[r * w + c];
        }
        edt_1d(&col_buf, &mut col_out);
        for r in 0..h {
            g[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0; w];
    for r in 0..h {
        edt_1d(&g[r * w..(r + 1) * w], &mut row_out);
        g[r * w..(r + 1) * w].copy_from_slice(&row_out);
    }
    g.into_iter().map(f64::sqrt).collect()
}

/// Brute-force distance map for cross-checking the transform.
pub fn brute_force_distance(mask: &Raster) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    let seeds: Vec<(f64, f64)> = (0..w * h)
        .filter(|&i| mask.values[i] == 1.0)
        .map(|i| ((i % w) as f64, (i / w) as f64))
        .collect();
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            seeds
                .iter()
                .map(|&(sx, sy)| ((x - sx).powi(2) + (y - sy).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

// ----------------------------------------------------- clustering oracles

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i:03}")).collect()
}

pub fn random_partition(rng: &mut impl Rng, n: usize, k: usize) -> Partition {
    Partition::new(ids(n), (0..n).map(|_| rng.gen_range(1..=k)).collect()).unwrap()
}

/// Rand index and ARI by enumerating every pair of items.
pub fn pair_enumeration(a: &[usize], b: &[usize]) -> (f64, f64) {
    let n = a.len();
    let (mut both, mut first, mut second, mut agree) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            both += (sa && sb) as u64;
            first += sa as u64;
            second += sb as u64;
            agree += (sa == sb) as u64;
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let ri = agree as f64 / total;
    let expected = first as f64 * second as f64 / total;
    let max = 0.5 * (first as f64 + second as f64);
    let ari = if max == expected { 1.0 } else { (both as f64 - expected) / (max - expected) };
    (ri, ari)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Sum over points of the distance to the nearest medoid.
pub fn medoid_cost(d: &dyn Fn(usize, usize) -> f64, n: usize, medoids: &[usize]) -> f64 {
    (0..n)
        .map(|i| medoids.iter().map(|&m| d(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect()
}

fn box_muller(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `per` points around each center with isotropic noise of width `sigma`.
pub fn gaussian_blobs(rng: &mut impl Rng, centers: &[Vec<f64>], per: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per {
            pts.push(center.iter().map(|&x| x + sigma * box_muller(rng)).collect());
            labels.push(c + 1);
        }
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.shuffle(rng);
    (idx.iter().map(|&i| pts[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
}

// ----------------------------------------------------------- quadrature

/// Composite Simpson estimate of the weighted normalized Gaussian over every
/// pixel of a `n x n` grid covering `[lo, hi]^2`; output laid out like the
/// persistence image (rows are the second coordinate).
pub fn gaussian_pixel_quadrature(center: (f64, f64), weight: f64, sigma: f64, lo: f64, hi: f64, n: usize, sub: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
    let g = |x: f64, y: f64| {
        let (dx, dy) = (x - center.0, y - center.1);
        norm * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    };
    let simpson_w = |i: usize| -> f64 {
        if i == 0 || i == sub {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut out = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            let (x0, y0) = (lo + col as f64 * step, lo + row as f64 * step);
            let hsub = step / sub as f64;
            let mut acc = 0.0;
            for i in 0..=sub {
                for j in 0..=sub {
                    acc += simpson_w(i) * simpson_w(j) * g(x0 + i as f64 * hsub, y0 + j as f64 * hsub);
                }
            }
            out[row * n + col] = weight * acc * hsub * hsub / 9.0;
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn total_cmp_pairs(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}
