//! K-medoids (PAM: greedy BUILD followed by best-improvement SWAP) over
//! Euclidean distances between feature vectors.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::Race;
use crate::pimage::{FeatureVector, Group, PersistenceImage};

/// Labels in `1..=k` aligned with `city_ids`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub city_ids: Vec<String>,
    pub labels: Vec<usize>,
}

impl Partition {
    pub fn new(city_ids: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        if city_ids.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} cities but {} labels",
                city_ids.len(),
                labels.len()
            )));
        }
        check_unique(&city_ids)?;
        Ok(Partition { city_ids, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_of(&self, city: &str) -> Option<usize> {
        self.city_ids.iter().position(|c| c == city).map(|i| self.labels[i])
    }

    /// CSV `city_id,cluster`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("city_id,cluster\n");
        for (c, l) in self.city_ids.iter().zip(&self.labels) {
            let _ = writeln!(out, "{c},{l}");
        }
        out
    }

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            location: format!("line {line}"),
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "city_id,cluster" => {}
            _ => return Err(err(1, "expected header 'city_id,cluster'".into())),
        }
        let (mut ids, mut labels) = (Vec::new(), Vec::new());
        for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            let (city, label) = line
                .rsplit_once(',')
                .ok_or_else(|| err(i + 1, "expected 'city_id,cluster'".into()))?;
            ids.push(city.to_string());
            labels.push(
                label
                    .trim()
                    .parse()
                    .map_err(|_| err(i + 1, format!("bad cluster label '{label}'")))?,
            );
        }
        Partition::new(ids, labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Partition::from_csv(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub partition: Partition,
    /// Input indices of the medoids; cluster `c` has medoid `medoids[c - 1]`.
    pub medoids: Vec<usize>,
    pub distortion: f64,
}

impl Clustering {
    pub fn medoid_ids(&self) -> Vec<&str> {
        self.medoids
            .iter()
            .map(|&m| self.partition.city_ids[m].as_str())
            .collect()
    }

    /// CSV `cluster,medoid_city_id`.
    pub fn medoids_csv(&self) -> String {
        let mut out = String::from("cluster,medoid_city_id\n");
        for (c, id) in self.medoid_ids().into_iter().enumerate() {
            let _ = writeln!(out, "{},{id}", c + 1);
        }
        out
    }
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if let Some(p) = points.iter().find(|p| p.len() != points[0].len()) {
            return Err(Error::Validation(format!(
                "feature vectors differ in length ({} vs {})",
                p.len(),
                points[0].len()
            )));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        points[i]
                            .iter()
                            .zip(&points[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        Ok(DistanceMatrix { n, d: rows.concat() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = f(i, j);
            }
        }
        DistanceMatrix { n, d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Total distance of every point to its nearest medoid.
    pub fn cost(&self, medoids: &[usize]) -> f64 {
        (0..self.n)
            .map(|j| medoids.iter().map(|&m| self.get(m, j)).fold(f64::INFINITY, f64::min))
            .sum()
    }
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Validation(format!("duplicate city id '{id}'")));
        }
    }
    Ok(())
}

/// Greedy BUILD: the first medoid minimizes total distance, each further one
/// gives the largest cost reduction. Ties go to the lowest index.
pub fn build(dist: &DistanceMatrix, k: usize) -> Vec<usize> {
    grow(dist, Vec::new(), k)
}

fn grow(dist: &DistanceMatrix, mut medoids: Vec<usize>, k: usize) -> Vec<usize> {
    let n = dist.len();
    let mut nearest: Vec<f64> = (0..n)
        .map(|j| medoids.iter().map(|&m| dist.get(m, j)).fold(f64::INFINITY, f64::min))
        .collect();
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            // cost after adding c; minimizing it is maximizing the gain
            let cost: f64 = (0..n).map(|j| nearest[j].min(dist.get(c, j))).sum();
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((c, cost));
            }
        }
        let (c, _) = best.expect("k <= n leaves a candidate");
        medoids.push(c);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist.get(c, j));
        }
    }
    medoids
}

/// Best-improvement SWAP until no single exchange lowers the cost.
pub fn swap(dist: &DistanceMatrix, mut medoids: Vec<usize>) -> Vec<usize> {
    let n = dist.len();
    let k = medoids.len();
    if k == 0 || k == n {
        return medoids;
    }
    let mut is_medoid = vec![false; n];
    loop {
        is_medoid.iter_mut().for_each(|m| *m = false);
        for &m in &medoids {
            is_medoid[m] = true;
        }
        // nearest and second-nearest medoid distance for each point
        let mut near = vec![(usize::MAX, f64::INFINITY); n];
        let mut second = vec![f64::INFINITY; n];
        for j in 0..n {
            for (slot, &m) in medoids.iter().enumerate() {
                let d = dist.get(m, j);
                if d < near[j].1 {
                    second[j] = near[j].1;
                    near[j] = (slot, d);
                } else if d < second[j] {
                    second[j] = d;
                }
            }
        }
        let cost: f64 = near.iter().map(|x| x.1).sum();
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for o in (0..n).filter(|&o| !is_medoid[o]) {
                let new_cost: f64 = (0..n)
                    .map(|j| {
                        let d_o = dist.get(o, j);
                        if near[j].0 == slot {
                            second[j].min(d_o)
                        } else {
                            near[j].1.min(d_o)
                        }
                    })
                    .sum();
                if best.is_none_or(|(_, _, b)| new_cost < b) {
                    best = Some((slot, o, new_cost));
                }
            }
        }
        match best {
            Some((slot, o, new_cost)) if new_cost < cost - 1e-12 * cost.max(1.0) => {
                medoids[slot] = o;
            }
            _ => return medoids,
        }
    }
}

/// Assigns each point to its nearest medoid (ties to the lowest medoid
/// index) after sorting medoids by input index.
pub fn assign(dist: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, Vec<usize>, f64) {
    let mut sorted = medoids.to_vec();
    sorted.sort_unstable();
    let mut total = 0.0;
    let labels = (0..dist.len())
        .map(|j| {
            let (slot, d) = sorted
                .iter()
                .enumerate()
                .map(|(s, &m)| (s, dist.get(m, j)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            total += d;
            slot + 1
        })
        .collect();
    (sorted, labels, total)
}

/// PAM on a precomputed distance matrix.
pub fn kmedoids_on(dist: &DistanceMatrix, city_ids: Vec<String>, k: usize) -> Result<Clustering> {
    let medoids = pam_medoids(dist, k)?;
    finish(dist, city_ids, medoids)
}

fn pam_medoids(dist: &DistanceMatrix, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > dist.len() {
        return Err(Error::Parameter(format!(
            "K must be in 1..={}, got {k}",
            dist.len()
        )));
    }
    Ok(swap(dist, build(dist, k)))
}

fn finish(dist: &DistanceMatrix, city_ids: Vec<String>, medoids: Vec<usize>) -> Result<Clustering> {
    let (medoids, labels, distortion) = assign(dist, &medoids);
    Ok(Clustering {
        k: medoids.len(),
        partition: Partition::new(city_ids, labels)?,
        medoids,
        distortion,
    })
}

fn matrix_for(vectors: &[FeatureVector]) -> Result<(DistanceMatrix, Vec<String>)> {
    let ids: Vec<String> = vectors.iter().map(|v| v.city_id.clone()).collect();
    check_unique(&ids)?;
    let points: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
    Ok((DistanceMatrix::euclidean(&points)?, ids))
}

pub fn kmedoids(vectors: &[FeatureVector], k: usize) -> Result<Clustering> {
    let (dist, ids) = matrix_for(vectors)?;
    kmedoids_on(&dist, ids, k)
}

/// Distortion for `K = 1..=k_max`, non-increasing in `K`.
///
/// Each `K` is solved by PAM from scratch. If that lands above the previous
/// `K`, the previous medoids plus one greedy addition are swapped to a local
/// optimum instead, which can only lower the cost.
pub fn distortion_curve_on(dist: &DistanceMatrix, k_max: usize) -> Result<Vec<(usize, f64)>> {
    if k_max == 0 || k_max > dist.len() {
        return Err(Error::Parameter(format!(
            "k_max must be in 1..={}, got {k_max}",
            dist.len()
        )));
    }
    let mut curve = Vec::with_capacity(k_max);
    let mut prev: Option<(Vec<usize>, f64)> = None;
    for k in 1..=k_max {
        let mut medoids = pam_medoids(dist, k)?;
        let mut cost = dist.cost(&medoids);
        if let Some((pm, pc)) = &prev {
            if cost > *pc {
                let warm = swap(dist, grow(dist, pm.clone(), k));
                let warm_cost = dist.cost(&warm);
                if warm_cost < cost {
                    medoids = warm;
                    cost = warm_cost;
                }
            }
        }
        curve.push((k, cost));
        prev = Some((medoids, cost));
    }
    Ok(curve)
}

pub fn distortion_curve(vectors: &[FeatureVector], k_max: usize) -> Result<Vec<(usize, f64)>> {
    let (dist, _) = matrix_for(vectors)?;
    distortion_curve_on(&dist, k_max)
}

/// CSV `k,distortion`.
pub fn elbow_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("k,distortion\n");
    for (k, d) in curve {
        let _ = writeln!(out, "{k},{d}");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedoidImages {
    pub cluster: usize,
    pub city_id: String,
    pub images: Vec<PersistenceImage>,
}

/// The medoid city's images for each cluster, in feature order.
pub fn medoid_images(
    clustering: &Clustering,
    pis: &HashMap<(String, Race, usize), PersistenceImage>,
    group: Group,
) -> Result<Vec<MedoidImages>> {
    clustering
        .medoid_ids()
        .into_iter()
        .enumerate()
        .map(|(c, city)| {
            let mut images = Vec::new();
            for &race in group.races() {
                for dim in [0, 1] {
                    let pi = pis.get(&(city.to_string(), race, dim)).ok_or_else(|| {
                        Error::Missing(format!("medoid '{city}': no H{dim} image for {race}"))
                    })?;
                    images.push(pi.clone());
                }
            }
            Ok(MedoidImages {
                cluster: c + 1,
                city_id: city.to_string(),
                images,
            })
        })
        .collect()
}
