//! Segregation indices, Z-score tables, per-cluster means, and agreement
//! scores between clusterings.
//!
//! Indices are reported on a 0-100 scale.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::geo::{CityDemographics, Race};

/// Index of dissimilarity between two groups.
pub fn dissimilarity_index(city: &CityDemographics, a: Race, b: Race) -> Result<f64> {
    let (pa, pb) = (city.race_total(a), city.race_total(b));
    for (race, p) in [(a, pa), (b, pb)] {
        if p == 0 {
            return Err(Error::Undefined(format!(
                "city '{}' has no {race} population",
                city.city_id
            )));
        }
    }
    let (pa, pb) = (pa as f64, pb as f64);
    let sum: f64 = city
        .tracts
        .iter()
        .map(|t| (t.count(a) as f64 / pa - t.count(b) as f64 / pb).abs())
        .sum();
    Ok(50.0 * sum)
}

/// Exposure of group `a` to group `b`; `a == b` measures isolation.
pub fn exposure_index(city: &CityDemographics, a: Race, b: Race) -> Result<f64> {
    let pa = city.race_total(a);
    if pa == 0 {
        return Err(Error::Undefined(format!(
            "city '{}' has no {a} population",
            city.city_id
        )));
    }
    let pa = pa as f64;
    let sum: f64 = city
        .tracts
        .iter()
        .filter(|t| t.total > 0)
        .map(|t| (t.count(a) as f64 / pa) * (t.count(b) as f64 / t.total as f64))
        .sum();
    Ok(100.0 * sum)
}

/// One statistic in the per-city table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Total,
    Percent(Race),
    Dissimilarity(Race, Race),
    Exposure(Race, Race),
}

impl Statistic {
    pub fn label(self) -> String {
        match self {
            Statistic::Total => "total".into(),
            Statistic::Percent(r) => format!("{}%", r.initial()),
            Statistic::Dissimilarity(a, b) => format!("{}-{} IoD", a.initial(), b.initial()),
            Statistic::Exposure(a, b) => format!("{}-{} EI", a.initial(), b.initial()),
        }
    }

    fn eval(self, city: &CityDemographics) -> Option<f64> {
        match self {
            Statistic::Total => Some(city.population() as f64),
            Statistic::Percent(r) => {
                let pop = city.population();
                (pop > 0).then(|| 100.0 * city.race_total(r) as f64 / pop as f64)
            }
            Statistic::Dissimilarity(a, b) => dissimilarity_index(city, a, b).ok(),
            Statistic::Exposure(a, b) => exposure_index(city, a, b).ok(),
        }
    }
}

/// Standard column set: population, group shares, White-vs-other IoD, and
/// same-group EI.
pub const STANDARD_STATISTICS: [Statistic; 12] = {
    use Race::*;
    [
        Statistic::Total,
        Statistic::Percent(White),
        Statistic::Percent(Black),
        Statistic::Percent(Asian),
        Statistic::Percent(Hispanic),
        Statistic::Dissimilarity(White, Black),
        Statistic::Dissimilarity(White, Hispanic),
        Statistic::Dissimilarity(White, Asian),
        Statistic::Exposure(White, White),
        Statistic::Exposure(Black, Black),
        Statistic::Exposure(Hispanic, Hispanic),
        Statistic::Exposure(Asian, Asian),
    ]
};

/// Rows are cities, columns statistics. `None` marks an undefined index
/// (e.g. a group absent from the city).
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub city_ids: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl StatsTable {
    pub fn from_cities(cities: &[CityDemographics]) -> StatsTable {
        StatsTable::with_statistics(cities, &STANDARD_STATISTICS)
    }

    pub fn with_statistics(cities: &[CityDemographics], stats: &[Statistic]) -> StatsTable {
        StatsTable {
            city_ids: cities.iter().map(|c| c.city_id.clone()).collect(),
            columns: stats.iter().map(|s| s.label()).collect(),
            values: cities
                .iter()
                .map(|c| stats.iter().map(|s| s.eval(c)).collect())
                .collect(),
        }
    }

    /// Table from raw numbers, one row per city.
    pub fn from_values(city_ids: Vec<String>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != city_ids.len() || values.iter().any(|r| r.len() != columns.len()) {
            return Err(Error::Validation("stats table shape mismatch".into()));
        }
        Ok(StatsTable {
            city_ids,
            columns,
            values: values
                .into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        table_csv("city_id", &self.columns, self.city_ids.iter().map(String::as_str), &self.values)
    }
}

fn table_csv<'a>(
    key: &str,
    columns: &[String],
    keys: impl Iterator<Item = &'a str>,
    rows: &[Vec<Option<f64>>],
) -> String {
    let mut out = String::from(key);
    for c in columns {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for (k, row) in keys.zip(rows) {
        out.push_str(k);
        for v in row {
            match v {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreTable {
    pub city_ids: Vec<String>,
    pub columns: Vec<String>,
    pub z: Vec<Vec<Option<f64>>>,
    /// Per column, over cities where the statistic is defined.
    pub mean: Vec<f64>,
    /// Population standard deviation per column.
    pub std_dev: Vec<f64>,
}

impl ZScoreTable {
    pub fn to_csv(&self) -> String {
        table_csv("city_id", &self.columns, self.city_ids.iter().map(String::as_str), &self.z)
    }
}

/// Standardizes each column with its population mean and standard deviation.
/// A column with zero spread gets Z = 0 everywhere.
pub fn zscore_table(table: &StatsTable) -> Result<ZScoreTable> {
    if table.city_ids.len() < 2 {
        return Err(Error::Parameter(format!(
            "Z-scores need at least 2 cities, got {}",
            table.city_ids.len()
        )));
    }
    let ncol = table.columns.len();
    let mut mean = vec![0.0; ncol];
    let mut std_dev = vec![0.0; ncol];
    let mut z = vec![vec![None; ncol]; table.city_ids.len()];
    for c in 0..ncol {
        let col: Vec<(usize, f64)> = table
            .values
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r[c].map(|v| (i, v)))
            .collect();
        if col.is_empty() {
            continue;
        }
        let n = col.len() as f64;
        let mu = col.iter().map(|(_, v)| v).sum::<f64>() / n;
        let var = col.iter().map(|(_, v)| (v - mu) * (v - mu)).sum::<f64>() / n;
        let sd = var.sqrt();
        mean[c] = mu;
        std_dev[c] = sd;
        for (i, v) in col {
            z[i][c] = Some(if sd > 0.0 { (v - mu) / sd } else { 0.0 });
        }
    }
    Ok(ZScoreTable {
        city_ids: table.city_ids.clone(),
        columns: table.columns.clone(),
        z,
        mean,
        std_dev,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMeans {
    pub clusters: Vec<usize>,
    pub sizes: Vec<usize>,
    pub columns: Vec<String>,
    pub means: Vec<Vec<Option<f64>>>,
}

impl ClusterMeans {
    pub fn to_csv(&self) -> String {
        let keys: Vec<String> = self.clusters.iter().map(|c| c.to_string()).collect();
        table_csv("cluster", &self.columns, keys.iter().map(String::as_str), &self.means)
    }
}

/// Mean Z-score of each cluster's members, per statistic.
pub fn cluster_mean_stats(partition: &Partition, z: &ZScoreTable) -> Result<ClusterMeans> {
    let row_of: HashMap<&str, usize> = z
        .city_ids
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (city, &label) in partition.city_ids.iter().zip(&partition.labels) {
        let row = *row_of.get(city.as_str()).ok_or_else(|| {
            Error::Validation(format!("city '{city}' missing from the Z-score table"))
        })?;
        members.entry(label).or_default().push(row);
    }
    if partition.len() != z.city_ids.len() {
        return Err(Error::Validation(format!(
            "clustering covers {} of {} cities",
            partition.len(),
            z.city_ids.len()
        )));
    }
    let ncol = z.columns.len();
    let mut out = ClusterMeans {
        clusters: Vec::new(),
        sizes: Vec::new(),
        columns: z.columns.clone(),
        means: Vec::new(),
    };
    for (label, rows) in members {
        if rows.is_empty() {
            return Err(Error::Structural(format!("cluster {label} is empty")));
        }
        let means = (0..ncol)
            .map(|c| {
                let vals: Vec<f64> = rows.iter().filter_map(|&r| z.z[r][c]).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect();
        out.clusters.push(label);
        out.sizes.push(rows.len());
        out.means.push(means);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterComparison {
    pub rand_index: f64,
    pub adjusted_rand_index: f64,
}

/// Pair counts from the contingency table of two partitions of the same cities.
struct PairCounts {
    /// pairs together in both
    both: f64,
    /// pairs together in the first
    first: f64,
    /// pairs together in the second
    second: f64,
    total: f64,
}

fn choose2(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

fn pair_counts(p1: &Partition, p2: &Partition) -> Result<PairCounts> {
    if p1.len() != p2.len() {
        return Err(Error::Validation(format!(
            "clusterings cover {} and {} cities",
            p1.len(),
            p2.len()
        )));
    }
    if p1.len() < 2 {
        return Err(Error::Parameter("comparison needs at least 2 cities".into()));
    }
    let second: HashMap<&str, usize> = p2
        .city_ids
        .iter()
        .map(String::as_str)
        .zip(p2.labels.iter().copied())
        .collect();
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (city, &l1) in p1.city_ids.iter().zip(&p1.labels) {
        let l2 = *second.get(city.as_str()).ok_or_else(|| {
            Error::Validation(format!("city '{city}' is only in the first clustering"))
        })?;
        *table.entry((l1, l2)).or_default() += 1;
        *rows.entry(l1).or_default() += 1;
        *cols.entry(l2).or_default() += 1;
    }
    Ok(PairCounts {
        both: table.values().map(|&n| choose2(n)).sum(),
        first: rows.values().map(|&n| choose2(n)).sum(),
        second: cols.values().map(|&n| choose2(n)).sum(),
        total: choose2(p1.len()),
    })
}

/// Fraction of city pairs on which the two clusterings agree.
pub fn rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    let c = pair_counts(p1, p2)?;
    let agree = c.total + 2.0 * c.both - c.first - c.second;
    Ok(agree / c.total)
}

/// Rand index corrected for chance under the permutation model.
///
/// The denominator vanishes only when both clusterings are the same trivial
/// partition (all singletons or a single cluster); that case scores 1.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    let c = pair_counts(p1, p2)?;
    let expected = c.first * c.second / c.total;
    let max = 0.5 * (c.first + c.second);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((c.both - expected) / denom)
}

pub fn compare(p1: &Partition, p2: &Partition) -> Result<ClusterComparison> {
    Ok(ClusterComparison {
        rand_index: rand_index(p1, p2)?,
        adjusted_rand_index: adjusted_rand_index(p1, p2)?,
    })
}
