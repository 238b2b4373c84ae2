mod common;

use proptest::prelude::*;
use rand::Rng;

use segtopo::cluster::Partition;
use segtopo::segstats::{adjusted_rand_index, cluster_mean_stats, rand_index, zscore_table, StatsTable};

use common::*;

fn table(r: &mut impl Rng, n: usize, m: usize) -> StatsTable {
    let values = (0..n)
        .map(|_| (0..m).map(|_| r.gen_range(0.0..100.0)).collect())
        .collect();
    StatsTable::from_values(ids(n), (0..m).map(|j| format!("s{j}")).collect(), values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rand_index_matches_pair_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=120);
        let (k1, k2) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let (a, b) = (random_partition(&mut r, n, k1), random_partition(&mut r, n, k2));
        let (ri, ari) = pair_enumeration(&a.labels, &b.labels);
        prop_assert_eq!(rand_index(&a, &b).unwrap(), ri);
        prop_assert!((adjusted_rand_index(&a, &b).unwrap() - ari).abs() <= 1e-12);
        prop_assert_eq!(adjusted_rand_index(&a, &b).unwrap(), adjusted_rand_index(&b, &a).unwrap());
    }

    #[test]
    fn relabeling_keeps_ari(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_partition(&mut r, 50, 4);
        let b = random_partition(&mut r, 50, 3);
        let relabeled = Partition::new(a.city_ids.clone(), a.labels.iter().map(|l| 5 - l).collect()).unwrap();
        prop_assert_eq!(adjusted_rand_index(&a, &b).unwrap(), adjusted_rand_index(&relabeled, &b).unwrap());
        prop_assert_eq!(adjusted_rand_index(&a, &relabeled).unwrap(), 1.0);
    }

    #[test]
    fn zscores_are_standardized(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..40);
        let t = table(&mut r, n, 5);
        let z = zscore_table(&t).unwrap();
        for j in 0..5 {
            let col: Vec<f64> = z.z.iter().map(|row| row[j].unwrap()).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn size_weighted_cluster_means_vanish(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(4..40);
        let t = table(&mut r, n, 4);
        let z = zscore_table(&t).unwrap();
        let p = random_partition(&mut r, n, 3);
        let m = cluster_mean_stats(&p, &z).unwrap();
        for j in 0..4 {
            let s: f64 = m.means.iter().zip(&m.sizes).map(|(row, &k)| row[j].unwrap() * k as f64 / n as f64).sum();
            prop_assert!(s.abs() < 1e-9);
        }
    }
}

#[test]
fn random_clusterings_score_near_zero() {
    let mut r = rng(81);
    let mean: f64 = (0..400)
        .map(|_| adjusted_rand_index(&random_partition(&mut r, 100, 4), &random_partition(&mut r, 100, 4)).unwrap())
        .sum::<f64>()
        / 400.0;
    assert!(mean.abs() < 0.05, "{mean}");
}
