mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;

use segtopo::cubical::build_cubical_filtration;
use segtopo::homology::{compute_persistence, Direction, FilteredComplex, Filtration, PersistenceDiagram};
use segtopo::raster::Raster;

use common::*;

fn pairs(d: &PersistenceDiagram) -> Vec<(f64, f64)> {
    let mut v: Vec<_> = d.points.iter().map(|p| (p.birth, p.death)).collect();
    sort_pairs(&mut v);
    v
}

/// Same complex with cells shuffled inside each dimension and indices remapped.
fn shuffled(fc: &FilteredComplex, seed: u64) -> FilteredComplex {
    let mut r = rng(seed);
    let mut new_index = vec![0usize; fc.len()];
    let mut order: Vec<usize> = Vec::new();
    for dim in 0..=2 {
        let mut block: Vec<usize> = (0..fc.len()).filter(|&i| fc.cells[i].dim == dim).collect();
        block.shuffle(&mut r);
        order.extend(block);
    }
    for (k, &old) in order.iter().enumerate() {
        new_index[old] = k;
    }
    let mut out = FilteredComplex::new(fc.direction);
    for &old in &order {
        let c = &fc.cells[old];
        let mut boundary: Vec<usize> = c.boundary.iter().map(|&f| new_index[f]).collect();
        boundary.shuffle(&mut r);
        out.push(c.dim, boundary, c.value);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h0_matches_union_find(seed in any::<u64>(), descending in any::<bool>()) {
        let dir = if descending { Direction::Descending } else { Direction::Ascending };
        let fc = random_planar_complex(&mut rng(seed), 400, dir);
        let d = compute_persistence(&fc).unwrap();
        prop_assert_eq!(pairs(&d[0]), union_find_h0(&fc));
    }

    #[test]
    fn euler_characteristic_matches_betti_numbers(seed in any::<u64>(), descending in any::<bool>()) {
        let dir = if descending { Direction::Descending } else { Direction::Ascending };
        let fc = random_planar_complex(&mut rng(seed), 400, dir);
        let d = compute_persistence(&fc).unwrap();
        prop_assert_eq!(euler_mismatch(&fc, &d), None);
    }

    #[test]
    fn diagrams_ignore_cell_order(seed in any::<u64>()) {
        let fc = random_planar_complex(&mut rng(seed), 400, Direction::Ascending);
        let a = compute_persistence(&fc).unwrap();
        let b = compute_persistence(&shuffled(&fc, seed ^ 0x5eed)).unwrap();
        prop_assert_eq!(pairs(&a[0]), pairs(&b[0]));
        prop_assert_eq!(pairs(&a[1]), pairs(&b[1]));
    }

    #[test]
    fn cubical_h0_matches_union_find(seed in any::<u64>()) {
        let gray = random_gray(&mut rng(seed), 20);
        let fc = build_cubical_filtration(&gray).unwrap().to_filtered_complex();
        let d = compute_persistence(&fc).unwrap();
        prop_assert_eq!(pairs(&d[0]), union_find_h0(&fc));
        prop_assert_eq!(euler_mismatch(&fc, &d), None);
    }

    #[test]
    fn cubical_flip_symmetry(seed in any::<u64>()) {
        let gray = random_gray(&mut rng(seed), 12);
        let mut flipped = gray.clone();
        for row in 0..gray.height {
            for col in 0..gray.width {
                flipped.set(gray.width - 1 - col, row, gray.get(col, row));
            }
        }
        let a = compute_persistence(&build_cubical_filtration(&gray).unwrap()).unwrap();
        let b = compute_persistence(&build_cubical_filtration(&flipped).unwrap()).unwrap();
        prop_assert_eq!(pairs(&a[0]), pairs(&b[0]));
        prop_assert_eq!(pairs(&a[1]), pairs(&b[1]));
    }

    #[test]
    fn capping_bounds_every_lifespan(seed in any::<u64>(), cap in 1.0f64..50.0) {
        let fc = random_planar_complex(&mut rng(seed), 200, Direction::Descending);
        for d in compute_persistence(&fc).unwrap() {
            let c = d.cap_infinite(cap).unwrap();
            prop_assert!(c.points.iter().all(|p| p.death.is_finite() && p.lifespan() <= cap + 1e-9));
            prop_assert_eq!(c.len(), d.len());
        }
    }
}

#[test]
fn valley_in_a_row_of_three() {
    let gray = Raster::from_rows(&[vec![90.0, 30.0, 60.0]]).unwrap();
    let d = compute_persistence(&build_cubical_filtration(&gray).unwrap()).unwrap();
    let finite: Vec<_> = pairs(&d[0]).into_iter().filter(|p| p.0 != p.1).collect();
    assert_eq!(finite, vec![(60.0, 30.0), (90.0, f64::INFINITY)]);
    let capped = d[0].cap_infinite(100.0).unwrap();
    assert!(capped.points.iter().any(|p| p.birth == 90.0 && p.death == 0.0));
}

#[test]
fn csv_round_trip_of_random_diagrams() {
    let fc = random_planar_complex(&mut rng(9), 400, Direction::Ascending);
    for d in compute_persistence(&fc).unwrap() {
        let back = PersistenceDiagram::from_csv(&d.to_csv(), Direction::Ascending, "x.csv".as_ref()).unwrap();
        if d.is_empty() {
            assert!(back.is_empty());
        } else {
            assert_eq!(back, vec![d]);
        }
    }
}

