mod common;

use common::{divisor_sum, sphere_by_box};
use lattice_energy::lattice::{
    enumerate_paraboloid, enumerate_sphere, legendre_admissible, restrict_to_orthant,
};
use lattice_energy::{LatticePoint, OrthantPattern, PointSet};
use proptest::prelude::*;

fn legendre_form(mut m: u64) -> bool {
    while m % 4 == 0 {
        m /= 4;
    }
    m % 8 == 7
}

#[test]
fn spheres_match_box_search() {
    for d in [3, 4] {
        for m in 1..=60 {
            let got = enumerate_sphere(d, m).unwrap();
            assert_eq!(got.points(), sphere_by_box(d, m).as_slice(), "d={d} m={m}");
        }
    }
}

#[test]
fn four_square_counts_for_odd_m() {
    for m in (1..=600u64).step_by(2) {
        let s = enumerate_sphere(4, m as i64).unwrap();
        assert_eq!(s.len() as u64, 8 * divisor_sum(m), "m={m}");
    }
}

#[test]
fn three_square_emptiness_is_legendre() {
    for m in 1..=3000u64 {
        let empty = enumerate_sphere(3, m as i64).unwrap().is_empty();
        assert_eq!(empty, legendre_form(m), "m={m}");
        assert_eq!(legendre_admissible(m), !empty, "m={m}");
    }
}

#[test]
fn paraboloid_sizes() {
    for m in 1..=12 {
        let p = enumerate_paraboloid(m).unwrap();
        assert_eq!(p.len() as i64, (2 * m + 1).pow(3));
        p.validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_points_have_norm_m(d in 3usize..=4, m in 1i64..3000) {
        let s = enumerate_sphere(d, m).unwrap();
        for p in &s {
            prop_assert_eq!(p.norm_sq(), m as i128);
        }
        prop_assert!(s.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn orthants_partition(d in 3usize..=4, m in 1i64..400, density in 0.1f64..1.0, seed in any::<u64>()) {
        let a = enumerate_sphere(d, m).unwrap().random_subset(density, seed);
        let mut union: Vec<LatticePoint> = Vec::new();
        for pat in OrthantPattern::all(d).unwrap() {
            let cell = restrict_to_orthant(&a, &pat).unwrap();
            prop_assert!(cell.iter().all(|p| pat.matches(p)));
            union.extend(cell.iter().copied());
        }
        prop_assert_eq!(union.len(), a.len());
        union.sort();
        prop_assert_eq!(union.as_slice(), a.points());
    }

    #[test]
    fn random_subsets_are_nested(m in 1i64..300, lo in 0.0f64..1.0, hi in 0.0f64..1.0, seed in any::<u64>()) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let s = enumerate_sphere(4, m).unwrap();
        let small = s.random_subset(lo, seed);
        let big = s.random_subset(hi, seed);
        prop_assert!(small.iter().all(|p| big.contains(p)));
        prop_assert_eq!(s.random_subset(lo, seed), small);
    }

    #[test]
    fn text_roundtrip(d in 3usize..=4, m in 1i64..200, density in 0.0f64..1.0, seed in any::<u64>()) {
        let a = enumerate_sphere(d, m).unwrap().random_subset(density, seed);
        let back = PointSet::parse_text(&a.to_text()).unwrap();
        prop_assert_eq!(back, a);
    }
}
