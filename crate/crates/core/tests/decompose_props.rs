use lattice_energy::decompose::{
    default_delta, orthant_pipeline, peel_bound_holds, threshold_for, verify_decomposition, xy_decompose,
    xy_decompose_delta,
};
use lattice_energy::energy::rep_fn;
use lattice_energy::geometry::slice;
use lattice_energy::lattice::{enumerate_sphere, restrict_to_orthant};
use lattice_energy::OrthantPattern;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decompositions_verify(d in 3usize..=4, m in 1i64..=150, density in 0.05f64..=1.0, seed in any::<u64>(), threshold in 1u64..=12) {
        let a = enumerate_sphere(d, m).unwrap().random_subset(density, seed);
        let dec = xy_decompose(&a, threshold).unwrap();
        prop_assert!(verify_decomposition(&a, &dec).unwrap().passed());
        prop_assert!(dec.peels.len() as u64 <= (a.len() as u64).div_ceil(threshold));
        if let Some((_, c)) = rep_fn(&dec.x, 2).unwrap().sup() {
            prop_assert!(c < threshold);
        }
        prop_assert_eq!(xy_decompose(&a, threshold).unwrap(), dec.clone());

        let mut rest = a.clone();
        for peel in &dec.peels {
            prop_assert_eq!(slice(&rest, &peel.center), peel.slice.clone());
            rest = rest.difference(&peel.slice);
        }
        prop_assert_eq!(rest, dec.x);
    }

    #[test]
    fn default_threshold_bounds_peels(m in (1i64..=250).prop_map(|k| 2 * k + 1), density in 0.2f64..=1.0, seed in any::<u64>()) {
        let full = enumerate_sphere(4, m).unwrap();
        let a = restrict_to_orthant(&full, &OrthantPattern::all_positive(4).unwrap()).unwrap().random_subset(density, seed);
        prop_assume!(!a.is_empty());
        let dec = xy_decompose_delta(&a, default_delta()).unwrap();
        prop_assert_eq!(dec.threshold, threshold_for(a.len(), default_delta()));
        prop_assert!(verify_decomposition(&a, &dec).unwrap().passed());
        prop_assert!(dec.peels.len() as u64 * dec.threshold <= a.len() as u64);
        prop_assert!(peel_bound_holds(dec.peels.len(), a.len(), default_delta()));
    }
}

#[test]
fn orthant_pipeline_partitions() {
    for m in [4, 9, 25, 45] {
        let a = enumerate_sphere(4, m).unwrap();
        let cells = orthant_pipeline(&a).unwrap();
        let mut all: Vec<_> = cells.iter().flat_map(|c| c.points.iter().copied()).collect();
        all.sort();
        assert_eq!(all.as_slice(), a.points());
    }
}
