#![allow(dead_code)]

use std::collections::BTreeMap;

use lattice_energy::lattice::enumerate_sphere;
use lattice_energy::{Family, LatticePoint, PointSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Up to `max_len` points of `S_{d,m}` chosen uniformly with the given seed.
pub fn sphere_sample(d: usize, m: i64, max_len: usize, seed: u64) -> PointSet {
    let full = enumerate_sphere(d, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<LatticePoint> = full
        .points()
        .choose_multiple(&mut rng, max_len.min(full.len()))
        .copied()
        .collect();
    PointSet::from_points(d, Family::Sphere, Some(m), pts).unwrap()
}

/// `r_s(A, ·)` by listing every ordered `s`-tuple.
pub fn tuple_counts(a: &PointSet, s: usize) -> BTreeMap<LatticePoint, u64> {
    let mut out = BTreeMap::new();
    let zero = LatticePoint::zero(a.dim()).unwrap();
    let mut partial = vec![(zero, 1u64)];
    for _ in 0..s {
        let mut next = Vec::with_capacity(partial.len() * a.len());
        for (p, c) in &partial {
            for q in a {
                next.push((*p + *q, *c));
            }
        }
        partial = next;
    }
    for (p, c) in partial {
        *out.entry(p).or_default() += c;
    }
    out
}

/// Every solution of `x_1^2 + ... + x_d^2 = m` found by scanning the box
/// `[-r, r]^d`.
pub fn sphere_by_box(d: usize, m: i64) -> Vec<LatticePoint> {
    let r = (m as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    let mut c = vec![-r; d];
    loop {
        if c.iter().map(|x| x * x).sum::<i64>() == m {
            out.push(LatticePoint::new(&c).unwrap());
        }
        let mut i = d;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if c[i] < r {
                c[i] += 1;
                break;
            }
            c[i] = -r;
        }
    }
}

/// `sigma(m)` by trial division up to `m`.
pub fn divisor_sum(m: u64) -> u64 {
    (1..=m).filter(|k| m % k == 0).sum()
}
