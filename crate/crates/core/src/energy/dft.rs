//! `E_{s,2}(A)` through discrete orthogonality:
//! `(1/M^d) sum_{k in (Z/M)^d} |sum_{a in A} e(k.a / M)|^{2s}`.
//!
//! With `M = 2s * max|coord| + 1` no two distinct `s`-fold sums of `A` agree
//! modulo `M`, so the normalized moment is an integer. Phases come from a
//! twiddle table indexed by `k.a mod M`, maintained incrementally in integer
//! arithmetic, so each term is as accurate as one table lookup.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_fold, Budget, EnergyValue};
use crate::error::{Error, Result};
use crate::lattice::PointSet;

/// Largest input the moment check accepts.
pub const MAX_DFT_POINTS: usize = 64;
/// Largest allowed distance between the raw moment and its rounding.
pub const RESIDUAL_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DftMoment {
    pub s: u32,
    pub modulus: u64,
    pub grid: u64,
    /// The normalized moment before rounding.
    pub raw: f64,
    pub rounded: u128,
    /// `|raw - rounded|`.
    pub residual: f64,
}

#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Evaluates the normalized moment and reports the rounding residual. Fails
/// when `|A| > 64`, the grid exceeds the budget, or the residual is at least
/// the tolerance.
pub fn dft_moment(a: &PointSet, s: u32, budget: &Budget) -> Result<DftMoment> {
    check_fold(s)?;
    if a.len() > MAX_DFT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "moment check supports at most {MAX_DFT_POINTS} points, got {}",
            a.len()
        )));
    }
    let d = a.dim();
    let modulus = 2 * s as u128 * a.max_abs_coord() as u128 + 1;
    let grid = modulus.checked_pow(d as u32).unwrap_or(u128::MAX);
    if grid > budget.max_grid as u128 {
        return Err(Error::GridBudget {
            grid,
            budget: budget.max_grid as u128,
        });
    }
    let m = modulus as u64;
    let twiddle: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / m as f64;
            (theta.cos(), theta.sin())
        })
        .collect();
    // Coordinates reduced into [0, M), laid out point by point.
    let reduced: Vec<[u64; 4]> = a
        .iter()
        .map(|p| {
            let mut r = [0u64; 4];
            for (slot, &c) in r.iter_mut().zip(p.coords()) {
                *slot = c.rem_euclid(m as i64) as u64;
            }
            r
        })
        .collect();
    let inner_grid = m.pow(d as u32 - 2);
    let n = reduced.len();

    let slab_sums: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k1| {
            let mut acc = Neumaier::default();
            let mut idx = vec![0u64; n];
            let mut k = [k1, 0, 0, 0];
            for t in 0..inner_grid {
                // (k_2, ..., k_{d-1}) from the linear index, last one fastest.
                let mut rest = t;
                for i in (1..d - 1).rev() {
                    k[i] = rest % m;
                    rest /= m;
                }
                for (slot, r) in idx.iter_mut().zip(&reduced) {
                    *slot = (0..d - 1).map(|i| r[i] * k[i] % m).sum::<u64>() % m;
                }
                for _ in 0..m {
                    let (mut re, mut im) = (0.0f64, 0.0f64);
                    for (slot, r) in idx.iter_mut().zip(&reduced) {
                        let (c, s) = twiddle[*slot as usize];
                        re += c;
                        im += s;
                        *slot += r[d - 1];
                        if *slot >= m {
                            *slot -= m;
                        }
                    }
                    acc.add((re * re + im * im).powi(s as i32));
                }
            }
            acc.value()
        })
        .collect();

    let mut total = Neumaier::default();
    for v in slab_sums {
        total.add(v);
    }
    let raw = total.value() / grid as f64;
    let rounded = raw.round().max(0.0);
    let residual = (raw - rounded).abs();
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Error::Residual {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(DftMoment {
        s,
        modulus: m,
        grid: grid as u64,
        raw,
        rounded: rounded as u128,
        residual,
    })
}

/// `E_{s,2}(A)` computed on the Fourier side.
pub fn moment_via_dft(a: &PointSet, s: u32) -> Result<EnergyValue> {
    moment_via_dft_with(a, s, &Budget::default())
}

pub fn moment_via_dft_with(a: &PointSet, s: u32, budget: &Budget) -> Result<EnergyValue> {
    let moment = dft_moment(a, s, budget)?;
    Ok(EnergyValue {
        s,
        k: 2,
        value: BigUint::from(moment.rounded),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::lattice::{enumerate_sphere, LatticePoint};

    #[test]
    fn unit_sphere_moment_is_ninety() {
        let a = enumerate_sphere(3, 1).unwrap();
        let m = dft_moment(&a, 2, &Budget::default()).unwrap();
        assert_eq!(m.rounded, 90);
        assert_eq!(m.modulus, 5);
        assert!(m.residual < RESIDUAL_TOLERANCE);
        assert_eq!(moment_via_dft(&a, 2).unwrap().value, BigUint::from(90u32));
    }

    #[test]
    fn singleton_moment_is_one() {
        let p = PointSet::derived(4, [LatticePoint::new4([1, -1, 2, 0])]).unwrap();
        for s in 1..=3 {
            assert_eq!(moment_via_dft(&p, s).unwrap().value, BigUint::from(1u32));
        }
    }

    #[test]
    fn matches_convolution_on_small_spheres() {
        for (d, m) in [(3, 2), (3, 3), (4, 1), (4, 2)] {
            let a = enumerate_sphere(d, m).unwrap();
            for s in [2, 3] {
                let dft = moment_via_dft(&a, s).unwrap();
                assert_eq!(dft, energy(&a, s, 2).unwrap(), "d={d} m={m} s={s}");
            }
        }
    }

    #[test]
    fn limits_are_enforced() {
        let big = enumerate_sphere(4, 9).unwrap();
        assert!(big.len() > MAX_DFT_POINTS);
        assert!(matches!(dft_moment(&big, 2, &Budget::default()), Err(Error::InvalidArgument(_))));
        let a = enumerate_sphere(3, 9).unwrap();
        let tight = Budget {
            max_grid: 1000,
            ..Budget::default()
        };
        assert!(matches!(dft_moment(&a, 2, &tight), Err(Error::GridBudget { .. })));
    }
}
