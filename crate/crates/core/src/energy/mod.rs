//! Representation functions `r_s(A, n)`, energies `E_{s,k}(A) = sum_n r_s(A, n)^k`,
//! sumsets, dyadic level sets, and the Fourier-side moment identity.

pub(crate) mod conv;
mod dft;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::big_pow;
use crate::error::{Error, Result};
use crate::lattice::{Family, LatticePoint, PointSet};

use conv::{bounds, convolve, convolve_slabs, output_packer, Layer, Packer};
pub use dft::{
    dft_moment, moment_via_dft, moment_via_dft_with, DftMoment, MAX_DFT_POINTS, RESIDUAL_TOLERANCE,
};

/// Resource limits for the exact counting routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest number of entries a materialized representation function may
    /// be estimated to hold.
    pub max_support: u64,
    /// Largest number of tuples the brute-force oracle may enumerate.
    pub max_tuples: u64,
    /// Largest Fourier grid `M^d` for the moment check.
    pub max_grid: u64,
    /// Largest estimated number of accumulation steps for one computation.
    pub max_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_support: 50_000_000,
            max_tuples: 100_000_000,
            max_grid: 100_000_000,
            max_work: 100_000_000_000,
        }
    }
}

/// The representation function `n -> r_s(A, n)`; only positive counts are
/// stored, in lexicographic key order.
#[derive(Clone, Debug)]
pub struct RepFn {
    s: u32,
    dim: usize,
    packer: Option<Packer>,
    entries: Vec<(u64, u64)>,
}

impl RepFn {
    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored keys, i.e. `|sA|`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: &LatticePoint) -> u64 {
        let Some(packer) = &self.packer else { return 0 };
        let Some(key) = packer.pack(n) else { return 0 };
        self.entries
            .binary_search_by_key(&key, |&(k, _)| k)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, u64)> + '_ {
        self.entries.iter().map(move |&(k, c)| {
            let packer = self.packer.as_ref().expect("nonempty RepFn has a packer");
            (packer.unpack(k), c)
        })
    }

    /// `sum_n r_s(n)`, which equals `|A|^s`.
    pub fn mass(&self) -> u128 {
        self.entries.iter().map(|&(_, c)| c as u128).sum()
    }

    /// `sum_n r_s(n)^k`.
    pub fn power_sum(&self, k: u32) -> BigUint {
        let mut acc = PowerSum::default();
        for &(_, c) in &self.entries {
            acc.add(c, k);
        }
        acc.finish()
    }

    /// The support `sA` as a point set.
    pub fn support(&self) -> PointSet {
        let pts = self.iter().map(|(p, _)| p).collect();
        PointSet::from_sorted_unchecked(self.dim, Family::Derived, None, pts)
    }

    /// A maximizing key and its count; ties go to the lexicographically
    /// smallest key.
    pub fn sup(&self) -> Option<(LatticePoint, u64)> {
        let mut best: Option<(u64, u64)> = None;
        for &(k, c) in &self.entries {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((k, c));
            }
        }
        best.map(|(k, c)| (self.packer.as_ref().unwrap().unpack(k), c))
    }

    /// Largest count over nonzero keys.
    pub fn sup_nonzero(&self) -> Option<(LatticePoint, u64)> {
        self.iter()
            .filter(|(p, _)| !p.is_zero())
            .fold(None, |best, (p, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((p, c)),
            })
    }
}

/// Exact `E_{s,k}(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub s: u32,
    pub k: u32,
    #[serde(with = "crate::arith::big_decimal")]
    pub value: BigUint,
}

impl EnergyValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Sizes of the dyadic level sets `P_{2^j} = {n : 2^j <= r_2(n) < 2^{j+1}}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSetProfile {
    /// `(j, |P_{2^j}|)` for every nonempty level, increasing in `j`.
    pub levels: Vec<(u32, u64)>,
}

impl LevelSetProfile {
    fn from_counts<I: IntoIterator<Item = u64>>(counts: I) -> Self {
        let mut hist: BTreeMap<u32, u64> = BTreeMap::new();
        for c in counts {
            *hist.entry(c.ilog2()).or_default() += 1;
        }
        Self {
            levels: hist.into_iter().collect(),
        }
    }

    /// Number of keys across all levels.
    pub fn total(&self) -> u64 {
        self.levels.iter().map(|&(_, n)| n).sum()
    }

    /// `(sum_j |P_j| 2^j, sum_j |P_j| 2^{j+1})`, which bracket `sum_n r_2(n)`.
    pub fn mass_bounds(&self) -> (u128, u128) {
        let lo: u128 = self.levels.iter().map(|&(j, n)| (n as u128) << j).sum();
        (lo, 2 * lo)
    }
}

/// Sum of `c^k` with a `u128` fast path.
#[derive(Default)]
struct PowerSum {
    small: u128,
    big: Option<BigUint>,
}

impl PowerSum {
    #[inline]
    fn add(&mut self, c: u64, k: u32) {
        if self.big.is_none() {
            if let Some(t) = (c as u128).checked_pow(k) {
                if let Some(s) = self.small.checked_add(t) {
                    self.small = s;
                    return;
                }
            }
            self.big = Some(BigUint::from(self.small));
        }
        *self.big.as_mut().unwrap() += big_pow(c, k);
    }

    fn merge(&mut self, other: PowerSum) {
        match (self.big.as_mut(), other.big) {
            (None, None) => match self.small.checked_add(other.small) {
                Some(s) => self.small = s,
                None => self.big = Some(BigUint::from(self.small) + other.small),
            },
            (Some(b), None) => *b += other.small,
            (None, Some(ob)) => self.big = Some(ob + self.small),
            (Some(b), Some(ob)) => *b += ob,
        }
    }

    fn finish(self) -> BigUint {
        self.big.unwrap_or_else(|| BigUint::from(self.small))
    }
}

fn check_fold(s: u32) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidArgument("fold count s must be at least 1".into()));
    }
    Ok(())
}

/// `|A|^s`, or an error when counts of that size do not fit in 64 bits.
fn checked_mass(size: usize, s: u32) -> Result<u64> {
    (size as u64)
        .checked_pow(s)
        .ok_or(Error::CountOverflow { size, s })
}

/// Number of lattice points in the bounding box of `jA`.
fn fold_volume(a: &PointSet, j: u32) -> u128 {
    let Some((lo, hi)) = bounds(a.dim(), a.points()) else {
        return 0;
    };
    (0..a.dim())
        .map(|i| j as u128 * (hi[i] - lo[i]) as u128 + 1)
        .fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Upper estimate of the accumulation steps needed for `r_s(A, ·)`: each pass
/// `j` touches every stored entry of `r_{j-1}` once per element of `A`.
pub fn estimate_work(a: &PointSet, s: u32) -> u128 {
    let n = a.len() as u128;
    (2..=s)
        .map(|j| {
            let prev = n.saturating_pow(j - 1).min(fold_volume(a, j - 1));
            prev.saturating_mul(n)
        })
        .fold(0u128, |acc, x| acc.saturating_add(x))
}

/// Same for the sumset `plus A - minus A`.
pub fn estimate_sumset_work(a: &PointSet, plus: u32, minus: u32) -> u128 {
    let n = a.len() as u128;
    (2..=plus + minus)
        .map(|j| n.saturating_pow(j - 1).min(fold_volume(a, j - 1)).saturating_mul(n))
        .fold(0u128, |acc, x| acc.saturating_add(x))
}

fn check_work(work: u128, budget: &Budget) -> Result<()> {
    if work > budget.max_work as u128 {
        return Err(Error::WorkBudget {
            work,
            budget: budget.max_work as u128,
        });
    }
    Ok(())
}

/// `r_{j}` for `j = 1 .. upto`, materialized, with support budget checks.
fn build_layer(a: &PointSet, upto: u32, budget: &Budget) -> Result<Layer> {
    let mut layer = Layer::indicator(a.dim(), a.points())?;
    for j in 2..=upto {
        let out = output_packer(&layer.packer, a.points())?;
        let estimated = (checked_mass(a.len(), j)? as u128).min(out.volume() as u128);
        if estimated > budget.max_support as u128 {
            return Err(Error::SupportBudget {
                estimated,
                budget: budget.max_support as u128,
            });
        }
        layer = convolve(&layer, a.points(), false)?;
    }
    Ok(layer)
}

/// `r_s(A, ·)` by `s - 1` exact convolution passes.
pub fn rep_fn(a: &PointSet, s: u32) -> Result<RepFn> {
    rep_fn_with(a, s, &Budget::default())
}

pub fn rep_fn_with(a: &PointSet, s: u32, budget: &Budget) -> Result<RepFn> {
    check_fold(s)?;
    if a.is_empty() {
        return Ok(RepFn {
            s,
            dim: a.dim(),
            packer: None,
            entries: Vec::new(),
        });
    }
    checked_mass(a.len(), s)?;
    check_work(estimate_work(a, s), budget)?;
    let layer = build_layer(a, s, budget)?;
    Ok(RepFn {
        s,
        dim: a.dim(),
        packer: Some(layer.packer),
        entries: layer.entries,
    })
}

/// Everything the scan harness needs from `r_s(A, ·)`, computed in one
/// streaming pass without materializing the final layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepSummary {
    pub s: u32,
    pub size: usize,
    /// `|sA|`.
    pub support: u64,
    /// `sum_n r_s(n)`.
    pub mass: u128,
    /// Maximizer of `r_s` (lexicographically smallest on ties) and its count.
    pub sup: Option<(LatticePoint, u64)>,
    /// Same over `n != 0`.
    pub sup_nonzero: Option<(LatticePoint, u64)>,
    /// `r_s(0)`.
    pub at_zero: u64,
    /// `(k, sum_n r_s(n)^k)` for each requested `k`.
    pub power_sums: Vec<(u32, BigUint)>,
    pub levels: LevelSetProfile,
}

impl RepSummary {
    pub fn power_sum(&self, k: u32) -> Option<&BigUint> {
        self.power_sums.iter().find(|(kk, _)| *kk == k).map(|(_, v)| v)
    }
}

struct SlabStats {
    support: u64,
    mass: u128,
    sup: Option<(u64, u64)>,
    sup_nonzero: Option<(u64, u64)>,
    at_zero: u64,
    sums: Vec<PowerSum>,
    hist: BTreeMap<u32, u64>,
}

fn slab_stats(slab: &[(u64, u64)], zero_key: Option<u64>, ks: &[u32]) -> SlabStats {
    let mut st = SlabStats {
        support: slab.len() as u64,
        mass: 0,
        sup: None,
        sup_nonzero: None,
        at_zero: 0,
        sums: ks.iter().map(|_| PowerSum::default()).collect(),
        hist: BTreeMap::new(),
    };
    for &(key, c) in slab {
        st.mass += c as u128;
        if st.sup.is_none_or(|(_, b)| c > b) {
            st.sup = Some((key, c));
        }
        if Some(key) == zero_key {
            st.at_zero = c;
        } else if st.sup_nonzero.is_none_or(|(_, b)| c > b) {
            st.sup_nonzero = Some((key, c));
        }
        for (acc, &k) in st.sums.iter_mut().zip(ks) {
            acc.add(c, k);
        }
        *st.hist.entry(c.ilog2()).or_default() += 1;
    }
    st
}

/// Streaming statistics of `r_s(A, ·)` including `sum r_s^k` for every `k` in
/// `ks`. Only `r_{s-1}` is materialized.
pub fn rep_summary(a: &PointSet, s: u32, ks: &[u32], budget: &Budget) -> Result<RepSummary> {
    check_fold(s)?;
    if a.is_empty() {
        return Ok(RepSummary {
            s,
            size: 0,
            support: 0,
            mass: 0,
            sup: None,
            sup_nonzero: None,
            at_zero: 0,
            power_sums: ks.iter().map(|&k| (k, BigUint::zero())).collect(),
            levels: LevelSetProfile::default(),
        });
    }
    checked_mass(a.len(), s)?;
    check_work(estimate_work(a, s), budget)?;
    let (packer, slabs): (Packer, Vec<SlabStats>) = if s == 1 {
        let layer = Layer::indicator(a.dim(), a.points())?;
        let zero = layer.packer.pack(&LatticePoint::zero(a.dim())?);
        let st = slab_stats(&layer.entries, zero, ks);
        (layer.packer, vec![st])
    } else {
        let prev = build_layer(a, s - 1, budget)?;
        let zero = LatticePoint::zero(a.dim())?;
        convolve_slabs(&prev, a.points(), false, |packer, slab| {
            slab_stats(slab, packer.pack(&zero), ks)
        })?
    };

    let mut support = 0;
    let mut mass = 0u128;
    let mut sup: Option<(u64, u64)> = None;
    let mut sup_nonzero: Option<(u64, u64)> = None;
    let mut at_zero = 0;
    let mut sums: Vec<PowerSum> = ks.iter().map(|_| PowerSum::default()).collect();
    let mut hist: BTreeMap<u32, u64> = BTreeMap::new();
    // Slabs arrive in key order, so strict comparisons keep the smallest key.
    for st in slabs {
        support += st.support;
        mass += st.mass;
        if let Some((k, c)) = st.sup {
            if sup.is_none_or(|(_, b)| c > b) {
                sup = Some((k, c));
            }
        }
        if let Some((k, c)) = st.sup_nonzero {
            if sup_nonzero.is_none_or(|(_, b)| c > b) {
                sup_nonzero = Some((k, c));
            }
        }
        at_zero += st.at_zero;
        for (acc, other) in sums.iter_mut().zip(st.sums) {
            acc.merge(other);
        }
        for (j, n) in st.hist {
            *hist.entry(j).or_default() += n;
        }
    }
    Ok(RepSummary {
        s,
        size: a.len(),
        support,
        mass,
        sup: sup.map(|(k, c)| (packer.unpack(k), c)),
        sup_nonzero: sup_nonzero.map(|(k, c)| (packer.unpack(k), c)),
        at_zero,
        power_sums: ks.iter().copied().zip(sums.into_iter().map(PowerSum::finish)).collect(),
        levels: LevelSetProfile {
            levels: hist.into_iter().collect(),
        },
    })
}

fn check_energy_args(s: u32, k: u32) -> Result<()> {
    check_fold(s)?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("energy exponent k must be at least 2, got {k}")));
    }
    Ok(())
}

/// `E_{s,k}(A) = sum_n r_s(A, n)^k`. For `k = 2` this counts the solutions of
/// `x_1 + ... + x_s = x_{s+1} + ... + x_{2s}` in `A`.
pub fn energy(a: &PointSet, s: u32, k: u32) -> Result<EnergyValue> {
    energy_with(a, s, k, &Budget::default())
}

pub fn energy_with(a: &PointSet, s: u32, k: u32, budget: &Budget) -> Result<EnergyValue> {
    check_energy_args(s, k)?;
    let summary = rep_summary(a, s, &[k], budget)?;
    let value = summary.power_sums.into_iter().next().map(|(_, v)| v).unwrap_or_default();
    Ok(EnergyValue { s, k, value })
}

/// Reference implementation of [`energy`]: enumerates every `s`-tuple of `A`
/// directly and tallies sums in an ordered map.
pub fn energy_brute(a: &PointSet, s: u32, k: u32) -> Result<EnergyValue> {
    energy_brute_with(a, s, k, &Budget::default())
}

pub fn energy_brute_with(a: &PointSet, s: u32, k: u32, budget: &Budget) -> Result<EnergyValue> {
    check_energy_args(s, k)?;
    let n = a.len() as u128;
    let tuples = n.checked_pow(s.max(k)).unwrap_or(u128::MAX);
    if tuples > budget.max_tuples as u128 {
        return Err(Error::TupleBudget {
            tuples,
            budget: budget.max_tuples as u128,
        });
    }
    if a.is_empty() {
        return Ok(EnergyValue {
            s,
            k,
            value: BigUint::zero(),
        });
    }
    let pts = a.points();
    let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut idx = vec![0usize; s as usize];
    loop {
        let mut sum = vec![0i64; a.dim()];
        for &i in &idx {
            for (acc, c) in sum.iter_mut().zip(pts[i].coords()) {
                *acc += c;
            }
        }
        *counts.entry(sum).or_default() += 1;
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let value = counts.values().map(|&c| big_pow(c, k)).sum();
                return Ok(EnergyValue { s, k, value });
            }
            idx[pos] += 1;
            if idx[pos] < pts.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `sup_n r_s(A, n)` with its lexicographically smallest maximizer.
pub fn sup_rep(a: &PointSet, s: u32) -> Result<(LatticePoint, u64)> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    rep_summary(a, s, &[], &Budget::default())?
        .sup
        .ok_or(Error::EmptySet)
}

/// `{a_1 + ... + a_plus - b_1 - ... - b_minus}` over elements of `A`.
pub fn sumset(a: &PointSet, plus: u32, minus: u32) -> Result<PointSet> {
    sumset_with(a, plus, minus, &Budget::default())
}

pub fn sumset_with(a: &PointSet, plus: u32, minus: u32, budget: &Budget) -> Result<PointSet> {
    if plus + minus == 0 {
        return Err(Error::InvalidArgument("sumset needs at least one summand".into()));
    }
    if a.is_empty() {
        return PointSet::empty(a.dim());
    }
    if (plus, minus) == (1, 0) {
        return Ok(a.clone());
    }
    if (plus, minus) == (0, 1) {
        return Ok(a.negated());
    }
    check_work(estimate_sumset_work(a, plus, minus), budget)?;
    let neg: Vec<LatticePoint> = a.iter().map(|p| -*p).collect();
    let steps: Vec<&[LatticePoint]> = std::iter::repeat_n(a.points(), plus as usize)
        .chain(std::iter::repeat_n(neg.as_slice(), minus as usize))
        .collect();
    let mut layer = Layer::indicator(a.dim(), steps[0])?;
    for step in steps.iter().skip(1) {
        let out = output_packer(&layer.packer, step)?;
        let bound = (layer.entries.len() as u128 * step.len() as u128).min(out.volume() as u128);
        // The last layer is the answer; intermediate ones are working memory.
        if bound > budget.max_support as u128 {
            return Err(Error::SupportBudget {
                estimated: bound,
                budget: budget.max_support as u128,
            });
        }
        layer = convolve(&layer, step, true)?;
    }
    let pts = layer.entries.iter().map(|&(k, _)| layer.packer.unpack(k)).collect();
    Ok(PointSet::from_sorted_unchecked(a.dim(), Family::Derived, None, pts))
}

/// Dyadic level-set sizes of a 2-fold representation function.
pub fn level_sets(r: &RepFn) -> Result<LevelSetProfile> {
    if r.s != 2 {
        return Err(Error::FoldMismatch {
            expected: 2,
            found: r.s,
        });
    }
    Ok(LevelSetProfile::from_counts(r.entries.iter().map(|&(_, c)| c)))
}
