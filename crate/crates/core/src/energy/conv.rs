//! Exact slab-wise convolution of a weighted point multiset with a point set.
//!
//! Keys are mixed-radix indices into the bounding box of the multiset, with the
//! first coordinate most significant, so numeric key order is lexicographic
//! point order. A convolution pass produces its output one slab (fixed first
//! coordinate) at a time; slabs run in parallel and come back in order, so the
//! result does not depend on the schedule.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// Largest per-slab box handled with a dense accumulator.
const DENSE_SLAB_LIMIT: u64 = 1 << 22;

/// Mixed-radix packing of the points of an axis-aligned box into `u64` keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Packer {
    dim: usize,
    lo: [i64; 4],
    size: [u64; 4],
    stride: [u64; 4],
    volume: u64,
}

impl Packer {
    pub(crate) fn new(dim: usize, lo: [i64; 4], hi: [i64; 4]) -> Result<Self> {
        let mut size = [1u64; 4];
        for i in 0..dim {
            debug_assert!(hi[i] >= lo[i]);
            size[i] = (hi[i] - lo[i]) as u64 + 1;
        }
        let mut stride = [0u64; 4];
        let mut acc: u128 = 1;
        for i in (0..dim).rev() {
            stride[i] = acc as u64;
            acc *= size[i] as u128;
            if acc > u64::MAX as u128 {
                return Err(Error::KeyWidth {
                    bits: 128 - acc.leading_zeros(),
                });
            }
        }
        Ok(Self {
            dim,
            lo,
            size,
            stride,
            volume: acc as u64,
        })
    }

    /// Bounding-box packer of a nonempty point list.
    pub(crate) fn bounding(dim: usize, points: &[LatticePoint]) -> Result<Self> {
        let (lo, hi) = bounds(dim, points).ok_or(Error::EmptySet)?;
        Self::new(dim, lo, hi)
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn volume(&self) -> u64 {
        self.volume
    }

    pub(crate) fn lo(&self) -> [i64; 4] {
        self.lo
    }

    pub(crate) fn hi(&self) -> [i64; 4] {
        let mut hi = self.lo;
        for i in 0..self.dim {
            hi[i] = self.lo[i] + self.size[i] as i64 - 1;
        }
        hi
    }

    pub(crate) fn pack(&self, p: &LatticePoint) -> Option<u64> {
        if p.dim() != self.dim {
            return None;
        }
        let mut key = 0u64;
        for (i, &c) in p.coords().iter().enumerate() {
            let off = c.checked_sub(self.lo[i])?;
            if off < 0 || off as u64 >= self.size[i] {
                return None;
            }
            key += off as u64 * self.stride[i];
        }
        Some(key)
    }

    pub(crate) fn unpack(&self, mut key: u64) -> LatticePoint {
        let mut c = [0i64; 4];
        for i in 0..self.dim {
            c[i] = self.lo[i] + (key / self.stride[i]) as i64;
            key %= self.stride[i];
        }
        LatticePoint::new(&c[..self.dim]).expect("packer dimension is valid")
    }

    fn first(&self, key: u64) -> i64 {
        self.lo[0] + (key / self.stride[0]) as i64
    }
}

pub(crate) fn bounds(dim: usize, points: &[LatticePoint]) -> Option<([i64; 4], [i64; 4])> {
    let first = points.first()?;
    let mut lo = [0i64; 4];
    let mut hi = [0i64; 4];
    lo[..dim].copy_from_slice(first.coords());
    hi[..dim].copy_from_slice(first.coords());
    for p in points {
        for (i, &c) in p.coords().iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    Some((lo, hi))
}

/// A weighted multiset of points: sorted `(key, count)` pairs with positive
/// counts.
#[derive(Clone, Debug)]
pub(crate) struct Layer {
    pub(crate) packer: Packer,
    pub(crate) entries: Vec<(u64, u64)>,
}

impl Layer {
    /// Indicator function of a nonempty point list (any order).
    pub(crate) fn indicator(dim: usize, points: &[LatticePoint]) -> Result<Self> {
        let packer = Packer::bounding(dim, points)?;
        let mut entries: Vec<(u64, u64)> = points
            .iter()
            .map(|p| (packer.pack(p).expect("inside bounding box"), 1))
            .collect();
        entries.sort_unstable();
        entries.dedup();
        Ok(Self { packer, entries })
    }

    #[cfg(test)]
    pub(crate) fn mass(&self) -> u128 {
        self.entries.iter().map(|&(_, c)| c as u128).sum()
    }
}

/// Output box of `input + step` and its packer.
pub(crate) fn output_packer(input: &Packer, step: &[LatticePoint]) -> Result<Packer> {
    let dim = input.dim();
    let (slo, shi) = bounds(dim, step).ok_or(Error::EmptySet)?;
    let (ilo, ihi) = (input.lo(), input.hi());
    let mut lo = [0i64; 4];
    let mut hi = [0i64; 4];
    for i in 0..dim {
        lo[i] = ilo[i] + slo[i];
        hi[i] = ihi[i] + shi[i];
    }
    Packer::new(dim, lo, hi)
}

enum Scratch {
    Dense { values: Vec<u64>, touched: Vec<u64> },
    Sparse(FxHashMap<u64, u64>),
}

impl Scratch {
    fn new(rest_volume: u64) -> Self {
        if rest_volume <= DENSE_SLAB_LIMIT {
            Scratch::Dense {
                values: vec![0; rest_volume as usize],
                touched: Vec::new(),
            }
        } else {
            Scratch::Sparse(FxHashMap::default())
        }
    }

    #[inline]
    fn add(&mut self, idx: u64, count: u64) {
        match self {
            Scratch::Dense { values, touched } => {
                let slot = &mut values[idx as usize];
                if *slot == 0 {
                    touched.push(idx);
                }
                *slot += count;
            }
            Scratch::Sparse(map) => *map.entry(idx).or_insert(0) += count,
        }
    }

    /// Sorted nonzero entries; leaves the scratch zeroed.
    fn drain_sorted(&mut self) -> Vec<(u64, u64)> {
        match self {
            Scratch::Dense { values, touched } => {
                touched.sort_unstable();
                let out = touched
                    .iter()
                    .map(|&i| {
                        let c = std::mem::take(&mut values[i as usize]);
                        (i, c)
                    })
                    .collect();
                touched.clear();
                out
            }
            Scratch::Sparse(map) => {
                let mut out: Vec<(u64, u64)> = map.drain().collect();
                out.sort_unstable();
                out
            }
        }
    }
}

/// Convolves `input` with the indicator of `step` and hands each output slab
/// (sorted `(key, count)` pairs under the returned packer) to `visit`.
///
/// With `saturate`, every input count is treated as 1 and output counts are
/// clamped to 1, which computes supports (sumsets) without overflow concerns.
/// Otherwise the caller guarantees the output mass fits in `u64`.
pub(crate) fn convolve_slabs<R, F>(
    input: &Layer,
    step: &[LatticePoint],
    saturate: bool,
    visit: F,
) -> Result<(Packer, Vec<R>)>
where
    R: Send,
    F: Fn(&Packer, &[(u64, u64)]) -> R + Sync,
{
    let out = output_packer(&input.packer, step)?;
    let dim = out.dim;
    let in_packer = &input.packer;
    let rest_volume = out.stride[0];

    // Offsets of the input entries' trailing coordinates in the output slab.
    let base: Vec<i64> = input
        .entries
        .iter()
        .map(|&(key, _)| {
            let p = in_packer.unpack(key);
            (1..dim)
                .map(|i| (p.coord(i) - out.lo[i]) * out.stride[i] as i64)
                .sum()
        })
        .collect();

    // Input entries grouped by first coordinate.
    let mut groups: Vec<Option<(usize, usize)>> = vec![None; in_packer.size[0] as usize];
    let mut start = 0;
    while start < input.entries.len() {
        let f = in_packer.first(input.entries[start].0);
        let mut end = start + 1;
        while end < input.entries.len() && in_packer.first(input.entries[end].0) == f {
            end += 1;
        }
        groups[(f - in_packer.lo[0]) as usize] = Some((start, end));
        start = end;
    }

    // Step points grouped by first coordinate, as slab offsets.
    let mut step_groups: Vec<(i64, Vec<i64>)> = Vec::new();
    let mut sorted_step: Vec<&LatticePoint> = step.iter().collect();
    sorted_step.sort_unstable();
    sorted_step.dedup();
    for a in sorted_step {
        let delta: i64 = (1..dim).map(|i| a.coord(i) * out.stride[i] as i64).sum();
        match step_groups.last_mut() {
            Some((f, v)) if *f == a.coord(0) => v.push(delta),
            _ => step_groups.push((a.coord(0), vec![delta])),
        }
    }

    let slabs = out.size[0];
    let results: Vec<R> = (0..slabs)
        .into_par_iter()
        .map_init(
            || Scratch::new(rest_volume),
            |scratch, si| {
                let t = out.lo[0] + si as i64;
                for (a1, deltas) in &step_groups {
                    let src = t - a1;
                    let idx = src - in_packer.lo[0];
                    if idx < 0 || idx as u64 >= in_packer.size[0] {
                        continue;
                    }
                    let Some((s, e)) = groups[idx as usize] else {
                        continue;
                    };
                    for j in s..e {
                        let b = base[j];
                        let c = if saturate { 1 } else { input.entries[j].1 };
                        for &d in deltas {
                            scratch.add((b + d) as u64, c);
                        }
                    }
                }
                let offset = si * out.stride[0];
                let mut slab = scratch.drain_sorted();
                for entry in slab.iter_mut() {
                    entry.0 += offset;
                    if saturate {
                        entry.1 = 1;
                    }
                }
                visit(&out, &slab)
            },
        )
        .collect();
    Ok((out, results))
}

/// Full convolution, materialized as a new layer.
pub(crate) fn convolve(input: &Layer, step: &[LatticePoint], saturate: bool) -> Result<Layer> {
    let (packer, slabs) = convolve_slabs(input, step, saturate, |_, slab| slab.to_vec())?;
    let entries = slabs.into_iter().flatten().collect();
    Ok(Layer { packer, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_preserves_lexicographic_order() {
        let pts: Vec<LatticePoint> = [[-2, 3, 0], [1, -1, 5], [1, 0, -4], [0, 0, 0]]
            .into_iter()
            .map(LatticePoint::new3)
            .collect();
        let packer = Packer::bounding(3, &pts).unwrap();
        let mut by_key: Vec<_> = pts.iter().map(|p| (packer.pack(p).unwrap(), *p)).collect();
        by_key.sort();
        let mut by_point = pts.clone();
        by_point.sort();
        assert_eq!(by_key.iter().map(|x| x.1).collect::<Vec<_>>(), by_point);
        for p in &pts {
            assert_eq!(packer.unpack(packer.pack(p).unwrap()), *p);
        }
        assert_eq!(packer.pack(&LatticePoint::new3([9, 9, 9])), None);
    }

    #[test]
    fn oversized_box_is_rejected() {
        let lo = [i64::MIN / 2, i64::MIN / 2, 0, 0];
        let hi = [i64::MAX / 2, i64::MAX / 2, 0, 0];
        assert!(matches!(Packer::new(3, lo, hi), Err(Error::KeyWidth { .. })));
    }

    #[test]
    fn convolution_of_two_points() {
        let a = [LatticePoint::new3([1, 0, 0]), LatticePoint::new3([0, 1, 0])];
        let layer = Layer::indicator(3, &a).unwrap();
        let out = convolve(&layer, &a, false).unwrap();
        let got: Vec<_> = out
            .entries
            .iter()
            .map(|&(k, c)| (out.packer.unpack(k), c))
            .collect();
        assert_eq!(
            got,
            vec![
                (LatticePoint::new3([0, 2, 0]), 1),
                (LatticePoint::new3([1, 1, 0]), 2),
                (LatticePoint::new3([2, 0, 0]), 1),
            ]
        );
        assert_eq!(out.mass(), 4);
    }
}
