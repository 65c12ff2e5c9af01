//! Greedy slice peeling: repeatedly remove the slice `C_n = A ∩ (n - A)` of a
//! most popular pair sum `n` until every pair sum of the remainder `X` has
//! fewer than `threshold` representations.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::arith::{ceil_rational_power, root_le};
use crate::energy::conv::Packer;
use crate::energy::rep_fn;
use crate::error::{Error, Result};
use crate::lattice::{restrict_to_orthant, LatticePoint, OrthantPattern, PointSet};

/// The default exponent offset in `N^{2/3 + delta}`.
pub fn default_delta() -> Ratio<u32> {
    Ratio::new(1, 1392)
}

/// `ceil(N^{2/3 + delta})`, computed exactly.
pub fn threshold_for(n: usize, delta: Ratio<u32>) -> u64 {
    let e = Ratio::new(2u32, 3) + delta;
    ceil_rational_power(n as u64, *e.numer(), *e.denom()).max(1)
}

/// Whether `r <= N^{1/3 - delta}`, exactly. False when `delta > 1/3`.
pub fn peel_bound_holds(r: usize, n: usize, delta: Ratio<u32>) -> bool {
    let third = Ratio::new(1u32, 3);
    if delta > third {
        return false;
    }
    let e = third - delta;
    root_le(r as u64, n as u64, *e.numer(), *e.denom())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Peel {
    pub center: LatticePoint,
    pub slice: PointSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub x: PointSet,
    pub peels: Vec<Peel>,
    pub threshold: u64,
    /// `|A|` at entry.
    pub n: usize,
    /// Set when the threshold came from [`threshold_for`].
    pub delta: Option<Ratio<u32>>,
}

impl Decomposition {
    /// `Y`, the union of the peeled slices.
    pub fn y(&self) -> PointSet {
        let pts: Vec<LatticePoint> = self.peels.iter().flat_map(|p| p.slice.iter().copied()).collect();
        PointSet::derived(self.x.dim(), pts).expect("slices share the dimension of X")
    }

    pub fn summary(&self, verdict: &Verdict) -> DecompositionSummary {
        DecompositionSummary {
            threshold: self.threshold,
            delta: self.delta.map(|d| d.to_string()),
            n: self.n,
            x_size: self.x.len(),
            peels: self
                .peels
                .iter()
                .map(|p| PeelSummary {
                    center: p.center,
                    size: p.slice.len(),
                })
                .collect(),
            verdict: verdict.to_string(),
        }
    }
}

/// Plain-data view of a decomposition for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub threshold: u64,
    pub delta: Option<String>,
    pub n: usize,
    pub x_size: usize,
    pub peels: Vec<PeelSummary>,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelSummary {
    pub center: LatticePoint,
    pub size: usize,
}

/// Pair-sum counts of the live points, with the most popular sum on top.
struct PairSums {
    packer: Packer,
    counts: FxHashMap<u64, u64>,
    ranked: BTreeSet<(Reverse<u64>, u64)>,
}

impl PairSums {
    fn decrement(&mut self, key: u64, by: u64) {
        let entry = self.counts.get_mut(&key).expect("live pair sum is counted");
        self.ranked.remove(&(Reverse(*entry), key));
        *entry -= by;
        if *entry > 0 {
            self.ranked.insert((Reverse(*entry), key));
        } else {
            self.counts.remove(&key);
        }
    }

    fn top(&self) -> Option<(LatticePoint, u64)> {
        self.ranked
            .first()
            .map(|&(Reverse(c), k)| (self.packer.unpack(k), c))
    }
}

/// Runs the peeling loop. The peeled sum is the one with the most
/// representations, ties going to the lexicographically smallest; `n = 0` is
/// eligible.
pub fn xy_decompose(a: &PointSet, threshold: u64) -> Result<Decomposition> {
    if threshold == 0 {
        return Err(Error::InvalidArgument("threshold must be at least 1".into()));
    }
    let dim = a.dim();
    let pts = a.points();
    let mut done = Decomposition {
        x: a.clone(),
        peels: Vec::new(),
        threshold,
        n: a.len(),
        delta: None,
    };
    if pts.is_empty() {
        return Ok(done);
    }
    let doubled: Vec<LatticePoint> = pts.iter().map(|p| p.scale(2)).collect();
    let mut sums = PairSums {
        packer: Packer::bounding(dim, &doubled)?,
        counts: FxHashMap::default(),
        ranked: BTreeSet::new(),
    };
    let key = |packer: &Packer, p: &LatticePoint, q: &LatticePoint| packer.pack(&(*p + *q)).expect("inside 2A box");
    for (i, p) in pts.iter().enumerate() {
        let k = key(&sums.packer, p, p);
        *sums.counts.entry(k).or_default() += 1;
        for q in &pts[i + 1..] {
            let k = key(&sums.packer, p, q);
            *sums.counts.entry(k).or_default() += 2;
        }
    }
    sums.ranked = sums.counts.iter().map(|(&k, &c)| (Reverse(c), k)).collect();

    let mut alive = vec![true; pts.len()];
    while let Some((center, count)) = sums.top() {
        if count < threshold {
            break;
        }
        let members: Vec<usize> = (0..pts.len())
            .filter(|&i| {
                alive[i]
                    && a
                        .points()
                        .binary_search(&(center - pts[i]))
                        .is_ok_and(|j| alive[j])
            })
            .collect();
        for &i in &members {
            for j in 0..pts.len() {
                if !alive[j] {
                    continue;
                }
                let k = key(&sums.packer, &pts[i], &pts[j]);
                sums.decrement(k, if i == j { 1 } else { 2 });
            }
            alive[i] = false;
        }
        let slice = PointSet::from_sorted_unchecked(dim, a.family(), a.m(), members.iter().map(|&i| pts[i]).collect());
        done.peels.push(Peel { center, slice });
    }
    done.x = a.filter(|p| alive[a.points().binary_search(p).unwrap()]);
    Ok(done)
}

/// [`xy_decompose`] with `threshold = ceil(N^{2/3 + delta})`.
pub fn xy_decompose_delta(a: &PointSet, delta: Ratio<u32>) -> Result<Decomposition> {
    let mut d = xy_decompose(a, threshold_for(a.len(), delta))?;
    d.delta = Some(delta);
    Ok(d)
}

/// The first invariant a decomposition breaks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// A point occurs in two of the parts.
    Disjoint { point: LatticePoint },
    /// A point of `A` is in no part.
    Cover { point: LatticePoint },
    /// A part contains a point outside `A`.
    Extraneous { point: LatticePoint },
    /// The recorded `N` is not `|A|`.
    Size { recorded: usize, actual: usize },
    /// A slice is smaller than the threshold.
    PeelSize { index: usize, size: usize },
    /// More peels than `ceil(N / threshold)`.
    PeelCount { peels: usize, bound: usize },
    /// A part is not the slice of what remained when it was peeled.
    SliceMismatch { index: usize },
    /// Some pair sum of `X` still has at least `threshold` representations.
    XProperty { n: LatticePoint, count: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disjoint { point } => write!(f, "disjointness: {point} lies in two parts"),
            Violation::Cover { point } => write!(f, "cover: {point} is in no part"),
            Violation::Extraneous { point } => write!(f, "cover: {point} is not in A"),
            Violation::Size { recorded, actual } => write!(f, "size: recorded N = {recorded}, |A| = {actual}"),
            Violation::PeelSize { index, size } => write!(f, "peel size: slice {index} has {size} points"),
            Violation::PeelCount { peels, bound } => write!(f, "peel count: {peels} > {bound}"),
            Violation::SliceMismatch { index } => write!(f, "slice: part {index} is not the slice of the remainder"),
            Violation::XProperty { n, count } => write!(f, "X clause: r_2(X, {n}) = {count}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub violation: Option<Violation>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "pass"),
            Some(v) => write!(f, "fail ({v})"),
        }
    }
}

fn first_violation(a: &PointSet, d: &Decomposition) -> Result<Option<Violation>> {
    let parts = std::iter::once(&d.x).chain(d.peels.iter().map(|p| &p.slice));
    let mut owner: FxHashMap<LatticePoint, usize> = FxHashMap::default();
    for (i, part) in parts.enumerate() {
        for p in part {
            if owner.insert(*p, i).is_some() {
                return Ok(Some(Violation::Disjoint { point: *p }));
            }
        }
    }
    if let Some(p) = a.iter().find(|p| !owner.contains_key(p)) {
        return Ok(Some(Violation::Cover { point: *p }));
    }
    if let Some(p) = owner.keys().filter(|p| !a.contains(p)).min() {
        return Ok(Some(Violation::Extraneous { point: *p }));
    }
    if d.n != a.len() {
        return Ok(Some(Violation::Size {
            recorded: d.n,
            actual: a.len(),
        }));
    }
    if d.threshold == 0 {
        return Err(Error::InvalidArgument("threshold must be at least 1".into()));
    }
    for (index, peel) in d.peels.iter().enumerate() {
        if (peel.slice.len() as u64) < d.threshold {
            return Ok(Some(Violation::PeelSize {
                index,
                size: peel.slice.len(),
            }));
        }
    }
    let bound = (a.len() as u64).div_ceil(d.threshold) as usize;
    if d.peels.len() > bound {
        return Ok(Some(Violation::PeelCount {
            peels: d.peels.len(),
            bound,
        }));
    }
    let mut rest = a.clone();
    for (index, peel) in d.peels.iter().enumerate() {
        let expected = rest.filter(|p| rest.contains(&(peel.center - *p)));
        if expected.points() != peel.slice.points() {
            return Ok(Some(Violation::SliceMismatch { index }));
        }
        rest = rest.difference(&peel.slice);
    }
    if !d.x.is_empty() {
        let r2 = rep_fn(&d.x, 2)?;
        if let Some((n, count)) = r2.sup() {
            if count >= d.threshold {
                return Ok(Some(Violation::XProperty { n, count }));
            }
        }
    }
    Ok(None)
}

/// Recomputes every invariant of `d` against `A` and reports the first one
/// that fails.
pub fn verify_decomposition(a: &PointSet, d: &Decomposition) -> Result<Verdict> {
    Ok(Verdict {
        violation: first_violation(a, d)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthantCell {
    pub pattern: OrthantPattern,
    pub points: PointSet,
    /// Cells with at least two zero coordinates hold `O(m^eps)` points and
    /// are set aside.
    pub negligible: bool,
}

/// Splits a four-dimensional set into its `3^4` sign-pattern cells.
pub fn orthant_pipeline(a: &PointSet) -> Result<Vec<OrthantCell>> {
    if a.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: a.dim(),
        });
    }
    OrthantPattern::all(4)?
        .into_iter()
        .map(|pattern| {
            let points = restrict_to_orthant(a, &pattern)?;
            let negligible = pattern.zero_count() >= 2;
            Ok(OrthantCell {
                pattern,
                points,
                negligible,
            })
        })
        .collect()
}
