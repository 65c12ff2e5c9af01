//! Bisector hyperplanes, slices, intersections of translated surfaces, exact
//! weighted incidence counts, `K_{s,t}` witnesses and the point/plane duality
//! `a <-> {x : a.x = 1}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, gcd_all};
use crate::energy::RepFn;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_sphere, LatticePoint, PointSet};

/// The affine hyperplane `a.x = b` with integer coefficients, stored with
/// `gcd(a, b) = 1` and the leading nonzero entry of `a` positive.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hyperplane {
    dim: u8,
    a: [i64; 4],
    b: i64,
}

impl Hyperplane {
    pub fn new(a: &[i64], b: i64) -> Result<Self> {
        if !(3..=4).contains(&a.len()) {
            return Err(Error::Dimension(a.len()));
        }
        if a.iter().all(|&c| c == 0) {
            return Err(Error::ZeroNormal);
        }
        let mut g = gcd(gcd_all(a), b);
        let lead = *a.iter().find(|&&c| c != 0).unwrap();
        if lead < 0 {
            g = -g;
        }
        let mut coeffs = [0i64; 4];
        for (slot, &c) in coeffs.iter_mut().zip(a) {
            *slot = c / g;
        }
        Ok(Self {
            dim: a.len() as u8,
            a: coeffs,
            b: b / g,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn normal(&self) -> &[i64] {
        &self.a[..self.dim()]
    }

    pub fn offset(&self) -> i64 {
        self.b
    }

    fn eval(&self, p: &LatticePoint) -> i128 {
        self.normal()
            .iter()
            .zip(p.coords())
            .map(|(&a, &x)| a as i128 * x as i128)
            .sum()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim() && self.eval(p) == self.b as i128
    }

    pub fn passes_through_origin(&self) -> bool {
        self.b == 0
    }
}

impl fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "plane")?;
        for a in self.normal() {
            write!(f, " {a}")?;
        }
        write!(f, " {}", self.b)
    }
}

/// The perpendicular bisector of `0` and `n`: `2 n.x = |n|^2`.
pub fn bisector_hyperplane(n: &LatticePoint) -> Result<Hyperplane> {
    if n.is_zero() {
        return Err(Error::ZeroVector);
    }
    let b = i64::try_from(n.norm_sq())
        .map_err(|_| Error::InvalidArgument(format!("|{n}|^2 does not fit in 64 bits")))?;
    let a: Vec<i64> = n.coords().iter().map(|&c| 2 * c).collect();
    Hyperplane::new(&a, b)
}

/// `A ∩ (n - A)`. Its size is `r_2(A, n)`.
pub fn slice(a: &PointSet, n: &LatticePoint) -> PointSet {
    a.filter(|p| a.contains(&(*n - *p)))
}

/// A surface to translate. The implicit variants never materialize the
/// surface itself, which matters for the paraboloid at large `m`.
#[derive(Clone, Copy, Debug)]
pub enum Surface<'a> {
    Sphere { d: usize, m: i64 },
    Paraboloid { m: i64 },
    Points(&'a PointSet),
}

impl Surface<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Surface::Sphere { d, .. } => *d,
            Surface::Paraboloid { .. } => 4,
            Surface::Points(s) => s.dim(),
        }
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        match *self {
            Surface::Sphere { m, .. } => p.norm_sq() == m as i128,
            Surface::Paraboloid { m } => {
                let c = p.coords();
                c[..3].iter().all(|x| x.abs() <= m)
                    && c[..3].iter().map(|&x| x as i128 * x as i128).sum::<i128>() == c[3] as i128
            }
            Surface::Points(s) => s.contains(p),
        }
    }
}

impl<'a> From<&'a PointSet> for Surface<'a> {
    fn from(s: &'a PointSet) -> Self {
        Surface::Points(s)
    }
}

fn check_shifts(dim: usize, shifts: &[LatticePoint]) -> Result<()> {
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("at least one shift is required".into()));
    }
    let mut seen = HashSet::new();
    for s in shifts {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        if !seen.insert(*s) {
            return Err(Error::DuplicateShift(s.to_string()));
        }
    }
    Ok(())
}

/// `∩_i (shift_i + S)`.
pub fn intersect_translates(surface: &Surface<'_>, shifts: &[LatticePoint]) -> Result<PointSet> {
    let dim = surface.dim();
    check_shifts(dim, shifts)?;
    let first = shifts[0];
    let rest = &shifts[1..];
    let keep = |x: &LatticePoint| rest.iter().all(|s| surface.contains(&(*x - *s)));
    let mut out: Vec<LatticePoint> = match *surface {
        Surface::Points(s) => s.iter().map(|p| *p + first).filter(keep).collect(),
        Surface::Sphere { d, m } => enumerate_sphere(d, m)?
            .iter()
            .map(|p| *p + first)
            .filter(keep)
            .collect(),
        Surface::Paraboloid { m } => {
            if m <= 0 {
                return Err(Error::NonPositiveRadius(m));
            }
            paraboloid_candidates(m, shifts)
                .into_iter()
                .filter(|x| surface.contains(&(*x - first)) && keep(x))
                .collect()
        }
    };
    out.sort_unstable();
    out.dedup();
    PointSet::derived(dim, out)
}

/// Candidate points of `∩ (shift_i + P_{4,m})`, parametrized by the first
/// three coordinates `u`. Subtracting the defining equations of two translates
/// leaves the linear constraint `2 u.(e_i - e_0) = c_i - c_0 + |e_i|^2 - |e_0|^2`
/// where `shift = (e, c)`; one such constraint cuts the search to a plane.
fn paraboloid_candidates(m: i64, shifts: &[LatticePoint]) -> Vec<LatticePoint> {
    let e = |s: &LatticePoint| [s.coord(0), s.coord(1), s.coord(2)];
    let sq = |v: [i64; 3]| v.iter().map(|&x| x * x).sum::<i64>();
    let e0 = e(&shifts[0]);
    let mut lo = [i64::MIN; 3];
    let mut hi = [i64::MAX; 3];
    for s in shifts {
        for (j, &c) in e(s).iter().enumerate() {
            lo[j] = lo[j].max(c - m);
            hi[j] = hi[j].min(c + m);
        }
    }
    if (0..3).any(|j| lo[j] > hi[j]) {
        return Vec::new();
    }
    let lift = |u: [i64; 3]| {
        let w = [u[0] - e0[0], u[1] - e0[1], u[2] - e0[2]];
        LatticePoint::new4([u[0], u[1], u[2], shifts[0].coord(3) + sq(w)])
    };
    let constraint = shifts[1..].iter().find_map(|s| {
        let ei = e(s);
        let coef = [2 * (ei[0] - e0[0]), 2 * (ei[1] - e0[1]), 2 * (ei[2] - e0[2])];
        let rhs = s.coord(3) - shifts[0].coord(3) + sq(ei) - sq(e0);
        coef.iter().any(|&c| c != 0).then_some((coef, rhs))
    });
    let Some((coef, rhs)) = constraint else {
        // Every shift shares e_0: distinct shifts then have disjoint translates.
        if shifts.len() > 1 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for u0 in lo[0]..=hi[0] {
            for u1 in lo[1]..=hi[1] {
                for u2 in lo[2]..=hi[2] {
                    out.push(lift([u0, u1, u2]));
                }
            }
        }
        return out;
    };
    let j = (0..3).find(|&j| coef[j] != 0).unwrap();
    let (o1, o2) = match j {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut out = Vec::new();
    for x in lo[o1]..=hi[o1] {
        for y in lo[o2]..=hi[o2] {
            let r = rhs - coef[o1] * x - coef[o2] * y;
            if r % coef[j] != 0 {
                continue;
            }
            let z = r / coef[j];
            if z < lo[j] || z > hi[j] {
                continue;
            }
            let mut u = [0; 3];
            u[j] = z;
            u[o1] = x;
            u[o2] = y;
            out.push(lift(u));
        }
    }
    out
}

/// A hyperplane or the translate `center + S_{d,m}` of a sphere.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variety {
    Plane(Hyperplane),
    SphereTranslate { center: LatticePoint, m: i64 },
}

impl Variety {
    pub fn dim(&self) -> usize {
        match self {
            Variety::Plane(h) => h.dim(),
            Variety::SphereTranslate { center, .. } => center.dim(),
        }
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        match self {
            Variety::Plane(h) => h.contains(p),
            Variety::SphereTranslate { center, m } => {
                p.dim() == center.dim() && (*p - *center).norm_sq() == *m as i128
            }
        }
    }
}

impl fmt::Debug for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variety::Plane(h) => write!(f, "{h}"),
            Variety::SphereTranslate { center, m } => {
                write!(f, "sphere-translate {} {m}", center.dim())?;
                for c in center.coords() {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Variety {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let mut words = line.split_whitespace();
        let kind = words.next().ok_or("empty line")?;
        let nums: Vec<i64> = words
            .map(|w| w.parse::<i64>().map_err(|e| format!("bad integer {w:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match kind {
            "plane" => {
                if !(4..=5).contains(&nums.len()) {
                    return Err(format!("plane needs d + 1 integers, got {}", nums.len()));
                }
                let (a, b) = nums.split_at(nums.len() - 1);
                Hyperplane::new(a, b[0]).map(Variety::Plane).map_err(|e| e.to_string())
            }
            "sphere-translate" => {
                let (&d, rest) = nums.split_first().ok_or("missing dimension")?;
                let (&m, center) = rest.split_first().ok_or("missing radius")?;
                if center.len() as i64 != d {
                    return Err(format!("expected {d} center coordinates, got {}", center.len()));
                }
                if m <= 0 {
                    return Err(format!("radius parameter must be positive, got {m}"));
                }
                let center = LatticePoint::new(center).map_err(|e| e.to_string())?;
                Ok(Variety::SphereTranslate { center, m })
            }
            other => Err(format!("unknown variety kind {other:?}")),
        }
    }
}

/// Parses a variety list, one per line; blank lines and `#` comments are
/// skipped.
pub fn parse_varieties(text: &str) -> Result<Vec<Variety>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse().map_err(|message| Error::Parse {
                line: i + 1,
                message,
            })
        })
        .collect()
}

pub fn format_varieties(vs: &[Variety]) -> String {
    vs.iter().map(|v| format!("{v}\n")).collect()
}

/// Positive integer weights on points.
pub trait PointWeights: Sync {
    fn weight(&self, p: &LatticePoint) -> Option<u64>;
}

impl PointWeights for RepFn {
    fn weight(&self, p: &LatticePoint) -> Option<u64> {
        Some(self.get(p)).filter(|&w| w > 0)
    }
}

impl PointWeights for BTreeMap<LatticePoint, u64> {
    fn weight(&self, p: &LatticePoint) -> Option<u64> {
        self.get(p).copied().filter(|&w| w > 0)
    }
}

impl PointWeights for HashMap<LatticePoint, u64> {
    fn weight(&self, p: &LatticePoint) -> Option<u64> {
        self.get(p).copied().filter(|&w| w > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceReport {
    /// `sum_{p, v} w(p) w'(v) [p in v]`.
    pub total: u128,
    /// Number of incident pairs, ignoring weights.
    pub pairs: u64,
    pub max_point_degree: u64,
    pub max_variety_degree: u64,
}

/// Exact weighted incidence count between `P` and `V`. Missing weights mean
/// weight 1 throughout; supplied weights must be positive on every element.
pub fn incidences(
    points: &PointSet,
    varieties: &[Variety],
    w: Option<&dyn PointWeights>,
    wv: Option<&[u64]>,
) -> Result<IncidenceReport> {
    for v in varieties {
        if v.dim() != points.dim() {
            return Err(Error::DimensionMismatch {
                expected: points.dim(),
                found: v.dim(),
            });
        }
    }
    let point_w: Vec<u64> = match w {
        None => vec![1; points.len()],
        Some(w) => points
            .iter()
            .map(|p| w.weight(p).ok_or_else(|| Error::MissingWeight(p.to_string())))
            .collect::<Result<_>>()?,
    };
    let var_w: Vec<u64> = match wv {
        None => vec![1; varieties.len()],
        Some(ws) => {
            if let Some(i) = (0..varieties.len()).find(|&i| ws.get(i).is_none_or(|&x| x == 0)) {
                return Err(Error::MissingWeight(format!("variety #{i} ({})", varieties[i])));
            }
            ws[..varieties.len()].to_vec()
        }
    };

    let rows: Vec<(u128, Vec<usize>)> = points
        .points()
        .par_iter()
        .zip(point_w.par_iter())
        .map(|(p, &wp)| {
            let hits: Vec<usize> = (0..varieties.len()).filter(|&j| varieties[j].contains(p)).collect();
            let total = hits.iter().map(|&j| wp as u128 * var_w[j] as u128).sum();
            (total, hits)
        })
        .collect();

    let mut report = IncidenceReport {
        total: 0,
        pairs: 0,
        max_point_degree: 0,
        max_variety_degree: 0,
    };
    let mut var_degree = vec![0u64; varieties.len()];
    for (total, hits) in rows {
        report.total += total;
        report.pairs += hits.len() as u64;
        report.max_point_degree = report.max_point_degree.max(hits.len() as u64);
        for j in hits {
            var_degree[j] += 1;
        }
    }
    report.max_variety_degree = var_degree.into_iter().max().unwrap_or(0);
    Ok(report)
}

/// How the `s`-subsets were chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KstMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KstConfig {
    /// Largest number of `s`-subsets enumerated exhaustively.
    pub max_subsets: u64,
    /// Random subsets to test above the budget; `None` makes that an error.
    pub samples: Option<u64>,
    pub seed: u64,
}

impl Default for KstConfig {
    fn default() -> Self {
        Self {
            max_subsets: 2_000_000,
            samples: Some(1_000_000),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KstReport {
    pub s: usize,
    /// Largest number of varieties through all points of a tested subset.
    pub t_max: u64,
    /// A tested subset attaining `t_max` (first in enumeration order).
    pub witness_points: Vec<LatticePoint>,
    /// Indices of the varieties through every witness point.
    pub witness_varieties: Vec<usize>,
    pub mode: KstMode,
    pub subsets_tested: u64,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Certifies the observed `t` in a `K_{s,t}`-free statement: the largest
/// number of varieties containing `s` distinct points of `P` at once.
pub fn kst_witness(points: &PointSet, varieties: &[Variety], s: usize, cfg: &KstConfig) -> Result<KstReport> {
    if s == 0 {
        return Err(Error::InvalidArgument("subset size s must be at least 1".into()));
    }
    let n = points.len();
    let words = varieties.len().div_ceil(64).max(1);
    let bits: Vec<Vec<u64>> = points
        .points()
        .par_iter()
        .map(|p| {
            let mut row = vec![0u64; words];
            for (j, v) in varieties.iter().enumerate() {
                if v.contains(p) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    let common = |idx: &[usize]| -> u64 {
        (0..words)
            .map(|w| idx.iter().fold(u64::MAX, |acc, &i| acc & bits[i][w]).count_ones() as u64)
            .sum()
    };
    let finish = |best: Option<(u64, Vec<usize>)>, mode, tested| {
        let (t_max, idx) = best.unwrap_or((0, Vec::new()));
        let witness_varieties = if idx.is_empty() {
            Vec::new()
        } else {
            (0..varieties.len())
                .filter(|&j| idx.iter().all(|&i| bits[i][j / 64] >> (j % 64) & 1 == 1))
                .collect()
        };
        KstReport {
            s,
            t_max,
            witness_points: idx.iter().map(|&i| points.points()[i]).collect(),
            witness_varieties,
            mode,
            subsets_tested: tested,
        }
    };

    let total = binomial(n as u64, s as u64);
    if total <= cfg.max_subsets as u128 {
        if total == 0 {
            return Ok(finish(None, KstMode::Exhaustive, 0));
        }
        // Parallel over the first index; each task walks the remaining
        // (s-1)-subsets of later indices in lexicographic order.
        let best = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut best: Option<(u64, Vec<usize>)> = None;
                let mut idx: Vec<usize> = (0..s).map(|i| first + i).collect();
                if idx[s - 1] >= n {
                    return None;
                }
                loop {
                    let t = common(&idx);
                    if best.as_ref().is_none_or(|(b, _)| t > *b) {
                        best = Some((t, idx.clone()));
                    }
                    // next combination with idx[0] fixed
                    let mut pos = s - 1;
                    loop {
                        if pos == 0 {
                            return best;
                        }
                        if idx[pos] < n - (s - pos) {
                            idx[pos] += 1;
                            for q in pos + 1..s {
                                idx[q] = idx[q - 1] + 1;
                            }
                            break;
                        }
                        pos -= 1;
                    }
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<(u64, Vec<usize>)>, cand| match &acc {
                Some((b, _)) if *b >= cand.0 => acc,
                _ => Some(cand),
            });
        return Ok(finish(best, KstMode::Exhaustive, total as u64));
    }

    let Some(samples) = cfg.samples else {
        return Err(Error::SubsetBudget {
            subsets: total,
            budget: cfg.max_subsets as u128,
        });
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(u64, Vec<usize>)> = None;
    for _ in 0..samples {
        let mut idx = sample(&mut rng, n, s).into_vec();
        idx.sort_unstable();
        let t = common(&idx);
        if best.as_ref().is_none_or(|(b, _)| t > *b) {
            best = Some((t, idx));
        }
    }
    Ok(finish(
        best,
        KstMode::Sampled {
            samples,
            seed: cfg.seed,
        },
        samples,
    ))
}

/// The point `num / den` with `den > 0` and `gcd(num, den) = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPoint {
    dim: u8,
    num: [i64; 4],
    den: i64,
}

impl RationalPoint {
    pub fn new(num: &[i64], den: i64) -> Result<Self> {
        if !(3..=4).contains(&num.len()) {
            return Err(Error::Dimension(num.len()));
        }
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let mut g = gcd(gcd_all(num), den);
        if den < 0 {
            g = -g;
        }
        let mut n = [0i64; 4];
        for (slot, &c) in n.iter_mut().zip(num) {
            *slot = c / g;
        }
        Ok(Self {
            dim: num.len() as u8,
            num: n,
            den: den / g,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn numerator(&self) -> &[i64] {
        &self.num[..self.dim()]
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    /// `num / den` lies on `a.x = b` iff `a.num = b den`.
    pub fn lies_on(&self, h: &Hyperplane) -> bool {
        if h.dim() != self.dim() {
            return false;
        }
        let lhs: i128 = h
            .normal()
            .iter()
            .zip(self.numerator())
            .map(|(&a, &x)| a as i128 * x as i128)
            .sum();
        lhs == h.offset() as i128 * self.den as i128
    }

    /// `u -> {x : u.x = 1}`, cleared to `num.x = den`.
    pub fn dual(&self) -> Result<Hyperplane> {
        if self.numerator().iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        Hyperplane::new(self.numerator(), self.den)
    }
}

impl fmt::Debug for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.numerator().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if self.den == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}/{}", self.den)?;
            }
        }
        write!(f, ")")
    }
}

/// The dual plane `G_a = {x : a.x = 1}` of a nonzero lattice point.
pub fn dual_point(a: &LatticePoint) -> Result<Hyperplane> {
    if a.is_zero() {
        return Err(Error::ZeroVector);
    }
    Hyperplane::new(a.coords(), 1)
}

/// The dual point `a / b` of the plane `a.x = b`, `b != 0`.
pub fn dual_plane(h: &Hyperplane) -> Result<RationalPoint> {
    if h.passes_through_origin() {
        return Err(Error::PlaneThroughOrigin);
    }
    RationalPoint::new(h.normal(), h.offset())
}

/// Applies [`dual_point`] and [`dual_plane`] elementwise. For every pair,
/// `a in H` iff `dual(H) in G_a`.
pub fn dualize(points: &[LatticePoint], planes: &[Hyperplane]) -> Result<(Vec<Hyperplane>, Vec<RationalPoint>)> {
    let dual_points = points.iter().map(dual_point).collect::<Result<_>>()?;
    let dual_planes = planes.iter().map(dual_plane).collect::<Result<_>>()?;
    Ok((dual_points, dual_planes))
}

/// The set `{H_n : n in N, n != 0}` as varieties, in the order of `N`.
pub fn bisector_varieties<'a, I: IntoIterator<Item = &'a LatticePoint>>(ns: I) -> Result<Vec<Variety>> {
    ns.into_iter()
        .filter(|n| !n.is_zero())
        .map(|n| bisector_hyperplane(n).map(Variety::Plane))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::rep_fn;
    use crate::lattice::enumerate_paraboloid;

    fn p3(c: [i64; 3]) -> LatticePoint {
        LatticePoint::new3(c)
    }

    fn p4(c: [i64; 4]) -> LatticePoint {
        LatticePoint::new4(c)
    }

    #[test]
    fn hyperplanes_are_canonical() {
        let h = Hyperplane::new(&[-4, 0, 0], -4).unwrap();
        assert_eq!((h.normal(), h.offset()), (&[1, 0, 0][..], 1));
        let h = Hyperplane::new(&[0, -2, 6], 4).unwrap();
        assert_eq!((h.normal(), h.offset()), (&[0, 1, -3][..], -2));
        assert_eq!(Hyperplane::new(&[0, 0, 0], 1), Err(Error::ZeroNormal));
        assert_eq!(Hyperplane::new(&[2, 4, 6], 0).unwrap().normal(), &[1, 2, 3]);
    }

    #[test]
    fn bisector_examples() {
        let h = bisector_hyperplane(&p3([2, 0, 0])).unwrap();
        assert_eq!(h, Hyperplane::new(&[1, 0, 0], 1).unwrap());
        let h = bisector_hyperplane(&p3([1, 1, 0])).unwrap();
        assert_eq!(h, Hyperplane::new(&[1, 1, 0], 1).unwrap());
        assert_eq!(bisector_hyperplane(&p3([0, 0, 0])), Err(Error::ZeroVector));
        // n/2 lies on H_n whenever it is a lattice point
        let n = p4([4, -2, 6, 0]);
        assert!(bisector_hyperplane(&n).unwrap().contains(&p4([2, -1, 3, 0])));
    }

    #[test]
    fn slice_examples() {
        let a = enumerate_sphere(3, 1).unwrap();
        let c = slice(&a, &p3([1, 1, 0]));
        assert_eq!(c.points(), &[p3([0, 1, 0]), p3([1, 0, 0])]);
        assert_eq!(slice(&a, &p3([0, 0, 0])).points(), a.points());
        assert!(slice(&a, &p3([3, 0, 0])).is_empty());

        let half = a.filter(|p| p.coords().iter().sum::<i64>() > 0);
        assert_eq!(slice(&half, &p3([0, 0, 0])).len(), 0);
    }

    #[test]
    fn paraboloid_translates_contain_a_line() {
        let shifts = [p4([0, 0, 0, 0]), p4([1, 0, 0, 3]), p4([0, 1, 0, 3])];
        for m in [2, 3, 5] {
            let implicit = intersect_translates(&Surface::Paraboloid { m }, &shifts).unwrap();
            let explicit_set = enumerate_paraboloid(m).unwrap();
            let explicit = intersect_translates(&Surface::Points(&explicit_set), &shifts).unwrap();
            assert_eq!(implicit, explicit);
            assert_eq!(implicit.len() as i64, 2 * m + 1);
            for n in -m..=m {
                assert!(implicit.contains(&p4([2, 2, n, 8 + n * n])));
            }
        }
        // (2, 2, n) leaves the box when m = 1
        assert!(intersect_translates(&Surface::Paraboloid { m: 1 }, &shifts).unwrap().is_empty());
    }

    #[test]
    fn single_translate_is_the_surface() {
        let s = enumerate_sphere(4, 9).unwrap();
        let zero = p4([0, 0, 0, 0]);
        let got = intersect_translates(&Surface::Sphere { d: 4, m: 9 }, &[zero]).unwrap();
        assert_eq!(got.points(), s.points());
        let p = enumerate_paraboloid(2).unwrap();
        let got = intersect_translates(&Surface::Paraboloid { m: 2 }, &[zero]).unwrap();
        assert_eq!(got.points(), p.points());
        let dup = intersect_translates(&Surface::Sphere { d: 4, m: 9 }, &[zero, zero]);
        assert!(matches!(dup, Err(Error::DuplicateShift(_))));
    }

    #[test]
    fn implicit_paraboloid_matches_explicit_on_random_shifts() {
        let m = 3;
        let p = enumerate_paraboloid(m).unwrap();
        let mut state = 7u64;
        let mut next = |r: i64| {
            state = crate::arith::mix64(state);
            (state % (2 * r as u64 + 1)) as i64 - r
        };
        for _ in 0..200 {
            let mut shifts = vec![p4([0, 0, 0, 0])];
            for _ in 0..2 {
                let s = p4([next(2), next(2), next(2), next(6)]);
                if !shifts.contains(&s) {
                    shifts.push(s);
                }
            }
            let a = intersect_translates(&Surface::Paraboloid { m }, &shifts).unwrap();
            let b = intersect_translates(&Surface::Points(&p), &shifts).unwrap();
            assert_eq!(a, b, "{shifts:?}");
        }
    }

    #[test]
    fn incidence_examples() {
        let a = enumerate_sphere(3, 1).unwrap();
        let v = [Variety::Plane(Hyperplane::new(&[1, 0, 0], 1).unwrap())];
        let r = incidences(&a, &v, None, None).unwrap();
        assert_eq!((r.total, r.pairs), (1, 1));

        let ones: BTreeMap<LatticePoint, u64> = a.iter().map(|p| (*p, 1)).collect();
        let w = incidences(&a, &v, Some(&ones), Some(&[1])).unwrap();
        assert_eq!(w, r);

        let mut partial = ones.clone();
        partial.remove(&p3([0, 0, 1]));
        assert!(matches!(incidences(&a, &v, Some(&partial), None), Err(Error::MissingWeight(_))));
        assert!(matches!(incidences(&a, &v, None, Some(&[])), Err(Error::MissingWeight(_))));
    }

    #[test]
    fn bisector_incidences_recover_energy() {
        let a = enumerate_sphere(3, 1).unwrap();
        let r2 = rep_fn(&a, 2).unwrap();
        let ns: Vec<(LatticePoint, u64)> = r2.iter().filter(|(n, _)| !n.is_zero()).collect();
        let v = bisector_varieties(ns.iter().map(|(n, _)| n)).unwrap();
        let wv: Vec<u64> = ns.iter().map(|&(_, c)| c).collect();
        let r = incidences(&a, &v, None, Some(&wv)).unwrap();
        assert_eq!(r.total, 90 - 36);
    }

    #[test]
    fn kst_degenerate_cases() {
        let a = enumerate_sphere(3, 2).unwrap();
        let r = kst_witness(&a, &[], 2, &KstConfig::default()).unwrap();
        assert_eq!(r.t_max, 0);

        let v: Vec<Variety> = enumerate_sphere(3, 1)
            .unwrap()
            .iter()
            .map(|c| Variety::SphereTranslate { center: *c, m: 1 })
            .collect();
        let r = kst_witness(&a, &v, 1, &KstConfig::default()).unwrap();
        let inc = incidences(&a, &v, None, None).unwrap();
        assert_eq!(r.t_max, inc.max_point_degree);
        assert_eq!(r.mode, KstMode::Exhaustive);
        assert_eq!(r.witness_varieties.len() as u64, r.t_max);
    }

    #[test]
    fn kst_exhaustive_agrees_with_naive_pairs() {
        let a = enumerate_sphere(3, 6).unwrap();
        let v: Vec<Variety> = enumerate_sphere(3, 5)
            .unwrap()
            .iter()
            .map(|c| Variety::SphereTranslate { center: *c, m: 6 })
            .collect();
        let pts = a.points();
        let mut best = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let t = v.iter().filter(|x| x.contains(&pts[i]) && x.contains(&pts[j])).count();
                best = best.max(t as u64);
            }
        }
        let r = kst_witness(&a, &v, 2, &KstConfig::default()).unwrap();
        assert_eq!(r.t_max, best);
        for &j in &r.witness_varieties {
            assert!(r.witness_points.iter().all(|p| v[j].contains(p)));
        }
        let tight = KstConfig {
            max_subsets: 10,
            samples: None,
            seed: 0,
        };
        assert!(matches!(kst_witness(&a, &v, 2, &tight), Err(Error::SubsetBudget { .. })));
        let sampled = KstConfig {
            max_subsets: 10,
            samples: Some(500),
            seed: 3,
        };
        let r = kst_witness(&a, &v, 2, &sampled).unwrap();
        assert!(r.t_max <= best);
        assert_eq!(r.mode, KstMode::Sampled { samples: 500, seed: 3 });
    }

    #[test]
    fn duality_examples() {
        let h = Hyperplane::new(&[1, 0, 0, 0], 1).unwrap();
        let u = dual_plane(&h).unwrap();
        assert_eq!((u.numerator(), u.denominator()), (&[1, 0, 0, 0][..], 1));
        assert_eq!(u.dual().unwrap(), h);

        let h = Hyperplane::new(&[3, -6, 0], 4).unwrap();
        let u = dual_plane(&h).unwrap();
        assert_eq!(u.to_string(), "(3/4,-6/4,0/4)");
        assert_eq!(u.dual().unwrap(), h);

        let through = Hyperplane::new(&[1, 1, 0], 0).unwrap();
        assert_eq!(dual_plane(&through), Err(Error::PlaneThroughOrigin));
        assert_eq!(dual_point(&p3([0, 0, 0])), Err(Error::ZeroVector));

        let a = p4([2, 0, 0, 0]);
        let hn = bisector_hyperplane(&p4([4, 0, 0, 0])).unwrap();
        assert!(hn.contains(&a));
        let (g, u) = dualize(&[a], &[hn]).unwrap();
        assert!(u[0].lies_on(&g[0]));
    }

    #[test]
    fn variety_text_roundtrip() {
        let vs = vec![
            Variety::Plane(Hyperplane::new(&[1, -2, 0, 3], 5).unwrap()),
            Variety::SphereTranslate {
                center: p3([1, 2, -3]),
                m: 14,
            },
        ];
        let text = format_varieties(&vs);
        assert_eq!(text, "plane 1 -2 0 3 5\nsphere-translate 3 14 1 2 -3\n");
        assert_eq!(parse_varieties(&text).unwrap(), vs);
        assert!(matches!(
            parse_varieties("plane 1 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_varieties("# c\nsphere-translate 3 5 1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_varieties("cone 1 2 3 4").is_err());
    }
}
