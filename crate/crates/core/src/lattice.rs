//! Lattice points, canonical point sets, and the sphere/paraboloid families.
//!
//! A [`PointSet`] is always duplicate-free and sorted lexicographically, and it
//! remembers where it came from: points of the sphere `x_1^2 + ... + x_d^2 = m`
//! (or any subset of it), points of the truncated paraboloid
//! `(n_1, n_2, n_3, n_1^2 + n_2^2 + n_3^2)` with `|n_i| <= m`, or anything else
//! (`Derived`). Subsets keep the provenance of their parent.

use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, isqrt};
use crate::error::{Error, Result};

pub(crate) fn check_dim(d: usize) -> Result<()> {
    match d {
        3 | 4 => Ok(()),
        _ => Err(Error::Dimension(d)),
    }
}

/// An integer vector in dimension 3 or 4.
///
/// Coordinates past `dim` are kept at zero so the derived ordering is the
/// lexicographic order on the visible coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<i64>", try_from = "Vec<i64>")]
pub struct LatticePoint {
    dim: u8,
    coords: [i64; 4],
}

impl LatticePoint {
    pub fn new(coords: &[i64]) -> Result<Self> {
        check_dim(coords.len())?;
        let mut c = [0; 4];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    pub fn new3(c: [i64; 3]) -> Self {
        Self {
            dim: 3,
            coords: [c[0], c[1], c[2], 0],
        }
    }

    pub fn new4(c: [i64; 4]) -> Self {
        Self { dim: 4, coords: c }
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim: dim as u8,
            coords: [0; 4],
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> i64 {
        self.coords()[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn norm_sq(&self) -> i128 {
        self.coords().iter().map(|&c| c as i128 * c as i128).sum()
    }

    pub fn dot(&self, other: &Self) -> i128 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum()
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = *self;
        for c in out.coords.iter_mut() {
            *c *= k;
        }
        out
    }

    pub fn max_abs(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = *self;
        for (i, &j) in perm.iter().enumerate() {
            out.coords[i] = self.coords[j];
        }
        out
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.coords.iter_mut().zip(rhs.coords) {
            *a += b;
        }
        self
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.coords.iter_mut().zip(rhs.coords) {
            *a -= b;
        }
        self
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> Self {
        self.scale(-1)
    }
}

impl From<LatticePoint> for Vec<i64> {
    fn from(p: LatticePoint) -> Self {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<i64>> for LatticePoint {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        LatticePoint::new(&v)
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Parses `(1,-2,0)`, `1,-2,0` or `1 -2 0`.
impl FromStr for LatticePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i64>().map_err(|e| Error::Parse {
                    line: 0,
                    message: format!("bad coordinate {t:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LatticePoint::new(&coords)
    }
}

/// Where the points of a [`PointSet`] live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Points of `S_{d,m}`: integer solutions of `x_1^2 + ... + x_d^2 = m`.
    Sphere,
    /// Points of the truncated paraboloid `P_{4,m}`.
    Paraboloid,
    Derived,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sphere => "sphere",
            Family::Paraboloid => "paraboloid",
            Family::Derived => "derived",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Family::Sphere),
            "paraboloid" => Ok(Family::Paraboloid),
            "derived" => Ok(Family::Derived),
            _ => Err(Error::InvalidArgument(format!("unknown family {s:?}"))),
        }
    }
}

/// A deduplicated, lexicographically ordered finite set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    family: Family,
    m: Option<i64>,
    points: Vec<LatticePoint>,
}

impl PointSet {
    /// Builds a set from arbitrary points, sorting and deduplicating them, and
    /// checks the family invariant.
    pub fn from_points<I>(dim: usize, family: Family, m: Option<i64>, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = LatticePoint>,
    {
        check_dim(dim)?;
        let mut points: Vec<_> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        points.sort_unstable();
        points.dedup();
        let set = Self {
            dim,
            family,
            m,
            points,
        };
        set.check_family()?;
        Ok(set)
    }

    /// A set with no provenance beyond its dimension.
    pub fn derived<I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = LatticePoint>,
    {
        Self::from_points(dim, Family::Derived, None, points)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::derived(dim, std::iter::empty())
    }

    /// Caller guarantees canonical order, no duplicates and the family invariant.
    pub(crate) fn from_sorted_unchecked(
        dim: usize,
        family: Family,
        m: Option<i64>,
        points: Vec<LatticePoint>,
    ) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Self {
            dim,
            family,
            m,
            points,
        }
    }

    fn check_family(&self) -> Result<()> {
        match (self.family, self.m) {
            (Family::Derived, _) => Ok(()),
            (_, None) => Err(Error::InvalidArgument(format!(
                "family {} needs a radius parameter",
                self.family
            ))),
            (Family::Sphere, Some(m)) => {
                match self.points.iter().find(|p| p.norm_sq() != m as i128) {
                    Some(p) => Err(Error::InvalidArgument(format!(
                        "{p} is not on the sphere of squared radius {m}"
                    ))),
                    None => Ok(()),
                }
            }
            (Family::Paraboloid, Some(m)) => {
                if self.dim != 4 {
                    return Err(Error::DimensionMismatch {
                        expected: 4,
                        found: self.dim,
                    });
                }
                let bad = self.points.iter().find(|p| {
                    let c = p.coords();
                    c[..3].iter().any(|x| x.abs() > m) || c[3] != c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
                });
                match bad {
                    Some(p) => Err(Error::InvalidArgument(format!(
                        "{p} is not on the truncated paraboloid with m = {m}"
                    ))),
                    None => Ok(()),
                }
            }
        }
    }

    /// Checks every structural invariant (ordering, uniqueness, dimension,
    /// family membership).
    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if let Some(p) = self.points.iter().find(|p| p.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        if let Some(w) = self.points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "points out of canonical order: {} then {}",
                w[0], w[1]
            )));
        }
        self.check_family()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn m(&self) -> Option<i64> {
        self.m
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn max_abs_coord(&self) -> i64 {
        self.points.iter().map(LatticePoint::max_abs).max().unwrap_or(0)
    }

    /// The points satisfying `keep`, with this set's provenance.
    pub fn filter<F: FnMut(&LatticePoint) -> bool>(&self, mut keep: F) -> PointSet {
        let points = self.points.iter().copied().filter(|p| keep(p)).collect();
        Self::from_sorted_unchecked(self.dim, self.family, self.m, points)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.filter(|p| !other.contains(p))
    }

    /// Image under `f`, as a derived set.
    pub fn map<F: FnMut(&LatticePoint) -> LatticePoint>(&self, f: F) -> PointSet {
        let points: Vec<_> = self.points.iter().map(f).collect();
        Self::derived(self.dim, points).expect("map preserves dimension")
    }

    /// `-A`. Spheres are symmetric, so sphere provenance is kept.
    pub fn negated(&self) -> PointSet {
        let mut out = self.map(|p| -*p);
        if self.family == Family::Sphere {
            out.family = Family::Sphere;
            out.m = self.m;
        }
        out
    }

    /// Seeded pseudo-random subset: a point is kept when a stable hash of
    /// `(seed, point)` falls below `density`. Subsets for a fixed seed are
    /// nested as `density` grows.
    pub fn random_subset(&self, density: f64, seed: u64) -> PointSet {
        if density >= 1.0 {
            return self.clone();
        }
        let cutoff = (density.max(0.0) * (u64::MAX as f64)) as u64;
        self.filter(|p| point_hash(p, seed) < cutoff)
    }

    /// Writes the text format: a header `d m family count` (with `-` for an
    /// absent `m`) and one point per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.m.map_or_else(|| "-".to_string(), |m| m.to_string());
        writeln!(w, "{} {} {} {}", self.dim, m, self.family, self.len())?;
        for p in &self.points {
            let line: Vec<String> = p.coords().iter().map(i64::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the text format. Duplicate or out-of-order lines, a wrong count,
    /// or points violating the declared family are rejected.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(perr(hline, format!("header needs 4 fields, got {:?}", header)));
        }
        let dim: usize = fields[0]
            .parse()
            .map_err(|e| perr(hline, format!("bad dimension: {e}")))?;
        check_dim(dim).map_err(|e| perr(hline, e.to_string()))?;
        let m = match fields[1] {
            "-" => None,
            s => Some(s.parse::<i64>().map_err(|e| perr(hline, format!("bad m: {e}")))?),
        };
        let family: Family = fields[2].parse().map_err(|e: Error| perr(hline, e.to_string()))?;
        let count: usize = fields[3]
            .parse()
            .map_err(|e| perr(hline, format!("bad count: {e}")))?;

        let mut points: Vec<LatticePoint> = Vec::with_capacity(count);
        for (ln, line) in lines {
            let coords = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|e| perr(ln, format!("bad coordinate {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != dim {
                return Err(perr(ln, format!("expected {dim} coordinates, got {}", coords.len())));
            }
            let p = LatticePoint::new(&coords)?;
            if let Some(prev) = points.last() {
                if *prev == p {
                    return Err(perr(ln, format!("duplicate point {p}")));
                }
                if *prev > p {
                    return Err(perr(ln, format!("point {p} out of canonical order")));
                }
            }
            points.push(p);
        }
        if points.len() != count {
            return Err(perr(hline, format!("header declares {count} points, found {}", points.len())));
        }
        let set = Self::from_sorted_unchecked(dim, family, m, points);
        set.check_family().map_err(|e| perr(hline, e.to_string()))?;
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a LatticePoint;
    type IntoIter = std::slice::Iter<'a, LatticePoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

pub(crate) fn point_hash(p: &LatticePoint, seed: u64) -> u64 {
    use crate::arith::mix64;
    p.coords()
        .iter()
        .fold(mix64(seed), |h, &c| mix64(h ^ (c as u64)))
}

/// All integer solutions of `x_1^2 + ... + x_d^2 = m`, in canonical order.
///
/// Nested loops over the first `d - 1` coordinates with an exact perfect-square
/// test on the residual. The outer coordinate is processed in parallel; chunks
/// are concatenated in order so the output is schedule independent. Practical up
/// to about `m = 10^6` for `d = 3` and `m = 10^4` for `d = 4`.
pub fn enumerate_sphere(d: usize, m: i64) -> Result<PointSet> {
    check_dim(d)?;
    if m <= 0 {
        return Err(Error::NonPositiveRadius(m));
    }
    let r = isqrt(m as u64) as i64;
    let chunks: Vec<Vec<LatticePoint>> = (-r..=r)
        .into_par_iter()
        .map(|x1| {
            let mut out = Vec::new();
            let mut prefix = [x1, 0, 0, 0];
            fill_sphere(&mut prefix, 1, d, m - x1 * x1, &mut out);
            out
        })
        .collect();
    let points = chunks.into_iter().flatten().collect();
    Ok(PointSet::from_sorted_unchecked(d, Family::Sphere, Some(m), points))
}

fn fill_sphere(prefix: &mut [i64; 4], idx: usize, d: usize, rem: i64, out: &mut Vec<LatticePoint>) {
    if idx == d - 1 {
        if let Some(z) = exact_sqrt(rem) {
            if z > 0 {
                prefix[idx] = -z;
                out.push(point_from_prefix(prefix, d));
            }
            prefix[idx] = z;
            out.push(point_from_prefix(prefix, d));
        }
        return;
    }
    let b = isqrt(rem as u64) as i64;
    for x in -b..=b {
        prefix[idx] = x;
        fill_sphere(prefix, idx + 1, d, rem - x * x, out);
    }
    prefix[idx] = 0;
}

fn point_from_prefix(prefix: &[i64; 4], d: usize) -> LatticePoint {
    LatticePoint::new(&prefix[..d]).expect("dimension checked by caller")
}

/// `P_{4,m} = {(n_1, n_2, n_3, n_1^2 + n_2^2 + n_3^2) : -m <= n_i <= m}`, which
/// has exactly `(2m + 1)^3` points.
pub fn enumerate_paraboloid(m: i64) -> Result<PointSet> {
    if m <= 0 {
        return Err(Error::NonPositiveRadius(m));
    }
    let side = (2 * m + 1) as usize;
    let mut points = Vec::with_capacity(side * side * side);
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                points.push(LatticePoint::new4([a, b, c, a * a + b * b + c * c]));
            }
        }
    }
    Ok(PointSet::from_sorted_unchecked(4, Family::Paraboloid, Some(m), points))
}

/// `true` iff `m` is a sum of three squares, i.e. not of the form `4^a (8b + 7)`.
pub fn legendre_admissible(m: u64) -> bool {
    if m == 0 {
        return true;
    }
    let mut m = m;
    while m % 4 == 0 {
        m /= 4;
    }
    m % 8 != 7
}

/// Sign class of one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Zero,
    Positive,
    Negative,
}

impl Sign {
    pub fn of(x: i64) -> Sign {
        match x.signum() {
            0 => Sign::Zero,
            1 => Sign::Positive,
            _ => Sign::Negative,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Zero => '0',
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// A coordinate sign pattern selecting one of the `3^d` cells
/// `E_{i_1} x ... x E_{i_d}` with `E = {0}`, `(0, inf)` or `(-inf, 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrthantPattern {
    entries: Vec<Sign>,
}

impl OrthantPattern {
    pub fn new(entries: Vec<Sign>) -> Result<Self> {
        check_dim(entries.len())?;
        Ok(Self { entries })
    }

    pub fn all_positive(d: usize) -> Result<Self> {
        Self::new(vec![Sign::Positive; d])
    }

    pub fn of_point(p: &LatticePoint) -> Self {
        Self {
            entries: p.coords().iter().map(|&c| Sign::of(c)).collect(),
        }
    }

    /// All `3^d` patterns, ordered with `Zero < Positive < Negative` per slot.
    pub fn all(d: usize) -> Result<Vec<Self>> {
        check_dim(d)?;
        const SIGNS: [Sign; 3] = [Sign::Zero, Sign::Positive, Sign::Negative];
        let total = 3usize.pow(d as u32);
        Ok((0..total)
            .map(|mut idx| {
                let mut entries = vec![Sign::Zero; d];
                for slot in entries.iter_mut().rev() {
                    *slot = SIGNS[idx % 3];
                    idx /= 3;
                }
                Self { entries }
            })
            .collect())
    }

    pub fn entries(&self) -> &[Sign] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn zero_count(&self) -> usize {
        self.entries.iter().filter(|&&s| s == Sign::Zero).count()
    }

    pub fn matches(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim() && p.coords().iter().zip(&self.entries).all(|(&c, &s)| Sign::of(c) == s)
    }
}

impl fmt::Display for OrthantPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.entries {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for OrthantPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Sign::Zero),
                '+' => Ok(Sign::Positive),
                '-' => Ok(Sign::Negative),
                _ => Err(Error::InvalidArgument(format!("bad sign symbol {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// `A ∩ E_p`: the points whose coordinate signs match `pattern` exactly.
pub fn restrict_to_orthant(a: &PointSet, pattern: &OrthantPattern) -> Result<PointSet> {
    if pattern.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: pattern.dim(),
        });
    }
    Ok(a.filter(|p| pattern.matches(p)))
}
