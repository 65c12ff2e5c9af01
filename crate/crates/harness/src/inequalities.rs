//! Both sides of the inequalities the scan tracks, computed from exact
//! energies, sumsets and representation counts. Only the unconditional
//! halves (Cauchy–Schwarz, the diagonal bound, the empirical `r_2` cap) are
//! asserted; everything else is a recorded ratio.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use lattice_energy::energy::{rep_summary, sumset_with, Budget, RepSummary};
use lattice_energy::{Error, Family, PointSet};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    /// `E_{2,2}` against `|A|^{7/3}` and `E_{2,3}` against `|A|^{8/3} + |A| sup r_2^2`.
    Floma,
    /// `|2A - A|` against `|A|^6 / E_{3,2}` and `|A|^{2 - 5/24}`.
    Sio2,
    /// `E_{s,2}` against `|A|^{(4s-3)/3} E_{s-1,2}^{1/3} + |A|^{2s-3}`.
    Iter3d,
    /// `E_{s,2}` against `|A|^{(12s-7)/8} E_{s-1,2}^{1/4} + |A|^{2s-2}`.
    Zee11,
    /// Dyadic level sets: `|P_t| t` against `|P_t|^{6/7} |A|^{4/7} + |P_t| + |A|`.
    Kz2,
    /// `max_{n != 0} r_2(n)` against `m^{0.49}` on three-dimensional spheres.
    Trives,
    /// `E_{s,2}` against `|A|^{2s-2}` (`d = 4`) or `|A|^{2s-3}` (`d = 3`),
    /// with the diagonal and Cauchy–Schwarz lower bounds asserted.
    Lowerbd,
}

impl Tag {
    pub const ALL: [Tag; 7] = [
        Tag::Floma,
        Tag::Sio2,
        Tag::Iter3d,
        Tag::Zee11,
        Tag::Kz2,
        Tag::Trives,
        Tag::Lowerbd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Floma => "floma",
            Tag::Sio2 => "sio2",
            Tag::Iter3d => "iter3d",
            Tag::Zee11 => "zee11",
            Tag::Kz2 => "kz2",
            Tag::Trives => "trives",
            Tag::Lowerbd => "lowerbd",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| HarnessError::UnknownTag(s.to_string()))
    }
}

pub fn parse_tags(s: &str) -> Result<Vec<Tag>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

/// One inequality `left <= right` (or `>=` for lower bounds), with its ratio
/// `left / right`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tag: Tag,
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
    /// `Some` only for asserted comparisons; decided in exact arithmetic
    /// where both sides are integers.
    pub holds: Option<bool>,
}

impl Comparison {
    fn recorded(tag: Tag, name: impl Into<String>, left: f64, right: f64) -> Self {
        Self {
            tag,
            name: name.into(),
            left,
            right,
            ratio: left / right,
            holds: None,
        }
    }

    fn asserted(tag: Tag, name: impl Into<String>, left: f64, right: f64, holds: bool) -> Self {
        Self {
            holds: Some(holds),
            ..Self::recorded(tag, name, left, right)
        }
    }

    pub fn failed(&self) -> bool {
        self.holds == Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub tag: Tag,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub comparisons: Vec<Comparison>,
    pub skipped: Vec<Skip>,
}

impl InequalityReport {
    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| c.failed())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn find(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    /// Fold counts used by `iter3d`, `zee11` and `lowerbd`.
    pub s_values: Vec<u32>,
    pub budget: Budget,
    pub caps: Caps,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            s_values: vec![2, 3],
            budget: Budget::default(),
            caps: Caps::default(),
        }
    }
}

/// Budget failures skip a comparison; everything else is an error.
pub(crate) fn is_budget(e: &Error) -> bool {
    matches!(
        e,
        Error::SupportBudget { .. }
            | Error::TupleBudget { .. }
            | Error::WorkBudget { .. }
            | Error::GridBudget { .. }
            | Error::CountOverflow { .. }
    )
}

pub(crate) fn big_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

fn pow_f(n: usize, e: f64) -> f64 {
    (n as f64).powf(e)
}

/// Exact `E_{s,2} |sA| >= |A|^{2s}`.
pub fn cauchy_schwarz_energy(size: usize, support: u64, e: &BigUint, s: u32) -> bool {
    e * BigUint::from(support) >= BigUint::from(size).pow(2 * s)
}

/// Exact `|2A - A| E_{3,2} >= |A|^6`.
pub fn cauchy_schwarz_difference(size: usize, two_minus_one: u64, e32: &BigUint) -> bool {
    e32 * BigUint::from(two_minus_one) >= BigUint::from(size).pow(6)
}

/// `max_j |P_{2^j}| 2^j / (|P|^{6/7} |A|^{4/7} + |P| + |A|)` with its level.
pub fn kz2_ratios(summary: &RepSummary) -> Vec<(u32, u64, f64)> {
    let n = summary.size as f64;
    summary
        .levels
        .levels
        .iter()
        .map(|&(j, count)| {
            let p = count as f64;
            let left = p * 2f64.powi(j as i32);
            let right = p.powf(6.0 / 7.0) * n.powf(4.0 / 7.0) + p + n;
            (j, count, left / right)
        })
        .collect()
}

/// Memoized exact quantities of one set, shared across tags and scan rows.
pub struct Quantities<'a> {
    a: &'a PointSet,
    budget: Budget,
    extra_ks: Vec<u32>,
    summaries: BTreeMap<u32, std::result::Result<RepSummary, Error>>,
    difference: Option<std::result::Result<u64, Error>>,
}

impl<'a> Quantities<'a> {
    /// `extra_ks` are power sums computed alongside `k = 2` (and `k = 3` for
    /// `s = 2`).
    pub fn new(a: &'a PointSet, budget: Budget, extra_ks: &[u32]) -> Self {
        Self {
            a,
            budget,
            extra_ks: extra_ks.to_vec(),
            summaries: BTreeMap::new(),
            difference: None,
        }
    }

    pub fn set(&self) -> &'a PointSet {
        self.a
    }

    /// The summary of `r_s`, or the budget failure as text.
    pub fn summary(&mut self, s: u32) -> Result<std::result::Result<&RepSummary, String>> {
        if !self.summaries.contains_key(&s) {
            let mut ks = vec![2];
            if s == 2 {
                ks.push(3);
            }
            ks.extend(&self.extra_ks);
            ks.sort_unstable();
            ks.dedup();
            let r = rep_summary(self.a, s, &ks, &self.budget);
            if let Err(e) = &r {
                if !is_budget(e) {
                    return Err(e.clone().into());
                }
            }
            self.summaries.insert(s, r);
        }
        Ok(match &self.summaries[&s] {
            Ok(v) => Ok(v),
            Err(e) => Err(format!("r_{s}: {e}")),
        })
    }

    pub fn energy(&mut self, s: u32) -> Result<std::result::Result<BigUint, String>> {
        if s == 1 {
            return Ok(Ok(BigUint::from(self.a.len())));
        }
        Ok(self
            .summary(s)?
            .map(|r| r.power_sum(2).expect("k = 2 is always requested").clone()))
    }

    /// `|2A - A|`.
    pub fn difference(&mut self) -> Result<std::result::Result<u64, String>> {
        if self.difference.is_none() {
            let r = sumset_with(self.a, 2, 1, &self.budget).map(|d| d.len() as u64);
            if let Err(e) = &r {
                if !is_budget(e) {
                    return Err(e.clone().into());
                }
            }
            self.difference = Some(r);
        }
        Ok(match self.difference.as_ref().unwrap() {
            Ok(v) => Ok(*v),
            Err(e) => Err(format!("2A-A: {e}")),
        })
    }
}

/// Evaluates each tag on `A`. Unknown tags are rejected at parse time; a
/// comparison whose inputs exceed the budget is listed under `skipped`.
pub fn check_inequalities(a: &PointSet, tags: &[Tag], opts: &CheckOptions) -> Result<InequalityReport> {
    let mut q = Quantities::new(a, opts.budget, &[]);
    check_with(&mut q, tags, opts)
}

pub fn check_with(cache: &mut Quantities<'_>, tags: &[Tag], opts: &CheckOptions) -> Result<InequalityReport> {
    let a = cache.set();
    let mut report = InequalityReport::default();
    if a.is_empty() {
        return Err(Error::EmptySet.into());
    }
    let n = a.len();
    let nf = n as f64;
    let skip = |report: &mut InequalityReport, tag: Tag, reason: String| {
        report.skipped.push(Skip { tag, reason });
    };

    for &tag in tags {
        match tag {
            Tag::Floma => match cache.summary(2)? {
                Ok(r) => {
                    let e22 = big_f64(r.power_sum(2).unwrap());
                    let e23 = big_f64(r.power_sum(3).unwrap());
                    let sup = r.sup.as_ref().map_or(0, |s| s.1) as f64;
                    report
                        .comparisons
                        .push(Comparison::recorded(tag, "floma E22", e22, pow_f(n, 7.0 / 3.0)));
                    report.comparisons.push(Comparison::recorded(
                        tag,
                        "floma E23",
                        e23,
                        pow_f(n, 8.0 / 3.0) + nf * sup * sup,
                    ));
                }
                Err(reason) => skip(&mut report, tag, reason),
            },
            Tag::Sio2 => {
                let e32 = match cache.energy(3)? {
                    Ok(v) => v,
                    Err(reason) => {
                        skip(&mut report, tag, reason);
                        continue;
                    }
                };
                let diff = match cache.difference()? {
                    Ok(d) => d,
                    Err(reason) => {
                        skip(&mut report, tag, reason);
                        continue;
                    }
                };
                let holds = cauchy_schwarz_difference(n, diff, &e32);
                report.comparisons.push(Comparison::asserted(
                    tag,
                    "sio2 cs",
                    pow_f(n, 6.0) / big_f64(&e32),
                    diff as f64,
                    holds,
                ));
                report
                    .comparisons
                    .push(Comparison::recorded(tag, "sio2 growth", diff as f64, pow_f(n, 2.0 - 5.0 / 24.0)));
            }
            Tag::Iter3d | Tag::Zee11 => {
                let min_s = if tag == Tag::Iter3d { 3 } else { 2 };
                for &s in &opts.s_values {
                    if s < min_s {
                        continue;
                    }
                    let (es, es1) = match (cache.energy(s)?, cache.energy(s - 1)?) {
                        (Ok(x), Ok(y)) => (big_f64(&x), big_f64(&y)),
                        (Err(r), _) | (_, Err(r)) => {
                            skip(&mut report, tag, r);
                            continue;
                        }
                    };
                    let sf = s as f64;
                    let right = if tag == Tag::Iter3d {
                        pow_f(n, (4.0 * sf - 3.0) / 3.0) * es1.cbrt() + pow_f(n, 2.0 * sf - 3.0)
                    } else {
                        pow_f(n, (12.0 * sf - 7.0) / 8.0) * es1.powf(0.25) + pow_f(n, 2.0 * sf - 2.0)
                    };
                    report
                        .comparisons
                        .push(Comparison::recorded(tag, format!("{tag} s={s}"), es, right));
                }
                if !opts.s_values.iter().any(|&s| s >= min_s) {
                    skip(&mut report, tag, format!("needs some s >= {min_s}"));
                }
            }
            Tag::Kz2 => match cache.summary(2)? {
                Ok(r) => {
                    let p_total = nf;
                    for (j, count, ratio) in kz2_ratios(r) {
                        let p = count as f64;
                        let right = p.powf(6.0 / 7.0) * p_total.powf(4.0 / 7.0) + p + p_total;
                        let mut c = Comparison::recorded(tag, format!("kz2 tau=2^{j}"), p * 2f64.powi(j as i32), right);
                        c.ratio = ratio;
                        report.comparisons.push(c);
                    }
                }
                Err(reason) => skip(&mut report, tag, reason),
            },
            Tag::Trives => {
                let m = match (a.family(), a.m(), a.dim()) {
                    (Family::Sphere, Some(m), 3) => m,
                    _ => {
                        skip(&mut report, tag, "needs a subset of a three-dimensional sphere".into());
                        continue;
                    }
                };
                match cache.summary(2)? {
                    Ok(r) => {
                        let top = r.sup_nonzero.as_ref().map_or(0, |s| s.1);
                        let cap = (m as f64).powf(opts.caps.trives_exponent);
                        let name = "trives cap";
                        if m <= opts.caps.trives_m_max {
                            report
                                .comparisons
                                .push(Comparison::asserted(tag, name, top as f64, cap, top as f64 <= cap));
                        } else {
                            report.comparisons.push(Comparison::recorded(tag, name, top as f64, cap));
                        }
                    }
                    Err(reason) => skip(&mut report, tag, reason),
                }
            }
            Tag::Lowerbd => {
                let drop = if a.dim() == 4 { 2.0 } else { 3.0 };
                for &s in &opts.s_values {
                    let r = match cache.summary(s)? {
                        Ok(r) => r.clone(),
                        Err(reason) => {
                            skip(&mut report, tag, reason);
                            continue;
                        }
                    };
                    let e = r.power_sum(2).unwrap();
                    let ef = big_f64(e);
                    let diag = *e >= BigUint::from(n).pow(s);
                    report
                        .comparisons
                        .push(Comparison::asserted(tag, format!("diagonal s={s}"), pow_f(n, s as f64), ef, diag));
                    let cs = cauchy_schwarz_energy(n, r.support, e, s);
                    report.comparisons.push(Comparison::asserted(
                        tag,
                        format!("cs s={s}"),
                        pow_f(n, 2.0 * s as f64) / r.support as f64,
                        ef,
                        cs,
                    ));
                    report.comparisons.push(Comparison::recorded(
                        tag,
                        format!("lowerbd s={s}"),
                        pow_f(n, 2.0 * s as f64 - drop),
                        ef,
                    ));
                }
            }
        }
    }
    Ok(report)
}
