use std::fmt;
use std::str::FromStr;

use lattice_energy::decompose::default_delta;
use lattice_energy::energy::Budget;
use lattice_energy::LatticePoint;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    Sphere3,
    Sphere4,
    Paraboloid4,
    /// Seeded random subsets of `S_{d,m}`.
    RandomSubset,
    /// Unions of the largest slices `C_n` of `S_{d,m}`.
    SliceUnion,
}

impl fmt::Display for ScanFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanFamily::Sphere3 => "sphere3",
            ScanFamily::Sphere4 => "sphere4",
            ScanFamily::Paraboloid4 => "paraboloid4",
            ScanFamily::RandomSubset => "random-subset",
            ScanFamily::SliceUnion => "slice-union",
        })
    }
}

impl FromStr for ScanFamily {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        <ScanFamily as clap::ValueEnum>::from_str(s, true).map_err(HarnessError::Config)
    }
}

/// Empirical caps asserted at desk scale in place of `m^eps` statements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// `max_{n != 0} r_2(S_{3,m}, n) <= m^trives_exponent`.
    pub trives_exponent: f64,
    /// Largest `m` the previous cap is asserted for.
    pub trives_m_max: i64,
    /// `E_{2,2}(Y) / (r |Y|^2)` for the peeled part `Y` of a decomposition.
    pub y_energy_ratio: f64,
    /// Size of the intersection of three translates of `S_{4,m}`.
    pub triple_intersection: u64,
    /// `t` in the `K_{2,t}` witness for sphere translates.
    pub kst_t: u64,
    /// Bounds for `E_{2,2}(P_{4,m}) / |P_{4,m}|^{7/3}`.
    pub paraboloid_ratio: (f64, f64),
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            trives_exponent: 0.49,
            trives_m_max: 2000,
            y_energy_ratio: 100.0,
            triple_intersection: 64,
            kst_t: 24,
            paraboloid_ratio: (1e-3, 1e3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub family: ScanFamily,
    /// Ambient dimension for `random-subset` and `slice-union`.
    pub d: usize,
    pub m_start: i64,
    pub m_end: i64,
    pub m_stride: i64,
    pub s_values: Vec<u32>,
    pub k_values: Vec<u32>,
    pub density: f64,
    pub seed: u64,
    /// Number of slices united by `slice-union`.
    pub slices: usize,
    pub delta: Ratio<u32>,
    /// Largest `|A|` that gets decomposed.
    pub decompose_limit: usize,
    pub budget: Budget,
    pub caps: Caps,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            family: ScanFamily::Sphere4,
            d: 4,
            m_start: 1,
            m_end: 21,
            m_stride: 2,
            s_values: vec![2],
            k_values: vec![2, 3],
            density: 1.0,
            seed: 0,
            slices: 4,
            delta: default_delta(),
            decompose_limit: 4000,
            budget: Budget {
                max_work: 4_000_000_000,
                ..Budget::default()
            },
            caps: Caps::default(),
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.m_start < 1 || self.m_end < self.m_start {
            return bad(format!("m range {}..={} is empty or nonpositive", self.m_start, self.m_end));
        }
        if self.m_stride < 1 {
            return bad(format!("m stride must be positive, got {}", self.m_stride));
        }
        if self.s_values.is_empty() || self.s_values.contains(&0) {
            return bad("s values must be a nonempty list of positive integers".into());
        }
        if self.k_values.is_empty() || self.k_values.iter().any(|&k| k < 2) {
            return bad("k values must be a nonempty list of integers >= 2".into());
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0, 1], got {}", self.density));
        }
        if !(3..=4).contains(&self.d) {
            return bad(format!("dimension must be 3 or 4, got {}", self.d));
        }
        let b = &self.budget;
        if b.max_support == 0 || b.max_tuples == 0 || b.max_grid == 0 || b.max_work == 0 {
            return bad("budgets must be positive".into());
        }
        if self.family == ScanFamily::SliceUnion && self.slices == 0 {
            return bad("slice-union needs at least one slice".into());
        }
        Ok(())
    }

    /// The ambient dimension of the scanned sets.
    pub fn dim(&self) -> usize {
        match self.family {
            ScanFamily::Sphere3 => 3,
            ScanFamily::Sphere4 | ScanFamily::Paraboloid4 => 4,
            ScanFamily::RandomSubset | ScanFamily::SliceUnion => self.d,
        }
    }

    pub fn m_values(&self) -> Vec<i64> {
        (self.m_start..=self.m_end).step_by(self.m_stride as usize).collect()
    }
}

/// Parses a rational `p/q` (or an integer) exactly.
pub fn parse_delta(s: &str) -> Result<Ratio<u32>> {
    let r: Ratio<u32> = s
        .trim()
        .parse()
        .map_err(|e| HarnessError::Config(format!("bad rational {s:?}: {e}")))?;
    Ok(r)
}

/// Parses `"(0,0,0,0);(1,0,0,3)"`.
pub fn parse_shifts(s: &str) -> Result<Vec<LatticePoint>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<LatticePoint>().map_err(|e| HarnessError::Config(format!("bad shift {t:?}: {e}"))))
        .collect()
}

/// Parses `"2,3"`.
pub fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| HarnessError::Config(format!("bad integer {t:?}: {e}")))
        })
        .collect()
}
