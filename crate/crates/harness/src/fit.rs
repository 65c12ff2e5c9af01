//! Least-squares exponent fits and the exponents they are compared against.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// The Bourgain–Demeter exponent `2 + 1/3` for `E_{2,2}`, sharp on the paraboloid.
pub const THRESHOLD_EXPONENT: f64 = 2.0 + 1.0 / 3.0;

/// Exponent of `|A|` in the bound for `E_{s,2}(A)`, `A ⊆ S_{4,m}`:
/// `2s - 2 + 1/6 + (1 - c) 6^{1-s}` with `c = 1/232`.
pub fn sphere4_energy_exponent(s: u32) -> f64 {
    let c = 1.0 / 232.0;
    2.0 * s as f64 - 2.0 + 1.0 / 6.0 + (1.0 - c) * 6f64.powi(1 - s as i32)
}

/// Exponent for `E_{s,2}(A)`, `A ⊆ S_{3,m}`: `2s - 3 + 1/2 + eta_s` with
/// `eta_s = 3^{2-s} / 2`.
pub fn sphere3_energy_exponent(s: u32) -> f64 {
    2.0 * s as f64 - 3.0 + 0.5 + 0.5 * 3f64.powi(2 - s as i32)
}

/// Exponent for `sup_n r_s(A, n)`, `A ⊆ S_{3,m}`, `s >= 4`.
pub fn sphere3_sup_exponent(s: u32) -> f64 {
    let lambda = if s % 2 == 0 {
        0.5 * 3f64.powf(2.0 - s as f64 / 2.0)
    } else {
        0.1 * 3f64.powf(3.0 - (s as f64 - 1.0) / 2.0)
    };
    s as f64 - 3.0 + 0.5 + lambda
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
    /// The exponent the slope is compared against, if any.
    pub bound: Option<f64>,
}

impl ExponentFit {
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = slope x + intercept`. Needs at least three
/// points and two distinct `x` values.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(HarnessError::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(HarnessError::DegenerateFit("non-finite coordinate".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(HarnessError::DegenerateFit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ExponentFit {
        slope,
        intercept,
        r2: r2.clamp(0.0, 1.0),
        points: points.to_vec(),
        bound: None,
    })
}

/// Fits `ln y` against `ln x`; pairs with a nonpositive coordinate are dropped.
pub fn fit_log_log(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    let logs: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    fit_exponent(&logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_exponent(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(1.0, f64::NAN), (2.0, 3.0), (3.0, 1.0)]).is_err());
        // repeated x values are fine as long as they are not all equal
        let f = fit_exponent(&[(1.0, 1.0), (1.0, 3.0), (2.0, 4.0), (3.0, 6.0)]).unwrap();
        assert!(f.slope > 0.0 && (0.0..=1.0).contains(&f.r2));
    }

    #[test]
    fn power_law_in_log_space() {
        let pairs: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 3.0 * (i as f64).powf(2.5))).collect();
        let f = fit_log_log(&pairs).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-9);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn reference_exponents() {
        assert!((sphere4_energy_exponent(2) - (THRESHOLD_EXPONENT - 1.0 / 1392.0)).abs() < 1e-12);
        assert!((sphere3_energy_exponent(2) - 2.0).abs() < 1e-12);
        assert!((sphere3_energy_exponent(3) - (3.5 + 1.0 / 6.0)).abs() < 1e-12);
        // r_5 exponent 2 + 4/5
        assert!((sphere3_sup_exponent(5) - 2.8).abs() < 1e-12);
        assert!((sphere3_sup_exponent(4) - 2.0).abs() < 1e-12);
    }
}
