//! Scan orchestration, inequality reports, exponent fits and the `latenergy`
//! command line on top of `lattice-energy`.

pub mod cli;
pub mod config;
mod error;
pub mod fit;
pub mod inequalities;
pub mod report;
pub mod scan;

pub use config::{Caps, ScanConfig, ScanFamily};
pub use error::{HarnessError, Result};
pub use fit::{fit_exponent, fit_log_log, ExponentFit};
pub use inequalities::{check_inequalities, Comparison, InequalityReport, Tag};
pub use scan::{run_scan, ScanReport, ScanRow};
