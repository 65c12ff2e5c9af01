//! The `latenergy` command line. Exit codes: 0 success, 1 a checked
//! assertion failed, 2 usage or runtime error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_energy::decompose::{verify_decomposition, xy_decompose, xy_decompose_delta};
use lattice_energy::energy::{dft_moment, energy_brute_with, energy_with, rep_fn_with, Budget};
use lattice_energy::geometry::{
    bisector_varieties, incidences, intersect_translates, kst_witness, parse_varieties, KstConfig, Surface,
};
use lattice_energy::lattice::{enumerate_paraboloid, enumerate_sphere, restrict_to_orthant};
use lattice_energy::{OrthantPattern, PointSet};
use num_bigint::BigUint;

use crate::config::{parse_delta, parse_list, parse_shifts, Caps, ScanConfig, ScanFamily};
use crate::error::{HarnessError, Result};
use crate::inequalities::{check_inequalities, parse_tags, CheckOptions};
use crate::report::{write_report, write_report_file, Format};
use crate::scan::run_scan;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "latenergy", version, about = "Exact additive energies of lattice points on spheres and paraboloids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a point set in the text format.
    Enumerate {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print E_{s,k}(A).
    Energy {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Count tuples directly instead of convolving.
        #[arg(long)]
        brute: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Peel high-multiplicity slices and verify the result.
    Decompose {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, conflicts_with = "delta")]
        threshold: Option<u64>,
        /// Exponent offset in ceil(N^{2/3 + delta}), as "p/q".
        #[arg(long)]
        delta: Option<String>,
        /// Restrict to the open positive orthant first.
        #[arg(long)]
        positive: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Intersect translates of a sphere, paraboloid or point set.
    Intersect {
        #[command(flatten)]
        set: SetArgs,
        /// Semicolon-separated shifts, e.g. "(0,0,0,0);(1,0,0,3)".
        #[arg(long)]
        shifts: String,
    },
    /// Count incidences between a point set and varieties.
    Incidences {
        #[command(flatten)]
        set: SetArgs,
        /// Variety file; defaults to the bisectors of the nonzero pair sums.
        #[arg(long)]
        varieties: Option<PathBuf>,
        /// Also search for the largest t with a K_{s,t} witness.
        #[arg(long)]
        kst: Option<usize>,
        #[arg(long, default_value_t = 0)]
        kst_seed: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a parameter scan and write report rows.
    Scan {
        #[arg(long, value_enum, default_value_t = ScanFamily::Sphere4)]
        family: ScanFamily,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long)]
        m_start: i64,
        #[arg(long)]
        m_end: i64,
        #[arg(long, default_value_t = 1)]
        m_stride: i64,
        /// Comma-separated fold counts.
        #[arg(long, default_value = "2")]
        s: String,
        /// Comma-separated moments.
        #[arg(long, default_value = "2,3")]
        k: String,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        slices: usize,
        #[arg(long, default_value = "1/1392")]
        delta: String,
        #[arg(long, default_value_t = 4000)]
        decompose_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Compare E_{s,2} with the Fourier-side moment.
    DftCheck {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Report both sides of the tracked inequalities.
    Check {
        #[command(flatten)]
        set: SetArgs,
        /// Comma-separated tags: floma, sio2, iter3d, zee11, kz2, trives, lowerbd.
        #[arg(long, default_value = "floma,sio2,iter3d,zee11,kz2,trives,lowerbd")]
        tags: String,
        #[arg(long, default_value = "2,3")]
        s: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        caps: CapArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SetFamily {
    /// S_{d,m}
    Sphere,
    Sphere3,
    Sphere4,
    /// P_{4,m}
    #[value(alias = "paraboloid")]
    Paraboloid4,
}

#[derive(Args, Debug)]
struct SetArgs {
    #[arg(long, value_enum, default_value_t = SetFamily::Sphere)]
    family: SetFamily,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, required_unless_present = "input")]
    m: Option<i64>,
    /// Read the point set from a file instead.
    #[arg(long, conflicts_with_all = ["m", "family"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SetArgs {
    fn dim(&self) -> usize {
        match self.family {
            SetFamily::Sphere => self.d,
            SetFamily::Sphere3 => 3,
            SetFamily::Sphere4 | SetFamily::Paraboloid4 => 4,
        }
    }

    fn load(&self) -> Result<PointSet> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(HarnessError::Config(format!("density must lie in (0, 1], got {}", self.density)));
        }
        let base = match (&self.input, self.m) {
            (Some(path), _) => PointSet::parse_text(&fs::read_to_string(path)?)?,
            (None, Some(m)) => match self.family {
                SetFamily::Paraboloid4 => enumerate_paraboloid(m)?,
                _ => enumerate_sphere(self.dim(), m)?,
            },
            (None, None) => return Err(HarnessError::Config("either --m or --input is required".into())),
        };
        Ok(base.random_subset(self.density, self.seed))
    }
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, default_value_t = Budget::default().max_support)]
    budget_support: u64,
    #[arg(long, default_value_t = Budget::default().max_tuples)]
    budget_tuples: u64,
    #[arg(long, default_value_t = Budget::default().max_grid)]
    budget_grid: u64,
    #[arg(long, default_value_t = Budget::default().max_work)]
    budget_work: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        let b = Budget {
            max_support: self.budget_support,
            max_tuples: self.budget_tuples,
            max_grid: self.budget_grid,
            max_work: self.budget_work,
        };
        if b.max_support == 0 || b.max_tuples == 0 || b.max_grid == 0 || b.max_work == 0 {
            return Err(HarnessError::Config("budgets must be positive".into()));
        }
        Ok(b)
    }
}

#[derive(Args, Debug)]
struct CapArgs {
    #[arg(long, default_value_t = Caps::default().trives_exponent)]
    cap_trives_exponent: f64,
    #[arg(long, default_value_t = Caps::default().trives_m_max)]
    cap_trives_m_max: i64,
    #[arg(long, default_value_t = Caps::default().y_energy_ratio)]
    cap_y_ratio: f64,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps {
            trives_exponent: self.cap_trives_exponent,
            trives_m_max: self.cap_trives_m_max,
            y_energy_ratio: self.cap_y_ratio,
            ..Caps::default()
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// `Ok(false)` means an assertion failed.
fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Enumerate { set, out: path } => {
            let a = set.load()?;
            match path {
                Some(p) => fs::write(p, a.to_text())?,
                None => a.write_text(&mut *out)?,
            }
            Ok(true)
        }
        Command::Energy {
            set,
            s,
            k,
            brute,
            budget,
        } => {
            let a = set.load()?;
            let b = budget.budget()?;
            let e = if brute {
                energy_brute_with(&a, s, k, &b)?
            } else {
                energy_with(&a, s, k, &b)?
            };
            writeln!(out, "{}", e.value)?;
            Ok(true)
        }
        Command::Decompose {
            set,
            threshold,
            delta,
            positive,
            format,
        } => {
            let mut a = set.load()?;
            if positive {
                a = restrict_to_orthant(&a, &OrthantPattern::all_positive(a.dim())?)?;
            }
            let dec = match (threshold, delta) {
                (Some(t), _) => xy_decompose(&a, t)?,
                (None, d) => {
                    let delta = match d {
                        Some(d) => parse_delta(&d)?,
                        None => lattice_energy::decompose::default_delta(),
                    };
                    xy_decompose_delta(&a, delta)?
                }
            };
            let verdict = verify_decomposition(&a, &dec)?;
            let summary = dec.summary(&verdict);
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?,
                Format::Csv => {
                    writeln!(out, "n,threshold,x_size,peels,verdict")?;
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        summary.n,
                        summary.threshold,
                        summary.x_size,
                        summary.peels.len(),
                        summary.verdict
                    )?;
                }
            }
            Ok(verdict.passed())
        }
        Command::Intersect { set, shifts } => {
            let shifts = parse_shifts(&shifts)?;
            let loaded;
            let surface = match (&set.input, set.m) {
                (None, Some(m)) if set.density >= 1.0 => match set.family {
                    SetFamily::Paraboloid4 => Surface::Paraboloid { m },
                    _ => Surface::Sphere { d: set.dim(), m },
                },
                _ => {
                    loaded = set.load()?;
                    Surface::Points(&loaded)
                }
            };
            let hits = intersect_translates(&surface, &shifts)?;
            writeln!(out, "count {}", hits.len())?;
            for p in &hits {
                writeln!(out, "{p}")?;
            }
            Ok(true)
        }
        Command::Incidences {
            set,
            varieties,
            kst,
            kst_seed,
            budget,
        } => {
            let a = set.load()?;
            let vs = match varieties {
                Some(path) => parse_varieties(&fs::read_to_string(path)?)?,
                None => {
                    let r = rep_fn_with(&a, 2, &budget.budget()?)?;
                    let sums: Vec<_> = r.iter().map(|(n, _)| n).filter(|n| !n.is_zero()).collect();
                    bisector_varieties(&sums)?
                }
            };
            let rep = incidences(&a, &vs, None, None)?;
            writeln!(out, "points {}", a.len())?;
            writeln!(out, "varieties {}", vs.len())?;
            writeln!(out, "incidences {}", rep.total)?;
            writeln!(out, "max_point_degree {}", rep.max_point_degree)?;
            writeln!(out, "max_variety_degree {}", rep.max_variety_degree)?;
            if let Some(s) = kst {
                let cfg = KstConfig {
                    seed: kst_seed,
                    ..KstConfig::default()
                };
                let w = kst_witness(&a, &vs, s, &cfg)?;
                writeln!(out, "kst s={} t={} mode={:?} tested={}", w.s, w.t_max, w.mode, w.subsets_tested)?;
            }
            Ok(true)
        }
        Command::Scan {
            family,
            d,
            m_start,
            m_end,
            m_stride,
            s,
            k,
            density,
            seed,
            slices,
            delta,
            decompose_limit,
            out: path,
            format,
            budget,
            caps,
        } => {
            let cfg = ScanConfig {
                family,
                d,
                m_start,
                m_end,
                m_stride,
                s_values: parse_list(&s)?,
                k_values: parse_list(&k)?,
                density,
                seed,
                slices,
                delta: parse_delta(&delta)?,
                decompose_limit,
                budget: budget.budget()?,
                caps: caps.caps(),
            };
            let report = run_scan(&cfg)?;
            match path {
                Some(p) => write_report_file(&report, format, &p)?,
                None => write_report(&report, format, &mut *out)?,
            }
            for f in &report.failures {
                writeln!(err, "assertion failed: {f}")?;
            }
            Ok(report.passed())
        }
        Command::DftCheck { set, s, budget } => {
            let a = set.load()?;
            let b = budget.budget()?;
            let mom = dft_moment(&a, s, &b)?;
            let e = energy_with(&a, s, 2, &b)?;
            let ok = BigUint::from(mom.rounded) == e.value;
            writeln!(out, "modulus {}", mom.modulus)?;
            writeln!(out, "moment {:.6}", mom.raw)?;
            writeln!(out, "residual {:.3e}", mom.residual)?;
            writeln!(out, "energy {}", e.value)?;
            writeln!(out, "{}", if ok { "match" } else { "mismatch" })?;
            Ok(ok)
        }
        Command::Check {
            set,
            tags,
            s,
            budget,
            caps,
        } => {
            let a = set.load()?;
            let opts = CheckOptions {
                s_values: parse_list(&s)?,
                budget: budget.budget()?,
                caps: caps.caps(),
            };
            let rep = check_inequalities(&a, &parse_tags(&tags)?, &opts)?;
            writeln!(out, "tag,name,left,right,ratio,asserted")?;
            for c in &rep.comparisons {
                let status = match c.holds {
                    None => "-",
                    Some(true) => "pass",
                    Some(false) => "fail",
                };
                writeln!(
                    out,
                    "{},{},{:.6e},{:.6e},{:.6e},{}",
                    c.tag, c.name, c.left, c.right, c.ratio, status
                )?;
            }
            for skip in &rep.skipped {
                writeln!(err, "skipped {}: {}", skip.tag, skip.reason)?;
            }
            Ok(rep.passed())
        }
    }
}
