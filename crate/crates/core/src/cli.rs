//! The `zerolab` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bases::{BasisKind, WeightSpec};
use crate::config::{parse_ensemble, ConfigFile};
use crate::error::{Error, Result};
use crate::experiment::{
    bounds_for_degree, draw_polynomial, export_all, fit_decay, load_report, run_sweep, verify, ExperimentConfig,
    SummaryTable,
};
use crate::polycore::{find_roots, sup_norm_circle, Polynomial, DEFAULT_GRID_FACTOR, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::zerostats::{erdos_turan_terms_with_sup, sector_count, sector_discrepancy, AnnularSector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_OUTPUT: &str = "zerolab-out";

#[derive(Debug, Parser)]
#[command(name = "zerolab", version, about = "Angular equidistribution of zeros of random polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the coefficients of one sampled polynomial.
    Sample(PolyArgs),
    /// Print the roots of one polynomial.
    Roots(PolyArgs),
    /// Sector discrepancies and Erdős–Turán bounds for one polynomial.
    Discrepancy(DiscrepancyArgs),
    /// Evaluate the discrepancy and order-statistic bounds as JSON reports.
    Bounds(CommonArgs),
    /// Run a Monte Carlo sweep and write sweep.csv, records.csv, trials.csv and summary.json.
    Sweep(SweepArgs),
    /// Run the per-sample invariant suite.
    Verify(CommonArgs),
    /// Re-render a sweep directory from its records.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Single degree; replaces the configured degree list.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated degree list.
    #[arg(long, value_delimiter = ',', conflicts_with = "n")]
    pub degrees: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// `family` or `family:param`, e.g. `rademacher`, `bernoulli:0.3`.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// `monomial`, `szego` (constant weight) or `szego:a0,a1,...`.
    #[arg(long)]
    pub basis: Option<String>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PolyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Real coefficients `c_0,...,c_n` instead of a sample.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct DiscrepancyArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub dir: PathBuf,
}

/// `monomial`, `szego` or `szego:a0,a1,...`.
pub fn parse_basis(text: &str) -> Result<BasisKind> {
    let kind = match text.split_once(':') {
        None if text == "monomial" => BasisKind::Monomial,
        None if text == "szego" => BasisKind::Szego {
            weight: WeightSpec::constant(1.0),
        },
        Some(("szego", list)) => {
            let fourier = list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("bad weight coefficients {list:?}")))?;
            BasisKind::Szego {
                weight: WeightSpec::trig_poly(fourier),
            }
        }
        _ => return Err(Error::Config(format!("unknown basis {text:?}"))),
    };
    if let BasisKind::Szego { weight } = &kind {
        weight.validate()?;
    }
    Ok(kind)
}

/// Loads the configuration file (if any) and applies flag overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<(ExperimentConfig, usize)> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut c = file.to_experiment()?;
    if let Some(e) = &args.ensemble {
        c.ensemble = parse_ensemble(e)?;
    }
    if let Some(b) = &args.basis {
        c.basis = parse_basis(b)?;
    }
    if let Some(seed) = args.seed {
        c.master_seed = seed;
    }
    if let Some(n) = args.n {
        c.degrees = vec![n];
    }
    if let Some(d) = &args.degrees {
        c.degrees = d.clone();
    }
    if let Some(trials) = args.trials {
        c.trials = trials;
    }
    if let Some(r) = args.r {
        c.r = r;
    }
    if let Some(t) = args.t {
        c.t = t;
    }
    c.validate()?;
    Ok((c, args.threads.unwrap_or_else(|| file.threads())))
}

fn exit_code(e: &Error) -> i32 {
    match e.root_cause() {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` and executes the command, returning the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli.command, out, err, color) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn status(ok: bool, color: bool) -> &'static str {
    match (ok, color) {
        (true, true) => "\x1b[32mPASS\x1b[0m",
        (false, true) => "\x1b[31mFAIL\x1b[0m",
        (true, false) => "PASS",
        (false, false) => "FAIL",
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn one_polynomial(args: &PolyArgs) -> Result<(ExperimentConfig, Polynomial, u32)> {
    let (config, _) = resolve_config(&args.common)?;
    if let Some(c) = &args.coeffs {
        return Ok((config, Polynomial::from_real(c)?, 0));
    }
    let n = config.degrees[0];
    let basis = config.basis.build(n)?;
    let draw = draw_polynomial(&config, &basis, n, args.trial)?;
    Ok((config, draw.polynomial, draw.redraws))
}

/// Runs a parsed command.
pub fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> Result<i32> {
    match cmd {
        Command::Sample(args) => {
            let (_, p, redraws) = one_polynomial(args)?;
            writeln!(out, "k,re,im").map_err(io_err)?;
            for (k, c) in p.coeffs().iter().enumerate() {
                writeln!(out, "{k},{},{}", c.re, c.im).map_err(io_err)?;
            }
            if redraws > 0 {
                writeln!(err, "redraws: {redraws}").map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Roots(args) => {
            let (_, p, _) = one_polynomial(args)?;
            let roots = find_roots(&p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            writeln!(out, "re,im,modulus,residual").map_err(io_err)?;
            for (z, res) in roots.roots.iter().zip(&roots.residuals) {
                writeln!(out, "{},{},{},{:e}", z.re, z.im, z.norm(), res).map_err(io_err)?;
            }
            writeln!(
                err,
                "degree {} reconstruction error {:.3e} after {} iterations",
                p.degree(),
                roots.reconstruction_error,
                roots.iterations
            )
            .map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Discrepancy(args) => {
            let (config, p, _) = one_polynomial(&args.poly)?;
            let sectors = match (args.alpha, args.beta) {
                (Some(a), Some(b)) => vec![AnnularSector::new(config.r, a, b)?],
                _ => config.resolve_sectors()?,
            };
            let roots = find_roots(&p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let sup = sup_norm_circle(&p, DEFAULT_GRID_FACTOR);
            let rhs = erdos_turan_terms_with_sup(&p, &roots, config.r, sup.hi)?.total();
            writeln!(out, "sector,r,alpha,beta,count,expected,discrepancy,et_rhs,status").map_err(io_err)?;
            let mut ok = true;
            for (i, s) in sectors.iter().enumerate() {
                let d = sector_discrepancy(&roots, s);
                ok &= d <= rhs;
                writeln!(
                    out,
                    "{i},{},{},{},{},{},{},{},{}",
                    s.r,
                    s.alpha,
                    s.beta,
                    sector_count(&roots, s),
                    s.arc_fraction() * p.degree() as f64,
                    d,
                    rhs,
                    status(d <= rhs, color)
                )
                .map_err(io_err)?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Bounds(args) => {
            let (config, _) = resolve_config(args)?;
            for &n in &config.degrees {
                for report in bounds_for_degree(&config, n)?.reports() {
                    writeln!(out, "{}", report.to_json()).map_err(io_err)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let (config, threads) = resolve_config(&args.common)?;
            let dir = args
                .out
                .clone()
                .or_else(|| config.output.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
            let result = run_sweep(&config, threads)?;
            export_all(&config, &result, &dir)?;
            write_table(out, &result.table)?;
            writeln!(out, "wrote {}", dir.display()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let (config, threads) = resolve_config(args)?;
            let report = verify(&config, threads)?;
            writeln!(
                out,
                "trials {}  et checks {}  et failures {}  min margin {:.6}",
                report.trials, report.et_checks, report.et_failures, report.min_margin
            )
            .map_err(io_err)?;
            writeln!(
                out,
                "reconstruction failures {}  max reconstruction error {:.3e}  root count failures {}  conjugate failures {}",
                report.reconstruction_failures,
                report.max_reconstruction_error,
                report.root_count_failures,
                report.conjugate_failures
            )
            .map_err(io_err)?;
            writeln!(out, "{}", status(report.passed(), color)).map_err(io_err)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Report(args) => {
            let report = load_report(&args.dir)?;
            writeln!(out, "{:>6} {:>7} {:>14} {:>12}", "n", "trials", "mean_disc", "stderr").map_err(io_err)?;
            for row in &report.rows {
                writeln!(
                    out,
                    "{:>6} {:>7} {:>14.8} {:>12.8}",
                    row.n, row.trials, row.mean_discrepancy, row.stderr
                )
                .map_err(io_err)?;
            }
            if let Some(fit) = &report.summary.fit {
                writeln!(
                    out,
                    "slope {:.4}  amplitude {:.4}  amplitude residual {:.4}",
                    fit.slope, fit.amplitude, fit.amplitude_rel_residual
                )
                .map_err(io_err)?;
            }
            writeln!(out, "matches summary.json: {}", status(report.consistent, color)).map_err(io_err)?;
            Ok(if report.consistent { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.5}"),
        Some(v) => format!("{v}"),
        None => "-".into(),
    }
}

fn write_table(out: &mut dyn Write, table: &SummaryTable) -> Result<()> {
    writeln!(
        out,
        "{:>6} {:>7} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "n", "trials", "mean_disc", "stderr", "thm21", "cor22", "thm31", "thm52", "logYn", "prop41"
    )
    .map_err(io_err)?;
    for r in &table.rows {
        writeln!(
            out,
            "{:>6} {:>7} {:>10.6} {:>9.6} {:>9} {:>9} {:>9} {:>9} {:>9.4} {:>9}",
            r.n,
            r.trials,
            r.mean_discrepancy,
            r.stderr,
            cell(r.thm21()),
            cell(r.cor22()),
            cell(r.thm31()),
            cell(r.thm52()),
            r.mean_log_yn,
            cell(r.prop41())
        )
        .map_err(io_err)?;
    }
    match fit_decay(table) {
        Ok(fit) => writeln!(
            out,
            "slope {:.4}  amplitude {:.4}  amplitude residual {:.4}",
            fit.slope, fit.amplitude, fit.amplitude_rel_residual
        ),
        Err(e) => writeln!(out, "no fit: {e}"),
    }
    .map_err(io_err)
}
