//! Monte Carlo sweeps: per-trial measurements, aggregation against the bound
//! evaluators, decay fits and result files.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{basis_sup_norm_max, assemble_polynomial, Basis, BasisKind};
use crate::bounds::{self, BoundReport};
use crate::ensembles::{
    abs_moment, coefficient_moments, sample_coefficients, section5_bounds, shifted_log_moment_min,
    EnsembleSpec, Family,
};
use crate::error::{Error, Result};
use crate::polycore::{
    find_roots, normalize_by_endpoints, sup_norm_circle, Polynomial, RootSet, SupNormInterval,
    DEFAULT_GRID_FACTOR, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::seed::{stream_rng, Provenance};
use crate::zerostats::{erdos_turan_terms_with_sup, region_count, sector_discrepancy, AnnularSector, RegionSpec};

pub const MAX_REDRAWS: u32 = 100;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_RANDOM_SECTORS: usize = 8;
pub const DEFAULT_SECTOR_SEED: u64 = 0x5EC7_0125;

pub fn default_degrees() -> Vec<usize> {
    vec![16, 32, 64, 128, 256, 512]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SectorChoice {
    /// `(α, β)` pairs, all at the sweep's `r`.
    Explicit { sectors: Vec<(f64, f64)> },
    /// `count` sectors drawn once from `seed` and shared by every degree.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub basis: BasisKind,
    pub degrees: Vec<usize>,
    pub trials: usize,
    pub sectors: SectorChoice,
    pub regions: Vec<RegionSpec>,
    pub t: f64,
    pub r: f64,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(ensemble: EnsembleSpec) -> Self {
        Self {
            ensemble,
            basis: BasisKind::Monomial,
            degrees: default_degrees(),
            trials: DEFAULT_TRIALS,
            sectors: SectorChoice::Random {
                count: DEFAULT_RANDOM_SECTORS,
                seed: DEFAULT_SECTOR_SEED,
            },
            regions: vec![RegionSpec::Disk {
                center_theta: 0.0,
                radius: 1.0,
            }],
            t: 1.0,
            r: 0.5,
            master_seed: 0,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if let BasisKind::Szego { weight } = &self.basis {
            weight.validate()?;
        }
        if matches!(self.basis, BasisKind::Explicit) {
            return Err(Error::Config("sweeps need a monomial or szego basis".into()));
        }
        if self.degrees.is_empty() {
            return Err(Error::Config("degrees must be nonempty".into()));
        }
        if self.degrees[0] == 0 || self.degrees.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("degrees must be positive and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Config(format!("t={} must be positive", self.t)));
        }
        for region in &self.regions {
            region.validate()?;
        }
        self.resolve_sectors().map(|_| ())
    }

    pub fn resolve_sectors(&self) -> Result<Vec<AnnularSector>> {
        match &self.sectors {
            SectorChoice::Explicit { sectors } => {
                if sectors.is_empty() {
                    return Err(Error::Config("at least one sector is required".into()));
                }
                sectors
                    .iter()
                    .map(|&(a, b)| AnnularSector::new(self.r, a, b))
                    .collect()
            }
            SectorChoice::Random { count, seed } => {
                if *count == 0 {
                    return Err(Error::Config("random_sectors must be at least 1".into()));
                }
                let mut rng = stream_rng(*seed, 0x5EC7);
                (0..*count)
                    .map(|_| {
                        let alpha = rng.gen::<f64>() * TAU;
                        let width = (1.0 - rng.gen::<f64>()) * TAU;
                        AnnularSector::new(self.r, alpha, alpha + width)
                    })
                    .collect()
            }
        }
    }

    /// The disk whose mean zero fraction fills the `mean_disk_fraction` column.
    pub fn reference_disk(&self) -> Option<(usize, f64)> {
        self.regions
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.disk_radius().map(|rho| (i, rho)))
    }
}

/// One realization of `P_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: u64,
    pub redraws: u32,
    pub discrepancies: Vec<f64>,
    pub et_rhs: Vec<f64>,
    pub region_counts: Vec<usize>,
    pub mahler: f64,
    pub sup_norm: SupNormInterval,
    pub abs_c0: f64,
    pub abs_cn: f64,
    /// `Y_n = max_k |A_k|` of the first draw for this trial, before any redraw.
    pub max_modulus: f64,
    pub reconstruction_error: f64,
    pub root_count: usize,
    /// Largest distance from a root's conjugate to the root set, for real polynomials.
    pub conjugate_asymmetry: Option<f64>,
}

impl TrialRecord {
    pub fn et_violations(&self) -> usize {
        self.discrepancies
            .iter()
            .zip(&self.et_rhs)
            .filter(|(d, r)| d > r)
            .count()
    }

    pub fn mean_discrepancy(&self) -> f64 {
        mean(&self.discrepancies)
    }
}

struct Prepared {
    sectors: Vec<AnnularSector>,
}

pub fn run_trial(config: &ExperimentConfig, n: usize, trial: u64) -> Result<TrialRecord> {
    config.validate()?;
    let prepared = Prepared {
        sectors: config.resolve_sectors()?,
    };
    let basis = config.basis.build(n)?;
    trial_checked(config, &prepared, &basis, n, trial)
}

fn trial_checked(config: &ExperimentConfig, prepared: &Prepared, basis: &Basis, n: usize, trial: u64) -> Result<TrialRecord> {
    let record = measure_trial(config, prepared, basis, n, trial)
        .map_err(|e| Error::Trial { n, trial, source: Box::new(e) })?;
    if let Some((sector, (d, r))) = record
        .discrepancies
        .iter()
        .zip(&record.et_rhs)
        .enumerate()
        .find(|(_, (d, r))| d > r)
    {
        return Err(Error::ErdosTuran {
            n,
            trial,
            sector,
            lhs: *d,
            rhs: *r,
        });
    }
    Ok(record)
}

/// The polynomial a trial measures, after any endpoint redraws.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub polynomial: Polynomial,
    pub redraws: u32,
    /// `Y_n` of the first draw.
    pub max_modulus: f64,
}

/// Samples and assembles trial `trial` of degree `n`, redrawing while an endpoint vanishes.
pub fn draw_polynomial(config: &ExperimentConfig, basis: &Basis, n: usize, trial: u64) -> Result<TrialDraw> {
    let base = Provenance::new(config.master_seed, n, trial);
    let mut max_modulus = f64::NAN;
    for redraw in 0..MAX_REDRAWS {
        let draw = sample_coefficients(&config.ensemble, n, base.with_redraw(redraw))?;
        if redraw == 0 {
            max_modulus = draw.max_modulus();
        }
        let p = match assemble_polynomial(&draw.values, basis) {
            Ok(p) => p,
            Err(Error::DegenerateDraw) => continue,
            Err(e) => return Err(e),
        };
        if p.degree() != n || matches!(normalize_by_endpoints(&p), Err(Error::EndpointDegeneracy)) {
            continue;
        }
        return Ok(TrialDraw {
            polynomial: p,
            redraws: redraw,
            max_modulus,
        });
    }
    Err(Error::DegenerateEnsemble { redraws: MAX_REDRAWS })
}

fn measure_trial(config: &ExperimentConfig, prepared: &Prepared, basis: &Basis, n: usize, trial: u64) -> Result<TrialRecord> {
    let draw = draw_polynomial(config, basis, n, trial)?;
    measure_polynomial(config, prepared, &draw.polynomial, n, trial, draw.redraws, draw.max_modulus)
}

fn measure_polynomial(
    config: &ExperimentConfig,
    prepared: &Prepared,
    p: &Polynomial,
    n: usize,
    trial: u64,
    redraws: u32,
    max_modulus: f64,
) -> Result<TrialRecord> {
    let roots = find_roots(p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let sup = sup_norm_circle(p, DEFAULT_GRID_FACTOR);
    let terms = erdos_turan_terms_with_sup(p, &roots, config.r, sup.hi)?;
    let rhs = terms.total();
    let discrepancies: Vec<f64> = prepared.sectors.iter().map(|s| sector_discrepancy(&roots, s)).collect();
    let region_counts = config.regions.iter().map(|r| region_count(&roots, r)).collect();
    Ok(TrialRecord {
        n,
        trial,
        redraws,
        et_rhs: vec![rhs; discrepancies.len()],
        discrepancies,
        region_counts,
        mahler: crate::polycore::mahler_measure(p, &roots),
        sup_norm: sup,
        abs_c0: p.constant().norm(),
        abs_cn: p.leading().norm(),
        max_modulus,
        reconstruction_error: roots.reconstruction_error,
        root_count: roots.len(),
        conjugate_asymmetry: p.is_real().then(|| conjugate_asymmetry(&roots)),
    })
}

/// `max_i min_j |conj(Z_i) − Z_j| / max(1, |Z_i|)`.
pub fn conjugate_asymmetry(roots: &RootSet) -> f64 {
    roots
        .roots
        .iter()
        .map(|z| {
            let target = z.conj();
            roots
                .roots
                .iter()
                .map(|w| (w - target).norm())
                .fold(f64::INFINITY, f64::min)
                / z.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Theoretical values for one degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeBounds {
    pub thm21: Option<BoundReport>,
    pub cor22: Option<BoundReport>,
    pub thm31: Option<BoundReport>,
    pub thm52: Option<BoundReport>,
    pub prop41: Option<BoundReport>,
    pub prop51: Option<BoundReport>,
    /// One entry per configured region separated from the circle.
    pub prop23: Vec<(usize, BoundReport)>,
}

impl DegreeBounds {
    pub fn reports(&self) -> Vec<BoundReport> {
        let mut out: Vec<BoundReport> = [&self.thm21, &self.cor22, &self.thm31, &self.thm52, &self.prop41, &self.prop51]
            .into_iter()
            .flatten()
            .cloned()
            .collect();
        out.extend(self.prop23.iter().map(|(_, r)| r.clone()));
        out
    }
}

/// Inputs shared by every degree of a sweep.
struct SweepTheory {
    /// `inf_z E log|A_0 + z|` estimate when the basis needs it.
    shifted_l: Option<f64>,
}

fn default_shift_grid() -> Vec<Complex64> {
    let mut grid = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=12 {
        let rho = 0.25 * i as f64;
        for k in 0..16 {
            grid.push(Complex64::from_polar(rho, TAU * k as f64 / 16.0));
        }
    }
    grid
}

fn sweep_theory(config: &ExperimentConfig, probe: &Basis) -> SweepTheory {
    let shifted_l = if probe.first_row_is_diagonal() {
        None
    } else {
        Some(
            shifted_log_moment_min(&config.ensemble, &default_shift_grid())
                .map(|s| s.value)
                .unwrap_or(f64::NEG_INFINITY),
        )
    };
    SweepTheory { shifted_l }
}

/// Theoretical values for degree `n` under `config`, without running trials.
pub fn bounds_for_degree(config: &ExperimentConfig, n: usize) -> Result<DegreeBounds> {
    config.validate()?;
    let basis = config.basis.build(n)?;
    let theory = sweep_theory(config, &basis);
    Ok(degree_bounds(config, &theory, &basis, n))
}

fn degree_bounds(config: &ExperimentConfig, theory: &SweepTheory, basis: &Basis, n: usize) -> DegreeBounds {
    let (t, r) = (config.t, config.r);
    let monomial = matches!(basis.kind(), BasisKind::Monomial);
    // Moments under the law conditioned on nonzero endpoints.
    let moments = coefficient_moments(&config.ensemble, n, t, true);
    let (sum_t, sup_t, e0, en, sup1, sup_var) = match &moments {
        Ok(m) => (m.sum_abs_t(), m.sup_abs_t(), m.elog_first, m.elog_last, m.sup_abs1(), m.sup_var()),
        Err(_) => (f64::INFINITY, f64::INFINITY, f64::NAN, f64::NAN, f64::INFINITY, f64::INFINITY),
    };

    let thm21 = monomial.then(|| bounds::thm21_bound(n, t, sum_t, e0, en, r));
    let cor22 = monomial.then(|| bounds::cor22_bound(n, t, sup_t, e0.min(en), r));
    let thm52 = monomial.then(|| bounds::thm52_bound(n, e0, en, sup1, sup_var.sqrt(), r));

    let l = theory.shifted_l.unwrap_or(e0);
    let floor = bounds::elog_dn_floor(basis.entry(0, 0).norm(), basis.leading(n).norm(), en, l);
    let thm31 = Some(bounds::thm31_bound(n, t, sum_t, basis_sup_norm_max(basis), floor, r));

    let iid = !matches!(config.ensemble.family, Family::MovingAverage { .. });
    let prop41 = iid.then(|| {
        let mu = abs_moment(&config.ensemble, t).map(|m| m.value).unwrap_or(f64::INFINITY);
        bounds::prop41_bound(n, t, mu)
    });
    let prop51 = Some(match section5_bounds(&config.ensemble) {
        Ok(b) => bounds::prop51_bound(n, b.m, b.s2.sqrt()),
        Err(_) => bounds::prop51_bound(n, f64::INFINITY, f64::INFINITY),
    });

    let prop23 = if monomial {
        config
            .regions
            .iter()
            .enumerate()
            .filter_map(|(i, region)| {
                region
                    .separation_parameter()
                    .map(|d| (i, bounds::prop23_bound(n, d, t, sum_t, e0 + en)))
            })
            .collect()
    } else {
        Vec::new()
    };

    DegreeBounds {
        thm21,
        cor22,
        thm31,
        thm52,
        prop41,
        prop51,
        prop23,
    }
}

/// Aggregates for one degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub trials: usize,
    /// Mean over trials of the per-trial average over sectors.
    pub mean_discrepancy: f64,
    pub stderr: f64,
    /// Largest per-sector mean over trials.
    pub worst_sector_mean: f64,
    pub worst_sector_stderr: f64,
    pub region_means: Vec<f64>,
    pub mean_disk_fraction: Option<f64>,
    pub prop25_fraction: Option<f64>,
    pub mean_log_yn: f64,
    pub mean_yn: f64,
    pub redraws: u64,
    pub max_reconstruction_error: f64,
    pub bounds: DegreeBounds,
}

impl SummaryRow {
    fn value(report: &Option<BoundReport>) -> Option<f64> {
        report.as_ref().map(|r| r.value)
    }

    pub fn thm21(&self) -> Option<f64> {
        Self::value(&self.bounds.thm21)
    }

    pub fn cor22(&self) -> Option<f64> {
        Self::value(&self.bounds.cor22)
    }

    pub fn thm31(&self) -> Option<f64> {
        Self::value(&self.bounds.thm31)
    }

    pub fn thm52(&self) -> Option<f64> {
        Self::value(&self.bounds.thm52)
    }

    pub fn prop41(&self) -> Option<f64> {
        Self::value(&self.bounds.prop41)
    }

    pub fn prop51(&self) -> Option<f64> {
        Self::value(&self.bounds.prop51)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub sectors: Vec<AnnularSector>,
    pub regions: Vec<RegionSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub table: SummaryTable,
    pub records: Vec<TrialRecord>,
}

/// `(mean, sample std / √len)`; the error is 0 for a single value.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    let sd = (ss / (values.len() - 1) as f64).sqrt();
    (m, sd / (values.len() as f64).sqrt())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every trial of every degree.
///
/// Trials execute in parallel (`threads = 0` uses the global pool), but
/// results are collected by index and reduced sequentially, so the output
/// does not depend on scheduling.
pub fn run_sweep(config: &ExperimentConfig, threads: usize) -> Result<SweepResult> {
    config.validate()?;
    let prepared = Prepared {
        sectors: config.resolve_sectors()?,
    };
    let probe = config.basis.build(config.degrees[0])?;
    let theory = sweep_theory(config, &probe);
    let mut rows = Vec::with_capacity(config.degrees.len());
    let mut records = Vec::with_capacity(config.degrees.len() * config.trials);
    for &n in &config.degrees {
        let basis = config.basis.build(n)?;
        let outcomes: Vec<Result<TrialRecord>> = with_pool(threads, || {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|trial| trial_checked(config, &prepared, &basis, n, trial))
                .collect()
        })?;
        let trial_records: Vec<TrialRecord> = outcomes.into_iter().collect::<Result<_>>()?;
        rows.push(summarize(config, &prepared, &theory, &basis, n, &trial_records));
        records.extend(trial_records);
    }
    Ok(SweepResult {
        table: SummaryTable {
            rows,
            sectors: prepared.sectors,
            regions: config.regions.clone(),
        },
        records,
    })
}

fn summarize(
    config: &ExperimentConfig,
    prepared: &Prepared,
    theory: &SweepTheory,
    basis: &Basis,
    n: usize,
    records: &[TrialRecord],
) -> SummaryRow {
    let per_trial: Vec<f64> = records.iter().map(|r| r.mean_discrepancy()).collect();
    let (mean_discrepancy, stderr) = mean_stderr(&per_trial);
    let (worst_sector_mean, worst_sector_stderr) = (0..prepared.sectors.len())
        .map(|s| {
            let v: Vec<f64> = records.iter().map(|r| r.discrepancies[s]).collect();
            mean_stderr(&v)
        })
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let region_means: Vec<f64> = (0..config.regions.len())
        .map(|i| mean(&records.iter().map(|r| r.region_counts[i] as f64).collect::<Vec<_>>()))
        .collect();
    let disk = config.reference_disk();
    let log_y: Vec<f64> = records.iter().map(|r| r.max_modulus.ln()).collect();
    let y: Vec<f64> = records.iter().map(|r| r.max_modulus).collect();
    SummaryRow {
        n,
        trials: records.len(),
        mean_discrepancy,
        stderr,
        worst_sector_mean,
        worst_sector_stderr,
        mean_disk_fraction: disk.map(|(i, _)| region_means[i] / n as f64),
        prop25_fraction: disk.map(|(_, rho)| bounds::prop25_expected(n, rho) / n as f64),
        region_means,
        mean_log_yn: mean(&log_y),
        mean_yn: mean(&y),
        redraws: records.iter().map(|r| u64::from(r.redraws)).sum(),
        max_reconstruction_error: records.iter().map(|r| r.reconstruction_error).fold(0.0, f64::max),
        bounds: degree_bounds(config, theory, basis, n),
    }
}

/// Outcome of the per-sample invariant suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub et_checks: usize,
    pub et_failures: usize,
    pub reconstruction_failures: usize,
    pub root_count_failures: usize,
    pub conjugate_failures: usize,
    /// Smallest `rhs − lhs` over all checks.
    pub min_margin: f64,
    pub max_reconstruction_error: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.et_failures == 0
            && self.reconstruction_failures == 0
            && self.root_count_failures == 0
            && self.conjugate_failures == 0
    }
}

/// Runs every trial and counts invariant failures instead of stopping at the first.
pub fn verify(config: &ExperimentConfig, threads: usize) -> Result<VerifyReport> {
    config.validate()?;
    let prepared = Prepared {
        sectors: config.resolve_sectors()?,
    };
    let mut report = VerifyReport {
        min_margin: f64::INFINITY,
        ..Default::default()
    };
    for &n in &config.degrees {
        let basis = config.basis.build(n)?;
        let outcomes: Vec<Result<TrialRecord>> = with_pool(threads, || {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|trial| {
                    measure_trial(config, &prepared, &basis, n, trial)
                        .map_err(|e| Error::Trial { n, trial, source: Box::new(e) })
                })
                .collect()
        })?;
        for record in outcomes {
            let record = record?;
            report.trials += 1;
            report.et_checks += record.discrepancies.len();
            report.et_failures += record.et_violations();
            for (d, r) in record.discrepancies.iter().zip(&record.et_rhs) {
                report.min_margin = report.min_margin.min(r - d);
            }
            if record.reconstruction_error > crate::polycore::RECONSTRUCTION_TOL {
                report.reconstruction_failures += 1;
            }
            if record.root_count != n {
                report.root_count_failures += 1;
            }
            if record.conjugate_asymmetry.is_some_and(|a| a > 1e-8) {
                report.conjugate_failures += 1;
            }
            report.max_reconstruction_error = report.max_reconstruction_error.max(record.reconstruction_error);
        }
    }
    Ok(report)
}

/// Least-squares fits of the mean discrepancy against `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log D` against `log n`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-log residuals.
    pub slope_residual_rms: f64,
    /// `a` in `D ≈ a √(log n / n)`, fitted in log space.
    pub amplitude: f64,
    /// RMS over degrees of `D / (a √(log n/n)) − 1`.
    pub amplitude_rel_residual: f64,
    pub points: usize,
}

pub fn fit_decay(table: &SummaryTable) -> Result<DecayFit> {
    let ns: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    let ds: Vec<f64> = table.rows.iter().map(|r| r.mean_discrepancy).collect();
    fit_decay_points(&ns, &ds)
}

pub fn fit_decay_points(ns: &[usize], ds: &[f64]) -> Result<DecayFit> {
    if ns.len() != ds.len() || ns.len() < 3 {
        return Err(Error::Fit("need at least 3 degrees".into()));
    }
    if ds.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::Fit("mean discrepancies must be positive".into()));
    }
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::Fit("degrees must be at least 2".into()));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_residual_rms = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();

    let shape: Vec<f64> = ns.iter().map(|&n| 0.5 * ((n as f64).ln().ln() - (n as f64).ln())).collect();
    let log_a = y.iter().zip(&shape).map(|(a, b)| a - b).sum::<f64>() / k;
    let amplitude_rel_residual = (y
        .iter()
        .zip(&shape)
        .map(|(a, b)| ((a - b - log_a).exp() - 1.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        slope_residual_rms,
        amplitude: log_a.exp(),
        amplitude_rel_residual,
        points: ns.len(),
    })
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "n",
    "trials",
    "mean_discrepancy",
    "stderr",
    "thm21",
    "cor22",
    "thm31",
    "thm52",
    "mean_disk_fraction",
    "prop25_fraction",
    "mean_logYn",
    "prop41",
    "mean_Yn",
    "prop51",
];

pub const RECORD_COLUMNS: [&str; 5] = ["n", "trial", "sector", "discrepancy", "et_rhs"];

pub const TRIAL_COLUMNS: [&str; 11] = [
    "n",
    "trial",
    "redraws",
    "mahler",
    "sup_lo",
    "sup_hi",
    "abs_c0",
    "abs_cn",
    "Yn",
    "reconstruction_error",
    "region_counts",
];

/// Shortest round-trip formatting; `inf`/`-inf`/`nan` for non-finite values.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn sweep_rows(table: &SummaryTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.trials.to_string(),
                format_f64(r.mean_discrepancy),
                format_f64(r.stderr),
                format_opt(r.thm21()),
                format_opt(r.cor22()),
                format_opt(r.thm31()),
                format_opt(r.thm52()),
                format_opt(r.mean_disk_fraction),
                format_opt(r.prop25_fraction),
                format_f64(r.mean_log_yn),
                format_opt(r.prop41()),
                format_f64(r.mean_yn),
                format_opt(r.prop51()),
            ]
        })
        .collect()
}

fn record_rows(records: &[TrialRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .flat_map(|rec| {
            rec.discrepancies
                .iter()
                .zip(&rec.et_rhs)
                .enumerate()
                .map(move |(s, (d, r))| {
                    vec![
                        rec.n.to_string(),
                        rec.trial.to_string(),
                        s.to_string(),
                        format_f64(*d),
                        format_f64(*r),
                    ]
                })
        })
        .collect()
}

fn trial_rows(records: &[TrialRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.trial.to_string(),
                r.redraws.to_string(),
                format_f64(r.mahler),
                format_f64(r.sup_norm.lo),
                format_f64(r.sup_norm.hi),
                format_f64(r.abs_c0),
                format_f64(r.abs_cn),
                format_f64(r.max_modulus),
                format_f64(r.reconstruction_error),
                r.region_counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
            ]
        })
        .collect()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub sectors: Vec<AnnularSector>,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub rows: Vec<SummaryFileRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFileRow {
    pub n: usize,
    pub trials: usize,
    pub mean_discrepancy: f64,
    pub stderr: f64,
    pub worst_sector_mean: f64,
    pub worst_sector_stderr: f64,
    pub region_means: Vec<f64>,
    pub redraws: u64,
    pub max_reconstruction_error: f64,
    pub bounds: Vec<BoundReport>,
}

pub fn summary_file(config: &ExperimentConfig, table: &SummaryTable) -> SummaryFile {
    let (fit, fit_error) = match fit_decay(table) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SummaryFile {
        seed: config.master_seed,
        config: config.clone(),
        sectors: table.sectors.clone(),
        fit,
        fit_error,
        rows: table
            .rows
            .iter()
            .map(|r| SummaryFileRow {
                n: r.n,
                trials: r.trials,
                mean_discrepancy: r.mean_discrepancy,
                stderr: r.stderr,
                worst_sector_mean: r.worst_sector_mean,
                worst_sector_stderr: r.worst_sector_stderr,
                region_means: r.region_means.clone(),
                redraws: r.redraws,
                max_reconstruction_error: r.max_reconstruction_error,
                bounds: r.bounds.reports(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Writes `sweep.csv`, `records.csv` and `trials.csv` (CSV) or `summary.json` (JSON) into `dir`.
pub fn export_results(
    config: &ExperimentConfig,
    table: &SummaryTable,
    records: &[TrialRecord],
    format: ExportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ExportFormat::Csv => {
            let sweep = dir.join("sweep.csv");
            write_csv(&sweep, &SWEEP_COLUMNS, sweep_rows(table))?;
            let rec = dir.join("records.csv");
            write_csv(&rec, &RECORD_COLUMNS, record_rows(records))?;
            let trials = dir.join("trials.csv");
            write_csv(&trials, &TRIAL_COLUMNS, trial_rows(records))?;
            Ok(vec![sweep, rec, trials])
        }
        ExportFormat::Json => {
            let path = dir.join("summary.json");
            let mut text = serde_json::to_string_pretty(&summary_file(config, table)).expect("summary serializes");
            text.push('\n');
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(vec![path])
        }
    }
}

pub fn export_all(config: &ExperimentConfig, result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = export_results(config, &result.table, &result.records, ExportFormat::Csv, dir)?;
    paths.extend(export_results(config, &result.table, &result.records, ExportFormat::Json, dir)?);
    Ok(paths)
}

/// Mean discrepancy statistics recomputed from `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub trials: usize,
    pub mean_discrepancy: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub summary: SummaryFile,
    /// True when the recomputed statistics equal those stored in `summary.json` bit for bit.
    pub consistent: bool,
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    match field {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => field.parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("bad number {field:?}: {e}"),
        }),
    }
}

/// Reloads a sweep directory and recomputes the per-degree statistics.
pub fn load_report(dir: &Path) -> Result<Report> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "sweep directory not found"),
        ));
    }
    let summary_path = dir.join("summary.json");
    let text = fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let summary: SummaryFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: summary_path.clone(),
        message: e.to_string(),
    })?;

    let records_path = dir.join("records.csv");
    let mut reader = csv::Reader::from_path(&records_path).map_err(|e| csv_error(&records_path, e))?;
    // (n, trial) -> discrepancies in sector order, preserving file order.
    let mut groups: Vec<(usize, u64, Vec<f64>)> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(&records_path, e))?;
        if row.len() != RECORD_COLUMNS.len() {
            return Err(Error::Parse {
                path: records_path.clone(),
                message: format!("expected {} fields, found {}", RECORD_COLUMNS.len(), row.len()),
            });
        }
        let n: usize = parse_f64(&records_path, &row[0])? as usize;
        let trial = parse_f64(&records_path, &row[1])? as u64;
        let d = parse_f64(&records_path, &row[3])?;
        match groups.last_mut() {
            Some((gn, gt, v)) if *gn == n && *gt == trial => v.push(d),
            _ => groups.push((n, trial, vec![d])),
        }
    }
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut i = 0;
    while i < groups.len() {
        let n = groups[i].0;
        let per_trial: Vec<f64> = groups[i..]
            .iter()
            .take_while(|g| g.0 == n)
            .map(|g| mean(&g.2))
            .collect();
        i += per_trial.len();
        let (m, se) = mean_stderr(&per_trial);
        rows.push(ReportRow {
            n,
            trials: per_trial.len(),
            mean_discrepancy: m,
            stderr: se,
        });
    }
    let consistent = rows.len() == summary.rows.len()
        && rows.iter().zip(&summary.rows).all(|(a, b)| {
            a.n == b.n
                && a.trials == b.trials
                && a.mean_discrepancy.to_bits() == b.mean_discrepancy.to_bits()
                && a.stderr.to_bits() == b.stderr.to_bits()
        });
    Ok(Report {
        rows,
        summary,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(ensemble: EnsembleSpec) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ensemble);
        c.degrees = vec![8, 16];
        c.trials = 6;
        c.master_seed = 42;
        c
    }

    #[test]
    fn rademacher_trial() {
        let c = small(EnsembleSpec::rademacher());
        let rec = run_trial(&c, 8, 0).unwrap();
        assert_eq!(rec.discrepancies.len(), DEFAULT_RANDOM_SECTORS);
        assert_eq!(rec.et_violations(), 0);
        assert!(rec.reconstruction_error < 1e-8);
        assert!(rec.conjugate_asymmetry.unwrap() < 1e-8);
        assert_eq!(rec.max_modulus, 1.0);
        assert_eq!(run_trial(&c, 8, 0).unwrap(), rec);
        assert_ne!(run_trial(&c, 8, 1).unwrap(), rec);
    }

    #[test]
    fn bernoulli_redraws_are_counted() {
        let c = small(EnsembleSpec::bernoulli(0.5));
        let redraws: u32 = (0..40).map(|t| run_trial(&c, 8, t).unwrap().redraws).sum();
        assert!(redraws > 0);
        for t in 0..40 {
            let r = run_trial(&c, 8, t).unwrap();
            assert!(r.abs_c0 > 0.0 && r.abs_cn > 0.0);
        }
    }

    #[test]
    fn single_trial_table_matches_record() {
        let mut c = small(EnsembleSpec::rademacher());
        c.degrees = vec![8];
        c.trials = 1;
        let res = run_sweep(&c, 1).unwrap();
        let row = &res.table.rows[0];
        let rec = &res.records[0];
        assert_eq!(row.mean_discrepancy, rec.mean_discrepancy());
        assert_eq!(row.stderr, 0.0);
        assert_eq!(row.mean_yn, rec.max_modulus);
        assert_eq!(rec, &run_trial(&c, 8, 0).unwrap());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = small(EnsembleSpec::complex_gaussian());
        let a = run_sweep(&c, 1).unwrap();
        let b = run_sweep(&c, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monomial_bounds_cover_all_columns() {
        let mut c = small(EnsembleSpec::complex_gaussian());
        c.t = 0.5;
        c.regions.push(RegionSpec::OriginDisk { radius: 0.5 });
        let res = run_sweep(&c, 0).unwrap();
        for row in &res.table.rows {
            let (t21, t31) = (row.thm21().unwrap(), row.thm31().unwrap());
            assert!((t21 - t31).abs() <= 1e-12 * t21);
            assert!(row.cor22().is_some() && row.thm52().is_some());
            assert!(row.prop41().is_some() && row.prop51().is_some());
            assert_eq!(row.bounds.prop23.len(), 1);
            assert!(row.mean_disk_fraction.is_some());
        }
    }

    #[test]
    fn szego_sweep_reports_only_thm31() {
        let mut c = small(EnsembleSpec::complex_gaussian());
        c.basis = BasisKind::Szego {
            weight: crate::bases::WeightSpec::trig_poly(vec![1.0, 0.3]),
        };
        let res = run_sweep(&c, 0).unwrap();
        for row in &res.table.rows {
            assert!(row.thm21().is_none() && row.cor22().is_none() && row.thm52().is_none());
            let t31 = row.thm31().unwrap();
            assert!(t31.is_finite() && row.mean_discrepancy <= t31);
        }
    }

    #[test]
    fn discrete_law_with_general_basis_flags_thm31() {
        let mut c = small(EnsembleSpec::rademacher());
        c.basis = BasisKind::Szego {
            weight: crate::bases::WeightSpec::trig_poly(vec![1.0, 0.3]),
        };
        let res = run_sweep(&c, 0).unwrap();
        let report = res.table.rows[0].bounds.thm31.as_ref().unwrap();
        assert!(report.is_violation());
        assert!(report.value.is_infinite());
    }

    #[test]
    fn fit_examples() {
        let ns = [16usize, 32, 64, 128, 256, 512];
        let exact: Vec<f64> = ns.iter().map(|&n| ((n as f64).ln() / n as f64).sqrt()).collect();
        let f = fit_decay_points(&ns, &exact).unwrap();
        assert_relative_eq!(f.amplitude, 1.0, epsilon = 1e-12);
        assert!(f.amplitude_rel_residual < 1e-12);
        let power: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-0.5)).collect();
        let f = fit_decay_points(&ns, &power).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-9);
        assert!(fit_decay_points(&ns[..2], &power[..2]).is_err());
        assert!(fit_decay_points(&ns[..3], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = small(EnsembleSpec::rademacher());
        c.degrees = vec![16, 8];
        assert!(c.validate().is_err());
        let mut c = small(EnsembleSpec::rademacher());
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = small(EnsembleSpec::rademacher());
        c.t = 0.0;
        assert!(c.validate().is_err());
        let mut c = small(EnsembleSpec::rademacher());
        c.sectors = SectorChoice::Explicit { sectors: vec![(0.0, 7.0)] };
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_sectors_are_shared_and_valid() {
        let c = small(EnsembleSpec::rademacher());
        let a = c.resolve_sectors().unwrap();
        assert_eq!(a, c.resolve_sectors().unwrap());
        assert!(a.iter().all(|s| s.validate().is_ok() && s.r == c.r));
    }

    #[test]
    fn export_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let c = small(EnsembleSpec::rademacher());
        let res = run_sweep(&c, 2).unwrap();
        export_all(&c, &res, dir.path()).unwrap();
        let report = load_report(dir.path()).unwrap();
        assert!(report.consistent);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.summary.config, c);

        let empty = tempfile::tempdir().unwrap();
        export_results(&c, &res.table, &[], ExportFormat::Csv, empty.path()).unwrap();
        let text = fs::read_to_string(empty.path().join("records.csv")).unwrap();
        assert_eq!(text, "n,trial,sector,discrepancy,et_rhs\n");

        assert!(matches!(load_report(&dir.path().join("missing")), Err(Error::Io { .. })));
    }

    #[test]
    fn format_round_trip() {
        for x in [0.1, 1e-300, 123456.789, f64::INFINITY, f64::NEG_INFINITY] {
            let s = format_f64(x);
            assert_eq!(parse_f64(Path::new("x"), &s).unwrap(), x);
        }
    }
}
