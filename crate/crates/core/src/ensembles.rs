//! Random coefficient ensembles.
//!
//! An [`EnsembleSpec`] describes the law of the coefficients `A_0, ..., A_n`.
//! All families except the moving average are iid. Moments are returned
//! exactly when a closed form exists and otherwise estimated by Monte Carlo
//! with a reported standard error.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{stream_rng, Provenance};
use crate::special::{exp_int_e1, gamma, EULER_GAMMA};

/// Default sample count for Monte Carlo moment estimates.
pub const MC_SAMPLES: usize = 100_000;
const MC_SEED: u64 = 0x6D6F_6D65_6E74_7321;
/// Largest joint enumeration used for discrete moving averages.
const MAX_ENUMERATION: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    ComplexGaussian,
    RealGaussian,
    UniformDisk,
    Rademacher,
    /// `A = 1` with probability `p`, else `0`.
    Bernoulli { p: f64 },
    /// Modulus Pareto with `x_min = 1` and tail exponent `alpha`, uniform phase.
    Pareto { alpha: f64 },
    /// `A_k = Σ_j weights[j] · G_{k+j}` over an iid base sequence `G`.
    MovingAverage {
        base: Box<EnsembleSpec>,
        window: usize,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub family: Family,
    pub scale: f64,
}

impl EnsembleSpec {
    pub fn new(family: Family) -> Self {
        Self { family, scale: 1.0 }
    }

    pub fn complex_gaussian() -> Self {
        Self::new(Family::ComplexGaussian)
    }

    pub fn real_gaussian() -> Self {
        Self::new(Family::RealGaussian)
    }

    pub fn uniform_disk() -> Self {
        Self::new(Family::UniformDisk)
    }

    pub fn rademacher() -> Self {
        Self::new(Family::Rademacher)
    }

    pub fn bernoulli(p: f64) -> Self {
        Self::new(Family::Bernoulli { p })
    }

    pub fn pareto(alpha: f64) -> Self {
        Self::new(Family::Pareto { alpha })
    }

    pub fn moving_average(base: EnsembleSpec, weights: Vec<f64>) -> Self {
        Self::new(Family::MovingAverage {
            base: Box::new(base),
            window: weights.len(),
            weights,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Short family name as used in config files.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::ComplexGaussian => "complex-gaussian",
            Family::RealGaussian => "real-gaussian",
            Family::UniformDisk => "uniform-disk",
            Family::Rademacher => "rademacher",
            Family::Bernoulli { .. } => "bernoulli",
            Family::Pareto { .. } => "pareto",
            Family::MovingAverage { .. } => "moving-average",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        match &self.family {
            Family::Bernoulli { p } if !(*p > 0.0 && *p < 1.0) => {
                Err(Error::Config(format!("bernoulli p must lie in (0,1), got {p}")))
            }
            Family::Pareto { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                Err(Error::Config(format!("pareto alpha must be positive, got {alpha}")))
            }
            Family::MovingAverage {
                base,
                window,
                weights,
            } => {
                if *window == 0 {
                    return Err(Error::Config("moving-average window must be >= 1".into()));
                }
                if weights.len() != *window {
                    return Err(Error::Config(format!(
                        "moving-average has {} weights for window {window}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite()) || weights.iter().all(|&w| w == 0.0) {
                    return Err(Error::Config(
                        "moving-average weights must be finite with a nonzero entry".into(),
                    ));
                }
                if matches!(base.family, Family::MovingAverage { .. }) {
                    return Err(Error::Config("nested moving averages are not supported".into()));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// True when `A` and `e^{iφ}A` have the same law for every `φ`.
    pub fn is_rotation_invariant(&self) -> bool {
        match &self.family {
            Family::ComplexGaussian | Family::UniformDisk | Family::Pareto { .. } => true,
            Family::MovingAverage { base, .. } => base.is_rotation_invariant(),
            _ => false,
        }
    }

    /// Draws a single coefficient with the marginal law of `A_k`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let unit = match &self.family {
            Family::MovingAverage { base, weights, .. } => weights
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &w| acc + base.sample_one(rng) * w),
            family => sample_iid(family, rng),
        };
        unit * self.scale
    }

    /// Single-coefficient law resolved to something computable.
    fn marginal(&self) -> Marginal {
        match &self.family {
            Family::MovingAverage { base, weights, .. } => {
                let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                match base.family {
                    // Linear combinations of iid Gaussians stay Gaussian.
                    Family::ComplexGaussian | Family::RealGaussian => Marginal::Closed {
                        family: base.family.clone(),
                        scale: self.scale * base.scale * norm,
                    },
                    _ => match self.discrete_support() {
                        Some(atoms) => Marginal::Discrete(atoms),
                        None => Marginal::Sampled,
                    },
                }
            }
            Family::Rademacher | Family::Bernoulli { .. } => {
                Marginal::Discrete(self.discrete_support().expect("discrete family"))
            }
            family => Marginal::Closed {
                family: family.clone(),
                scale: self.scale,
            },
        }
    }

    /// Atoms `(value, probability)` of the marginal law when it is discrete.
    pub fn discrete_support(&self) -> Option<Vec<(Complex64, f64)>> {
        let s = self.scale;
        match &self.family {
            Family::Rademacher => Some(vec![
                (Complex64::new(-s, 0.0), 0.5),
                (Complex64::new(s, 0.0), 0.5),
            ]),
            Family::Bernoulli { p } => Some(vec![
                (Complex64::new(0.0, 0.0), 1.0 - p),
                (Complex64::new(s, 0.0), *p),
            ]),
            Family::MovingAverage { base, weights, .. } => {
                let atoms = base.discrete_support()?;
                let total = atoms.len().checked_pow(weights.len() as u32)?;
                if total > MAX_ENUMERATION {
                    return None;
                }
                let mut out = Vec::with_capacity(total);
                for_each_assignment(atoms.len(), weights.len(), |idx| {
                    let (v, p) = combine(&atoms, weights, idx);
                    out.push((v * s, p));
                });
                Some(out)
            }
            _ => None,
        }
    }

    /// `P(A = 0)` for the marginal law.
    pub fn zero_probability(&self) -> f64 {
        self.discrete_support()
            .map(|atoms| atoms.iter().filter(|(v, _)| v.norm() == 0.0).map(|(_, p)| p).sum())
            .unwrap_or(0.0)
    }
}

fn sample_iid<R: Rng + ?Sized>(family: &Family, rng: &mut R) -> Complex64 {
    match family {
        Family::ComplexGaussian => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
        Family::RealGaussian => Complex64::new(StandardNormal.sample(rng), 0.0),
        Family::UniformDisk => {
            let r = rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, TAU * rng.gen::<f64>())
        }
        Family::Rademacher => {
            if rng.gen::<bool>() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        }
        Family::Bernoulli { p } => Complex64::new(f64::from(u8::from(rng.gen_bool(*p))), 0.0),
        Family::Pareto { alpha } => {
            // 1 - U lies in (0, 1], so the modulus is finite and >= 1.
            let u: f64 = 1.0 - rng.gen::<f64>();
            Complex64::from_polar(u.powf(-1.0 / alpha), TAU * rng.gen::<f64>())
        }
        Family::MovingAverage { .. } => unreachable!("moving averages are not iid"),
    }
}

fn for_each_assignment(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; len];
    loop {
        f(&idx);
        let mut pos = 0;
        loop {
            if pos == len {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

// Same summation order as `sample_one`, so enumerated atoms match sampled values bit-for-bit.
fn combine(atoms: &[(Complex64, f64)], weights: &[f64], idx: &[usize]) -> (Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut p = 1.0;
    for (&w, &i) in weights.iter().zip(idx) {
        v += atoms[i].0 * w;
        p *= atoms[i].1;
    }
    (v, p)
}

enum Marginal {
    Closed { family: Family, scale: f64 },
    Discrete(Vec<(Complex64, f64)>),
    Sampled,
}

/// A moment value, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    /// `None` for closed-form values.
    pub std_error: Option<f64>,
}

impl MomentEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_error.is_none()
    }

    fn from_samples(values: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Self {
            value: mean,
            std_error: Some((var / n as f64).sqrt()),
        }
    }
}

/// A length-`n+1` coefficient vector together with the provenance that regenerates it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDraw {
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
}

impl CoefficientDraw {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest coefficient modulus `Y_n = max_k |A_k|`.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

pub fn sample_coefficients(
    spec: &EnsembleSpec,
    n: usize,
    provenance: Provenance,
) -> Result<CoefficientDraw> {
    spec.validate()?;
    let mut rng = provenance.rng();
    let values = match &spec.family {
        Family::MovingAverage { base, weights, .. } => {
            let g: Vec<Complex64> = (0..n + weights.len())
                .map(|_| base.sample_one(&mut rng))
                .collect();
            (0..=n)
                .map(|k| {
                    let a = weights
                        .iter()
                        .enumerate()
                        .fold(Complex64::new(0.0, 0.0), |acc, (j, &w)| acc + g[k + j] * w);
                    a * spec.scale
                })
                .collect()
        }
        _ => (0..=n).map(|_| spec.sample_one(&mut rng)).collect(),
    };
    Ok(CoefficientDraw { values, provenance })
}

fn mc_rng(salt: u64) -> ChaCha8Rng {
    stream_rng(MC_SEED, salt)
}

fn closed_abs_moment(family: &Family, t: f64) -> Result<f64> {
    Ok(match family {
        // |A|^2 ~ Exp(1)
        Family::ComplexGaussian => gamma(1.0 + t / 2.0),
        Family::RealGaussian => 2f64.powf(t / 2.0) * gamma((t + 1.0) / 2.0) / PI.sqrt(),
        Family::UniformDisk => 2.0 / (t + 2.0),
        Family::Pareto { alpha } => {
            if t >= *alpha {
                return Err(Error::InfiniteMoment {
                    family: format!("pareto(alpha={alpha})"),
                    t,
                });
            }
            alpha / (alpha - t)
        }
        _ => unreachable!("no closed form"),
    })
}

fn closed_log_moment(family: &Family) -> f64 {
    match family {
        Family::ComplexGaussian => -EULER_GAMMA / 2.0,
        Family::RealGaussian => -(EULER_GAMMA + std::f64::consts::LN_2) / 2.0,
        Family::UniformDisk => -0.5,
        Family::Pareto { alpha } => 1.0 / alpha,
        _ => unreachable!("no closed form"),
    }
}

fn check_pareto_tail(spec: &EnsembleSpec, t: f64) -> Result<()> {
    let alpha = match &spec.family {
        Family::Pareto { alpha } => Some(*alpha),
        Family::MovingAverage { base, .. } => match base.family {
            Family::Pareto { alpha } => Some(alpha),
            _ => None,
        },
        _ => None,
    };
    match alpha {
        Some(alpha) if t >= alpha => Err(Error::InfiniteMoment {
            family: format!("{}(alpha={alpha})", spec.name()),
            t,
        }),
        _ => Ok(()),
    }
}

/// `E[|A|^t]`.
pub fn abs_moment(spec: &EnsembleSpec, t: f64) -> Result<MomentEstimate> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("moment order must be positive, got {t}")));
    }
    check_pareto_tail(spec, t)?;
    match spec.marginal() {
        Marginal::Closed { family, scale } => {
            Ok(MomentEstimate::exact(scale.powf(t) * closed_abs_moment(&family, t)?))
        }
        Marginal::Discrete(atoms) => Ok(MomentEstimate::exact(
            atoms.iter().map(|(v, p)| p * v.norm().powf(t)).sum(),
        )),
        Marginal::Sampled => abs_moment_mc(spec, t, MC_SAMPLES, 0),
    }
}

/// Monte Carlo estimate of `E[|A|^t]` from `samples` draws.
pub fn abs_moment_mc(spec: &EnsembleSpec, t: f64, samples: usize, salt: u64) -> Result<MomentEstimate> {
    spec.validate()?;
    let mut rng = mc_rng(salt);
    Ok(MomentEstimate::from_samples(
        (0..samples).map(|_| spec.sample_one(&mut rng).norm().powf(t)),
    ))
}

/// `E[log|A|]`. Families with an atom at zero yield a hypothesis violation.
pub fn log_abs_moment(spec: &EnsembleSpec) -> Result<MomentEstimate> {
    spec.validate()?;
    match spec.marginal() {
        Marginal::Closed { family, scale } => {
            Ok(MomentEstimate::exact(scale.ln() + closed_log_moment(&family)))
        }
        Marginal::Discrete(atoms) => {
            if atoms.iter().any(|(v, p)| v.norm() == 0.0 && *p > 0.0) {
                return Err(Error::Hypothesis(format!(
                    "E[log|A|] = -inf for {} (P(A=0) > 0)",
                    spec.name()
                )));
            }
            Ok(MomentEstimate::exact(
                atoms.iter().map(|(v, p)| p * v.norm().ln()).sum(),
            ))
        }
        Marginal::Sampled => log_abs_moment_mc(spec, MC_SAMPLES, 1),
    }
}

pub fn log_abs_moment_mc(spec: &EnsembleSpec, samples: usize, salt: u64) -> Result<MomentEstimate> {
    spec.validate()?;
    let mut rng = mc_rng(salt);
    let est = MomentEstimate::from_samples(
        (0..samples).map(|_| spec.sample_one(&mut rng).norm().ln()),
    );
    if est.value.is_finite() {
        Ok(est)
    } else {
        Err(Error::Hypothesis(format!(
            "sampled E[log|A|] diverges for {}",
            spec.name()
        )))
    }
}

/// `E[log max(|A|, s)]` for the rotation-invariant closed-form families.
fn closed_log_max(family: &Family, s: f64) -> f64 {
    match family {
        Family::ComplexGaussian => {
            if s == 0.0 {
                -EULER_GAMMA / 2.0
            } else {
                s.ln() + 0.5 * exp_int_e1(s * s)
            }
        }
        Family::UniformDisk => {
            if s < 1.0 {
                (s * s - 1.0) / 2.0
            } else {
                s.ln()
            }
        }
        Family::Pareto { alpha } => {
            if s <= 1.0 {
                1.0 / alpha
            } else {
                s.ln() + s.powf(-alpha) / alpha
            }
        }
        _ => unreachable!("not rotation invariant with closed form"),
    }
}

/// Result of [`shifted_log_moment_min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedLogMoment {
    /// Minimum of `E[log|A + z|]` over the grid. An upper estimate of the infimum over all `z`.
    pub value: f64,
    pub argmin: Complex64,
    pub std_error: Option<f64>,
}

/// Grid minimum of `E[log|A + z|]`.
///
/// Closed forms are used for discrete laws and for the rotation-invariant
/// families (where `E[log|A+z|] = E[log max(|A|, |z|)]`); other laws are
/// estimated with common random numbers across the grid.
pub fn shifted_log_moment_min(spec: &EnsembleSpec, grid: &[Complex64]) -> Result<ShiftedLogMoment> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("shift grid is empty".into()));
    }
    match spec.marginal() {
        Marginal::Discrete(atoms) => Ok(grid_min(grid, |z| {
            (atoms.iter().map(|(v, p)| p * (v + z).norm().ln()).sum(), None)
        })),
        Marginal::Closed { family, scale } if spec.is_rotation_invariant() => {
            Ok(grid_min(grid, |z| (scale.ln() + closed_log_max(&family, z.norm() / scale), None)))
        }
        _ => {
            let mut rng = mc_rng(2);
            let samples: Vec<Complex64> = (0..MC_SAMPLES).map(|_| spec.sample_one(&mut rng)).collect();
            Ok(shifted_log_moment_min_from_samples(&samples, grid))
        }
    }
}

/// Grid minimum of the sample mean of `log|a + z|` over a fixed sample set.
pub fn shifted_log_moment_min_from_samples(samples: &[Complex64], grid: &[Complex64]) -> ShiftedLogMoment {
    grid_min(grid, |z| {
        let est = MomentEstimate::from_samples(samples.iter().map(|a| (a + z).norm().ln()));
        (est.value, est.std_error)
    })
}

fn grid_min(grid: &[Complex64], mut f: impl FnMut(Complex64) -> (f64, Option<f64>)) -> ShiftedLogMoment {
    let mut best = ShiftedLogMoment {
        value: f64::INFINITY,
        argmin: grid[0],
        std_error: None,
    };
    for &z in grid {
        let (value, std_error) = f(z);
        if value < best.value || (value.is_nan() && !best.value.is_nan()) {
            best = ShiftedLogMoment {
                value,
                argmin: z,
                std_error,
            };
        }
    }
    best
}

/// The uniform first-moment and variance bounds `(M, S²)` on `|A_k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub m: f64,
    pub s2: f64,
    pub exact: bool,
}

pub fn section5_bounds(spec: &EnsembleSpec) -> Result<MomentBounds> {
    spec.validate()?;
    check_pareto_tail(spec, 2.0).map_err(|_| {
        Error::InfiniteMoment {
            family: spec.name().to_string(),
            t: 2.0,
        }
    })?;
    match spec.marginal() {
        Marginal::Closed { family, scale } => {
            let m = scale * closed_abs_moment(&family, 1.0)?;
            let second = scale * scale * closed_abs_moment(&family, 2.0)?;
            Ok(MomentBounds {
                m,
                s2: (second - m * m).max(0.0),
                exact: true,
            })
        }
        Marginal::Discrete(atoms) => {
            let m: f64 = atoms.iter().map(|(v, p)| p * v.norm()).sum();
            let second: f64 = atoms.iter().map(|(v, p)| p * v.norm_sqr()).sum();
            Ok(MomentBounds {
                m,
                s2: (second - m * m).max(0.0),
                exact: true,
            })
        }
        Marginal::Sampled => {
            let mut rng = mc_rng(3);
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..MC_SAMPLES {
                let r = spec.sample_one(&mut rng).norm();
                sum += r;
                sum2 += r * r;
            }
            let m = sum / MC_SAMPLES as f64;
            let var = (sum2 / MC_SAMPLES as f64 - m * m) * MC_SAMPLES as f64 / (MC_SAMPLES - 1) as f64;
            Ok(MomentBounds {
                m,
                s2: var.max(0.0),
                exact: false,
            })
        }
    }
}

/// Per-index moments of the coefficient vector of a degree-`n` draw.
///
/// With `condition_endpoints`, moments are taken under the law conditioned on
/// `A_0 ≠ 0` and `A_n ≠ 0`, which is the law the experiment harness actually
/// samples after redrawing degenerate trials. For laws without an atom at 0
/// the conditioning is a no-op.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMoments {
    /// `E|A_k|^t`, `k = 0..=n`.
    pub abs_t: Vec<f64>,
    /// `E|A_k|`.
    pub abs1: Vec<f64>,
    /// `Var|A_k|`.
    pub var: Vec<f64>,
    pub elog_first: f64,
    pub elog_last: f64,
    pub exact: bool,
}

impl CoefficientMoments {
    pub fn sum_abs_t(&self) -> f64 {
        self.abs_t.iter().sum()
    }

    pub fn sup_abs_t(&self) -> f64 {
        self.abs_t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs1(&self) -> f64 {
        self.abs1.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_var(&self) -> f64 {
        self.var.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf_elog(&self) -> f64 {
        self.elog_first.min(self.elog_last)
    }
}

pub fn coefficient_moments(
    spec: &EnsembleSpec,
    n: usize,
    t: f64,
    condition_endpoints: bool,
) -> Result<CoefficientMoments> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("coefficient moments need degree >= 1".into()));
    }
    let p0 = spec.zero_probability();
    if !condition_endpoints || p0 == 0.0 {
        let abs_t = abs_moment(spec, t)?;
        let elog = log_abs_moment(spec).map(|e| e.value).unwrap_or(f64::NEG_INFINITY);
        let (m, s2, bounds_exact) = match section5_bounds(spec) {
            Ok(b) => (b.m, b.s2, b.exact),
            Err(Error::InfiniteMoment { .. }) => {
                let m = abs_moment(spec, 1.0).map(|e| e.value).unwrap_or(f64::INFINITY);
                (m, f64::INFINITY, true)
            }
            Err(e) => return Err(e),
        };
        return Ok(CoefficientMoments {
            abs_t: vec![abs_t.value; n + 1],
            abs1: vec![m; n + 1],
            var: vec![s2; n + 1],
            elog_first: elog,
            elog_last: elog,
            exact: abs_t.is_exact() && bounds_exact,
        });
    }
    match &spec.family {
        Family::MovingAverage { base, weights, .. } => {
            let atoms: Vec<(Complex64, f64)> = base
                .discrete_support()
                .expect("an atom at zero implies a discrete base")
                .into_iter()
                .map(|(v, p)| (v * spec.scale, p))
                .collect();
            conditioned_moving_average(&atoms, weights, n, t)
        }
        _ => {
            let atoms = spec.discrete_support().expect("an atom at zero implies a discrete law");
            conditioned_iid(&atoms, n, t)
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Accum {
    mass: f64,
    abs_t: f64,
    abs1: f64,
    abs2: f64,
}

impl Accum {
    fn add(&mut self, v: Complex64, p: f64, t: f64) {
        let r = v.norm();
        self.mass += p;
        self.abs_t += p * r.powf(t);
        self.abs1 += p * r;
        self.abs2 += p * r * r;
    }

    fn finish(self) -> (f64, f64, f64) {
        let m = self.abs1 / self.mass;
        (self.abs_t / self.mass, m, (self.abs2 / self.mass - m * m).max(0.0))
    }
}

fn conditioned_iid(atoms: &[(Complex64, f64)], n: usize, t: f64) -> Result<CoefficientMoments> {
    let mut all = Accum::default();
    let mut nonzero = Accum::default();
    let mut elog = 0.0;
    for &(v, p) in atoms {
        all.add(v, p, t);
        if v.norm() > 0.0 {
            nonzero.add(v, p, t);
            elog += p * v.norm().ln();
        }
    }
    if nonzero.mass == 0.0 {
        return Err(Error::DegenerateEnsemble { redraws: 0 });
    }
    let elog = elog / nonzero.mass;
    let (et, e1, ev) = nonzero.finish();
    let (it, i1, iv) = all.finish();
    let mut out = CoefficientMoments {
        abs_t: vec![it; n + 1],
        abs1: vec![i1; n + 1],
        var: vec![iv; n + 1],
        elog_first: elog,
        elog_last: elog,
        exact: true,
    };
    for k in [0, n] {
        out.abs_t[k] = et;
        out.abs1[k] = e1;
        out.var[k] = ev;
    }
    Ok(out)
}

fn conditioned_moving_average(
    atoms: &[(Complex64, f64)],
    weights: &[f64],
    n: usize,
    t: f64,
) -> Result<CoefficientMoments> {
    let w = weights.len();
    let coeff = |g: &[Complex64], k: usize| -> Complex64 {
        weights
            .iter()
            .enumerate()
            .fold(Complex64::new(0.0, 0.0), |acc, (j, &wt)| acc + g[k + j] * wt)
    };
    // For each k, enumerate the base variables feeding A_0, A_n and A_k.
    let touches_endpoint = |k: usize| k < w || k + w > n;
    let mut per_k: Vec<Option<(f64, f64, f64)>> = vec![None; n + 1];
    let mut elog = (0.0, 0.0);
    let mut interior: Option<(f64, f64, f64)> = None;
    for k in 0..=n {
        if !touches_endpoint(k) {
            continue;
        }
        let mut used: Vec<usize> = (0..w).chain(n..n + w).chain(k..k + w).collect();
        used.sort_unstable();
        used.dedup();
        let total = atoms
            .len()
            .checked_pow(used.len() as u32)
            .filter(|&c| c <= MAX_ENUMERATION)
            .ok_or_else(|| {
                Error::Config("moving-average window too large for exact conditioning".into())
            })?;
        let _ = total;
        let mut g = vec![Complex64::new(0.0, 0.0); n + w];
        let mut acc = Accum::default();
        let mut log_acc = (0.0, 0.0);
        for_each_assignment(atoms.len(), used.len(), |idx| {
            let mut p = 1.0;
            for (&pos, &i) in used.iter().zip(idx) {
                g[pos] = atoms[i].0;
                p *= atoms[i].1;
            }
            let (first, last) = (coeff(&g, 0), coeff(&g, n));
            if first.norm() == 0.0 || last.norm() == 0.0 {
                return;
            }
            acc.add(coeff(&g, k), p, t);
            log_acc.0 += p * first.norm().ln();
            log_acc.1 += p * last.norm().ln();
        });
        if acc.mass == 0.0 {
            return Err(Error::DegenerateEnsemble { redraws: 0 });
        }
        if k == 0 {
            elog = (log_acc.0 / acc.mass, log_acc.1 / acc.mass);
        }
        per_k[k] = Some(acc.finish());
    }
    if per_k.iter().any(Option::is_none) {
        // Interior coefficients only involve base variables independent of both endpoints.
        let mut acc = Accum::default();
        for_each_assignment(atoms.len(), w, |idx| {
            let (v, p) = combine(atoms, weights, idx);
            acc.add(v, p, t);
        });
        interior = Some(acc.finish());
    }
    let resolved: Vec<(f64, f64, f64)> = per_k
        .into_iter()
        .map(|m| m.or(interior).expect("interior moments computed"))
        .collect();
    Ok(CoefficientMoments {
        abs_t: resolved.iter().map(|m| m.0).collect(),
        abs1: resolved.iter().map(|m| m.1).collect(),
        var: resolved.iter().map(|m| m.2).collect(),
        elog_first: elog.0,
        elog_last: elog.1,
        exact: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn all_specs() -> Vec<EnsembleSpec> {
        vec![
            EnsembleSpec::complex_gaussian(),
            EnsembleSpec::real_gaussian(),
            EnsembleSpec::uniform_disk(),
            EnsembleSpec::rademacher(),
            EnsembleSpec::bernoulli(0.3),
            EnsembleSpec::pareto(3.5),
            EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![1.0, 1.0]),
            EnsembleSpec::moving_average(EnsembleSpec::uniform_disk(), vec![0.5, -1.0, 2.0]),
        ]
    }

    #[test]
    fn rademacher_draw_is_unimodular() {
        let draw = sample_coefficients(&EnsembleSpec::rademacher(), 3, Provenance::new(9, 3, 0)).unwrap();
        assert_eq!(draw.values.len(), 4);
        for a in &draw.values {
            assert_eq!(a.im, 0.0);
            assert_eq!(a.re.abs(), 1.0);
        }
    }

    #[test]
    fn draws_are_reproducible() {
        for spec in all_specs() {
            let prov = Provenance::new(77, 12, 5);
            let a = sample_coefficients(&spec, 12, prov).unwrap();
            let b = sample_coefficients(&spec, 12, prov).unwrap();
            assert_eq!(a, b, "{}", spec.name());
            let c = sample_coefficients(&spec, 12, prov.with_redraw(1)).unwrap();
            assert_ne!(a.values, c.values, "{}", spec.name());
        }
    }

    #[test]
    fn complex_gaussian_second_moment_sampled() {
        let draw =
            sample_coefficients(&EnsembleSpec::complex_gaussian(), 10_000, Provenance::new(1, 10_000, 0)).unwrap();
        let est = MomentEstimate::from_samples(draw.values.iter().map(|a| a.norm_sqr()));
        assert!((est.value - 1.0).abs() < 3.0 * est.std_error.unwrap());
    }

    #[test]
    fn closed_form_moments() {
        let cg = EnsembleSpec::complex_gaussian();
        assert_relative_eq!(abs_moment(&cg, 2.0).unwrap().value, 1.0, epsilon = 1e-14);
        assert_relative_eq!(abs_moment(&cg, 1.0).unwrap().value, 0.886_226_925_452_758, epsilon = 1e-12);
        assert_relative_eq!(abs_moment(&EnsembleSpec::rademacher(), 0.37).unwrap().value, 1.0);
        assert_relative_eq!(log_abs_moment(&EnsembleSpec::rademacher()).unwrap().value, 0.0);
        assert_relative_eq!(log_abs_moment(&cg).unwrap().value, -0.288_607_832_450_766_5, epsilon = 1e-14);
        assert_relative_eq!(log_abs_moment(&EnsembleSpec::uniform_disk()).unwrap().value, -0.5);
        // scale enters as s^t and log s
        let scaled = EnsembleSpec::uniform_disk().with_scale(3.0);
        assert_relative_eq!(abs_moment(&scaled, 2.0).unwrap().value, 9.0 * 0.5, epsilon = 1e-14);
        assert_relative_eq!(log_abs_moment(&scaled).unwrap().value, 3f64.ln() - 0.5, epsilon = 1e-14);
    }

    #[test]
    fn log_moment_oracles() {
        // Monte Carlo at 10^6 samples for the Gaussian; 1-D quadrature for the disk.
        let est = log_abs_moment_mc(&EnsembleSpec::complex_gaussian(), 1_000_000, 99).unwrap();
        assert!((est.value + EULER_GAMMA / 2.0).abs() < 4.0 * est.std_error.unwrap());
        let m = 1_000_000;
        let h = 1.0 / m as f64;
        let quad: f64 = (0..m)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                r.ln() * 2.0 * r * h
            })
            .sum();
        assert!((quad + 0.5).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_closed_forms() {
        for spec in all_specs() {
            for &t in &[0.25, 0.5, 1.0, 2.0] {
                let exact = abs_moment(&spec, t).unwrap();
                if !exact.is_exact() {
                    continue;
                }
                let mc = abs_moment_mc(&spec, t, MC_SAMPLES, 11).unwrap();
                let se = mc.std_error.unwrap();
                assert!(
                    (mc.value - exact.value).abs() <= 4.0 * se.max(1e-15),
                    "{} t={t}: mc {} vs {}",
                    spec.name(),
                    mc.value,
                    exact.value
                );
            }
        }
    }

    #[test]
    fn pareto_tail_errors() {
        let spec = EnsembleSpec::pareto(1.5);
        assert!(abs_moment(&spec, 1.0).is_ok());
        assert!(matches!(abs_moment(&spec, 1.5), Err(Error::InfiniteMoment { .. })));
        assert!(matches!(section5_bounds(&spec), Err(Error::InfiniteMoment { .. })));
        assert_relative_eq!(log_abs_moment(&spec).unwrap().value, 1.0 / 1.5);
    }

    #[test]
    fn bernoulli_log_moment_is_a_violation() {
        assert!(matches!(
            log_abs_moment(&EnsembleSpec::bernoulli(0.5)),
            Err(Error::Hypothesis(_))
        ));
        let ma = EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![1.0, 1.0]);
        assert!(matches!(log_abs_moment(&ma), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn invalid_specs_rejected() {
        for spec in [
            EnsembleSpec::bernoulli(0.0),
            EnsembleSpec::bernoulli(1.0),
            EnsembleSpec::pareto(-1.0),
            EnsembleSpec::rademacher().with_scale(0.0),
            EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![0.0, 0.0]),
            EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![]),
        ] {
            assert!(matches!(spec.validate(), Err(Error::Config(_))), "{spec:?}");
        }
    }

    #[test]
    fn section5_values() {
        let b = section5_bounds(&EnsembleSpec::rademacher()).unwrap();
        assert_eq!((b.m, b.s2), (1.0, 0.0));
        let b = section5_bounds(&EnsembleSpec::complex_gaussian()).unwrap();
        assert_relative_eq!(b.m, PI.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(b.s2, 1.0 - PI / 4.0, epsilon = 1e-14);
        // Enumerate the four equally likely sign pairs: |A| ∈ {0, 2}.
        let ma = EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![1.0, 1.0]);
        let b = section5_bounds(&ma).unwrap();
        assert_relative_eq!(b.m, 1.0);
        assert_relative_eq!(b.s2, 1.0);
    }

    #[test]
    fn moving_average_sample_statistics_match_section5() {
        let ma = EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![1.0, 1.0]);
        let bounds = section5_bounds(&ma).unwrap();
        let n = 15;
        let reps = 20_000;
        let mut sums = vec![(0.0f64, 0.0f64); n + 1];
        for trial in 0..reps {
            let draw = sample_coefficients(&ma, n, Provenance::new(5, n, trial)).unwrap();
            for (s, a) in sums.iter_mut().zip(&draw.values) {
                s.0 += a.norm();
                s.1 += a.norm_sqr();
            }
        }
        let reps = reps as f64;
        for (m1, m2) in sums {
            let mean = m1 / reps;
            let var = m2 / reps - mean * mean;
            // |A| ∈ {0,2}: se(mean) = 1/sqrt(R); var of |A|^2 is 4 so se(E|A|^2) = 2/sqrt(R).
            assert!((mean - bounds.m).abs() < 4.0 / reps.sqrt());
            assert!((var - bounds.s2).abs() < 4.0 * 2.5 / reps.sqrt());
        }
    }

    #[test]
    fn shifted_log_moments() {
        let cg = EnsembleSpec::complex_gaussian();
        let grid = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 1.5),
        ];
        let s = shifted_log_moment_min(&cg, &grid).unwrap();
        assert_eq!(s.argmin, Complex64::new(0.0, 0.0));
        assert_relative_eq!(s.value, -EULER_GAMMA / 2.0, epsilon = 1e-14);

        // Jensen identity E log|A+z| = E log max(|A|,|z|): Monte Carlo check.
        let mut rng = mc_rng(40);
        let samples: Vec<Complex64> = (0..400_000).map(|_| cg.sample_one(&mut rng)).collect();
        for &r in &[0.3, 1.0, 2.5] {
            let z = Complex64::from_polar(r, 0.7);
            let mc = shifted_log_moment_min_from_samples(&samples, &[z]);
            let exact = closed_log_max(&Family::ComplexGaussian, r);
            assert!((mc.value - exact).abs() < 4.0 * mc.std_error.unwrap(), "r={r}");
        }

        let point_mass = [Complex64::new(1.0, 0.0)];
        let s = shifted_log_moment_min_from_samples(&point_mass, &[Complex64::new(0.0, 0.0)]);
        assert_eq!(s.value, 0.0);

        let disk = EnsembleSpec::uniform_disk();
        let grid = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
        ];
        let s = shifted_log_moment_min(&disk, &grid).unwrap();
        assert_eq!(s.argmin, grid[0]);
        assert_relative_eq!(s.value, -0.5);
        // log|2i + a| is harmonic on the unit disk, so its disk mean is log 2.
        let mut rng = mc_rng(41);
        let samples: Vec<Complex64> = (0..200_000).map(|_| disk.sample_one(&mut rng)).collect();
        let mc = shifted_log_moment_min_from_samples(&samples, &grid[2..]);
        assert!((mc.value - 2f64.ln()).abs() < 4.0 * mc.std_error.unwrap());

        assert!(matches!(shifted_log_moment_min(&cg, &[]), Err(Error::Config(_))));
        let r = shifted_log_moment_min(&EnsembleSpec::rademacher(), &grid).unwrap();
        assert_eq!(r.value, f64::NEG_INFINITY);
    }

    #[test]
    fn conditioning_iid_bernoulli() {
        let m = coefficient_moments(&EnsembleSpec::bernoulli(0.25), 5, 1.0, true).unwrap();
        assert_eq!(m.abs_t[0], 1.0);
        assert_eq!(m.abs_t[5], 1.0);
        assert_relative_eq!(m.abs_t[2], 0.25);
        assert_eq!(m.elog_first, 0.0);
        assert_relative_eq!(m.sum_abs_t(), 2.0 + 4.0 * 0.25);
    }

    #[test]
    fn conditioning_moving_average_rademacher() {
        let ma = EnsembleSpec::moving_average(EnsembleSpec::rademacher(), vec![1.0, 1.0]);
        let m = coefficient_moments(&ma, 10, 1.0, true).unwrap();
        // Endpoints conditioned to |A| = 2; neighbours keep the {0,2} law.
        assert_relative_eq!(m.abs1[0], 2.0);
        assert_relative_eq!(m.abs1[10], 2.0);
        assert_relative_eq!(m.var[0], 0.0);
        for k in 1..10 {
            assert_relative_eq!(m.abs1[k], 1.0);
            assert_relative_eq!(m.var[k], 1.0);
        }
        assert_relative_eq!(m.elog_first, 2f64.ln());
        assert_eq!(m.sup_abs1(), 2.0);

        // Rejection-sampling oracle.
        let n = 4;
        let m = coefficient_moments(&ma, n, 0.5, true).unwrap();
        let mut acc = vec![0.0; n + 1];
        let mut kept = 0.0;
        for trial in 0..40_000 {
            let d = sample_coefficients(&ma, n, Provenance::new(3, n, trial)).unwrap();
            if d.values[0].norm() == 0.0 || d.values[n].norm() == 0.0 {
                continue;
            }
            kept += 1.0;
            for (a, v) in acc.iter_mut().zip(&d.values) {
                *a += v.norm().sqrt();
            }
        }
        for (a, e) in acc.iter().zip(&m.abs_t) {
            assert!((a / kept - e).abs() < 0.03, "{} vs {e}", a / kept);
        }
    }

    #[test]
    fn unconditioned_moments_for_continuous_laws() {
        let m = coefficient_moments(&EnsembleSpec::complex_gaussian(), 7, 0.5, true).unwrap();
        assert_eq!(m.abs_t.len(), 8);
        assert_relative_eq!(m.abs_t[3], gamma(1.25), epsilon = 1e-14);
        assert_relative_eq!(m.elog_last, -EULER_GAMMA / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_invariance_flags() {
        assert!(EnsembleSpec::complex_gaussian().is_rotation_invariant());
        assert!(EnsembleSpec::pareto(2.0).is_rotation_invariant());
        assert!(!EnsembleSpec::real_gaussian().is_rotation_invariant());
        assert!(!EnsembleSpec::rademacher().is_rotation_invariant());
    }
}
