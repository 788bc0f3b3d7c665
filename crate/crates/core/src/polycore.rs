//! Deterministic polynomial numerics.
//!
//! Coefficients are stored lowest degree first: `P(z) = Σ c_k z^k`.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_GRID_FACTOR: usize = 32;
/// Accepted roots must reproduce the coefficients to this relative accuracy.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Endpoint moduli below this are treated as exact zeros.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming trailing zero coefficients.
    ///
    /// The zero polynomial has no degree and is rejected.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::DegenerateDraw);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn constant(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k|`, an upper bound for the sup norm on the unit circle.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn scaled(&self, alpha: Complex64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|c| c * alpha).collect())
    }

    /// `P(e^{iφ} z)`.
    pub fn rotated(&self, phi: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, phi * k as f64))
            .collect();
        Self { coeffs }
    }

    /// Fixture format: interleaved real and imaginary parts, comma separated.
    pub fn to_csv_row(&self) -> String {
        self.coeffs
            .iter()
            .flat_map(|c| [c.re, c.im])
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let parts: Vec<f64> = row
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad coefficient {s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if !parts.len().is_multiple_of(2) {
            return Err(Error::Config(
                "coefficient row needs an even number of fields (re,im pairs)".into(),
            ));
        }
        Self::new(
            parts
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        )
    }
}

/// Enclosure `[lo, hi]` of `sup_{|z|=1} |P(z)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormInterval {
    pub lo: f64,
    pub hi: f64,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|P|` at the `N` points `e^{2πij/N}`.
pub fn circle_values(p: &Polynomial, nodes: usize) -> Vec<f64> {
    assert!(nodes > p.degree(), "need more nodes than the degree");
    let mut buf = vec![Complex64::new(0.0, 0.0); nodes];
    buf[..p.coeffs.len()].copy_from_slice(&p.coeffs);
    let fft = PLANNER.with(|pl| pl.borrow_mut().plan_fft_inverse(nodes));
    fft.process(&mut buf);
    buf.iter().map(|v| v.norm()).collect()
}

/// Certified sup norm on the unit circle.
///
/// `lo` is the maximum over `N = grid_factor · max(n, 1)` equispaced points.
/// Since `e^{-inθ/2} P(e^{iθ})` has exponential type `n/2`, the maximum is
/// within `π/N` of a node where `|P| ≥ ‖P‖ cos(nπ/(2N))`, giving
/// `hi = lo · sec(nπ/(2N))`, clamped to `Σ|c_k|`.
pub fn sup_norm_circle(p: &Polynomial, grid_factor: usize) -> SupNormInterval {
    assert!(grid_factor >= 8, "grid_factor must be at least 8");
    let n = p.degree();
    let nodes = grid_factor * n.max(1);
    let l1 = p.coefficient_l1();
    let lo = circle_values(p, nodes).into_iter().fold(0.0, f64::max).min(l1);
    let sec = 1.0 / (n as f64 * PI / (2.0 * nodes as f64)).cos();
    let hi = (lo * sec).min(l1).max(lo);
    SupNormInterval { lo, hi }
}

/// Zeros of a polynomial with per-root residuals and a reconstruction certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `|P(Z)| / (Σ|c_k| max(1,|Z|)^n)`.
    pub residuals: Vec<f64>,
    /// `‖c − c_n Π(z − Z_i)‖₂ / ‖c‖₂`.
    pub reconstruction_error: f64,
    pub iterations: usize,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Builds a root set from known roots, certifying them against `p`.
    pub fn from_roots(p: &Polynomial, roots: Vec<Complex64>) -> Self {
        let residuals = roots.iter().map(|&z| scaled_residual(p, z)).collect();
        let reconstruction_error = reconstruction_error(p, &roots);
        Self {
            roots,
            residuals,
            reconstruction_error,
            iterations: 0,
        }
    }
}

/// Simultaneous Aberth–Ehrlich iteration.
///
/// Initial guesses sit on circles whose radii come from the upper convex hull
/// of `(k, log|c_k|)` (capped by the Cauchy bound `1 + max|c_k/c_n|`), rotated
/// by a fixed offset. A root is frozen once its relative correction drops
/// below `tol` or its residual reaches rounding level. If the first pass fails
/// to converge or to reproduce the coefficients, the iteration restarts with
/// double-double evaluation and a different rotation before giving up.
pub fn find_roots(p: &Polynomial, tol: f64, max_iter: usize) -> Result<RootSet> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::Config("root finding needs degree >= 1".into()));
    }
    let zeros_at_origin = p.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = Polynomial {
        coeffs: p.coeffs[zeros_at_origin..].to_vec(),
    };

    let mut last_err = None;
    for (attempt, rotation) in [(Precision::Double, 0.7), (Precision::DoubleDouble, 2.1)] {
        let outcome = if reduced.degree() == 0 {
            Ok((Vec::new(), 0))
        } else {
            aberth(&reduced, tol, max_iter, rotation, attempt)
        };
        match outcome {
            Ok((mut roots, iterations)) => {
                roots.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros_at_origin));
                let mut set = RootSet::from_roots(p, roots);
                set.iterations = iterations;
                if set.reconstruction_error <= RECONSTRUCTION_TOL {
                    return Ok(set);
                }
                last_err = Some(Error::NonConvergence {
                    iterations,
                    max_step: set.reconstruction_error,
                    partial: set.roots,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Precision {
    Double,
    DoubleDouble,
}

fn initial_guesses(p: &Polynomial, rotation: f64) -> Vec<Complex64> {
    let n = p.degree();
    let logs: Vec<f64> = p.coeffs.iter().map(|c| c.norm().ln()).collect();
    // Upper convex hull of (k, log|c_k|) over nonzero coefficients.
    let mut hull: Vec<usize> = Vec::new();
    for k in (0..=n).filter(|&k| logs[k].is_finite()) {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (j - i) as f64 * (logs[k] - logs[i]) - (k - i) as f64 * (logs[j] - logs[i]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let lead = p.leading().norm();
    let cauchy = 1.0
        + p.coeffs[..n]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let m = j - i;
        let radius = ((logs[i] - logs[j]) / m as f64).exp().min(cauchy);
        for q in 0..m {
            let angle = TAU * q as f64 / m as f64 + TAU * i as f64 / n as f64 + rotation;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

fn aberth(
    p: &Polynomial,
    tol: f64,
    max_iter: usize,
    rotation: f64,
    precision: Precision,
) -> Result<(Vec<Complex64>, usize)> {
    let n = p.degree();
    let rev: Vec<Complex64> = p.coeffs.iter().rev().copied().collect();
    let abs: Vec<f64> = p.coeffs.iter().map(|c| c.norm()).collect();
    let abs_rev: Vec<f64> = abs.iter().rev().copied().collect();
    let mut z = initial_guesses(p, rotation);
    let mut done = vec![false; n];
    let mut max_step = f64::INFINITY;

    for iter in 1..=max_iter {
        max_step = 0.0f64;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let (ratio, at_rounding_level) = if zi.norm() <= 1.0 {
                newton_ratio(&p.coeffs, &abs, zi, precision)
            } else {
                let w = zi.inv();
                let (q_ratio, small) = newton_ratio(&rev, &abs_rev, w, precision);
                // p/p' = z q / (n q − w q') = z / (n − w q'/q)
                (zi / (n as f64 - w / q_ratio), small)
            };
            let repulsion: Complex64 = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| (zi - zj).inv())
                .sum();
            let step = if ratio.is_finite() {
                ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion)
            } else {
                Complex64::new(0.0, 0.0)
            };
            if !step.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    max_step: f64::INFINITY,
                    partial: z,
                });
            }
            z[i] = zi - step;
            let rel = step.norm() / z[i].norm().max(f64::MIN_POSITIVE);
            max_step = max_step.max(rel);
            if rel < tol || at_rounding_level {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok((z, iter));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        max_step,
        partial: z,
    })
}

/// Returns `(p(x)/p'(x), |p(x)| is at rounding level)` for `|x| ≤ 1`.
fn newton_ratio(c: &[Complex64], abs: &[f64], x: Complex64, precision: Precision) -> (Complex64, bool) {
    let (value, deriv) = match precision {
        Precision::Double => horner_with_derivative(c, x),
        Precision::DoubleDouble => dd::horner_with_derivative(c, x),
    };
    let r = x.norm();
    let bound = abs.iter().rev().fold(0.0, |acc, &a| acc * r + a);
    let eps = match precision {
        Precision::Double => f64::EPSILON,
        Precision::DoubleDouble => f64::EPSILON * f64::EPSILON,
    };
    let small = value.norm() <= 4.0 * c.len() as f64 * eps * bound;
    if deriv.norm() == 0.0 {
        return (Complex64::new(f64::NAN, f64::NAN), small);
    }
    (value / deriv, small)
}

fn horner_with_derivative(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        deriv = deriv * x + value;
        value = value * x + ck;
    }
    (value, deriv)
}

/// Double-double arithmetic for the fallback pass.
mod dd {
    use num_complex::Complex64;

    #[derive(Clone, Copy)]
    struct Dd {
        hi: f64,
        lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    impl Dd {
        const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

        fn from(x: f64) -> Self {
            Dd { hi: x, lo: 0.0 }
        }

        fn add(self, o: Dd) -> Dd {
            let s = two_sum(self.hi, o.hi);
            let lo = s.lo + self.lo + o.lo;
            let r = two_sum(s.hi, lo);
            Dd { hi: r.hi, lo: r.lo }
        }

        fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }

        fn mul_f64(self, b: f64) -> Dd {
            let p = two_prod(self.hi, b);
            let lo = p.lo + self.lo * b;
            let r = two_sum(p.hi, lo);
            Dd { hi: r.hi, lo: r.lo }
        }

        fn value(self) -> f64 {
            self.hi + self.lo
        }
    }

    #[derive(Clone, Copy)]
    struct Cdd {
        re: Dd,
        im: Dd,
    }

    impl Cdd {
        const ZERO: Cdd = Cdd {
            re: Dd::ZERO,
            im: Dd::ZERO,
        };

        fn mul_add(self, x: Complex64, c: Cdd) -> Cdd {
            Cdd {
                re: self.re.mul_f64(x.re).add(self.im.mul_f64(x.im).neg()).add(c.re),
                im: self.re.mul_f64(x.im).add(self.im.mul_f64(x.re)).add(c.im),
            }
        }

        fn value(self) -> Complex64 {
            Complex64::new(self.re.value(), self.im.value())
        }
    }

    pub(super) fn horner_with_derivative(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
        let mut value = Cdd::ZERO;
        let mut deriv = Cdd::ZERO;
        for &ck in c.iter().rev() {
            deriv = deriv.mul_add(x, value);
            let ck = Cdd {
                re: Dd::from(ck.re),
                im: Dd::from(ck.im),
            };
            value = value.mul_add(x, ck);
        }
        (value.value(), deriv.value())
    }
}

fn scaled_residual(p: &Polynomial, z: Complex64) -> f64 {
    let l1 = p.coefficient_l1();
    if z.norm() <= 1.0 {
        p.evaluate(z).norm() / l1
    } else {
        let w = z.inv();
        let value = p
            .coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
        value.norm() / l1
    }
}

/// Relative 2-norm distance between `c` and the coefficients of `c_n Π(z − Z_i)`.
///
/// Roots are multiplied in bit-reversed order of their arguments so that every
/// partial product is spread around the circle and stays well scaled.
pub fn reconstruction_error(p: &Polynomial, roots: &[Complex64]) -> f64 {
    if roots.len() != p.degree() {
        return f64::INFINITY;
    }
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| roots[a].arg().total_cmp(&roots[b].arg()));
    let bits = usize::BITS - roots.len().saturating_sub(1).leading_zeros();
    let key = |i: usize| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
    let mut positions: Vec<usize> = (0..order.len()).collect();
    positions.sort_by_key(|&i| key(i));

    let mut prod = vec![p.leading()];
    for &pos in &positions {
        let root = roots[order[pos]];
        prod.push(Complex64::new(0.0, 0.0));
        for k in (1..prod.len()).rev() {
            prod[k] = prod[k - 1] - root * prod[k];
        }
        prod[0] = -root * prod[0];
    }
    let num: f64 = prod
        .iter()
        .zip(&p.coeffs)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = p.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Logarithmic Mahler measure via Jensen's formula:
/// `m(P) = log|c_n| + Σ log max(1, |Z_k|)`.
pub fn mahler_measure(p: &Polynomial, roots: &RootSet) -> f64 {
    p.leading().norm().ln() + roots.roots.iter().map(|z| z.norm().ln().max(0.0)).sum::<f64>()
}

/// `P / sqrt(|c_0 c_n|)` together with `log sqrt(|c_0 c_n|)`.
pub fn normalize_by_endpoints(p: &Polynomial) -> Result<(Polynomial, f64)> {
    let (c0, cn) = (p.constant().norm(), p.leading().norm());
    if c0 < UNDERFLOW_THRESHOLD || cn < UNDERFLOW_THRESHOLD {
        return Err(Error::EndpointDegeneracy);
    }
    let log_scale = 0.5 * (c0.ln() + cn.ln());
    let factor = (-log_scale).exp();
    let scaled = Polynomial {
        coeffs: p.coeffs.iter().map(|c| c * factor).collect(),
    };
    Ok((scaled, log_scale))
}
