//! Polynomial bases `B_k(z) = Σ_{j≤k} b_{j,k} z^j` and assembly of
//! `P_n = Σ A_k B_k` into monomial form.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{sup_norm_circle, Polynomial, DEFAULT_GRID_FACTOR};

pub const QUADRATURE_NODES: usize = 4096;
/// Szegő recursion stops when `1 − |a_k|²` falls below this.
const MIN_NORM_RATIO: f64 = 1e-12;

/// Weight `w(θ)` of an absolutely continuous measure on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { c: f64 },
    /// `w(θ) = a_0 + Σ_{j≥1} 2 a_j cos(jθ)`.
    TrigPoly { fourier: Vec<f64> },
}

impl WeightSpec {
    pub fn constant(c: f64) -> Self {
        WeightSpec::Constant { c }
    }

    pub fn trig_poly(fourier: Vec<f64>) -> Self {
        WeightSpec::TrigPoly { fourier }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            WeightSpec::Constant { c } => *c,
            WeightSpec::TrigPoly { fourier } => {
                fourier.first().copied().unwrap_or(0.0)
                    + fourier
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, a)| 2.0 * a * (j as f64 * theta).cos())
                        .sum::<f64>()
            }
        }
    }

    /// Minimum of `w` over the quadrature grid.
    pub fn grid_min(&self) -> f64 {
        (0..QUADRATURE_NODES)
            .map(|i| self.eval(TAU * i as f64 / QUADRATURE_NODES as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Requires `w > 0` on the grid.
    pub fn validate(&self) -> Result<()> {
        if let WeightSpec::TrigPoly { fourier } = self {
            if fourier.is_empty() || fourier.iter().any(|a| !a.is_finite()) {
                return Err(Error::Config("weight.fourier needs finite coefficients".into()));
            }
        }
        let min = self.grid_min();
        if !(min > 0.0) {
            return Err(Error::Config(format!(
                "weight must be strictly positive (grid minimum {min})"
            )));
        }
        Ok(())
    }

    /// `μ(T) = ∫ w dθ`.
    pub fn total_mass(&self) -> f64 {
        trig_moments(self, 0)[0].re
    }
}

/// `μ_j = ∫_0^{2π} e^{-ijθ} w(θ) dθ` for `j = 0..=m`.
pub fn trig_moments(weight: &WeightSpec, m: usize) -> Vec<Complex64> {
    let mut mu = vec![Complex64::new(0.0, 0.0); m + 1];
    match weight {
        WeightSpec::Constant { c } => mu[0] = Complex64::new(TAU * c, 0.0),
        WeightSpec::TrigPoly { fourier } => {
            for (j, a) in fourier.iter().enumerate().take(m + 1) {
                mu[j] = Complex64::new(TAU * a, 0.0);
            }
        }
    }
    mu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasisKind {
    Monomial,
    Szego { weight: WeightSpec },
    /// Caller-supplied coefficient table.
    Explicit,
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Monomial => "monomial",
            BasisKind::Szego { .. } => "szego",
            BasisKind::Explicit => "explicit",
        }
    }

    pub fn build(&self, n: usize) -> Result<Basis> {
        match self {
            BasisKind::Monomial => Ok(monomial_basis(n)),
            BasisKind::Szego { weight } => szego_orthonormal_basis(weight, n),
            BasisKind::Explicit => Err(Error::Config(
                "explicit bases are constructed with Basis::from_columns".into(),
            )),
        }
    }
}

/// Lower-triangular coefficient table; column `k` holds `b_{0,k}, …, b_{k,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    kind: BasisKind,
    columns: Vec<Vec<Complex64>>,
}

impl Basis {
    pub fn from_columns(columns: Vec<Vec<Complex64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Config("basis needs at least one polynomial".into()));
        }
        for (k, col) in columns.iter().enumerate() {
            if col.len() != k + 1 {
                return Err(Error::Config(format!("basis column {k} must have {} entries", k + 1)));
            }
            if col[k].norm() == 0.0 {
                return Err(Error::Config(format!("basis leading coefficient b_{{{k},{k}}} is zero")));
            }
        }
        Ok(Self {
            kind: BasisKind::Explicit,
            columns,
        })
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn degree(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.columns[k]
    }

    /// `b_{j,k}`, zero above the diagonal.
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.columns[k].get(j).copied().unwrap_or_default()
    }

    pub fn leading(&self, k: usize) -> Complex64 {
        self.columns[k][k]
    }

    pub fn polynomial(&self, k: usize) -> Polynomial {
        Polynomial::new(self.columns[k].clone()).expect("basis leading coefficients are nonzero")
    }

    /// True when `b_{0,k} = 0` for every `k ≥ 1`, so the constant term of an
    /// assembled polynomial is `A_0 b_{0,0}` alone.
    pub fn first_row_is_diagonal(&self) -> bool {
        self.columns.iter().skip(1).all(|c| c[0].norm() == 0.0)
    }
}

pub fn monomial_basis(n: usize) -> Basis {
    let columns = (0..=n)
        .map(|k| {
            let mut col = vec![Complex64::new(0.0, 0.0); k + 1];
            col[k] = Complex64::new(1.0, 0.0);
            col
        })
        .collect();
    Basis {
        kind: BasisKind::Monomial,
        columns,
    }
}

/// Orthonormal polynomials for `w dθ` by the Szegő recursion
/// `Φ_{k+1} = zΦ_k − ā_k Φ_k^*`, `‖Φ_{k+1}‖² = ‖Φ_k‖²(1 − |a_k|²)`,
/// normalized so that `∫ B_j conj(B_k) w dθ = δ_{jk}` and `b_{k,k} > 0`.
pub fn szego_orthonormal_basis(weight: &WeightSpec, n: usize) -> Result<Basis> {
    let mu = trig_moments(weight, n + 1);
    if !(mu[0].re > 0.0) {
        return Err(Error::Conditioning("weight has nonpositive total mass".into()));
    }
    let mut phi = vec![Complex64::new(1.0, 0.0)];
    let mut norm_sq = mu[0].re;
    let mut columns = vec![vec![Complex64::new(norm_sq.sqrt().recip(), 0.0)]];
    for k in 0..n {
        // ⟨zΦ_k, 1⟩ = Σ_j φ_j conj(μ_{j+1})
        let inner: Complex64 = phi.iter().enumerate().map(|(j, p)| p * mu[j + 1].conj()).sum();
        let a_bar = inner / norm_sq;
        let ratio = 1.0 - a_bar.norm_sqr();
        if !(ratio > MIN_NORM_RATIO) {
            return Err(Error::Conditioning(format!(
                "moment matrix numerically singular at degree {} (1 - |a|^2 = {ratio:e})",
                k + 1
            )));
        }
        let mut next = vec![Complex64::new(0.0, 0.0); k + 2];
        for (j, p) in phi.iter().enumerate() {
            next[j + 1] += p;
            // Φ_k^* has coefficients conj(φ_{k-j}) at z^j.
            next[k - j] -= a_bar * p.conj();
        }
        phi = next;
        norm_sq *= ratio;
        let scale = norm_sq.sqrt().recip();
        columns.push(phi.iter().map(|p| p * scale).collect());
    }
    Ok(Basis {
        kind: BasisKind::Szego {
            weight: weight.clone(),
        },
        columns,
    })
}

/// Dense Gram–Schmidt on `1, z, …, z^n` against the Toeplitz moment table.
/// `O(n³)`; kept as an independent check on the recursion.
pub fn gram_schmidt_columns(moments: &[Complex64], n: usize) -> Result<Vec<Vec<Complex64>>> {
    if moments.len() < n + 1 {
        return Err(Error::Config("need moments up to order n".into()));
    }
    // ⟨z^a, z^b⟩ = μ_{b−a}, with μ_{−j} = conj(μ_j).
    let gram = |a: usize, b: usize| {
        if b >= a {
            moments[b - a]
        } else {
            moments[a - b].conj()
        }
    };
    let inner = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, ua) in u.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                acc += ua * vb.conj() * gram(a, b);
            }
        }
        acc
    };
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
        v[k] = Complex64::new(1.0, 0.0);
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for q in &out {
                let proj = inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm_sq = inner(&v, &v).re;
        if !(norm_sq > 0.0) {
            return Err(Error::Conditioning(format!("Gram matrix singular at degree {k}")));
        }
        let scale = norm_sq.sqrt().recip();
        out.push(v.into_iter().map(|x| x * scale).collect());
    }
    Ok(out)
}

/// `max_{j,k ≤ n} |∫ B_j conj(B_k) w dθ − δ_{jk}|` by the periodic trapezoid rule.
pub fn orthonormality_residual(basis: &Basis, weight: &WeightSpec, nodes: usize) -> f64 {
    let n = basis.degree();
    let thetas: Vec<f64> = (0..nodes).map(|i| TAU * i as f64 / nodes as f64).collect();
    let w: Vec<f64> = thetas.iter().map(|&t| weight.eval(t)).collect();
    let values: Vec<Vec<Complex64>> = (0..=n)
        .map(|k| {
            let p = basis.polynomial(k);
            thetas.iter().map(|&t| p.evaluate(Complex64::from_polar(1.0, t))).collect()
        })
        .collect();
    let h = TAU / nodes as f64;
    let mut worst = 0.0f64;
    for j in 0..=n {
        for k in j..=n {
            let integral: Complex64 = (0..nodes)
                .map(|i| values[j][i] * values[k][i].conj() * w[i])
                .sum::<Complex64>()
                * h;
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((integral - target).norm());
        }
    }
    worst
}

/// `c_j = Σ_{k≥j} A_k b_{j,k}`.
pub fn assemble_polynomial(values: &[Complex64], basis: &Basis) -> Result<Polynomial> {
    let n = basis.degree();
    if values.len() != n + 1 {
        return Err(Error::Config(format!(
            "coefficient draw has {} values, basis needs {}",
            values.len(),
            n + 1
        )));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, a) in values.iter().enumerate() {
        for (j, b) in basis.columns[k].iter().enumerate() {
            coeffs[j] += a * b;
        }
    }
    if coeffs[n].norm() == 0.0 {
        return Err(Error::DegenerateDraw);
    }
    Polynomial::new(coeffs)
}

/// Certified upper bound on `max_k ‖B_k‖_∞`.
pub fn basis_sup_norm_max(basis: &Basis) -> f64 {
    (0..=basis.degree())
        .map(|k| sup_norm_circle(&basis.polynomial(k), DEFAULT_GRID_FACTOR).hi)
        .fold(0.0, f64::max)
}
