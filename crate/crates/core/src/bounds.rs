//! Explicit evaluators for the discrepancy and zero-count bounds.
//!
//! Every evaluator returns a [`BoundReport`]: a number together with the
//! inputs that produced it and flags describing how it was obtained. A report
//! whose hypotheses fail carries `value = +inf` and a flag saying why.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

pub const CATALAN_REFERENCE: f64 = 0.915_965_594_177_219;

pub const FLAG_T_EXTENSION: &str = "t>1 extension";
pub const FLAG_TWO_TERM: &str = "combined-form precondition x<=1 unmet; two-term form reported";
pub const FLAG_CLAMPED: &str = "negative bracket clamped to 0";
pub const FLAG_EXPLICIT_CHAIN: &str =
    "explicit chain log(n+1) + log(M + sqrt(4M^2+S^2) sqrt(n+1)) in place of (3/2)log(n+1) + O(1)";
pub const FLAG_HYPOTHESIS: &str = "hypothesis violation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    #[serde(deserialize_with = "null_as_infinity")]
    pub value: f64,
    pub flags: Vec<String>,
    #[serde(deserialize_with = "null_values_as_nan")]
    pub inputs: BTreeMap<String, f64>,
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

fn null_values_as_nan<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            value: f64::NAN,
            flags: Vec::new(),
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }

    fn violated(mut self, why: impl std::fmt::Display) -> Self {
        self.value = f64::INFINITY;
        self.flags.push(format!("{FLAG_HYPOTHESIS}: {why}"));
        self
    }

    pub fn has_flag(&self, prefix: &str) -> bool {
        self.flags.iter().any(|f| f.starts_with(prefix))
    }

    pub fn is_violation(&self) -> bool {
        self.has_flag(FLAG_HYPOTHESIS)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Partial sum `Σ_{j=0}^{k} (−1)^j / (2j+1)²`.
pub fn catalan_partial_sum(k: usize) -> f64 {
    // Summed from the small end to limit rounding.
    (0..=k)
        .rev()
        .map(|j| {
            let d = (2 * j + 1) as f64;
            if j % 2 == 0 {
                1.0 / (d * d)
            } else {
                -1.0 / (d * d)
            }
        })
        .sum()
}

/// Catalan's constant by the Cohen–Rodriguez Villegas–Zagier acceleration
/// of the alternating series (error about `5.8^{-N}` after `N` terms).
pub fn catalan() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let n = 24usize;
        let d0 = (3.0 + 8f64.sqrt()).powi(n as i32);
        let d = 0.5 * (d0 + 1.0 / d0);
        let mut b = -1.0;
        let mut c = -d;
        let mut s = 0.0;
        for k in 0..n {
            c = b - c;
            let a = 1.0 / ((2 * k + 1) as f64).powi(2);
            s += c * a;
            let kf = k as f64;
            let nf = n as f64;
            b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
        }
        s / d
    })
}

/// `C_r = √(2π/k) + 2/(1−r)`.
pub fn c_r(r: f64) -> f64 {
    first_term_constant() + 2.0 / (1.0 - r)
}

/// `√(2π/k)`.
pub fn first_term_constant() -> f64 {
    (TAU / catalan()).sqrt()
}

fn check_common(n: usize, t: f64, r: Option<f64>) -> Option<String> {
    if n == 0 {
        return Some("n must be at least 1".into());
    }
    if !(t > 0.0) || !t.is_finite() {
        return Some(format!("moment order t={t} must be positive"));
    }
    if let Some(r) = r {
        if !(r > 0.0 && r < 1.0) {
            return Some(format!("r={r} must lie in (0,1)"));
        }
    }
    None
}

/// Adds `(1 − 1/t) log(n+1)` for `t > 1`, where `(Σ|A_k|)^t ≤ Σ|A_k|^t` fails
/// and the power-mean inequality costs a factor `(n+1)^{t−1}`.
fn t_extension(report: &mut BoundReport, n: usize, t: f64) -> f64 {
    if t > 1.0 {
        report.flags.push(FLAG_T_EXTENSION.into());
        (1.0 - 1.0 / t) * ((n + 1) as f64).ln()
    } else {
        0.0
    }
}

/// Turns the bracket `x` into `C_r √x` when `x ≤ 1`, otherwise into the
/// two-term expectation bound `√(2π/k) √x + 2x/(1−r)`.
fn finish_discrepancy(mut report: BoundReport, x: f64, r: f64) -> BoundReport {
    if x.is_nan() {
        return report.violated("bracket is undefined");
    }
    if x == f64::INFINITY {
        return report.violated("bracket is infinite");
    }
    let x = if x < 0.0 {
        report.flags.push(FLAG_CLAMPED.into());
        0.0
    } else {
        x
    };
    report.inputs.insert("x".into(), x);
    report.value = if x <= 1.0 {
        c_r(r) * x.sqrt()
    } else {
        report.flags.push(FLAG_TWO_TERM.into());
        first_term_constant() * x.sqrt() + 2.0 * x / (1.0 - r)
    };
    report
}

fn check_log_moment(name: &str, v: f64) -> Option<String> {
    if v.is_nan() || v == f64::NEG_INFINITY {
        Some(format!("{name} = -inf"))
    } else {
        None
    }
}

fn check_sum(sum: f64) -> Option<String> {
    if !(sum > 0.0) || !sum.is_finite() {
        Some(format!("moment sum {sum} must be finite and positive"))
    } else {
        None
    }
}

/// Expected sector discrepancy bound for polynomials in the monomial basis.
pub fn thm21_bound(n: usize, t: f64, sum_moments: f64, elog_a0: f64, elog_an: f64, r: f64) -> BoundReport {
    let mut report = BoundReport::new(
        "thm21",
        &[
            ("n", n as f64),
            ("t", t),
            ("sum_moments", sum_moments),
            ("elog_a0", elog_a0),
            ("elog_an", elog_an),
            ("r", r),
        ],
    );
    if let Some(why) = check_common(n, t, Some(r))
        .or_else(|| check_sum(sum_moments))
        .or_else(|| check_log_moment("E log|A_0|", elog_a0))
        .or_else(|| check_log_moment("E log|A_n|", elog_an))
    {
        return report.violated(why);
    }
    let ext = t_extension(&mut report, n, t);
    let x = (sum_moments.ln() / t + ext - 0.5 * (elog_a0 + elog_an)) / n as f64;
    finish_discrepancy(report, x, r)
}

/// Uniform-moment form: `M ≥ E|A_k|^t` for all `k`, `L ≤ E log|A_0|, E log|A_n|`.
pub fn cor22_bound(n: usize, t: f64, m_sup: f64, l_inf: f64, r: f64) -> BoundReport {
    let mut report = BoundReport::new(
        "cor22",
        &[("n", n as f64), ("t", t), ("M", m_sup), ("L", l_inf), ("r", r)],
    );
    if let Some(why) = check_common(n, t, Some(r))
        .or_else(|| check_sum(m_sup))
        .or_else(|| check_log_moment("L", l_inf))
    {
        return report.violated(why);
    }
    let ext = t_extension(&mut report, n, t);
    let x = ((((n + 1) as f64).ln() + m_sup.ln()) / t + ext - l_inf) / n as f64;
    finish_discrepancy(report, x, r)
}

/// Expected number of zeros in a compact set at distance `d` from the circle.
pub fn prop23_bound(n: usize, d: f64, t: f64, sum_moments: f64, elog_a0an: f64) -> BoundReport {
    let mut report = BoundReport::new(
        "prop23",
        &[
            ("n", n as f64),
            ("d", d),
            ("t", t),
            ("sum_moments", sum_moments),
            ("elog_a0an", elog_a0an),
        ],
    );
    if !(d > 0.0) {
        return report.violated(format!("distance d={d} must be positive"));
    }
    if let Some(why) = check_common(n, t, None)
        .or_else(|| check_sum(sum_moments))
        .or_else(|| check_log_moment("E log|A_0 A_n|", elog_a0an))
    {
        return report.violated(why);
    }
    let ext = t_extension(&mut report, n, t);
    let bracket = 2.0 * sum_moments.ln() / t + 2.0 * ext - elog_a0an;
    report.value = (d + 1.0) / d * bracket.max(0.0);
    if bracket < 0.0 {
        report.flags.push(FLAG_CLAMPED.into());
    }
    report
}

/// Leading term `(2/π) arcsin(ρ/2) n` of the expected count in `D_ρ(w)`.
pub fn prop25_expected(n: usize, rho: f64) -> f64 {
    2.0 / PI * (rho / 2.0).asin() * n as f64
}

/// General-basis bound with `E log|D_n|` replaced by the floor
/// `log|b_00 b_nn| + E log|A_n| + L`.
pub fn thm31_bound(
    n: usize,
    t: f64,
    sum_moments: f64,
    max_basis_sup: f64,
    elog_dn_floor: f64,
    r: f64,
) -> BoundReport {
    let mut report = BoundReport::new(
        "thm31",
        &[
            ("n", n as f64),
            ("t", t),
            ("sum_moments", sum_moments),
            ("max_basis_sup", max_basis_sup),
            ("elog_dn_floor", elog_dn_floor),
            ("r", r),
        ],
    );
    if let Some(why) = check_common(n, t, Some(r))
        .or_else(|| check_sum(sum_moments))
        .or_else(|| check_log_moment("E log|D_n| floor", elog_dn_floor))
    {
        return report.violated(why);
    }
    if !(max_basis_sup > 0.0) || !max_basis_sup.is_finite() {
        return report.violated("basis sup norm must be finite and positive");
    }
    let ext = t_extension(&mut report, n, t);
    let x = (sum_moments.ln() / t + ext + max_basis_sup.ln() - 0.5 * elog_dn_floor) / n as f64;
    finish_discrepancy(report, x, r)
}

/// `log|b_00 b_nn| + E log|A_n| + L`.
pub fn elog_dn_floor(b00: f64, bnn: f64, elog_an: f64, l: f64) -> f64 {
    (b00 * bnn).abs().ln() + elog_an + l
}

/// Upper bound for `E log Y_n`, `Y_n = max_k |A_k|`, iid coefficients.
pub fn prop41_bound(n: usize, t: f64, mu: f64) -> BoundReport {
    let mut report = BoundReport::new("prop41", &[("n", n as f64), ("t", t), ("mu", mu)]);
    if !(t > 0.0) {
        return report.violated(format!("moment order t={t} must be positive"));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return report.violated(format!("mu={mu} must be finite and positive"));
    }
    report.value = ((((n + 1) as f64).ln()) + mu.ln()) / t;
    report
}

/// Upper bound for `E Y_n` under uniform first-moment and variance bounds.
pub fn prop51_bound(n: usize, m: f64, s: f64) -> BoundReport {
    let mut report = BoundReport::new("prop51", &[("n", n as f64), ("M", m), ("S", s)]);
    if !(m >= 0.0 && s >= 0.0) || !m.is_finite() || !s.is_finite() {
        return report.violated("M and S must be finite and nonnegative");
    }
    report.value = prop51_value(n, m, s);
    report
}

fn prop51_value(n: usize, m: f64, s: f64) -> f64 {
    m + (4.0 * m * m + s * s).sqrt() * ((n + 1) as f64).sqrt()
}

/// `√(Σ(c_i − c̄)² · Σ[(μ_i − μ̄)² + σ_i²])`, bounding `|E Σ c_i (X_{i:n} − μ̄)|`.
pub fn arnold_groeneveld_bound(c: &[f64], mu: &[f64], sigma: &[f64]) -> Result<f64> {
    if c.is_empty() || c.len() != mu.len() || c.len() != sigma.len() {
        return Err(Error::Config(
            "weights, means and deviations need equal nonzero length".into(),
        ));
    }
    let len = c.len() as f64;
    let c_bar = c.iter().sum::<f64>() / len;
    let mu_bar = mu.iter().sum::<f64>() / len;
    let sc: f64 = c.iter().map(|x| (x - c_bar).powi(2)).sum();
    let sm: f64 = mu
        .iter()
        .zip(sigma)
        .map(|(m, s)| (m - mu_bar).powi(2) + s * s)
        .sum();
    Ok((sc * sm).sqrt())
}

/// Dependent-coefficient bound through `E log‖P_n‖ ≤ log(n+1) + log E Y_n`.
pub fn thm52_bound(n: usize, elog_a0: f64, elog_an: f64, m: f64, s: f64, r: f64) -> BoundReport {
    let mut report = BoundReport::new(
        "thm52",
        &[
            ("n", n as f64),
            ("elog_a0", elog_a0),
            ("elog_an", elog_an),
            ("M", m),
            ("S", s),
            ("r", r),
        ],
    );
    if let Some(why) = check_common(n, 1.0, Some(r))
        .or_else(|| check_log_moment("E log|A_0|", elog_a0))
        .or_else(|| check_log_moment("E log|A_n|", elog_an))
    {
        return report.violated(why);
    }
    if !(m > 0.0 && s >= 0.0) || !m.is_finite() || !s.is_finite() {
        return report.violated("M must be positive and S nonnegative, both finite");
    }
    report.flags.push(FLAG_EXPLICIT_CHAIN.into());
    let chain = ((n + 1) as f64).ln() + prop51_value(n, m, s).ln();
    report.inputs.insert("chain".into(), chain);
    let x = (chain - 0.5 * (elog_a0 + elog_an)) / n as f64;
    finish_discrepancy(report, x, r)
}

/// Per-sample right-hand side, packaged as a report.
pub fn et61_report(n: usize, r: f64, log_ratio: f64, normalized_mahler: f64) -> BoundReport {
    let mut report = BoundReport::new(
        "et61",
        &[
            ("n", n as f64),
            ("r", r),
            ("log_sup_over_sqrt_c0cn", log_ratio),
            ("normalized_mahler", normalized_mahler),
        ],
    );
    report.value = erdos_turan_value(n, r, log_ratio, normalized_mahler);
    report
}

/// `√(2π/k) √(ℓ/n) + 2m / (n(1−r))`.
pub fn erdos_turan_value(n: usize, r: f64, log_ratio: f64, normalized_mahler: f64) -> f64 {
    let n = n as f64;
    first_term_constant() * (log_ratio.max(0.0) / n).sqrt() + 2.0 * normalized_mahler.max(0.0) / (n * (1.0 - r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn catalan_value_and_partial_sums() {
        assert!((catalan() - CATALAN_REFERENCE).abs() <= 1e-12);
        assert_eq!(catalan_partial_sum(0), 1.0);
        assert_relative_eq!(catalan_partial_sum(1), 1.0 - 1.0 / 9.0);
        let k = catalan();
        assert!(catalan_partial_sum(0) > k && k > catalan_partial_sum(1));
        // Independent oracle: the mean of consecutive partial sums converges
        // like k^{-3}.
        let avg = 0.5 * (catalan_partial_sum(100_000) + catalan_partial_sum(100_001));
        assert!((avg - k).abs() < 1e-13);
    }

    #[test]
    fn catalan_bracketed_at_every_level() {
        let k = catalan();
        for j in 0..2000 {
            let s = catalan_partial_sum(j);
            if j % 2 == 0 {
                assert!(s > k);
            } else {
                assert!(s < k);
            }
        }
    }

    #[test]
    fn c_r_examples() {
        assert!((c_r(0.5) - 6.61909).abs() < 1e-5);
        assert_relative_eq!(first_term_constant(), (TAU / 0.915_965_594_177_219).sqrt(), epsilon = 1e-12);
        assert!(c_r(0.99) > 200.0);
        assert!(c_r(0.6) > c_r(0.5));
    }

    #[test]
    fn thm21_example() {
        let b = thm21_bound(99, 1.0, 100.0, 0.0, 0.0, 0.5);
        assert_relative_eq!(b.value, c_r(0.5) * (100f64.ln() / 99.0).sqrt(), epsilon = 1e-14);
        assert!(((100f64.ln() / 99.0).sqrt() - 0.215_678).abs() < 1e-6);
        assert!(b.flags.is_empty());
        let c = cor22_bound(99, 1.0, 1.0, 0.0, 0.5);
        assert_relative_eq!(c.value, b.value, epsilon = 1e-14);
        assert!(cor22_bound(99, 1.0, 2.0, 0.0, 0.5).value > c.value);
    }

    #[test]
    fn thm21_flags() {
        let b = thm21_bound(2, 1.0, 100.0, 0.0, 0.0, 0.5);
        assert!(b.has_flag(FLAG_TWO_TERM));
        let x = 100f64.ln() / 2.0;
        assert_relative_eq!(b.value, first_term_constant() * x.sqrt() + 4.0 * x, epsilon = 1e-14);
        assert!(b.value > c_r(0.5) * x.sqrt());

        let b = thm21_bound(50, 2.0, 51.0, 0.0, 0.0, 0.5);
        assert!(b.has_flag(FLAG_T_EXTENSION));
        assert_relative_eq!(b.inputs["x"], 51f64.ln() / 50.0, epsilon = 1e-14);

        let b = thm21_bound(10, 1.0, 11.0, f64::NEG_INFINITY, 0.0, 0.5);
        assert!(b.is_violation() && b.value.is_infinite());
        let json = b.to_json();
        assert!(json.contains("\"value\":null"));
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.value, f64::INFINITY);
        assert!(thm21_bound(10, 1.0, f64::INFINITY, 0.0, 0.0, 0.5).is_violation());
        assert!(thm21_bound(10, 1.0, 11.0, 0.0, 0.0, 1.0).is_violation());
    }

    #[test]
    fn prop23_examples() {
        let b = prop23_bound(99, 0.5, 1.0, 100.0, 0.0);
        assert_relative_eq!(b.value, 3.0 * 2.0 * 100f64.ln(), epsilon = 1e-12);
        assert!((b.value - 27.63).abs() < 0.01);
        assert!(prop23_bound(99, 1.0, 1.0, 100.0, 0.0).value < b.value);
    }

    #[test]
    fn prop25_examples() {
        assert_relative_eq!(prop25_expected(99, 1.0), 33.0, epsilon = 1e-12);
        assert_relative_eq!(prop25_expected(64, 2f64.sqrt()), 32.0, epsilon = 1e-12);
        assert_relative_eq!(prop25_expected(64, 2.0), 64.0, epsilon = 1e-12);
    }

    #[test]
    fn thm31_specializes_to_thm21() {
        for &(n, t, s, e) in &[(99usize, 1.0, 100.0, 0.0), (64, 0.5, 70.3, -0.3), (8, 0.25, 12.0, 0.1)] {
            let a = thm21_bound(n, t, s, e, e, 0.5);
            let floor = elog_dn_floor(1.0, 1.0, e, e);
            let b = thm31_bound(n, t, s, 1.0, floor, 0.5);
            assert!((a.value - b.value).abs() <= 1e-12);
        }
        // z^k/√(2π): the sup-norm term and the floor term cancel.
        let s = TAU.sqrt().recip();
        let a = thm31_bound(64, 1.0, 65.0, s, elog_dn_floor(s, s, 0.0, 0.0), 0.5);
        let b = thm21_bound(64, 1.0, 65.0, 0.0, 0.0, 0.5);
        assert_relative_eq!(a.value, b.value, epsilon = 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn prop41_examples() {
        assert_relative_eq!(prop41_bound(99, 1.0, 1.0).value, 100f64.ln());
        assert!((prop41_bound(99, 2.0, 1.0).value - 2.30259).abs() < 1e-5);
        assert!(prop41_bound(99, 3.0, 1.0).value < prop41_bound(99, 2.0, 1.0).value);
    }

    #[test]
    fn prop51_examples() {
        assert_relative_eq!(prop51_bound(99, 1.0, 1.0).value, 1.0 + 5f64.sqrt() * 10.0);
        assert!((prop51_bound(99, 1.0, 1.0).value - 23.36).abs() < 0.01);
        let c = 0.7;
        assert!(c <= prop51_bound(40, c, 0.0).value);
        assert_relative_eq!(prop51_bound(40, c, 0.0).value, c + 2.0 * c * 41f64.sqrt());
    }

    #[test]
    fn arnold_groeneveld_examples() {
        assert_eq!(arnold_groeneveld_bound(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0; 5]).unwrap(), 0.0);
        assert_eq!(arnold_groeneveld_bound(&[0.0, 1.0, 5.0], &[2.0; 3], &[0.0; 3]).unwrap(), 0.0);
        assert!(arnold_groeneveld_bound(&[1.0], &[], &[]).is_err());
        // Symbolic oracle at n = 2 (three terms), c = (0,0,1):
        // Σ(c−c̄)² = 2/9 + 4/9 = 2/3.
        let mu = [0.5, 0.8, 1.0];
        let sigma = [0.3, 0.2, 0.1];
        let mbar: f64 = mu.iter().sum::<f64>() / 3.0;
        let sm: f64 = mu.iter().zip(&sigma).map(|(m, s)| (m - mbar).powi(2) + s * s).sum();
        let ag = arnold_groeneveld_bound(&[0.0, 0.0, 1.0], &mu, &sigma).unwrap();
        assert_relative_eq!(ag, (2.0 / 3.0 * sm).sqrt(), epsilon = 1e-15);
        assert!(ag <= ((4.0 * 1.0 + 0.09) * 3.0f64).sqrt());
    }

    #[test]
    fn thm52_examples() {
        let n = 64;
        let b = thm52_bound(n, 0.0, 0.0, 1.0, 0.0, 0.5);
        let chain = 65f64.ln() + (1.0 + 2.0 * 65f64.sqrt()).ln();
        assert_relative_eq!(b.inputs["chain"], chain, epsilon = 1e-14);
        assert!(b.has_flag("explicit chain"));
        // Complex Gaussian: E|A| = √π/2, Var|A| = 1 − π/4, E log|A| = −γ/2.
        let g = crate::special::EULER_GAMMA;
        let m = PI.sqrt() / 2.0;
        let s = (1.0 - PI / 4.0f64).sqrt();
        let t52 = thm52_bound(n, -g / 2.0, -g / 2.0, m, s, 0.5);
        let t21 = thm21_bound(n, 1.0, 65.0 * m, -g / 2.0, -g / 2.0, 0.5);
        assert!(t52.value > t21.value);
        assert!(thm52_bound(4096, 0.0, 0.0, 1.0, 0.0, 0.5).value < b.value);
    }

    #[test]
    fn report_json_shape() {
        let b = prop51_bound(99, 1.0, 1.0);
        let v: serde_json::Value = serde_json::from_str(&b.to_json()).unwrap();
        for key in ["name", "value", "flags", "inputs"] {
            assert!(v.get(key).is_some());
        }
        assert_eq!(v["name"], "prop51");
    }

    #[test]
    fn erdos_turan_z8_minus_1() {
        let v = erdos_turan_value(8, 0.5, 2f64.ln(), 0.0);
        assert!((v - 0.7709).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn bounds_nonnegative_and_decreasing(n in 8usize..2000, t in 0.1f64..1.0, m in 0.5f64..4.0, l in -2.0f64..0.5) {
            let a = cor22_bound(n, t, m, l, 0.5);
            let b = cor22_bound(2 * n, t, m, l, 0.5);
            prop_assert!(a.value >= 0.0 && b.value >= 0.0);
            // (log(n+1)+c)/n is decreasing once log(n+1)+c ≥ 1.
            if (((n + 1) as f64).ln() + m.ln()) / t - l >= 1.0 {
                prop_assert!(b.value <= a.value + 1e-12);
            }
        }

        #[test]
        fn arnold_groeneveld_prop51_identity(n in 1usize..60, m in 0.1f64..3.0, s in 0.0f64..3.0, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mu: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..=m)).collect();
            let sigma: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..=s)).collect();
            let mut c = vec![0.0; n + 1];
            c[n] = 1.0;
            let ag = arnold_groeneveld_bound(&c, &mu, &sigma).unwrap();
            prop_assert!(ag <= ((4.0 * m * m + s * s) * (n + 1) as f64).sqrt() + 1e-12);
        }

        #[test]
        fn two_term_form_dominates(x in 0.0f64..5.0, r in 0.05f64..0.95) {
            let combined = c_r(r) * x.sqrt();
            let two = first_term_constant() * x.sqrt() + 2.0 * x / (1.0 - r);
            if x <= 1.0 {
                prop_assert!(two <= combined + 1e-12);
            } else {
                prop_assert!(two >= combined);
            }
        }
    }
}
