//! Zero counting measure: region counts, sector discrepancy and the per-sample
//! Erdős–Turán right-hand side.
//!
//! Boundary conventions: a sector contains `arg z = α` and excludes `arg z = β`;
//! annulus radii are strict; disks are open; polygon boundaries count as inside.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::erdos_turan_value;
use crate::error::{Error, Result};
use crate::polycore::{mahler_measure, normalize_by_endpoints, sup_norm_circle, Polynomial, RootSet, DEFAULT_GRID_FACTOR};

/// `A_r(α,β) = {r < |z| < 1/r, α ≤ arg z < β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularSector {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl AnnularSector {
    pub fn new(r: f64, alpha: f64, beta: f64) -> Result<Self> {
        let s = Self { r, alpha, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::Config(format!("sector radius r={} must lie in (0,1)", self.r)));
        }
        if !(0.0..TAU).contains(&self.alpha) {
            return Err(Error::Config(format!("sector alpha={} must lie in [0, 2π)", self.alpha)));
        }
        let width = self.beta - self.alpha;
        // Full turns built as α + 2π may round just past 2π.
        if !(width > 0.0 && width <= TAU * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "sector needs 0 < beta - alpha <= 2π (got {width})"
            )));
        }
        Ok(())
    }

    /// `(β − α) / 2π`.
    pub fn arc_fraction(&self) -> f64 {
        ((self.beta - self.alpha) / TAU).min(1.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        if !(m > self.r && m < 1.0 / self.r) {
            return false;
        }
        let offset = (arg_0_2pi(z) - self.alpha).rem_euclid(TAU);
        offset < self.beta - self.alpha
    }
}

/// `arg z` in `[0, 2π)`.
pub fn arg_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        (a + TAU).min(TAU.next_down())
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    Sector {
        r: f64,
        alpha: f64,
        beta: f64,
    },
    /// `{|z − e^{iθ}| < ρ}`.
    Disk {
        center_theta: f64,
        radius: f64,
    },
    /// Polygon with vertices `e^{iθ_v}`, listed counterclockwise.
    Polygon {
        vertices_theta: Vec<f64>,
    },
    /// `{|z| ≤ r} ∪ {|z| ≥ 1/r}`.
    AnnulusComplement {
        r: f64,
    },
    /// Closed disk `{|z| ≤ ρ}` about the origin, `ρ < 1`.
    OriginDisk {
        radius: f64,
    },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegionSpec::Sector { r, alpha, beta } => AnnularSector::new(*r, *alpha, *beta).map(|_| ()),
            RegionSpec::Disk { center_theta, radius } => {
                if !center_theta.is_finite() || !(*radius > 0.0 && *radius < 2.0) {
                    return Err(Error::Config("disk needs finite center_theta and radius in (0,2)".into()));
                }
                Ok(())
            }
            RegionSpec::Polygon { vertices_theta } => {
                if vertices_theta.len() < 3 {
                    return Err(Error::Config("polygon needs at least 3 vertices".into()));
                }
                let start = vertices_theta[0];
                let increasing = vertices_theta.windows(2).all(|w| w[1] > w[0]);
                if !increasing || vertices_theta.last().unwrap() - start >= TAU {
                    return Err(Error::Config(
                        "polygon vertices must be counterclockwise within one turn".into(),
                    ));
                }
                Ok(())
            }
            RegionSpec::AnnulusComplement { r } => {
                if !(*r > 0.0 && *r < 1.0) {
                    return Err(Error::Config("annulus-complement needs r in (0,1)".into()));
                }
                Ok(())
            }
            RegionSpec::OriginDisk { radius } => {
                if !(*radius > 0.0 && *radius < 1.0) {
                    return Err(Error::Config("origin-disk needs radius in (0,1)".into()));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegionSpec::Sector { .. } => "sector",
            RegionSpec::Disk { .. } => "disk",
            RegionSpec::Polygon { .. } => "polygon",
            RegionSpec::AnnulusComplement { .. } => "annulus-complement",
            RegionSpec::OriginDisk { .. } => "origin-disk",
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            RegionSpec::Sector { r, alpha, beta } => AnnularSector {
                r: *r,
                alpha: *alpha,
                beta: *beta,
            }
            .contains(z),
            RegionSpec::Disk { center_theta, radius } => {
                (z - Complex64::from_polar(1.0, *center_theta)).norm() < *radius
            }
            RegionSpec::Polygon { vertices_theta } => {
                let v: Vec<Complex64> = vertices_theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
                point_in_polygon(z, &v)
            }
            RegionSpec::AnnulusComplement { r } => {
                let m = z.norm();
                m <= *r || m >= 1.0 / *r
            }
            RegionSpec::OriginDisk { radius } => z.norm() <= *radius,
        }
    }

    /// The `d` for which the zero-count bound with prefactor `(d+1)/d` covers
    /// this region. For an origin disk this is its distance to the circle; an
    /// annulus complement is exactly the set `ℂ \ A_{1/(d+1)}(0, 2π)`.
    pub fn separation_parameter(&self) -> Option<f64> {
        match self {
            RegionSpec::AnnulusComplement { r } => Some(1.0 / r - 1.0),
            RegionSpec::OriginDisk { radius } => Some(1.0 - radius),
            _ => None,
        }
    }

    /// Disk radius `ρ` for the disks centered on the circle.
    pub fn disk_radius(&self) -> Option<f64> {
        match self {
            RegionSpec::Disk { radius, .. } => Some(*radius),
            _ => None,
        }
    }
}

const BOUNDARY_EPS: f64 = 1e-12;

fn point_in_polygon(z: Complex64, v: &[Complex64]) -> bool {
    let n = v.len();
    for i in 0..n {
        if distance_to_segment(z, v[i], v[(i + 1) % n]) <= BOUNDARY_EPS {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn distance_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

pub fn sector_count(roots: &RootSet, s: &AnnularSector) -> usize {
    roots.roots.iter().filter(|&&z| s.contains(z)).count()
}

/// `τ_n(A_r(α,β))`.
pub fn sector_measure(roots: &RootSet, s: &AnnularSector) -> f64 {
    if roots.is_empty() {
        return 0.0;
    }
    sector_count(roots, s) as f64 / roots.len() as f64
}

/// `|τ_n(A_r(α,β)) − (β−α)/2π|`.
pub fn sector_discrepancy(roots: &RootSet, s: &AnnularSector) -> f64 {
    (sector_measure(roots, s) - s.arc_fraction()).abs()
}

/// `n τ_n(region)`.
pub fn region_count(roots: &RootSet, region: &RegionSpec) -> usize {
    roots.roots.iter().filter(|&&z| region.contains(z)).count()
}

/// The two pieces of the per-sample bound, with their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErdosTuranTerms {
    /// `log(‖P‖_∞ / √|c_0 c_n|)` using the certified upper end of the sup norm.
    pub log_ratio: f64,
    /// `m(P / √|c_0 c_n|)`.
    pub normalized_mahler: f64,
    pub first: f64,
    pub second: f64,
}

impl ErdosTuranTerms {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

/// Evaluates both terms. Independent of `α, β`; only `r` enters.
pub fn erdos_turan_terms(p: &Polynomial, roots: &RootSet, r: f64) -> Result<ErdosTuranTerms> {
    let sup = sup_norm_circle(p, DEFAULT_GRID_FACTOR);
    erdos_turan_terms_with_sup(p, roots, r, sup.hi)
}

pub fn erdos_turan_terms_with_sup(p: &Polynomial, roots: &RootSet, r: f64, sup_hi: f64) -> Result<ErdosTuranTerms> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(format!("r={r} must lie in (0,1)")));
    }
    let (_, log_scale) = normalize_by_endpoints(p)?;
    let n = p.degree();
    let log_ratio = (sup_hi.ln() - log_scale).max(0.0);
    let normalized_mahler = (mahler_measure(p, roots) - log_scale).max(0.0);
    let total = erdos_turan_value(n, r, log_ratio, normalized_mahler);
    let second = 2.0 * normalized_mahler / (n as f64 * (1.0 - r));
    Ok(ErdosTuranTerms {
        log_ratio,
        normalized_mahler,
        first: total - second,
        second,
    })
}

pub fn erdos_turan_rhs(p: &Polynomial, roots: &RootSet, s: &AnnularSector) -> Result<f64> {
    Ok(erdos_turan_terms(p, roots, s.r)?.total())
}
