//! Sweep configuration files.
//!
//! ```toml
//! [ensemble]
//! family = "moving-average"   # complex-gaussian | real-gaussian | uniform-disk
//!                             # | rademacher | bernoulli | pareto | moving-average
//! scale = 1.0                 # optional, default 1
//! p = 0.5                     # bernoulli only
//! alpha = 3.0                 # pareto only
//! base = "rademacher"         # moving-average only
//! weights = [1.0, 1.0]        # moving-average only
//!
//! [basis]
//! kind = "szego"              # monomial | szego
//! weight = "trig-poly"        # constant | trig-poly
//! c = 1.0                     # constant weight value
//! fourier = [1.0, 0.3]        # a_0, a_1, ... of a_0 + Σ 2 a_j cos(jθ)
//!
//! [sweep]
//! degrees = [16, 32, 64]
//! trials = 200
//! t = 0.5
//! r = 0.5
//! seed = 1
//! sectors = [[0.0, 1.0]]      # explicit (alpha, beta) pairs, or:
//! random_sectors = 8
//! sector_seed = 99
//! threads = 0
//!
//! [regions]
//! list = [{ kind = "disk", center_theta = 0.0, radius = 1.0 },
//!         { kind = "origin-disk", radius = 0.5 }]
//!
//! [output]
//! dir = "out/kac"
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bases::{BasisKind, WeightSpec};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, SectorChoice, DEFAULT_RANDOM_SECTORS, DEFAULT_SECTOR_SEED};
use crate::zerostats::RegionSpec;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub ensemble: EnsembleSection,
    pub basis: BasisSection,
    pub sweep: SweepSection,
    pub regions: RegionsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub family: String,
    pub scale: f64,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub base: Option<String>,
    pub weights: Option<Vec<f64>>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            family: "complex-gaussian".into(),
            scale: 1.0,
            p: None,
            alpha: None,
            base: None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    pub kind: String,
    pub weight: Option<String>,
    pub c: Option<f64>,
    pub fourier: Option<Vec<f64>>,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            kind: "monomial".into(),
            weight: None,
            c: None,
            fourier: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub degrees: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub t: Option<f64>,
    pub r: Option<f64>,
    pub seed: Option<u64>,
    pub sectors: Option<Vec<(f64, f64)>>,
    pub random_sectors: Option<usize>,
    pub sector_seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionsSection {
    pub list: Option<Vec<RegionSpec>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Parses `family` or `family:param` (`bernoulli:0.3`, `pareto:2.5`).
pub fn parse_ensemble(text: &str) -> Result<EnsembleSpec> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p
                .parse()
                .map_err(|_| Error::Config(format!("bad ensemble parameter {p:?}")))?;
            (n, Some(v))
        }
        None => (text, None),
    };
    let spec = family_spec(name, param, None, None)?;
    spec.validate()?;
    Ok(spec)
}

fn family_spec(name: &str, param: Option<f64>, base: Option<&str>, weights: Option<&[f64]>) -> Result<EnsembleSpec> {
    let no_param = |spec: EnsembleSpec| match param {
        Some(_) => Err(Error::Config(format!("ensemble {name:?} takes no parameter"))),
        None => Ok(spec),
    };
    match name {
        "complex-gaussian" => no_param(EnsembleSpec::complex_gaussian()),
        "real-gaussian" => no_param(EnsembleSpec::real_gaussian()),
        "uniform-disk" => no_param(EnsembleSpec::uniform_disk()),
        "rademacher" => no_param(EnsembleSpec::rademacher()),
        "bernoulli" => Ok(EnsembleSpec::bernoulli(param.unwrap_or(0.5))),
        "pareto" => param
            .map(EnsembleSpec::pareto)
            .ok_or_else(|| Error::Config("pareto needs alpha".into())),
        "moving-average" => {
            let base = parse_ensemble(base.unwrap_or("rademacher"))?;
            let weights = weights.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0, 1.0]);
            no_param(EnsembleSpec::moving_average(base, weights))
        }
        other => Err(Error::Config(format!("unknown ensemble family {other:?}"))),
    }
}

impl EnsembleSection {
    pub fn to_spec(&self) -> Result<EnsembleSpec> {
        let ma = self.family == "moving-average";
        if !ma && (self.base.is_some() || self.weights.is_some()) {
            return Err(Error::Config("base and weights apply only to moving-average".into()));
        }
        let param = match self.family.as_str() {
            "bernoulli" => {
                if self.alpha.is_some() {
                    return Err(Error::Config("alpha applies only to pareto".into()));
                }
                self.p
            }
            "pareto" => {
                if self.p.is_some() {
                    return Err(Error::Config("p applies only to bernoulli".into()));
                }
                self.alpha
            }
            _ => {
                if self.p.is_some() || self.alpha.is_some() {
                    return Err(Error::Config(format!("{} takes no p or alpha", self.family)));
                }
                None
            }
        };
        let spec = family_spec(&self.family, param, self.base.as_deref(), self.weights.as_deref())?.with_scale(self.scale);
        spec.validate()?;
        Ok(spec)
    }
}

impl BasisSection {
    pub fn to_kind(&self) -> Result<BasisKind> {
        match self.kind.as_str() {
            "monomial" => {
                if self.weight.is_some() || self.c.is_some() || self.fourier.is_some() {
                    return Err(Error::Config("monomial basis takes no weight".into()));
                }
                Ok(BasisKind::Monomial)
            }
            "szego" => {
                let weight = match (self.weight.as_deref().unwrap_or("constant"), self.c, &self.fourier) {
                    ("constant", c, None) => WeightSpec::constant(c.unwrap_or(1.0)),
                    ("trig-poly", None, Some(f)) => WeightSpec::trig_poly(f.clone()),
                    ("trig-poly", _, None) => return Err(Error::Config("trig-poly weight needs fourier".into())),
                    (w @ ("constant" | "trig-poly"), _, _) => {
                        return Err(Error::Config(format!("conflicting keys for {w} weight")))
                    }
                    (other, _, _) => return Err(Error::Config(format!("unknown weight {other:?}"))),
                };
                weight.validate()?;
                Ok(BasisKind::Szego { weight })
            }
            other => Err(Error::Config(format!("unknown basis kind {other:?}"))),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn threads(&self) -> usize {
        self.sweep.threads.unwrap_or(0)
    }

    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::new(self.ensemble.to_spec()?);
        c.basis = self.basis.to_kind()?;
        let s = &self.sweep;
        if let Some(d) = &s.degrees {
            c.degrees = d.clone();
        }
        if let Some(t) = s.trials {
            c.trials = t;
        }
        if let Some(t) = s.t {
            c.t = t;
        }
        if let Some(r) = s.r {
            c.r = r;
        }
        if let Some(seed) = s.seed {
            c.master_seed = seed;
        }
        c.sectors = match (&s.sectors, s.random_sectors, s.sector_seed) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Config("give either sectors or random_sectors/sector_seed".into()))
            }
            (Some(list), None, None) => SectorChoice::Explicit { sectors: list.clone() },
            (None, count, seed) => SectorChoice::Random {
                count: count.unwrap_or(DEFAULT_RANDOM_SECTORS),
                seed: seed.unwrap_or(DEFAULT_SECTOR_SEED),
            },
        };
        if let Some(list) = &self.regions.list {
            c.regions = list.clone();
        }
        c.output = self.output.dir.clone();
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Family;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ConfigFile::parse("").unwrap().to_experiment().unwrap();
        assert_eq!(c, ExperimentConfig::new(EnsembleSpec::complex_gaussian()));
    }

    #[test]
    fn full_file() {
        let text = r#"
[ensemble]
family = "moving-average"
base = "rademacher"
weights = [1.0, 1.0]

[basis]
kind = "szego"
weight = "trig-poly"
fourier = [1.0, 0.3]

[sweep]
degrees = [8, 16, 32]
trials = 10
t = 0.5
r = 0.4
seed = 7
sectors = [[0.0, 1.0], [5.0, 7.0]]
threads = 2

[regions]
list = [{ kind = "origin-disk", radius = 0.5 }]

[output]
dir = "out/ma"
"#;
        let file = ConfigFile::parse(text).unwrap();
        assert_eq!(file.threads(), 2);
        let c = file.to_experiment().unwrap();
        assert!(matches!(c.ensemble.family, Family::MovingAverage { window: 2, .. }));
        assert_eq!(c.basis, BasisKind::Szego { weight: WeightSpec::trig_poly(vec![1.0, 0.3]) });
        assert_eq!(c.degrees, vec![8, 16, 32]);
        assert_eq!((c.trials, c.t, c.r, c.master_seed), (10, 0.5, 0.4, 7));
        assert_eq!(c.sectors, SectorChoice::Explicit { sectors: vec![(0.0, 1.0), (5.0, 7.0)] });
        assert_eq!(c.regions, vec![RegionSpec::OriginDisk { radius: 0.5 }]);
        assert_eq!(c.output, Some(PathBuf::from("out/ma")));
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "[ensemble]\nfamly = \"rademacher\"",
            "[sweeps]\ntrials = 3",
            "[sweep]\ntrails = 3",
            "[regions]\nlist = [{ kind = \"disk\", center_theta = 0.0, radius = 1.0, extra = 1 }]",
        ] {
            assert!(matches!(ConfigFile::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn semantic_errors() {
        for text in [
            "[ensemble]\nfamily = \"cauchy\"",
            "[ensemble]\nfamily = \"rademacher\"\np = 0.5",
            "[ensemble]\nfamily = \"pareto\"",
            "[basis]\nkind = \"szego\"\nweight = \"trig-poly\"\nfourier = [1.0, 0.5]",
            "[basis]\nkind = \"monomial\"\nc = 2.0",
            "[sweep]\ndegrees = []",
            "[sweep]\ndegrees = [16, 8]",
            "[sweep]\nt = -1.0",
            "[sweep]\nsectors = [[0.0, 1.0]]\nrandom_sectors = 3",
        ] {
            let r = ConfigFile::parse(text).and_then(|f| f.to_experiment());
            assert!(matches!(r, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn ensemble_flag_syntax() {
        assert_eq!(parse_ensemble("rademacher").unwrap(), EnsembleSpec::rademacher());
        assert_eq!(parse_ensemble("bernoulli:0.3").unwrap(), EnsembleSpec::bernoulli(0.3));
        assert_eq!(parse_ensemble("pareto:2.5").unwrap(), EnsembleSpec::pareto(2.5));
        assert!(parse_ensemble("rademacher:2").is_err());
        assert!(parse_ensemble("bernoulli:x").is_err());
        assert!(parse_ensemble("bernoulli:1.5").is_err());
    }
}
