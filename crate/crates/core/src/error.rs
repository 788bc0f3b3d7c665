use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// `E[|A|^t]` diverges for the requested order.
    #[error("infinite moment: E[|A|^{t}] diverges for {family}")]
    InfiniteMoment { family: String, t: f64 },

    /// A hypothesis of a bound (finite log-moment, finite variance, ...) fails.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    #[error("ill-conditioned moment system: {0}")]
    Conditioning(String),

    #[error("degenerate draw: leading coefficient is zero")]
    DegenerateDraw,

    #[error("endpoint degeneracy: c_0 * c_n = 0")]
    EndpointDegeneracy,

    #[error("root finder did not converge after {iterations} iterations (max step {max_step:e})")]
    NonConvergence {
        iterations: usize,
        max_step: f64,
        partial: Vec<Complex64>,
    },

    #[error("ensemble produced {redraws} consecutive degenerate draws")]
    DegenerateEnsemble { redraws: u32 },

    #[error(
        "Erdos-Turan check failed at n={n}, trial={trial}, sector={sector}: {lhs} > {rhs}"
    )]
    ErdosTuran {
        n: usize,
        trial: u64,
        sector: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("n={n}, trial={trial}: {source}")]
    Trial {
        n: usize,
        trial: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips [`Error::Trial`] wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
