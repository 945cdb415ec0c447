use thiserror::Error;

/// Every failure the numerical routines can report.
///
/// Poles are carried with their lattice indices so that callers can tell a
/// genuine singularity apart from a loss of convergence.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of {function} at lattice index ({m}, {n})")]
    Pole {
        function: &'static str,
        m: i64,
        n: i64,
    },
    #[error("{what} did not converge within {terms} terms")]
    Truncation { what: &'static str, terms: usize },
    #[error("unsupported precision: {0} bits")]
    Precision(u32),
    #[error("resonant denominator 1 - p^{i} q^{j} v^2 vanishes")]
    Resonance { i: i64, j: i64 },
    #[error("degenerate problem: {0}")]
    Degeneracy(String),
    #[error("unpaired root {root} (closest reciprocal mismatch {mismatch:e})")]
    Pairing { root: String, mismatch: f64 },
    #[error("classification failed: {0}")]
    Classification(String),
    #[error("seed does not solve the leading-order equation (residual {residual:e})")]
    SeedInconsistent { residual: f64 },
    #[error("solution invalid: {0}")]
    InvalidSolution(String),
    #[error("{what} failed to converge after {iterations} iterations (last residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("transfer-matrix denominator vanishes at site {site} (lattice index ({m}, {n}))")]
    SitePole { site: usize, m: i64, n: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable numeric code used across the C boundary and in CLI exit statuses.
    pub fn code(&self) -> i32 {
        match self {
            Error::Domain(_) => 1,
            Error::Pole { .. } => 2,
            Error::Truncation { .. } => 3,
            Error::Precision(_) => 4,
            Error::Resonance { .. } => 5,
            Error::Degeneracy(_) => 6,
            Error::Pairing { .. } => 7,
            Error::Classification(_) => 8,
            Error::SeedInconsistent { .. } => 9,
            Error::InvalidSolution(_) => 10,
            Error::Convergence { .. } => 11,
            Error::IllConditioned(_) => 12,
            Error::Config(_) => 13,
            Error::SitePole { .. } => 14,
        }
    }

    /// Short machine-readable tag for JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Pole { .. } => "pole",
            Error::Truncation { .. } => "truncation",
            Error::Precision(_) => "precision",
            Error::Resonance { .. } => "resonance",
            Error::Degeneracy(_) => "degeneracy",
            Error::Pairing { .. } => "pairing",
            Error::Classification(_) => "classification",
            Error::SeedInconsistent { .. } => "seed-inconsistent",
            Error::InvalidSolution(_) => "invalid-solution",
            Error::Convergence { .. } => "convergence",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::Config(_) => "config",
            Error::SitePole { .. } => "site-pole",
        }
    }
}
