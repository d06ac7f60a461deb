use thiserror::Error;

use crate::domain::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario is invalid:\n{}", format_violations(.0))]
    InvalidScenario(Vec<ConfigViolation>),

    #[error("cannot parse scenario: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("peak-to-average ratio is undefined for an all-zero load profile")]
    UndefinedPar,

    #[error("tournament size {k} out of range for population of {population}")]
    TournamentSize { k: usize, population: usize },

    #[error("search space of {size} schedules exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },

    #[error("missing run artifact: {0}")]
    MissingArtifact(String),
}

fn format_violations(violations: &[ConfigViolation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
