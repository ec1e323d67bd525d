//! Survey preferences, grasp frequencies and the similarity report.

mod frequency;
mod report;
mod survey;

pub use frequency::{
    deterministic_frequency, empirical_frequency, frequencies_to_csv, load_frequencies, parse_frequencies,
    MethodFrequency, Provenance,
};
pub use report::{build_report, round_half_even, ReportRow, SimilarityReport, AVERAGE_TOLERANCE};
pub use survey::{ingest_survey, parse_survey, FractionUnit, SurveyRecord};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("frequency {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("{object}: fraction {value} outside [0, 1]")]
    InvalidFraction { object: String, value: f64 },
    #[error("{object}: {count} grasps in region a is not a whole number")]
    NonIntegralCount { object: String, count: f64 },
    #[error("grasp set is empty")]
    EmptyGraspSet,
    #[error("no survey row for {0}")]
    MissingSurveyRow(String),
    #[error("duplicate entry for {0}")]
    DuplicateObject(String),
    #[error("method {0} mixes measured and reference rows")]
    MixedProvenance(String),
    #[error("stored average for {0} does not match its rows")]
    InconsistentAverage(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EvalError {
    fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        EvalError::Parse { line, message: e.to_string() }
    }
}

/// `1 − |p_h − p_x|`: 1 when the method picks part a exactly as often as
/// people do.
///
/// ```
/// use semgrasp::evaluation::similarity_score;
/// assert!((similarity_score(0.921, 1.0).unwrap() - 0.921).abs() < 1e-12);
/// assert!(similarity_score(1.2, 0.5).is_err());
/// ```
pub fn similarity_score(p_a_human: f64, p_a_method: f64) -> Result<f64, EvalError> {
    for p in [p_a_human, p_a_method] {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvalError::OutOfRange(p));
        }
    }
    Ok(1.0 - (p_a_human - p_a_method).abs())
}

/// Smallest count `k` in `0..=n` whose similarity `1 − |p_h − k/n|` lies
/// within `tolerance` of `published`.
pub fn backsolve_count(p_a_human: f64, published: f64, n: u32, tolerance: f64) -> Option<u32> {
    (0..=n).find(|&k| (1.0 - (p_a_human - k as f64 / n as f64).abs() - published).abs() <= tolerance)
}
