use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::language::normalize_part_label;

/// One object of the preference survey: which of two parts people chose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub object_label: String,
    pub part_a: String,
    pub part_b: String,
    /// Fraction of respondents choosing `part_a`.
    pub p_a_human: f64,
}

impl SurveyRecord {
    pub fn new(
        object_label: impl Into<String>,
        part_a: impl Into<String>,
        part_b: impl Into<String>,
        p_a_human: f64,
    ) -> Result<Self, EvalError> {
        let rec = SurveyRecord {
            object_label: object_label.into().trim().to_string(),
            part_a: part_a.into().trim().to_string(),
            part_b: part_b.into().trim().to_string(),
            p_a_human,
        };
        if !(0.0..=1.0).contains(&p_a_human) {
            return Err(EvalError::InvalidFraction { object: rec.object_label, value: p_a_human });
        }
        if rec.object_label.is_empty() || rec.part_a.is_empty() || rec.part_b.is_empty() {
            return Err(EvalError::Parse { line: 0, message: "empty object or part name".into() });
        }
        if normalize_part_label(&rec.part_a) == normalize_part_label(&rec.part_b) {
            return Err(EvalError::Parse { line: 0, message: format!("{}: both parts are `{}`", rec.object_label, rec.part_a) });
        }
        Ok(rec)
    }

    /// p_b = 1 − p_a.
    pub fn p_b_human(&self) -> f64 {
        1.0 - self.p_a_human
    }

    /// Whether a normalized part answer names `part_a`.
    pub fn names_part_a(&self, part: &str) -> bool {
        normalize_part_label(part) == normalize_part_label(&self.part_a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionUnit {
    Percent,
    Fraction,
}

#[derive(Deserialize)]
struct SurveyRow {
    object: String,
    part_a: String,
    part_b: String,
    p_a: f64,
    unit: Option<FractionUnit>,
}

/// Parse a survey table with header `object,part_a,part_b,p_a,unit`.
///
/// `unit` is `percent` (92.1) or `fraction` (0.921); a missing unit column
/// means fraction.
pub fn parse_survey(text: &str) -> Result<Vec<SurveyRecord>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<SurveyRow>() {
        let row = row.map_err(EvalError::from_csv)?;
        let p = match row.unit.unwrap_or(FractionUnit::Fraction) {
            FractionUnit::Percent => row.p_a / 100.0,
            FractionUnit::Fraction => row.p_a,
        };
        let line = out.len() + 2;
        let rec = SurveyRecord::new(row.object, row.part_a, row.part_b, p).map_err(|e| match e {
            EvalError::Parse { message, .. } => EvalError::Parse { line, message },
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn ingest_survey(path: &Path) -> Result<Vec<SurveyRecord>, EvalError> {
    parse_survey(&std::fs::read_to_string(path)?)
}
