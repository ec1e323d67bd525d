use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalError, SurveyRecord};
use crate::planner::GraspSet;
use crate::projection::{region_of_grasp, RegionMembership, RegionPartition};

/// Where a method column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Produced by running this crate's planner.
    Measured,
    /// Imported from published numbers.
    Reference,
}

/// How often a method grasped part a of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFrequency {
    pub object_label: String,
    pub method: String,
    pub p_a_method: f64,
    pub n_grasps: u32,
    pub provenance: Provenance,
}

impl MethodFrequency {
    /// Build from a count of grasps in region a.
    pub fn from_count(
        object_label: impl Into<String>,
        method: impl Into<String>,
        inside: u32,
        n_grasps: u32,
        provenance: Provenance,
    ) -> Result<Self, EvalError> {
        if n_grasps == 0 {
            return Err(EvalError::EmptyGraspSet);
        }
        if inside > n_grasps {
            return Err(EvalError::InvalidFraction { object: object_label.into(), value: inside as f64 / n_grasps as f64 });
        }
        Ok(MethodFrequency {
            object_label: object_label.into(),
            method: method.into(),
            p_a_method: inside as f64 / n_grasps as f64,
            n_grasps,
            provenance,
        })
    }

    /// Validate a frequency read from outside: in `[0, 1]` and, when
    /// `n_grasps > 0`, an integer count over `n_grasps` within 1e-9.
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(0.0..=1.0).contains(&self.p_a_method) {
            return Err(EvalError::InvalidFraction { object: self.object_label.clone(), value: self.p_a_method });
        }
        if self.n_grasps > 0 {
            let count = self.p_a_method * self.n_grasps as f64;
            if (count - count.round()).abs() > 1e-9 {
                return Err(EvalError::NonIntegralCount { object: self.object_label.clone(), count });
            }
        }
        Ok(())
    }

    pub fn inside_count(&self) -> u32 {
        (self.p_a_method * self.n_grasps as f64).round() as u32
    }
}

/// Fraction of grasps whose contacts all lie in region a.
pub fn empirical_frequency(
    grasps: &GraspSet,
    partition: &RegionPartition,
    object_label: &str,
    method: &str,
) -> Result<MethodFrequency, EvalError> {
    if grasps.is_empty() {
        return Err(EvalError::EmptyGraspSet);
    }
    let inside = grasps
        .grasps()
        .iter()
        .filter(|g| region_of_grasp(partition, &g.contact_faces()) == RegionMembership::InsideA)
        .count();
    MethodFrequency::from_count(object_label, method, inside as u32, grasps.len() as u32, Provenance::Measured)
}

/// Frequency of a pipeline that always grasps the part it was told to:
/// every one of `n_grasps` lands on part a if the chosen part is part a,
/// none otherwise.
pub fn deterministic_frequency(
    record: &SurveyRecord,
    chosen_part: &str,
    method: &str,
    n_grasps: u32,
) -> Result<MethodFrequency, EvalError> {
    let inside = if record.names_part_a(chosen_part) { n_grasps } else { 0 };
    MethodFrequency::from_count(&record.object_label, method, inside, n_grasps, Provenance::Measured)
}

#[derive(Deserialize)]
struct FrequencyRow {
    object: String,
    method: String,
    p_a: f64,
    n_grasps: u32,
    provenance: Provenance,
}

/// Parse a frequency table with header `object,method,p_a,n_grasps,provenance`.
pub fn parse_frequencies(text: &str) -> Result<Vec<MethodFrequency>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<FrequencyRow>() {
        let row = row.map_err(EvalError::from_csv)?;
        let f = MethodFrequency {
            object_label: row.object,
            method: row.method,
            p_a_method: row.p_a,
            n_grasps: row.n_grasps,
            provenance: row.provenance,
        };
        f.validate()?;
        out.push(f);
    }
    Ok(out)
}

pub fn load_frequencies(path: &Path) -> Result<Vec<MethodFrequency>, EvalError> {
    parse_frequencies(&std::fs::read_to_string(path)?)
}

pub fn frequencies_to_csv(freqs: &[MethodFrequency]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["object", "method", "p_a", "n_grasps", "provenance"]).expect("in-memory csv");
    for f in freqs {
        let prov = match f.provenance {
            Provenance::Measured => "measured",
            Provenance::Reference => "reference",
        };
        w.write_record([f.object_label.as_str(), &f.method, &f.p_a_method.to_string(), &f.n_grasps.to_string(), prov])
            .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}
