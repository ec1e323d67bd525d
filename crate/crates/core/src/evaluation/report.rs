use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{similarity_score, EvalError, MethodFrequency, Provenance, SurveyRecord};

/// Tolerance for the average self-check performed on every emit.
pub const AVERAGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub object: String,
    pub part_a: String,
    pub p_a_human: f64,
    /// Similarity per method; absent when the method has no frequency for
    /// this object.
    pub sims: IndexMap<String, Option<f64>>,
}

/// Per-object similarity scores for each method, plus per-method means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub rows: Vec<ReportRow>,
    /// Mean over the rows that have a value for the method.
    pub averages: IndexMap<String, Option<f64>>,
    pub provenance: IndexMap<String, Provenance>,
}

/// Join frequencies to survey rows and score them. Rows follow survey order;
/// methods follow first appearance in `freqs`.
pub fn build_report(survey: &[SurveyRecord], freqs: &[MethodFrequency]) -> Result<SimilarityReport, EvalError> {
    if freqs.is_empty() {
        return Err(EvalError::MissingSurveyRow("no method frequencies supplied".into()));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, r) in survey.iter().enumerate() {
        if index.insert(r.object_label.as_str(), i).is_some() {
            return Err(EvalError::DuplicateObject(r.object_label.clone()));
        }
    }

    let mut provenance: IndexMap<String, Provenance> = IndexMap::new();
    for f in freqs {
        match provenance.get(&f.method) {
            Some(p) if *p != f.provenance => return Err(EvalError::MixedProvenance(f.method.clone())),
            Some(_) => {}
            None => {
                provenance.insert(f.method.clone(), f.provenance);
            }
        }
    }

    let mut rows: Vec<ReportRow> = survey
        .iter()
        .map(|r| ReportRow {
            object: r.object_label.clone(),
            part_a: r.part_a.clone(),
            p_a_human: r.p_a_human,
            sims: provenance.keys().map(|m| (m.clone(), None)).collect(),
        })
        .collect();

    for f in freqs {
        f.validate()?;
        let &i = index.get(f.object_label.as_str()).ok_or_else(|| EvalError::MissingSurveyRow(f.object_label.clone()))?;
        let cell = rows[i].sims.get_mut(&f.method).expect("method column exists");
        if cell.is_some() {
            return Err(EvalError::DuplicateObject(format!("{} ({})", f.object_label, f.method)));
        }
        *cell = Some(similarity_score(survey[i].p_a_human, f.p_a_method)?);
    }

    let averages = column_means(&rows, &provenance);
    Ok(SimilarityReport { rows, averages, provenance })
}

fn column_means(rows: &[ReportRow], methods: &IndexMap<String, Provenance>) -> IndexMap<String, Option<f64>> {
    methods
        .keys()
        .map(|m| {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r.sims[m]).collect();
            let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            (m.clone(), mean)
        })
        .collect()
}

/// Round half to even at `decimals` places. Values within 1e-9 of a tie in
/// the scaled domain count as ties, so `0.125` and `0.925` both behave as
/// their decimal spelling suggests.
pub fn round_half_even(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let y = x * scale;
    let floor = y.floor();
    let frac = y - floor;
    let r = if (frac - 0.5).abs() < 1e-9 {
        if floor.rem_euclid(2.0) == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        y.round()
    };
    r / scale
}

impl SimilarityReport {
    pub fn methods(&self) -> impl Iterator<Item = &str> {
        self.provenance.keys().map(String::as_str)
    }

    pub fn sim(&self, object: &str, method: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.object == object).and_then(|r| r.sims.get(method).copied().flatten())
    }

    pub fn average(&self, method: &str) -> Option<f64> {
        self.averages.get(method).copied().flatten()
    }

    /// Recompute every average from the rows and compare.
    pub fn check_averages(&self) -> Result<(), EvalError> {
        let fresh = column_means(&self.rows, &self.provenance);
        for (m, stored) in &self.averages {
            let ok = match (stored, fresh.get(m).copied().flatten()) {
                (Some(a), Some(b)) => (a - b).abs() <= AVERAGE_TOLERANCE,
                (None, None) => true,
                _ => false,
            };
            if !ok {
                return Err(EvalError::InconsistentAverage(m.clone()));
            }
        }
        if fresh.len() != self.averages.len() {
            return Err(EvalError::InconsistentAverage("column set".into()));
        }
        Ok(())
    }

    /// Aligned plain-text table, values rounded half-even to two places.
    pub fn to_text(&self) -> Result<String, EvalError> {
        self.check_averages()?;
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{:.2}", round_half_even(x, 2)));
        let mut header = vec!["Object".to_string(), "Preferred part".to_string()];
        header.extend(self.provenance.iter().map(|(m, p)| match p {
            Provenance::Measured => m.clone(),
            Provenance::Reference => format!("{m} (ref)"),
        }));
        let mut table = vec![header];
        for r in &self.rows {
            let mut line = vec![r.object.clone(), format!("{} {:.1}%", r.part_a, round_half_even(r.p_a_human * 100.0, 1))];
            line.extend(r.sims.values().map(|v| cell(*v)));
            table.push(line);
        }
        let mut avg = vec!["Average".to_string(), String::new()];
        avg.extend(self.averages.values().map(|v| cell(*v)));
        table.push(avg);

        let cols = table[0].len();
        let widths: Vec<usize> =
            (0..cols).map(|c| table.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, row) in table.iter().enumerate() {
            if i == table.len() - 1 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(out, "{}", rule.join("-+-")).expect("string write");
            }
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            writeln!(out, "{}", cells.join(" | ").trim_end()).expect("string write");
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(out, "{}", rule.join("-+-")).expect("string write");
            }
        }
        Ok(out)
    }

    /// Machine-readable form with full-precision values.
    pub fn to_json(&self) -> Result<String, EvalError> {
        self.check_averages()?;
        Ok(serde_json::to_string_pretty(self).expect("report serializes") + "\n")
    }
}
