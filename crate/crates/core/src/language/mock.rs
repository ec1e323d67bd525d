//! Fixture-backed language and vision models for offline runs.
//!
//! Language fixture (CSV, header required):
//!
//! ```text
//! object_label,mode,part_label
//! mug,grasp,handle
//! teapot,avoid,spout
//! ```
//!
//! Vision fixture (CSV, header required):
//!
//! ```text
//! image_id,part_label,x_min,y_min,x_max,y_max,confidence
//! mug,handle,402.5,150.0,470.0,300.0,0.62
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::backend::{Detection, ImageInput, LanguageModel, VisionModel};
use super::prompt::{build_prompt, ArticleStyle, ChatPrompt, PartQuery};
use super::LanguageError;
use crate::Mode;

#[derive(Debug, Clone, Deserialize)]
struct PartRow {
    object_label: String,
    mode: Mode,
    part_label: String,
}

/// Answers prompts built from a fixed (object, mode) → part table.
///
/// The table is indexed by the exact user message each entry would produce,
/// under both article styles, so lookups are byte-exact and any other prompt
/// is rejected as malformed.
#[derive(Debug, Clone, Default)]
pub struct MockLanguageModel {
    table: Vec<(PartQuery, String)>,
    by_prompt: HashMap<String, String>,
}

impl MockLanguageModel {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, LanguageError>
    where
        I: IntoIterator<Item = (S, Mode, S)>,
        S: AsRef<str>,
    {
        let mut model = MockLanguageModel::default();
        for (object, mode, part) in entries {
            let query = PartQuery::new(object.as_ref(), mode)
                .map_err(|e| LanguageError::FixtureParse(format!("bad object label: {e}")))?;
            let part = part.as_ref().trim().to_string();
            if part.is_empty() {
                return Err(LanguageError::FixtureParse(format!("empty part for `{}`", query.object_label())));
            }
            for style in [ArticleStyle::ByVowel, ArticleStyle::Literal] {
                let prompt = build_prompt(&query, style)?;
                model.by_prompt.insert(prompt.user().to_string(), part.clone());
            }
            model.table.push((query, part));
        }
        Ok(model)
    }

    pub fn parse_csv(text: &str) -> Result<Self, LanguageError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let rows = reader
            .deserialize::<PartRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LanguageError::FixtureParse(e.to_string()))?;
        Self::from_entries(rows.into_iter().map(|r| (r.object_label, r.mode, r.part_label)))
    }

    pub fn load(path: &Path) -> Result<Self, LanguageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LanguageError::FixtureParse(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }

    pub fn lookup(&self, object_label: &str, mode: Mode) -> Option<&str> {
        self.table
            .iter()
            .find(|(q, _)| q.mode() == mode && q.object_label() == object_label.trim())
            .map(|(_, p)| p.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PartQuery, &str)> {
        self.table.iter().map(|(q, p)| (q, p.as_str()))
    }
}

impl LanguageModel for MockLanguageModel {
    fn complete(&self, prompt: &ChatPrompt) -> Result<String, LanguageError> {
        if !prompt.is_well_formed() {
            return Err(LanguageError::MalformedResponse("prompt is not a system/user pair".into()));
        }
        self.by_prompt
            .get(prompt.user())
            .cloned()
            .ok_or_else(|| LanguageError::MalformedResponse(format!("no fixture answer for `{}`", prompt.user())))
    }
}

#[derive(Debug, Clone, Deserialize)]
struct BoxRow {
    image_id: String,
    part_label: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    confidence: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MockVisionModel {
    rows: Vec<BoxRow>,
}

impl MockVisionModel {
    pub fn parse_csv(text: &str) -> Result<Self, LanguageError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let rows = reader
            .deserialize::<BoxRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LanguageError::FixtureParse(e.to_string()))?;
        for r in &rows {
            if !(r.x_min < r.x_max && r.y_min < r.y_max && (0.0..=1.0).contains(&r.confidence)) {
                return Err(LanguageError::FixtureParse(format!("invalid box for {}/{}", r.image_id, r.part_label)));
            }
        }
        Ok(MockVisionModel { rows })
    }

    pub fn load(path: &Path) -> Result<Self, LanguageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LanguageError::FixtureParse(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }

    /// Detections for an image id, independent of pixel content.
    pub fn detections_for(&self, image_id: &str, queries: &[String]) -> Vec<Detection> {
        self.rows
            .iter()
            .filter(|r| r.image_id == image_id && queries.iter().any(|q| q.trim().eq_ignore_ascii_case(&r.part_label)))
            .map(|r| Detection { bbox: [r.x_min, r.y_min, r.x_max, r.y_max], score: r.confidence, label: r.part_label.clone() })
            .collect()
    }
}

impl VisionModel for MockVisionModel {
    fn detect(&self, image: &ImageInput, queries: &[String]) -> Result<Vec<Detection>, LanguageError> {
        Ok(self.detections_for(&image.id, queries))
    }
}
