//! End-to-end driver: label → prompt → part → box → partition → grasps,
//! plus the evaluation run and the overlay image.

mod config;
mod overlay;
mod run;

pub use config::{BackendChoice, Overrides, PipelineConfig, VisibilityChoice};
pub use overlay::{draw_number, render_overlay, BOX_COLOR, CONTACT_COLOR, MARKER_RADIUS};
pub use run::{
    compute_pipeline, deterministic_frequencies, measure_baseline, run_eval, run_partition, run_pipeline, write_atomic,
    DeterministicSource, EvalConfig, MeasuredSource, PartitionSummary, PipelineResult, GRASPS_FILE, OVERLAY_FILE,
    PARTITION_FILE, REPORT_JSON_FILE, REPORT_TEXT_FILE,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::EvalError;
use crate::geometry::GeometryError;
use crate::language::LanguageError;
use crate::planner::PlannerError;
use crate::projection::PartitionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Load,
    Prompt,
    Llm,
    Vlm,
    Partition,
    Sample,
    Rank,
    Output,
    Eval,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Load => "load",
            Stage::Prompt => "prompt",
            Stage::Llm => "llm",
            Stage::Vlm => "vlm",
            Stage::Partition => "partition",
            Stage::Sample => "sample",
            Stage::Rank => "rank",
            Stage::Output => "output",
            Stage::Eval => "eval",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Geometry { stage: Stage, source: GeometryError },
    #[error("{stage}: {source}")]
    Language { stage: Stage, source: LanguageError },
    #[error("{stage}: {source}")]
    Partition { stage: Stage, source: PartitionError },
    #[error("{stage}: {source}")]
    Planner { stage: Stage, source: PlannerError },
    #[error("{stage}: {source}")]
    Eval { stage: Stage, source: EvalError },
    #[error("{stage}: image: {message}")]
    Image { stage: Stage, message: String },
    #[error("{stage}: {source}")]
    Io { stage: Stage, source: std::io::Error },
}

/// Process exit codes, one per failure class.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const INVALID_LABEL: i32 = 3;
    pub const NO_DETECTION: i32 = 4;
    pub const EMPTY_REGION: i32 = 5;
    pub const REGION_TOO_SMALL: i32 = 6;
    pub const BACKEND_UNAVAILABLE: i32 = 7;
    pub const MALFORMED_RESPONSE: i32 = 8;
    pub const INPUT: i32 = 9;
    pub const BOX_OUTSIDE_IMAGE: i32 = 10;
    pub const EVALUATION: i32 = 11;

    /// `(code, meaning)` for help text.
    pub const TABLE: [(i32, &str); 11] = [
        (OK, "success"),
        (CONFIG, "invalid configuration or arguments"),
        (INVALID_LABEL, "invalid object label"),
        (NO_DETECTION, "no detection for the named part"),
        (EMPTY_REGION, "no mesh face falls in the detected box"),
        (REGION_TOO_SMALL, "no grasp found in the graspable region"),
        (BACKEND_UNAVAILABLE, "language or vision backend unreachable"),
        (MALFORMED_RESPONSE, "backend reply could not be used"),
        (INPUT, "unreadable or malformed input file"),
        (BOX_OUTSIDE_IMAGE, "detected box lies outside the image"),
        (EVALUATION, "survey/frequency data inconsistent"),
    ];
}

impl PipelineError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Config(_) => None,
            PipelineError::Geometry { stage, .. }
            | PipelineError::Language { stage, .. }
            | PipelineError::Partition { stage, .. }
            | PipelineError::Planner { stage, .. }
            | PipelineError::Eval { stage, .. }
            | PipelineError::Image { stage, .. }
            | PipelineError::Io { stage, .. } => Some(*stage),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use exit_code::*;
        match self {
            PipelineError::Config(_) => CONFIG,
            PipelineError::Language { source, .. } => match source {
                LanguageError::InvalidLabel(_) => INVALID_LABEL,
                LanguageError::NoDetection(_) => NO_DETECTION,
                LanguageError::BackendUnavailable(_) => BACKEND_UNAVAILABLE,
                LanguageError::MalformedResponse(_) => MALFORMED_RESPONSE,
                LanguageError::Config(_) | LanguageError::WrongMode => CONFIG,
                LanguageError::EmptyImage | LanguageError::ImageEncoding(_) | LanguageError::FixtureParse(_) => INPUT,
            },
            PipelineError::Partition { source, .. } => match source {
                PartitionError::EmptyRegion => EMPTY_REGION,
                PartitionError::BoxOutsideImage | PartitionError::InvalidBox => BOX_OUTSIDE_IMAGE,
                PartitionError::InvalidCamera(_) => CONFIG,
                PartitionError::CameraParse(_) | PartitionError::LabelParse { .. } | PartitionError::Io(_) => INPUT,
            },
            PipelineError::Planner { source, .. } => match source {
                PlannerError::RegionTooSmall { .. } => REGION_TOO_SMALL,
                PlannerError::EmptyRegion => EMPTY_REGION,
                PlannerError::InvalidGripper(_) | PlannerError::InvalidArgument(_) => CONFIG,
                PlannerError::PartitionMismatch { .. } | PlannerError::Document(_) => INPUT,
            },
            PipelineError::Eval { source, .. } => match source {
                EvalError::Io(_) | EvalError::Parse { .. } => INPUT,
                _ => EVALUATION,
            },
            PipelineError::Geometry { .. } | PipelineError::Image { .. } | PipelineError::Io { .. } => INPUT,
        }
    }
}
