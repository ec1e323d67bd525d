//! Prompts, part-name answers and the text/vision model contracts.

mod answer;
mod backend;
mod http;
mod mock;
mod prompt;
mod server;

pub use answer::{normalize_part_label, PartAnswer, MAX_ANSWER_WORDS};
pub use backend::{
    ground_part, query_part, BackendConfig, Detection, ImageInput, LanguageModel, LlmConfig, VisionModel, VlmConfig,
    DEFAULT_DETECTION_THRESHOLD,
};
pub use http::{encode_png_base64, first_choice_text, DetectRequest, HttpLanguageModel, HttpVisionModel};
pub use mock::{MockLanguageModel, MockVisionModel};
pub use prompt::{
    article_for, build_avoid_prompt, build_grasp_prompt, build_prompt, ArticleStyle, ChatMessage, ChatPrompt, PartQuery,
    Role, MAX_LABEL_CHARS, SYSTEM_MESSAGE,
};
pub use server::{MockServer, CHAT_PATH, DETECT_PATH};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("prompt builder called with the wrong query mode")]
    WrongMode,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no detection for `{0}` above threshold")]
    NoDetection(String),
    #[error("image is empty")]
    EmptyImage,
    #[error("could not encode image: {0}")]
    ImageEncoding(String),
    #[error("fixture: {0}")]
    FixtureParse(String),
    #[error("backend config: {0}")]
    Config(String),
}
