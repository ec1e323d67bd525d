use std::path::{Path, PathBuf};
use std::time::Duration;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::answer::PartAnswer;
use super::http::{HttpLanguageModel, HttpVisionModel};
use super::mock::{MockLanguageModel, MockVisionModel};
use super::prompt::ChatPrompt;
use super::LanguageError;
use crate::projection::BoundingBox2D;

/// Default minimum detection score for [`ground_part`].
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.1;

/// Chat-style text model: prompt in, reply text out.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &ChatPrompt) -> Result<String, LanguageError>;
}

/// Open-vocabulary detector: image plus text queries in, scored boxes out.
pub trait VisionModel: Send + Sync {
    fn detect(&self, image: &ImageInput, queries: &[String]) -> Result<Vec<Detection>, LanguageError>;
}

/// Image handed to a [`VisionModel`]. `id` lets fixture-backed detectors
/// recognise bundled images; live detectors only look at the pixels.
#[derive(Debug, Clone)]
pub struct ImageInput {
    pub id: String,
    pub image: RgbImage,
}

/// One detector output as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub score: f64,
    pub label: String,
}

pub fn query_part(backend: &dyn LanguageModel, prompt: &ChatPrompt) -> Result<PartAnswer, LanguageError> {
    let raw = backend.complete(prompt)?;
    PartAnswer::from_response(&raw)
}

/// Highest-scoring box for `part_label` at or above `threshold`, clamped to
/// the image.
pub fn ground_part(
    backend: &dyn VisionModel,
    image: &ImageInput,
    part_label: &str,
    threshold: f64,
) -> Result<BoundingBox2D, LanguageError> {
    if image.image.width() == 0 || image.image.height() == 0 {
        return Err(LanguageError::EmptyImage);
    }
    if part_label.trim().is_empty() {
        return Err(LanguageError::InvalidLabel("part label is empty".into()));
    }
    let detections = backend.detect(image, &[part_label.to_string()])?;
    let mut above: Vec<&Detection> = detections
        .iter()
        .filter(|d| d.score >= threshold && (d.label.is_empty() || d.label.eq_ignore_ascii_case(part_label)))
        .collect();
    if above.len() > 1 {
        log::warn!("{} detections for `{part_label}` above {threshold}; using the highest-scoring one", above.len());
    }
    // stable: the first of equally scored boxes wins
    above.sort_by(|a, b| b.score.total_cmp(&a.score));
    let best = above.first().ok_or_else(|| LanguageError::NoDetection(part_label.to_string()))?;
    let [x0, y0, x1, y1] = best.bbox;
    let bx = BoundingBox2D::new(x0, y0, x1, y1, best.score.clamp(0.0, 1.0), part_label);
    bx.clamped(image.image.width(), image.image.height())
        .map_err(|_| LanguageError::NoDetection(part_label.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LlmConfig {
    Mock {
        fixture: PathBuf,
    },
    Http {
        endpoint: String,
        #[serde(default = "default_model")]
        model: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default)]
        token_env: Option<String>,
    },
}

fn default_model() -> String {
    "gpt-4".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VlmConfig {
    Mock {
        fixture: PathBuf,
    },
    Http {
        endpoint: String,
        #[serde(default)]
        token_env: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub llm: LlmConfig,
    pub vlm: VlmConfig,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_threshold")]
    pub detection_threshold: f64,
}

fn default_timeout() -> f64 {
    30.0
}
fn default_retries() -> u32 {
    2
}
fn default_threshold() -> f64 {
    DEFAULT_DETECTION_THRESHOLD
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_token(env: &Option<String>) -> Result<Option<String>, LanguageError> {
    match env {
        None => Ok(None),
        Some(name) => std::env::var(name)
            .map(Some)
            .map_err(|_| LanguageError::BackendUnavailable(format!("environment variable `{name}` is not set"))),
    }
}

impl BackendConfig {
    pub fn mock(llm_fixture: impl Into<PathBuf>, vlm_fixture: impl Into<PathBuf>) -> Self {
        BackendConfig {
            llm: LlmConfig::Mock { fixture: llm_fixture.into() },
            vlm: VlmConfig::Mock { fixture: vlm_fixture.into() },
            timeout_secs: default_timeout(),
            retries: default_retries(),
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<(), LanguageError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(LanguageError::Config("timeout must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.detection_threshold) {
            return Err(LanguageError::Config("detection threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Relative fixture paths are resolved against `base`.
    pub fn language_model(&self, base: &Path) -> Result<Box<dyn LanguageModel>, LanguageError> {
        self.validate()?;
        self.llm.build(base, self.timeout(), self.retries)
    }

    pub fn vision_model(&self, base: &Path) -> Result<Box<dyn VisionModel>, LanguageError> {
        self.validate()?;
        self.vlm.build(base, self.timeout(), self.retries)
    }
}

impl LlmConfig {
    pub fn build(&self, base: &Path, timeout: Duration, retries: u32) -> Result<Box<dyn LanguageModel>, LanguageError> {
        Ok(match self {
            LlmConfig::Mock { fixture } => Box::new(MockLanguageModel::load(&resolve(base, fixture))?),
            LlmConfig::Http { endpoint, model, token_env } => {
                Box::new(HttpLanguageModel::new(endpoint.clone(), model.clone(), read_token(token_env)?, timeout, retries))
            }
        })
    }
}

impl VlmConfig {
    pub fn build(&self, base: &Path, timeout: Duration, retries: u32) -> Result<Box<dyn VisionModel>, LanguageError> {
        Ok(match self {
            VlmConfig::Mock { fixture } => Box::new(MockVisionModel::load(&resolve(base, fixture))?),
            VlmConfig::Http { endpoint, token_env } => {
                Box::new(HttpVisionModel::new(endpoint.clone(), read_token(token_env)?, timeout, retries))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<Detection>);

    impl VisionModel for Fixed {
        fn detect(&self, _: &ImageInput, _: &[String]) -> Result<Vec<Detection>, LanguageError> {
            Ok(self.0.clone())
        }
    }

    fn img() -> ImageInput {
        ImageInput { id: "t".into(), image: RgbImage::new(100, 80) }
    }

    fn det(score: f64, bbox: [f64; 4]) -> Detection {
        Detection { bbox, score, label: "handle".into() }
    }

    #[test]
    fn argmax_confidence() {
        let vlm = Fixed(vec![det(0.3, [0.0, 0.0, 10.0, 10.0]), det(0.7, [20.0, 20.0, 40.0, 50.0])]);
        let b = ground_part(&vlm, &img(), "handle", 0.1).unwrap();
        assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max, b.confidence), (20.0, 20.0, 40.0, 50.0, 0.7));
    }

    #[test]
    fn below_threshold_is_no_detection() {
        let vlm = Fixed(vec![det(0.05, [0.0, 0.0, 10.0, 10.0])]);
        assert!(matches!(ground_part(&vlm, &img(), "handle", 0.1), Err(LanguageError::NoDetection(_))));
        let vlm = Fixed(vec![]);
        assert!(matches!(ground_part(&vlm, &img(), "handle", 0.1), Err(LanguageError::NoDetection(_))));
    }

    #[test]
    fn clamped_to_image() {
        let vlm = Fixed(vec![det(0.5, [-5.0, 10.0, 150.0, 90.0])]);
        let b = ground_part(&vlm, &img(), "handle", 0.1).unwrap();
        assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max), (0.0, 10.0, 100.0, 80.0));
    }

    #[test]
    fn config_toml() {
        let text = r#"
timeout_secs = 5
retries = 1
[llm]
kind = "http"
endpoint = "http://localhost:1/v1/chat/completions"
token_env = "SEMGRASP_TEST_TOKEN"
[vlm]
kind = "mock"
fixture = "vlm_boxes.csv"
"#;
        let cfg: BackendConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.retries, 1);
        assert!(matches!(cfg.llm, LlmConfig::Http { ref model, .. } if model == "gpt-4"));
        assert!(matches!(
            cfg.language_model(Path::new(".")),
            Err(LanguageError::BackendUnavailable(_))
        ));
        let bad = BackendConfig { timeout_secs: 0.0, ..cfg };
        assert!(bad.validate().is_err());
    }
}
