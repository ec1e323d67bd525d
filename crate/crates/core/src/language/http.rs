//! Blocking HTTP clients for chat-completions style text models and a
//! box-returning detector endpoint.

use std::io::Cursor;
use std::time::Duration;

use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::backend::{Detection, ImageInput, LanguageModel, VisionModel};
use super::prompt::ChatPrompt;
use super::LanguageError;

/// Request body for the detector endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectRequest {
    /// Base64-encoded PNG.
    pub image: String,
    pub queries: Vec<String>,
    /// Optional image identifier; fixture servers key on it, real
    /// detectors ignore it.
    #[serde(default)]
    pub image_id: Option<String>,
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into()
}

fn post_json<T: DeserializeOwned>(
    agent: &ureq::Agent,
    endpoint: &str,
    token: Option<&str>,
    body: &Value,
    retries: u32,
) -> Result<T, LanguageError> {
    let mut last = String::new();
    for attempt in 0..=retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(100 * u64::from(attempt)));
        }
        let mut req = agent.post(endpoint);
        if let Some(tok) = token {
            req = req.header("Authorization", &format!("Bearer {tok}"));
        }
        match req.send_json(body) {
            Ok(mut resp) => {
                return resp
                    .body_mut()
                    .read_json::<T>()
                    .map_err(|e| LanguageError::MalformedResponse(format!("{endpoint}: {e}")));
            }
            Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) => {
                return Err(LanguageError::BackendUnavailable(format!("{endpoint}: HTTP {code}")));
            }
            Err(e) => {
                log::warn!("{endpoint}: attempt {} failed: {e}", attempt + 1);
                last = e.to_string();
            }
        }
    }
    Err(LanguageError::BackendUnavailable(format!("{endpoint}: {last} (after {} attempt(s))", retries + 1)))
}

pub struct HttpLanguageModel {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    token: Option<String>,
    retries: u32,
}

impl HttpLanguageModel {
    pub fn new(endpoint: String, model: String, token: Option<String>, timeout: Duration, retries: u32) -> Self {
        HttpLanguageModel { agent: agent(timeout), endpoint, model, token, retries }
    }
}

/// Text of the first choice in a chat-completions response.
pub fn first_choice_text(resp: &Value) -> Option<&str> {
    let choice = resp.get("choices")?.get(0)?;
    choice
        .get("message")
        .and_then(|m| m.get("content"))
        .or_else(|| choice.get("text"))
        .and_then(Value::as_str)
}

impl LanguageModel for HttpLanguageModel {
    fn complete(&self, prompt: &ChatPrompt) -> Result<String, LanguageError> {
        let body = json!({
            "model": self.model,
            "messages": prompt.messages,
            "temperature": 0,
        });
        let resp: Value = post_json(&self.agent, &self.endpoint, self.token.as_deref(), &body, self.retries)?;
        first_choice_text(&resp)
            .map(str::to_string)
            .ok_or_else(|| LanguageError::MalformedResponse("response has no choices[0] text".into()))
    }
}

pub struct HttpVisionModel {
    agent: ureq::Agent,
    endpoint: String,
    token: Option<String>,
    retries: u32,
}

impl HttpVisionModel {
    pub fn new(endpoint: String, token: Option<String>, timeout: Duration, retries: u32) -> Self {
        HttpVisionModel { agent: agent(timeout), endpoint, token, retries }
    }
}

pub fn encode_png_base64(image: &image::RgbImage) -> Result<String, LanguageError> {
    let mut buf = Cursor::new(Vec::new());
    image
        .write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| LanguageError::ImageEncoding(e.to_string()))?;
    Ok(base64::engine::general_purpose::STANDARD.encode(buf.into_inner()))
}

impl VisionModel for HttpVisionModel {
    fn detect(&self, image: &ImageInput, queries: &[String]) -> Result<Vec<Detection>, LanguageError> {
        let req = DetectRequest { image: encode_png_base64(&image.image)?, queries: queries.to_vec(), image_id: Some(image.id.clone()) };
        let body = serde_json::to_value(&req).expect("request serializes");
        post_json(&self.agent, &self.endpoint, self.token.as_deref(), &body, self.retries)
    }
}
