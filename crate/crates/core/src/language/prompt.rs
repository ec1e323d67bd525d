use serde::{Deserialize, Serialize};

use super::LanguageError;
use crate::Mode;

pub const SYSTEM_MESSAGE: &str = "You are an intelligent robotic arm.";
pub const MAX_LABEL_CHARS: usize = 128;

/// An object label paired with what we want to know about it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartQuery {
    object_label: String,
    mode: Mode,
}

impl PartQuery {
    pub fn new(object_label: &str, mode: Mode) -> Result<Self, LanguageError> {
        let label = object_label.trim();
        if label.is_empty() {
            return Err(LanguageError::InvalidLabel("object label is empty".into()));
        }
        if label.chars().count() > MAX_LABEL_CHARS {
            return Err(LanguageError::InvalidLabel(format!("object label longer than {MAX_LABEL_CHARS} characters")));
        }
        if label.contains(['\n', '\r']) {
            return Err(LanguageError::InvalidLabel("object label spans multiple lines".into()));
        }
        Ok(PartQuery { object_label: label.to_string(), mode })
    }

    pub fn object_label(&self) -> &str {
        &self.object_label
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// One system message followed by one user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatPrompt {
    pub messages: Vec<ChatMessage>,
}

impl ChatPrompt {
    fn pair(user: String) -> Self {
        ChatPrompt {
            messages: vec![
                ChatMessage { role: Role::System, content: SYSTEM_MESSAGE.to_string() },
                ChatMessage { role: Role::User, content: user },
            ],
        }
    }

    pub fn system(&self) -> &str {
        &self.messages[0].content
    }

    pub fn user(&self) -> &str {
        &self.messages[1].content
    }

    /// Checks the system-then-user shape.
    pub fn is_well_formed(&self) -> bool {
        matches!(self.messages.as_slice(), [s, u] if s.role == Role::System && u.role == Role::User)
    }
}

/// How the indefinite article in front of the object label is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArticleStyle {
    /// "an" before a vowel-initial label, "a" otherwise.
    #[default]
    ByVowel,
    /// Always "an", exactly as the templates are written.
    Literal,
}

pub fn article_for(label: &str, style: ArticleStyle) -> &'static str {
    match style {
        ArticleStyle::Literal => "an",
        ArticleStyle::ByVowel => match label.chars().next().map(|c| c.to_ascii_lowercase()) {
            Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
            _ => "a",
        },
    }
}

pub fn build_grasp_prompt(query: &PartQuery, style: ArticleStyle) -> Result<ChatPrompt, LanguageError> {
    if query.mode != Mode::Grasp {
        return Err(LanguageError::WrongMode);
    }
    let label = &query.object_label;
    Ok(ChatPrompt::pair(format!(
        "If you want to pick up {} {label}, which part makes the most sense to grasp? Name one part.",
        article_for(label, style)
    )))
}

pub fn build_avoid_prompt(query: &PartQuery, style: ArticleStyle) -> Result<ChatPrompt, LanguageError> {
    if query.mode != Mode::Avoid {
        return Err(LanguageError::WrongMode);
    }
    let label = &query.object_label;
    Ok(ChatPrompt::pair(format!(
        "Consider you are an intelligent robotic arm. If you want to pick up {} {label}, which part you should avoid touching? Answer in one word.",
        article_for(label, style)
    )))
}

pub fn build_prompt(query: &PartQuery, style: ArticleStyle) -> Result<ChatPrompt, LanguageError> {
    match query.mode {
        Mode::Grasp => build_grasp_prompt(query, style),
        Mode::Avoid => build_avoid_prompt(query, style),
    }
}
