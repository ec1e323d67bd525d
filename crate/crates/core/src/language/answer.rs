use serde::{Deserialize, Serialize};

use super::LanguageError;

pub const MAX_ANSWER_WORDS: usize = 5;

const ARTICLES: [&str; 3] = ["the", "a", "an"];

fn is_edge_punct(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '\'' | '`' | '*' | '(' | ')' | '[' | ']')
}

/// Reduce a free-form model reply to a bare part name: first nonblank line,
/// lowercased, surrounding punctuation and leading articles removed, at most
/// [`MAX_ANSWER_WORDS`] words. Returns `None` if nothing is left.
///
/// ```
/// use semgrasp::language::normalize_part_label;
/// assert_eq!(normalize_part_label("The cone.").as_deref(), Some("cone"));
/// ```
pub fn normalize_part_label(raw: &str) -> Option<String> {
    let line = raw.lines().map(str::trim).find(|l| !l.is_empty())?;
    let lower = line.to_lowercase();
    let mut words: Vec<&str> = lower
        .split_whitespace()
        .map(|w| w.trim_matches(is_edge_punct))
        .filter(|w| !w.is_empty())
        .collect();
    while words.len() > 1 && ARTICLES.contains(&words[0]) {
        words.remove(0);
    }
    words.truncate(MAX_ANSWER_WORDS);
    if words.is_empty() {
        None
    } else {
        Some(words.join(" "))
    }
}

/// A normalized part name with the reply it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartAnswer {
    pub part_label: String,
    pub raw_response: String,
}

impl PartAnswer {
    pub fn from_response(raw: &str) -> Result<Self, LanguageError> {
        let part_label = normalize_part_label(raw).ok_or_else(|| LanguageError::MalformedResponse("empty content".into()))?;
        Ok(PartAnswer { part_label, raw_response: raw.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(normalize_part_label("The cone.").unwrap(), "cone");
        assert_eq!(normalize_part_label("\n  Handle!\nBecause it is safe").unwrap(), "handle");
        assert_eq!(normalize_part_label("\"Spout\"").unwrap(), "spout");
        assert_eq!(normalize_part_label("the base of the candle holder is best").unwrap(), "base of the candle holder");
        assert_eq!(normalize_part_label("A").unwrap(), "a");
        assert!(normalize_part_label("  \n ...\n").is_none());
        assert!(normalize_part_label("").is_none());
        assert!(normalize_part_label("\n\n").is_none());
    }

    #[test]
    fn punctuation_only_line_is_malformed() {
        assert!(PartAnswer::from_response("...").is_err());
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,60}") {
            if let Some(once) = normalize_part_label(&s) {
                prop_assert_eq!(normalize_part_label(&once), Some(once.clone()));
                prop_assert!(once.split_whitespace().count() <= MAX_ANSWER_WORDS);
                prop_assert!(!once.contains('\n'));
            }
        }
    }
}
