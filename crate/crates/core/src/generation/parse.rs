use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::evaluation::normalize_api;

/// One API mention in a sampled completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedApi {
    /// As written, without a trailing `()`.
    pub api: String,
    /// The sentence the API was first mentioned in.
    pub reason: String,
}

fn api_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)+(?:\(\))?").unwrap()
    })
}

fn sentence_end() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[.!?](?:\s+|$)|\n").unwrap())
}

// File names and host names that look like dotted identifiers.
const NON_API_SUFFIXES: &[&str] = &[
    "txt", "java", "class", "jar", "xml", "json", "html", "htm", "csv", "properties", "com",
    "org", "net", "io", "log", "md", "png", "jpg", "zip", "gz", "yml", "yaml",
];

fn plausible(api: &str, preceded_by_word: bool) -> bool {
    if preceded_by_word {
        return false;
    }
    let segments: Vec<&str> = api.split('.').collect();
    if segments.iter().any(|s| s.chars().count() < 2) {
        return false;
    }
    let last = segments.last().copied().unwrap_or("");
    !(segments.len() == 2 && NON_API_SUFFIXES.contains(&last))
}

/// The sampled answer only: anything from a model-invented follow-up
/// `Question:` block on is dropped.
pub fn answer_part(text: &str) -> &str {
    match text.find("\nQuestion:") {
        Some(i) => &text[..i],
        None if text.starts_with("Question:") => "",
        None => text,
    }
}

fn sentence_around(text: &str, at: usize) -> &str {
    let mut start = 0;
    let mut end = text.len();
    for m in sentence_end().find_iter(text) {
        if m.end() <= at {
            start = m.end();
        } else if m.start() >= at {
            end = m.start() + text[m.start()..m.end()].trim_end().len();
            break;
        }
    }
    text[start..end].trim()
}

/// API mentions in first-occurrence order, each listed once.
pub fn parse_sample(text: &str) -> Vec<ParsedApi> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in api_re().find_iter(text) {
        let preceded = text[..m.start()]
            .chars()
            .next_back()
            .is_some_and(|c| c.is_alphanumeric() || c == '/' || c == '@' || c == ':');
        let api = m.as_str().trim_end_matches("()");
        if !plausible(api, preceded) {
            continue;
        }
        let Ok(key) = normalize_api(api) else {
            continue;
        };
        if seen.insert(key) {
            out.push(ParsedApi {
                api: api.to_string(),
                reason: sentence_around(text, m.start()).to_string(),
            });
        }
    }
    out
}
