//! Fine-grained matching of an intent against an API's knowledge.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::Knowledge;
use crate::intent::Intent;
use crate::lexicon::{lemmatize, VerbLexicon};
use crate::retrieval::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Object,
    Target,
    Condition,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Object, Slot::Target, Slot::Condition];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Object => "object",
            Slot::Target => "target",
            Slot::Condition => "condition",
        }
    }

    pub fn of(self, intent: &Intent) -> Option<&str> {
        match self {
            Slot::Object => intent.object.as_deref(),
            Slot::Target => intent.target.as_deref(),
            Slot::Condition => intent.condition.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    pub slot: Slot,
    /// Best-overlapping description phrase; empty when unmatched.
    pub span: String,
    pub overlap: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub action_matches_category: bool,
    /// One link per slot, in object, target, condition order.
    pub entity_links: Vec<EntityLink>,
}

impl Alignment {
    pub fn link(&self, slot: Slot) -> Option<&EntityLink> {
        self.entity_links.iter().find(|l| l.slot == slot)
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "of", "to", "in", "into", "for", "on",
    "at", "by", "with", "from", "as", "and", "or", "is", "are", "be", "it", "its", "if", "any",
    "some", "each", "all", "my", "your", "given", "specified", "using", "via", "which", "whether",
];

const ABBREVIATIONS: &[(&str, &str)] = &[
    ("int", "integer"),
    ("ints", "integer"),
    ("str", "string"),
    ("char", "character"),
    ("chars", "character"),
    ("bool", "boolean"),
    ("num", "number"),
    ("arr", "array"),
    ("obj", "object"),
    ("len", "length"),
    ("dir", "directory"),
    ("msg", "message"),
    ("idx", "index"),
    ("arg", "argument"),
    ("args", "argument"),
    ("param", "parameter"),
    ("params", "parameter"),
    ("val", "value"),
    ("db", "database"),
    ("env", "environment"),
    ("config", "configuration"),
    ("info", "information"),
    ("dict", "dictionary"),
];

/// Expands common abbreviations, then strips plural and verbal suffixes.
pub fn stem(token: &str) -> String {
    let lower = token.to_lowercase();
    if let Some((_, full)) = ABBREVIATIONS.iter().find(|(a, _)| *a == lower) {
        return (*full).to_string();
    }
    if lower.len() <= 3 {
        return lower;
    }
    if let Some(s) = lower.strip_suffix("ies") {
        return format!("{s}y");
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if lower.ends_with(suffix) {
            return lower[..lower.len() - 2].to_string();
        }
    }
    if lower.ends_with('s') && !lower.ends_with("ss") && !lower.ends_with("us") {
        return lower[..lower.len() - 1].to_string();
    }
    if lower.len() > 5 {
        if let Some(s) = lower.strip_suffix("ing") {
            return s.to_string();
        }
        if let Some(s) = lower.strip_suffix("ed") {
            return s.to_string();
        }
    }
    lower
}

/// Stemmed, stopword-free token set.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .map(|t| stem(&t))
        .collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

const SPLIT_WORDS: &[&str] = &[
    "to", "in", "into", "from", "of", "with", "for", "on", "at", "by", "as", "using", "via",
    "without", "within", "over", "under", "between", "through", "after", "before", "and", "or",
    "if", "when", "whether", "that", "which", "than",
];

/// Candidate phrases of a description: the text between prepositions,
/// conjunctions and punctuation, minus the leading verb. Returned as byte spans.
pub fn description_phrases(description: &str) -> Vec<(usize, usize)> {
    let mut phrases = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    let mut first_word = true;
    let mut pos = 0;
    for piece in description.split_inclusive(|c: char| c.is_whitespace() || ",;:()".contains(c)) {
        let start = pos;
        pos += piece.len();
        let word = piece.trim_end_matches(|c: char| c.is_whitespace() || ",;:()".contains(c));
        let breaks_after = word.len() < piece.len() && piece[word.len()..].chars().any(|c| ",;:()".contains(c));
        let word = word.trim_matches(|c: char| !c.is_alphanumeric() && c != '.' && c != '_');
        let word = word.trim_end_matches('.');
        if word.is_empty() {
            if breaks_after {
                phrases.extend(current.take());
            }
            continue;
        }
        let is_first = std::mem::replace(&mut first_word, false);
        if is_first && looks_like_verb(word) {
            continue;
        }
        if SPLIT_WORDS.contains(&word.to_lowercase().as_str()) {
            phrases.extend(current.take());
        } else {
            let offset = start + piece.find(word).unwrap_or(0);
            let end = offset + word.len();
            current = Some(match current {
                Some((s, _)) => (s, end),
                None => (offset, end),
            });
        }
        if breaks_after {
            phrases.extend(current.take());
        }
    }
    phrases.extend(current);
    phrases
}

fn looks_like_verb(word: &str) -> bool {
    static VERBS: OnceLock<VerbLexicon> = OnceLock::new();
    VERBS.get_or_init(VerbLexicon::default).verb_lemma(word).is_some()
}

/// Whether the intent's action is one of the category label's verbs.
pub fn action_matches_category(action: &str, category: &str) -> bool {
    if action.trim().is_empty() {
        return false;
    }
    let lexicon_verbs: BTreeSet<String> = category
        .split('/')
        .map(|v| v.trim().to_lowercase())
        .filter(|v| !v.is_empty())
        .collect();
    let lemma = lemmatize(action.trim(), |w| lexicon_verbs.contains(w));
    lexicon_verbs.contains(&lemma)
}

/// Links every intent slot to its best-overlapping description phrase.
pub fn match_intent_knowledge(intent: &Intent, knowledge: &Knowledge) -> Alignment {
    let description = knowledge.description.as_str();
    let phrases: Vec<(&str, BTreeSet<String>)> = description_phrases(description)
        .into_iter()
        .map(|(s, e)| {
            let text = &description[s..e];
            (text, content_tokens(text))
        })
        .collect();

    let entity_links = Slot::ALL
        .into_iter()
        .map(|slot| {
            let slot_tokens = slot.of(intent).map(content_tokens).unwrap_or_default();
            let mut best: Option<(&str, f64)> = None;
            for (text, toks) in &phrases {
                let score = jaccard(&slot_tokens, toks);
                if score > best.map_or(0.0, |(_, s)| s) {
                    best = Some((text, score));
                }
            }
            match best {
                Some((text, overlap)) => EntityLink {
                    slot,
                    span: text.to_string(),
                    overlap,
                    matched: true,
                },
                None => EntityLink {
                    slot,
                    span: String::new(),
                    overlap: 0.0,
                    matched: false,
                },
            }
        })
        .collect();

    Alignment {
        action_matches_category: action_matches_category(&intent.action, &knowledge.category),
        entity_links,
    }
}
