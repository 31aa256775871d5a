//! Verb and functionality-category lexicons plus the small lemmatizer they share.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_VERBS: &str = include_str!("../data/verbs.txt");
const DEFAULT_CATEGORIES: &str = include_str!("../data/categories.tsv");

/// Category assigned when a description's verb is not in the lexicon.
pub const OTHER_CATEGORY: &str = "other";

const IRREGULAR: &[(&str, &str)] = &[
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("has", "have"),
    ("had", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("got", "get"),
    ("gotten", "get"),
    ("made", "make"),
    ("wrote", "write"),
    ("written", "write"),
    ("built", "build"),
    ("found", "find"),
    ("began", "begin"),
    ("begun", "begin"),
    ("ran", "run"),
    ("left", "leave"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("sent", "send"),
    ("kept", "keep"),
    ("bound", "bind"),
    ("held", "hold"),
    ("threw", "throw"),
    ("thrown", "throw"),
    ("drew", "draw"),
    ("drawn", "draw"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("froze", "freeze"),
    ("frozen", "freeze"),
    ("hid", "hide"),
    ("hidden", "hide"),
    ("spun", "spin"),
];

/// Reduces an English verb form to its lemma.
///
/// Lowercases, consults the irregular table, then strips `-s`/`-es`/`-ed`/`-ing`.
/// Candidates accepted by `is_known` win over the plain rule-based result, so
/// "parses" becomes "parse" rather than "pars" when "parse" is a known verb.
pub fn lemmatize(word: &str, is_known: impl Fn(&str) -> bool) -> String {
    let lower = word.to_lowercase();
    if lower.is_empty() || is_known(&lower) {
        return lower;
    }
    if let Some((_, lemma)) = IRREGULAR.iter().find(|(form, _)| *form == lower) {
        return (*lemma).to_string();
    }

    let mut candidates: Vec<String> = Vec::new();
    if let Some(stem) = lower.strip_suffix("ies") {
        candidates.push(format!("{stem}y"));
    }
    if let Some(stem) = lower.strip_suffix("es") {
        candidates.push(stem.to_string());
    }
    if let Some(stem) = lower.strip_suffix('s') {
        if !lower.ends_with("ss") {
            candidates.push(stem.to_string());
        }
    }
    if let Some(stem) = lower.strip_suffix("ied") {
        candidates.push(format!("{stem}y"));
    }
    if let Some(stem) = lower.strip_suffix("ed") {
        candidates.push(stem.to_string());
        candidates.push(format!("{stem}e"));
        candidates.extend(undouble(stem));
    }
    if let Some(stem) = lower.strip_suffix("ing") {
        candidates.push(stem.to_string());
        candidates.push(format!("{stem}e"));
        candidates.extend(undouble(stem));
    }
    candidates.retain(|c| c.len() >= 2);

    if let Some(hit) = candidates.iter().find(|c| is_known(c)) {
        return hit.clone();
    }
    candidates.into_iter().next().unwrap_or(lower)
}

// "stopped" -> "stop", "running" -> "run"
fn undouble(stem: &str) -> Option<String> {
    let bytes = stem.as_bytes();
    let n = bytes.len();
    if n >= 2 && bytes[n - 1] == bytes[n - 2] && !b"aeiou".contains(&bytes[n - 1]) {
        Some(stem[..n - 1].to_string())
    } else {
        None
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Set of verb lemmas used to find the action of a question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbLexicon {
    verbs: BTreeSet<String>,
}

impl VerbLexicon {
    pub fn parse(text: &str) -> Self {
        let verbs = data_lines(text).map(|(_, l)| l.to_lowercase()).collect();
        VerbLexicon { verbs }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&read_file(path)?))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.verbs.contains(lemma)
    }

    /// Lemma of `word` if it is a verb in this lexicon.
    pub fn verb_lemma(&self, word: &str) -> Option<String> {
        let lemma = lemmatize(word, |c| self.contains(c));
        self.contains(&lemma).then_some(lemma)
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

impl Default for VerbLexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_VERBS)
    }
}

/// Verb lemma to functionality-category map, read from `lemma<TAB>category` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    version: String,
    map: BTreeMap<String, String>,
}

impl CategoryLexicon {
    pub fn parse(text: &str, version: impl Into<String>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (line, row) in data_lines(text) {
            let Some((lemma, category)) = row.split_once('\t') else {
                return Err(Error::MalformedRecord {
                    path: "<category lexicon>".into(),
                    line,
                    message: "expected lemma<TAB>category".into(),
                });
            };
            map.insert(lemma.trim().to_lowercase(), category.trim().to_string());
        }
        if map.is_empty() {
            return Err(Error::InvalidArgument("category lexicon is empty".into()));
        }
        Ok(CategoryLexicon {
            version: version.into(),
            map,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let version = format!("file:{}", crate::hashing::short_hash(text.as_bytes()));
        Self::parse(&text, version)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, lemma: &str) -> Option<&str> {
        self.map.get(lemma).map(String::as_str)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.map.contains_key(lemma)
    }

    /// Every label the lexicon can emit, plus [`OTHER_CATEGORY`].
    pub fn categories(&self) -> BTreeSet<&str> {
        let mut set: BTreeSet<&str> = self.map.values().map(String::as_str).collect();
        set.insert(OTHER_CATEGORY);
        set
    }

    pub fn lemmatize(&self, word: &str) -> String {
        lemmatize(word, |c| self.contains(c))
    }
}

impl Default for CategoryLexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_CATEGORIES, "builtin-v1").expect("builtin category lexicon parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemmatizes_common_forms() {
        let cats = CategoryLexicon::default();
        assert_eq!(cats.lemmatize("Parses"), "parse");
        assert_eq!(cats.lemmatize("Returns"), "return");
        assert_eq!(cats.lemmatize("creates"), "create");
        assert_eq!(cats.lemmatize("Copies"), "copy");
        assert_eq!(cats.lemmatize("tests"), "test");
        assert_eq!(cats.lemmatize("stopped"), "stop");
        assert_eq!(cats.lemmatize("written"), "write");
        assert_eq!(cats.lemmatize("searching"), "search");
    }

    #[test]
    fn unknown_words_fall_back_to_suffix_rules() {
        assert_eq!(lemmatize("jumps", |_| false), "jump");
        assert_eq!(lemmatize("class", |_| false), "class");
    }

    #[test]
    fn default_lexicons_load() {
        let verbs = VerbLexicon::default();
        assert!(verbs.len() >= 200);
        assert!(verbs.contains("convert"));
        assert_eq!(verbs.verb_lemma("Converts").as_deref(), Some("convert"));
        assert_eq!(verbs.verb_lemma("String"), None);

        let cats = CategoryLexicon::default();
        assert_eq!(cats.get("parse"), Some("convert/transform/parse"));
        assert_eq!(cats.get("create"), Some("create/build/construct"));
        assert!(cats.categories().contains(OTHER_CATEGORY));
    }

    #[test]
    fn malformed_category_line_is_rejected() {
        let err = CategoryLexicon::parse("parse convert\n", "t").unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 1, .. }));
    }
}
