use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::javadoc::{collapse_ws, parse_class_page};
use crate::error::{Error, Result};
use crate::evaluation::normalize_api;
use crate::hashing::atomic_write;
use crate::lexicon::{lemmatize, CategoryLexicon, VerbLexicon, OTHER_CATEGORY};

/// One method of the API dictionary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiEntry {
    pub fqn: String,
    pub class_fqn: String,
    pub method_name: String,
    pub description: String,
    pub category: String,
    pub deprecated: bool,
}

impl ApiEntry {
    pub fn new(class_fqn: &str, method_name: &str, description: String, category: String) -> Self {
        ApiEntry {
            fqn: format!("{class_fqn}.{method_name}"),
            class_fqn: class_fqn.to_string(),
            method_name: method_name.to_string(),
            description,
            category,
            deprecated: false,
        }
    }
}

/// Result of a dictionary lookup that did not find a unique entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupMiss {
    NotFound,
    Ambiguous,
}

/// Method-description pairs keyed by normalized fully-qualified name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ApiDictionary {
    entries: BTreeMap<String, ApiEntry>,
    // lowercase method name -> normalized keys
    by_method: HashMap<String, Vec<String>>,
    lexicon_version: String,
}

impl ApiDictionary {
    pub fn new(lexicon_version: impl Into<String>) -> Self {
        ApiDictionary {
            lexicon_version: lexicon_version.into(),
            ..Default::default()
        }
    }

    /// Inserts an entry unless its normalized name is already present.
    ///
    /// Deprecated entries are never stored. Returns whether the entry was added.
    pub fn insert(&mut self, entry: ApiEntry) -> bool {
        if entry.deprecated {
            return false;
        }
        let Ok(key) = normalize_api(&entry.fqn) else {
            return false;
        };
        if self.entries.contains_key(&key) {
            return false;
        }
        let method = key.rsplit('.').next().unwrap_or(&key).to_string();
        self.by_method.entry(method).or_default().push(key.clone());
        self.entries.insert(key, entry);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lexicon_version(&self) -> &str {
        &self.lexicon_version
    }

    /// Entries in normalized-name order.
    pub fn entries(&self) -> impl Iterator<Item = &ApiEntry> {
        self.entries.values()
    }

    /// Finds an entry by exact normalized name, then by unique `Class.method` suffix.
    pub fn lookup(&self, api_name: &str) -> Result<&ApiEntry, LookupMiss> {
        let key = normalize_api(api_name).map_err(|_| LookupMiss::NotFound)?;
        if let Some(entry) = self.entries.get(&key) {
            return Ok(entry);
        }
        let method = key.rsplit('.').next().unwrap_or(&key);
        let suffix = format!(".{key}");
        let mut hits = self
            .by_method
            .get(method)
            .into_iter()
            .flatten()
            .filter(|k| k.ends_with(&suffix));
        match (hits.next(), hits.next()) {
            (Some(k), None) => Ok(&self.entries[k]),
            (Some(_), Some(_)) => Err(LookupMiss::Ambiguous),
            _ => Err(LookupMiss::NotFound),
        }
    }

    /// Writes the dictionary as one JSON record per line, sorted by normalized name.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for entry in self.entries.values() {
            out.push_str(&serde_json::to_string(entry)?);
            out.push('\n');
        }
        atomic_write(path, out.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut dict = ApiDictionary::new(format!("cache:{}", path.display()));
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ApiEntry =
                serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            dict.insert(entry);
        }
        Ok(dict)
    }
}

/// Assigns the functionality category of a description from its leading verb.
///
/// The first word is lemmatized and looked up in the lexicon; anything else,
/// including an empty description, is [`OTHER_CATEGORY`].
pub fn categorize(description: &str, lexicon: &CategoryLexicon) -> String {
    let Some(first) = description
        .split(|c: char| !c.is_alphanumeric())
        .find(|w| !w.is_empty())
    else {
        return OTHER_CATEGORY.to_string();
    };
    lexicon
        .get(&lexicon.lemmatize(first))
        .unwrap_or(OTHER_CATEGORY)
        .to_string()
}

/// First sentence of a javadoc block: text up to the first period followed by
/// whitespace or end of text, without the period.
pub fn first_sentence(block: &str) -> String {
    let text = collapse_ws(block);
    let bytes = text.as_bytes();
    for (i, b) in bytes.iter().enumerate() {
        if *b == b'.' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
            return text[..i].trim().to_string();
        }
    }
    text.trim().to_string()
}

/// Rewrites a summary sentence into imperative form: "Parses the string" -> "parse the string".
///
/// Only the leading word is touched, and only when it lemmatizes to a known verb.
pub fn imperative_description(sentence: &str, verbs: &VerbLexicon, lexicon: &CategoryLexicon) -> String {
    let known = |w: &str| verbs.contains(w) || lexicon.contains(w);
    let (first, rest) = match sentence.split_once(' ') {
        Some((f, r)) => (f, Some(r)),
        None => (sentence, None),
    };
    let lemma = lemmatize(first, known);
    if !known(&lemma) {
        return sentence.to_string();
    }
    match rest {
        Some(r) => format!("{lemma} {r}"),
        None => lemma,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildWarning {
    pub file: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub dictionary: ApiDictionary,
    pub deprecated_excluded: usize,
    /// Rows dropped because they carried no description, or repeated an overload.
    pub rows_skipped: usize,
    pub warnings: Vec<BuildWarning>,
}

/// Builds the dictionary from a tree of class-documentation HTML pages.
///
/// Files are visited in sorted path order so repeated builds are identical.
/// Pages that cannot be read or carry no class name are skipped with a warning.
pub fn build_dictionary(
    html_root: &Path,
    verbs: &VerbLexicon,
    lexicon: &CategoryLexicon,
) -> Result<BuildReport> {
    if !html_root.is_dir() {
        return Err(Error::io(
            html_root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut dictionary = ApiDictionary::new(lexicon.version());
    let mut deprecated_excluded = 0;
    let mut rows_skipped = 0;
    let mut warnings = Vec::new();

    let walker = WalkDir::new(html_root).sort_by_file_name();
    for dent in walker.into_iter() {
        let dent = match dent {
            Ok(d) => d,
            Err(e) => {
                warnings.push(BuildWarning {
                    file: e.path().map(Path::to_path_buf).unwrap_or_default(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let path = dent.path();
        let is_html = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"));
        if !dent.file_type().is_file() || !is_html {
            continue;
        }
        let html = match std::fs::read(path).map(String::from_utf8) {
            Ok(Ok(s)) => s,
            Ok(Err(_)) => {
                warnings.push(BuildWarning {
                    file: path.to_path_buf(),
                    message: "not valid UTF-8".into(),
                });
                continue;
            }
            Err(e) => {
                warnings.push(BuildWarning {
                    file: path.to_path_buf(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let rel = path.strip_prefix(html_root).unwrap_or(path);
        let Some(page) = parse_class_page(&html, rel) else {
            warnings.push(BuildWarning {
                file: path.to_path_buf(),
                message: "no class name found".into(),
            });
            continue;
        };
        for row in page.methods {
            if row.deprecated {
                deprecated_excluded += 1;
                continue;
            }
            let sentence = first_sentence(&row.block);
            if sentence.is_empty() {
                rows_skipped += 1;
                continue;
            }
            let description = imperative_description(&sentence, verbs, lexicon);
            let category = categorize(&description, lexicon);
            let entry = ApiEntry::new(&page.class_fqn, &row.name, description, category);
            if !dictionary.insert(entry) {
                rows_skipped += 1;
            }
        }
    }

    for w in &warnings {
        log::warn!("skipped {}: {}", w.file.display(), w.message);
    }
    if dictionary.is_empty() {
        return Err(Error::EmptyDictionary(html_root.to_path_buf()));
    }
    Ok(BuildReport {
        dictionary,
        deprecated_excluded,
        rows_skipped,
        warnings,
    })
}
