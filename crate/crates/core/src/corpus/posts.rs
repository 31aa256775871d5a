use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostSource {
    Stackoverflow,
    Tutorial,
    #[default]
    Other,
}

/// One Q&A example: a programming question and the API methods that answer it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub question: String,
    pub answer_apis: Vec<String>,
    #[serde(default)]
    pub source: PostSource,
}

#[derive(Deserialize)]
struct RawPost {
    id: Option<String>,
    question: Option<String>,
    answer_apis: Option<Vec<String>>,
    #[serde(default)]
    source: PostSource,
}

/// Supported on-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PostFormat {
    #[default]
    Jsonl,
}

/// Reads a line-delimited posts file, preserving file order.
///
/// Blank lines are skipped. `answer_apis` may be omitted, which makes the file
/// usable as a query list; corpora used for demonstrations go through
/// [`require_answers`].
pub fn load_posts(path: &Path, format: PostFormat) -> Result<Vec<Post>> {
    let PostFormat::Jsonl = format;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut posts = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let raw: RawPost = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let id = raw.id.ok_or_else(|| malformed("missing field \"id\"".into()))?;
        let question = raw
            .question
            .ok_or_else(|| malformed("missing field \"question\"".into()))?;
        if question.trim().is_empty() {
            return Err(malformed("empty \"question\"".into()));
        }
        if let Some(&first_line) = seen.get(&id) {
            return Err(Error::DuplicateId {
                id,
                first_line,
                second_line: line_no,
            });
        }
        seen.insert(id.clone(), line_no);
        posts.push(Post {
            id,
            question,
            answer_apis: raw.answer_apis.unwrap_or_default(),
            source: raw.source,
        });
    }
    Ok(posts)
}

/// Checks that every post carries at least one answer API.
pub fn require_answers(posts: &[Post]) -> Result<()> {
    match posts.iter().find(|p| p.answer_apis.is_empty()) {
        Some(p) => Err(Error::InvalidArgument(format!(
            "post {:?} has no answer APIs",
            p.id
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_in_file_order() {
        let f = write_tmp(concat!(
            r#"{"id":"p1","question":"convert a String to an int","answer_apis":["java.lang.Integer.parseInt"],"source":"stackoverflow"}"#,
            "\n",
            r#"{"id":"p2","question":"create a file","answer_apis":["java.io.File.createNewFile"]}"#,
            "\n"
        ));
        let posts = load_posts(f.path(), PostFormat::Jsonl).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(posts[0].id, "p1");
        assert_eq!(posts[0].source, PostSource::Stackoverflow);
        assert_eq!(posts[1].id, "p2");
        assert_eq!(posts[1].source, PostSource::Other);
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let f = write_tmp("");
        assert!(load_posts(f.path(), PostFormat::Jsonl).unwrap().is_empty());
    }

    #[test]
    fn missing_question_names_the_line() {
        let f = write_tmp(concat!(
            r#"{"id":"a","question":"q","answer_apis":["x.Y.z"]}"#,
            "\n",
            r#"{"id":"b","question":"q","answer_apis":["x.Y.z"]}"#,
            "\n",
            r#"{"id":"c","answer_apis":["x.Y.z"]}"#,
            "\n"
        ));
        let err = load_posts(f.path(), PostFormat::Jsonl).unwrap_err();
        match err {
            Error::MalformedRecord { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("question"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let f = write_tmp(concat!(
            r#"{"id":"a","question":"q1","answer_apis":["x.Y.z"]}"#,
            "\n",
            r#"{"id":"a","question":"q2","answer_apis":["x.Y.z"]}"#,
            "\n"
        ));
        let err = load_posts(f.path(), PostFormat::Jsonl).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateId { ref id, first_line: 1, second_line: 2 } if id == "a"
        ));
    }

    #[test]
    fn blank_question_is_rejected() {
        let f = write_tmp(r#"{"id":"a","question":"   ","answer_apis":["x.Y.z"]}"#);
        assert!(load_posts(f.path(), PostFormat::Jsonl).is_err());
    }

    #[test]
    fn require_answers_flags_empty_lists() {
        let post = Post {
            id: "q".into(),
            question: "anything".into(),
            answer_apis: vec![],
            source: PostSource::Other,
        };
        assert!(require_answers(&[post]).is_err());
    }
}
