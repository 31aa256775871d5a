use serde::{Deserialize, Serialize};

use super::Demonstration;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    /// In prompt order.
    pub demonstrations: Vec<Demonstration>,
    pub query: String,
    pub rendered: String,
    pub reasoning_enabled: bool,
}

impl PromptBundle {
    pub fn new(demonstrations: Vec<Demonstration>, query: &str, reasoning_enabled: bool) -> Self {
        let rendered = render_prompt(&demonstrations, query, reasoning_enabled);
        PromptBundle {
            demonstrations,
            query: query.to_string(),
            rendered,
            reasoning_enabled,
        }
    }
}

// Each field sits on one line of the layout.
fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Renders the prompt:
///
/// ```text
/// Question: {q}
/// Reason: {r}
/// Answer: {api}, {api}
///
/// Question: {query}
/// Reason:
/// ```
///
/// Without reasoning the `Reason:` lines are left out and the prompt ends with `Answer:`.
pub fn render_prompt(demos: &[Demonstration], query: &str, reasoning_enabled: bool) -> String {
    let mut out = String::new();
    for d in demos {
        out.push_str("Question: ");
        out.push_str(&one_line(&d.question));
        out.push('\n');
        if reasoning_enabled {
            out.push_str("Reason: ");
            out.push_str(&one_line(d.reasoning.as_ref().map_or("", |r| r.text.as_str())));
            out.push('\n');
        }
        out.push_str("Answer: ");
        out.push_str(&d.answer_apis.join(", "));
        out.push_str("\n\n");
    }
    out.push_str("Question: ");
    out.push_str(&one_line(query));
    out.push_str(if reasoning_enabled { "\nReason:" } else { "\nAnswer:" });
    out
}
