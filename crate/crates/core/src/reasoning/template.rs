//! Versioned reasoning template and its deterministic fill.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::align::{Alignment, Slot};
use super::Knowledge;
use crate::error::{Error, Result};
use crate::intent::Intent;
use crate::lexicon::OTHER_CATEGORY;

pub const REASON_TEMPLATE_V1: &str = include_str!("../../templates/reason_v1.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReasonTemplate {
    pub version: String,
    pub intent: String,
    pub intent_object: String,
    pub intent_target: String,
    pub intent_condition: String,
    pub intent_fallback: String,
    pub knowledge_verb: String,
    pub knowledge_other: String,
    pub category_match: String,
    pub category_mismatch: String,
    pub category_no_action: String,
    pub coverage: String,
    pub coverage_item: String,
    pub coverage_none: String,
    pub reduced: String,
    pub conclusion: String,
}

impl ReasonTemplate {
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let t: ReasonTemplate = toml::from_str(text).map_err(|e| Error::Template {
            name: name.to_string(),
            message: e.message().to_string(),
        })?;
        t.check(name)?;
        Ok(t)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn fields(&self) -> [(&'static str, &str, &'static [&'static str]); 15] {
        const INTENT: &[&str] = &["action", "object", "target", "condition"];
        const KNOWLEDGE: &[&str] = &["fqn", "description", "category"];
        [
            ("intent", &self.intent, INTENT),
            ("intent_object", &self.intent_object, &["object"]),
            ("intent_target", &self.intent_target, &["target"]),
            ("intent_condition", &self.intent_condition, &["condition"]),
            ("intent_fallback", &self.intent_fallback, &["condition"]),
            ("knowledge_verb", &self.knowledge_verb, KNOWLEDGE),
            ("knowledge_other", &self.knowledge_other, KNOWLEDGE),
            ("category_match", &self.category_match, &["action"]),
            ("category_mismatch", &self.category_mismatch, &["action"]),
            ("category_no_action", &self.category_no_action, &[]),
            ("coverage", &self.coverage, &["items"]),
            ("coverage_item", &self.coverage_item, &["slot", "intent", "span"]),
            ("coverage_none", &self.coverage_none, &[]),
            ("reduced", &self.reduced, &["fqn"]),
            ("conclusion", &self.conclusion, &[]),
        ]
    }

    // Every placeholder must be known, and the API name must appear exactly
    // once across the sentences of a full reason and of a reduced one.
    fn check(&self, name: &str) -> Result<()> {
        let err = |message: String| Error::Template {
            name: name.to_string(),
            message,
        };
        if self.version.trim().is_empty() {
            return Err(err("empty version".into()));
        }
        for (key, text, allowed) in self.fields() {
            for p in placeholders(text) {
                if !allowed.contains(&p) {
                    return Err(err(format!("unknown placeholder {{{p}}} in `{key}`")));
                }
            }
        }
        let fqn_count = |text: &str| placeholders(text).filter(|p| *p == "fqn").count();
        for (key, text) in [
            ("knowledge_verb", &self.knowledge_verb),
            ("knowledge_other", &self.knowledge_other),
            ("reduced", &self.reduced),
        ] {
            if fqn_count(text) != 1 {
                return Err(err(format!("`{key}` must name {{fqn}} exactly once")));
            }
        }
        Ok(())
    }
}

impl Default for ReasonTemplate {
    fn default() -> Self {
        Self::parse(REASON_TEMPLATE_V1, "reason_v1.toml").expect("bundled template is valid")
    }
}

fn placeholders(text: &str) -> impl Iterator<Item = &str> {
    text.split('{').skip(1).filter_map(|rest| {
        let end = rest.find('}')?;
        let key = &rest[..end];
        (!key.is_empty() && key.chars().all(|c| c.is_ascii_lowercase() || c == '_')).then_some(key)
    })
}

/// Single-pass substitution; values are never re-scanned for placeholders.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let value = after
            .find('}')
            .and_then(|close| values.iter().find(|(k, _)| *k == &after[..close]).map(|(_, v)| (close, v)));
        match value {
            Some((close, v)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningText {
    pub text: String,
    pub template_version: String,
}

fn intent_sentence(intent: &Intent, t: &ReasonTemplate) -> String {
    if intent.action.trim().is_empty() {
        return fill(
            &t.intent_fallback,
            &[("condition", intent.condition.as_deref().unwrap_or(""))],
        );
    }
    let part = |tpl: &str, key: &str, v: &Option<String>| match v.as_deref() {
        Some(v) if !v.trim().is_empty() => fill(tpl, &[(key, v)]),
        _ => String::new(),
    };
    fill(
        &t.intent,
        &[
            ("action", intent.action.as_str()),
            ("object", &part(&t.intent_object, "object", &intent.object)),
            ("target", &part(&t.intent_target, "target", &intent.target)),
            ("condition", &part(&t.intent_condition, "condition", &intent.condition)),
        ],
    )
}

fn join_items(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Renders the full reason: intent, knowledge, category match, slot coverage, conclusion.
pub fn render_reason(
    intent: &Intent,
    knowledge: &Knowledge,
    alignment: &Alignment,
    t: &ReasonTemplate,
) -> ReasoningText {
    let fqn = knowledge.entry.fqn.as_str();
    let knowledge_tpl = if knowledge.category == OTHER_CATEGORY {
        &t.knowledge_other
    } else {
        &t.knowledge_verb
    };
    let mut knowledge_sentence = fill(
        knowledge_tpl,
        &[
            ("fqn", fqn),
            ("description", knowledge.description.as_str()),
            ("category", knowledge.category.as_str()),
        ],
    );
    let category_tpl = if intent.action.trim().is_empty() {
        &t.category_no_action
    } else if alignment.action_matches_category {
        &t.category_match
    } else {
        &t.category_mismatch
    };
    knowledge_sentence.push_str(&fill(category_tpl, &[("action", intent.action.as_str())]));

    let items: Vec<String> = Slot::ALL
        .into_iter()
        .filter_map(|slot| {
            let link = alignment.link(slot).filter(|l| l.matched)?;
            let value = slot.of(intent)?;
            Some(fill(
                &t.coverage_item,
                &[("slot", slot.as_str()), ("intent", value), ("span", link.span.as_str())],
            ))
        })
        .collect();
    let coverage = if items.is_empty() {
        t.coverage_none.clone()
    } else {
        fill(&t.coverage, &[("items", &join_items(&items))])
    };

    let text = [intent_sentence(intent, t), knowledge_sentence, coverage, t.conclusion.clone()]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    ReasoningText {
        text,
        template_version: t.version.clone(),
    }
}

/// Reason used when the API has no dictionary knowledge: the description and
/// category sentences are left out.
pub fn render_reduced(intent: &Intent, api_name: &str, t: &ReasonTemplate) -> ReasoningText {
    let text = [
        intent_sentence(intent, t),
        fill(&t.reduced, &[("fqn", api_name)]),
        t.conclusion.clone(),
    ]
    .into_iter()
    .filter(|s| !s.is_empty())
    .collect::<Vec<_>>()
    .join(" ");
    ReasoningText {
        text,
        template_version: t.version.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("a {x} b", &[("x", "{x}")]), "a {x} b");
        assert_eq!(fill("{x}{y}", &[("x", "1"), ("y", "2")]), "12");
        assert_eq!(fill("keep {unknown} and {", &[]), "keep {unknown} and {");
    }

    #[test]
    fn bundled_template_loads() {
        let t = ReasonTemplate::default();
        assert_eq!(t.version, "reason-v1");
    }

    #[test]
    fn rejects_unknown_placeholder_and_repeated_fqn() {
        let bad = REASON_TEMPLATE_V1.replace("Therefore this API", "Therefore {nope}");
        assert!(matches!(
            ReasonTemplate::parse(&bad, "t"),
            Err(Error::Template { .. })
        ));
        let twice = REASON_TEMPLATE_V1.replace(
            "conclusion = \"Therefore this API satisfies the query.\"",
            "conclusion = \"Therefore {fqn} satisfies the query.\"",
        );
        assert!(ReasonTemplate::parse(&twice, "t").is_err());
        let reduced_twice = REASON_TEMPLATE_V1.replace(
            "reduced = \"The API {fqn} is recommended for this intent.\"",
            "reduced = \"The API {fqn} ({fqn}) is recommended.\"",
        );
        assert!(ReasonTemplate::parse(&reduced_twice, "t").is_err());
    }

    #[test]
    fn missing_key_is_a_template_error() {
        let text = REASON_TEMPLATE_V1.replace("conclusion =", "# conclusion =");
        assert!(matches!(ReasonTemplate::parse(&text, "x.toml"), Err(Error::Template { name, .. }) if name == "x.toml"));
    }

    #[test]
    fn intent_sentence_skips_empty_slots() {
        let t = ReasonTemplate::default();
        let intent = Intent {
            action: "check".into(),
            object: None,
            target: None,
            condition: Some("if a file exists".into()),
        };
        assert_eq!(intent_sentence(&intent, &t), "The task intent is to check if a file exists.");
        assert_eq!(
            intent_sentence(&Intent::fallback("do the thing"), &t),
            "The task intent is \"do the thing\"."
        );
    }
}
