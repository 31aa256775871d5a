use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::generation::LanguageModel;
use crate::lexicon::VerbLexicon;

pub const REFINE_TEMPLATE_V1: &str = include_str!("../../templates/refine_v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefinedBy {
    Llm,
    Heuristic,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinedQuestion {
    pub original: String,
    pub refined: String,
    pub verb_inserted: bool,
    pub refined_by: RefinedBy,
}

const SCAFFOLDING: &[&str] = &[
    "how do i ",
    "how do you ",
    "how do we ",
    "how can i ",
    "how can we ",
    "how can you ",
    "how could i ",
    "how should i ",
    "how would i ",
    "how to ",
    "what is the way to ",
    "what is the best way to ",
    "what's the best way to ",
    "what is a good way to ",
    "is there a way to ",
    "is it possible to ",
    "i want to ",
    "i need to ",
    "i would like to ",
    "please ",
];

/// Verb inserted before "X to Y" questions that lack one.
pub const DEFAULT_CONVERT_VERB: &str = "convert";
/// Verb inserted before any other verbless question.
pub const DEFAULT_FALLBACK_VERB: &str = "handle";

fn sentence_end() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[.?!](\s|$)").unwrap())
}

/// Only the first sentence of a question is refined.
fn first_sentence(text: &str) -> &str {
    let text = text.trim();
    match sentence_end().find(text) {
        Some(m) if m.start() > 0 => text[..m.start()].trim(),
        _ => text,
    }
}

fn strip_scaffolding(text: &str) -> &str {
    let mut rest = text.trim();
    loop {
        let Some(prefix) = SCAFFOLDING
            .iter()
            .find(|p| rest.get(..p.len()).is_some_and(|head| head.eq_ignore_ascii_case(p)))
        else {
            break;
        };
        rest = rest[prefix.len()..].trim_start();
    }
    rest.trim_end_matches(|c: char| c == '?' || c == '.' || c == '!' || c.is_whitespace())
}

fn first_word(text: &str) -> &str {
    text.split_whitespace().next().unwrap_or("")
}

fn starts_with_verb(text: &str, verbs: &VerbLexicon) -> bool {
    verbs.verb_lemma(first_word(text)).is_some()
}

fn has_to_pattern(text: &str) -> bool {
    let words: Vec<&str> = text.split_whitespace().collect();
    words
        .iter()
        .enumerate()
        .any(|(i, w)| w.eq_ignore_ascii_case("to") && i > 0 && i + 1 < words.len())
}

/// Rule-based refinement: strip interrogative scaffolding and make sure the
/// question opens with a verb.
pub fn refine_heuristic(question: &str, verbs: &VerbLexicon) -> RefinedQuestion {
    let sentence = first_sentence(question);
    let mut core = strip_scaffolding(sentence);
    if core.is_empty() {
        core = sentence;
    }
    let (refined, verb_inserted) = if starts_with_verb(core, verbs) {
        (core.to_string(), false)
    } else {
        let verb = if has_to_pattern(core) {
            DEFAULT_CONVERT_VERB
        } else {
            DEFAULT_FALLBACK_VERB
        };
        (format!("{verb} {core}"), true)
    };
    let refined_by = if refined == question {
        RefinedBy::None
    } else {
        RefinedBy::Heuristic
    };
    RefinedQuestion {
        original: question.to_string(),
        refined,
        verb_inserted,
        refined_by,
    }
}

pub fn render_refine_prompt(template: &str, question: &str) -> String {
    template.replace("{question}", question.trim())
}

/// Refines with the language model when given one, falling back to
/// [`refine_heuristic`] if the call fails or returns nothing usable.
pub fn refine(
    question: &str,
    verbs: &VerbLexicon,
    llm: Option<(&dyn LanguageModel, &str)>,
) -> RefinedQuestion {
    if let Some((model, template)) = llm {
        let prompt = render_refine_prompt(template, question);
        match model.complete(&prompt) {
            Ok(samples) => {
                let text = samples
                    .first()
                    .map(|s| clean_llm_output(&s.text))
                    .unwrap_or_default();
                if !text.is_empty() {
                    let stripped = strip_scaffolding(first_sentence(question));
                    let verb_inserted =
                        starts_with_verb(&text, verbs) && !starts_with_verb(stripped, verbs);
                    return RefinedQuestion {
                        original: question.to_string(),
                        refined: text,
                        verb_inserted,
                        refined_by: RefinedBy::Llm,
                    };
                }
                log::warn!("refinement model returned empty text; using heuristic");
            }
            Err(e) => log::warn!("refinement model failed ({e}); using heuristic"),
        }
    }
    refine_heuristic(question, verbs)
}

fn clean_llm_output(text: &str) -> String {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    line.trim_matches(|c: char| c == '"' || c == '\'' || c == '`')
        .trim_end_matches(['.', '?', '!'])
        .trim()
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, Result};
    use crate::generation::Sample;

    fn verbs() -> VerbLexicon {
        VerbLexicon::default()
    }

    #[test]
    fn strips_interrogative_scaffolding() {
        let r = refine_heuristic("How do I convert a String to an int in Java", &verbs());
        assert_eq!(r.refined, "convert a String to an int in Java");
        assert!(!r.verb_inserted);
        assert_eq!(r.refined_by, RefinedBy::Heuristic);

        let r = refine_heuristic("How do I convert a String to an int in Java?", &verbs());
        assert_eq!(r.refined, "convert a String to an int in Java");
    }

    #[test]
    fn inserts_convert_for_to_pattern() {
        let r = refine_heuristic("16-bit hex string to signed int in Java", &verbs());
        assert_eq!(r.refined, "convert 16-bit hex string to signed int in Java");
        assert!(r.verb_inserted);
    }

    #[test]
    fn inserts_fallback_verb_otherwise() {
        let r = refine_heuristic("NullPointerException in HashMap", &verbs());
        assert_eq!(r.refined, "handle NullPointerException in HashMap");
        assert!(r.verb_inserted);
    }

    #[test]
    fn imperative_questions_are_unchanged() {
        let r = refine_heuristic("create a String of an array", &verbs());
        assert_eq!(r.refined, "create a String of an array");
        assert!(!r.verb_inserted);
        assert_eq!(r.refined_by, RefinedBy::None);
    }

    #[test]
    fn only_first_sentence_is_kept() {
        let r = refine_heuristic("How to sort a list? I tried Collections but failed.", &verbs());
        assert_eq!(r.refined, "sort a list");
    }

    #[test]
    fn refine_prompt_golden() {
        assert_eq!(
            render_refine_prompt(REFINE_TEMPLATE_V1, "16-bit hex string to signed int in Java"),
            "Rewrite the programming question below as one short imperative phrase. When it has no verb, \
             supply a fitting one; otherwise keep only the core request. Reply with the phrase alone.\n\n\
             Sentence: 16-bit hex string to signed int in Java\nRewritten:\n"
        );
    }

    struct Fixed(Result<&'static str, ()>);

    impl LanguageModel for Fixed {
        fn complete(&self, _prompt: &str) -> Result<Vec<Sample>> {
            match self.0 {
                Ok(t) => Ok(vec![Sample { text: t.into(), truncated: false }]),
                Err(()) => Err(Error::InvalidArgument("down".into())),
            }
        }
    }

    #[test]
    fn llm_output_is_used_when_available() {
        let m = Fixed(Ok("\"convert 16-bit hex string to signed int in Java.\"\n"));
        let r = refine(
            "16-bit hex string to signed int in Java",
            &verbs(),
            Some((&m, REFINE_TEMPLATE_V1)),
        );
        assert_eq!(r.refined, "convert 16-bit hex string to signed int in Java");
        assert_eq!(r.refined_by, RefinedBy::Llm);
        assert!(r.verb_inserted);
    }

    #[test]
    fn llm_failure_falls_back_to_heuristic() {
        let m = Fixed(Err(()));
        let r = refine("How to sort a list", &verbs(), Some((&m, REFINE_TEMPLATE_V1)));
        assert_eq!(r.refined, "sort a list");
        assert_eq!(r.refined_by, RefinedBy::Heuristic);
    }
}
