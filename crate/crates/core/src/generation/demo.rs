use serde::{Deserialize, Serialize};

use super::LanguageModel;
use crate::corpus::{ApiDictionary, Post};
use crate::intent::explore;
use crate::lexicon::VerbLexicon;
use crate::reasoning::{reason_for, ReasonTemplate, ReasoningText};

/// A (question, reason, answer) exemplar placed in the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub question: String,
    /// Absent when reasoning is disabled.
    pub reasoning: Option<ReasoningText>,
    pub answer_apis: Vec<String>,
}

/// Where the most similar demonstration goes in the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoOrder {
    MostSimilarFirst,
    /// Closest to the query.
    #[default]
    MostSimilarLast,
}

/// What reason generation needs besides the dictionary.
pub struct ReasonContext<'a> {
    pub verbs: &'a VerbLexicon,
    pub template: &'a ReasonTemplate,
    /// Optional model and prompt template for question refinement.
    pub refiner: Option<(&'a dyn LanguageModel, &'a str)>,
}

/// One demonstration per post, in the order given. Posts without answers are
/// skipped. The reason covers the first answer API and degrades to the
/// reduced form when the dictionary does not know it.
pub fn build_demonstrations(
    posts: &[&Post],
    dict: &ApiDictionary,
    ctx: &ReasonContext<'_>,
    reasoning_enabled: bool,
) -> Vec<Demonstration> {
    posts
        .iter()
        .filter_map(|post| {
            let Some(first_api) = post.answer_apis.first() else {
                log::warn!("post {} has no answer APIs; skipped as a demonstration", post.id);
                return None;
            };
            let reasoning = reasoning_enabled.then(|| {
                let analysis = explore(&post.question, ctx.verbs, ctx.refiner);
                reason_for(&analysis.intent, first_api, dict, ctx.template)
            });
            Some(Demonstration {
                question: post.question.clone(),
                reasoning,
                answer_apis: post.answer_apis.clone(),
            })
        })
        .collect()
}
