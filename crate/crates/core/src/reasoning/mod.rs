//! Knowledge detection and reason generation.

mod align;
mod template;

use serde::{Deserialize, Serialize};

pub use align::{
    action_matches_category, content_tokens, description_phrases, jaccard, match_intent_knowledge,
    stem, Alignment, EntityLink, Slot,
};
pub use template::{
    fill, render_reason, render_reduced, ReasonTemplate, ReasoningText, REASON_TEMPLATE_V1,
};

use crate::corpus::{ApiDictionary, ApiEntry, LookupMiss};
use crate::error::{Error, Result};
use crate::intent::Intent;

/// An API's documented function and functionality category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Knowledge {
    pub entry: ApiEntry,
    pub description: String,
    pub category: String,
}

impl Knowledge {
    pub fn from_entry(entry: ApiEntry) -> Self {
        Knowledge {
            description: entry.description.clone(),
            category: entry.category.clone(),
            entry,
        }
    }
}

pub fn detect_knowledge(api_name: &str, dict: &ApiDictionary) -> Result<Knowledge> {
    match dict.lookup(api_name) {
        Ok(entry) => Ok(Knowledge::from_entry(entry.clone())),
        Err(miss) => Err(Error::ApiNotFound {
            name: api_name.to_string(),
            ambiguous: miss == LookupMiss::Ambiguous,
        }),
    }
}

/// Full reason when the dictionary knows the API, reduced reason otherwise.
pub fn reason_for(
    intent: &Intent,
    api_name: &str,
    dict: &ApiDictionary,
    template: &ReasonTemplate,
) -> ReasoningText {
    match detect_knowledge(api_name, dict) {
        Ok(k) => {
            let alignment = match_intent_knowledge(intent, &k);
            render_reason(intent, &k, &alignment, template)
        }
        Err(e) => {
            log::debug!("{e}; using reduced reason");
            render_reduced(intent, api_name, template)
        }
    }
}
