//! Intent explorer: refine a question, chunk it, and read off
//! action / object / target / condition.

mod classify;
mod refine;

use serde::{Deserialize, Serialize};

pub use classify::{classify, is_determiner, ConstituencyForm, Span, SyntacticRoles};
pub use refine::{
    refine, refine_heuristic, render_refine_prompt, RefinedBy, RefinedQuestion,
    DEFAULT_CONVERT_VERB, DEFAULT_FALLBACK_VERB, REFINE_TEMPLATE_V1,
};

use crate::error::{Error, Result};
use crate::generation::LanguageModel;
use crate::lexicon::VerbLexicon;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Intent {
    pub action: String,
    pub object: Option<String>,
    pub target: Option<String>,
    pub condition: Option<String>,
}

impl Intent {
    /// Used when no constituency form applies: the whole question becomes the condition.
    pub fn fallback(refined: &str) -> Self {
        Intent {
            action: String::new(),
            object: None,
            target: None,
            condition: Some(refined.to_string()).filter(|s| !s.is_empty()),
        }
    }
}

/// Reads the four intent slots off the roles, one rule per constituency form.
///
/// | form            | object    | target    | condition |
/// |-----------------|-----------|-----------|-----------|
/// | VB+NP+(PP/S)    | -         | dmod dobj | PP/S      |
/// | VB+NP+PP+(PP/S) | dmod dobj | pmod pobj | PP/S      |
/// | VB+S            | -         | -         | S         |
pub fn deconstruct(form: ConstituencyForm, roles: &SyntacticRoles) -> Result<Intent> {
    let text = |span: Option<Span>| roles.text(span).map(str::to_string);
    let action = roles.text(roles.verb).unwrap_or_default().to_string();
    let intent = match form {
        ConstituencyForm::Unparsed => return Err(Error::Unparsed),
        ConstituencyForm::VbNpX => Intent {
            action,
            object: None,
            target: text(roles.direct_phrase()),
            condition: text(roles.trailing),
        },
        ConstituencyForm::VbNpPpX => Intent {
            action,
            object: text(roles.direct_phrase()),
            target: text(roles.prepositional_phrase()),
            condition: text(roles.trailing),
        },
        ConstituencyForm::VbS => Intent {
            action,
            object: None,
            target: None,
            condition: text(roles.trailing),
        },
    };
    if intent.action.is_empty() {
        return Err(Error::Unparsed);
    }
    Ok(intent)
}

/// Everything the explorer learned about one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentAnalysis {
    pub refined: RefinedQuestion,
    pub form: ConstituencyForm,
    pub roles: SyntacticRoles,
    pub intent: Intent,
}

/// Refine, classify and deconstruct; never fails.
pub fn explore(
    question: &str,
    verbs: &VerbLexicon,
    llm: Option<(&dyn LanguageModel, &str)>,
) -> IntentAnalysis {
    let refined = refine(question, verbs, llm);
    let (form, roles) = classify(&refined.refined, verbs);
    let intent = deconstruct(form, &roles).unwrap_or_else(|_| Intent::fallback(&refined.refined));
    IntentAnalysis {
        refined,
        form,
        roles,
        intent,
    }
}
