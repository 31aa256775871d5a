//! Generative API recommendation: retrieve similar Q&A posts, explain their
//! answers against documented API knowledge, and have a language model
//! recommend APIs for a new query.
//!
//! The main entry points are [`retrieval::Retriever`], [`intent::explore`],
//! [`reasoning::reason_for`], [`pipeline::Pipeline`] and [`evaluation::evaluate`].

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod generation;
pub mod hashing;
mod http;
pub mod intent;
pub mod lexicon;
pub mod pipeline;
pub mod reasoning;
pub mod retrieval;

pub use corpus::{ApiDictionary, ApiEntry, Post};
pub use error::{Error, Result};
pub use evaluation::{EvalReport, Level};
pub use generation::{
    Demonstration, LanguageModel, LlmConfig, PromptBundle, Recommendation, Sample,
};
pub use http::RetryPolicy;
pub use intent::{ConstituencyForm, Intent};
pub use lexicon::{CategoryLexicon, VerbLexicon};
pub use pipeline::{Pipeline, PipelineOptions};
pub use reasoning::{Knowledge, ReasonTemplate, ReasoningText};
pub use retrieval::{RetrievalResult, Retriever, Strategy};
