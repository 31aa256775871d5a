//! Demonstrations, prompt assembly, LLM sampling and ranking of sampled APIs.

mod aggregate;
mod demo;
mod llm;
mod parse;
mod prompt;

pub use aggregate::{aggregate, recommend_from_samples, Recommendation};
pub use demo::{build_demonstrations, DemoOrder, Demonstration, ReasonContext};
pub use llm::{
    parse_responses, synthetic_response, CacheKey, ChatClient, LanguageModel, LlmConfig,
    MockModel, ResponseCache, Sample, LLM_KEY_ENV,
};
pub use parse::{answer_part, parse_sample, ParsedApi};
pub use prompt::{render_prompt, PromptBundle};
