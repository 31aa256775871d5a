//! Query to recommendation: retrieve, demonstrate, prompt, sample, aggregate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{ApiDictionary, Post};
use crate::error::Result;
use crate::generation::{
    answer_part, build_demonstrations, parse_sample, recommend_from_samples, DemoOrder,
    LanguageModel, PromptBundle, ReasonContext, Recommendation,
};
use crate::lexicon::VerbLexicon;
use crate::reasoning::ReasonTemplate;
use crate::retrieval::{Retriever, DEFAULT_TOP_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    /// Demonstrations per prompt; 0 sends the query alone.
    pub n_examples: usize,
    pub reasoning_enabled: bool,
    pub demo_order: DemoOrder,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            n_examples: DEFAULT_TOP_N,
            reasoning_enabled: true,
            demo_order: DemoOrder::default(),
        }
    }
}

pub struct Pipeline {
    retriever: Arc<Retriever>,
    dict: Arc<ApiDictionary>,
    model: Arc<dyn LanguageModel>,
    verbs: Arc<VerbLexicon>,
    template: Arc<ReasonTemplate>,
    refiner: Option<(Arc<dyn LanguageModel>, String)>,
    options: PipelineOptions,
}

impl Pipeline {
    pub fn new(
        retriever: Arc<Retriever>,
        dict: Arc<ApiDictionary>,
        model: Arc<dyn LanguageModel>,
    ) -> Self {
        Pipeline {
            retriever,
            dict,
            model,
            verbs: Arc::new(VerbLexicon::default()),
            template: Arc::new(ReasonTemplate::default()),
            refiner: None,
            options: PipelineOptions::default(),
        }
    }

    pub fn with_options(mut self, options: PipelineOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_verbs(mut self, verbs: Arc<VerbLexicon>) -> Self {
        self.verbs = verbs;
        self
    }

    pub fn with_template(mut self, template: Arc<ReasonTemplate>) -> Self {
        self.template = template;
        self
    }

    /// Refines demonstration questions with `model` and the given prompt template.
    pub fn with_refiner(mut self, model: Arc<dyn LanguageModel>, prompt_template: String) -> Self {
        self.refiner = Some((model, prompt_template));
        self
    }

    pub fn options(&self) -> PipelineOptions {
        self.options
    }

    /// Retrieves demonstrations and renders the prompt; no model call.
    pub fn prepare(&self, query: &str) -> Result<PromptBundle> {
        let posts: Vec<&Post> = if self.options.n_examples == 0 {
            Vec::new()
        } else {
            let hits = self.retriever.retrieve(query, self.options.n_examples)?;
            let corpus = self.retriever.posts();
            let mut posts: Vec<&Post> = hits.iter().map(|h| &corpus[h.corpus_index]).collect();
            if self.options.demo_order == DemoOrder::MostSimilarLast {
                posts.reverse();
            }
            posts
        };
        let ctx = ReasonContext {
            verbs: &self.verbs,
            template: &self.template,
            refiner: self
                .refiner
                .as_ref()
                .map(|(m, t)| (m.as_ref() as &dyn LanguageModel, t.as_str())),
        };
        let demos = build_demonstrations(&posts, &self.dict, &ctx, self.options.reasoning_enabled);
        Ok(PromptBundle::new(demos, query, self.options.reasoning_enabled))
    }

    pub fn recommend(&self, query_id: &str, query: &str) -> Result<Recommendation> {
        let bundle = self.prepare(query)?;
        self.complete(query_id, &bundle)
    }

    /// Samples the model on a prepared prompt and aggregates the answers.
    pub fn complete(&self, query_id: &str, bundle: &PromptBundle) -> Result<Recommendation> {
        let samples = self.model.complete(&bundle.rendered)?;
        let parsed: Vec<_> = samples
            .iter()
            .map(|s| parse_sample(answer_part(&s.text)))
            .collect();
        let raw = samples.into_iter().map(|s| s.text).collect();
        Ok(recommend_from_samples(query_id, raw, &parsed))
    }
}
