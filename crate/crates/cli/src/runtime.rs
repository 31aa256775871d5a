//! Turns a config into loaded components.

use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};

use apigen_core::corpus::{load_posts, require_answers, PostFormat};
use apigen_core::generation::{ChatClient, MockModel, ResponseCache};
use apigen_core::intent::REFINE_TEMPLATE_V1;
use apigen_core::retrieval::{Bm25Params, CachedEmbedder, Embedder, HashingEmbedder, HttpEmbedder};
use apigen_core::{
    ApiDictionary, CategoryLexicon, LanguageModel, Pipeline, PipelineOptions, Post,
    ReasonTemplate, RetryPolicy, Retriever, Strategy, VerbLexicon,
};

use crate::config::{EmbeddingBackend, LlmBackend, PipelineConfig};

/// Environment variable holding the bearer token for the embedding service.
pub const EMBED_KEY_ENV: &str = "APIGEN_EMBED_KEY";

pub fn verbs(config: &PipelineConfig) -> Result<VerbLexicon> {
    Ok(match &config.lexicon.verbs {
        Some(p) => VerbLexicon::from_file(p)?,
        None => VerbLexicon::default(),
    })
}

pub fn categories(config: &PipelineConfig) -> Result<CategoryLexicon> {
    Ok(match &config.lexicon.categories {
        Some(p) => CategoryLexicon::from_file(p)?,
        None => CategoryLexicon::default(),
    })
}

pub fn embedder(config: &PipelineConfig, strategy: Strategy) -> Result<Arc<dyn Embedder>> {
    let e = &config.embedding;
    let model = match strategy {
        Strategy::DenseCode => &e.code_model,
        _ => &e.sentence_model,
    };
    let cache = &config.cache.embeddings;
    Ok(match e.backend {
        EmbeddingBackend::Hashing => {
            let dims = e.dims.unwrap_or(256);
            Arc::new(CachedEmbedder::new(HashingEmbedder::new(format!("{model}-hash{dims}"), dims)?, cache))
        }
        EmbeddingBackend::Http => {
            let retry = RetryPolicy {
                max_attempts: e.max_retries + 1,
                ..RetryPolicy::default()
            };
            let http = HttpEmbedder::new(
                model.clone(),
                &e.endpoint,
                std::env::var(EMBED_KEY_ENV).ok(),
                e.dims,
                Duration::from_secs(e.timeout_secs),
                retry,
            )?;
            Arc::new(CachedEmbedder::new(http, cache))
        }
    })
}

pub fn corpus(config: &PipelineConfig) -> Result<Arc<Vec<Post>>> {
    let posts = load_posts(&config.corpus, PostFormat::Jsonl)
        .with_context(|| format!("loading corpus {}", config.corpus.display()))?;
    require_answers(&posts)?;
    Ok(Arc::new(posts))
}

pub fn retriever(config: &PipelineConfig, posts: Arc<Vec<Post>>, strategy: Strategy) -> Result<Retriever> {
    Ok(match strategy {
        Strategy::Bm25 => Retriever::bm25(posts, Bm25Params::default())?,
        dense => Retriever::dense(posts, dense, embedder(config, dense)?)
            .with_context(|| format!("embedding the corpus for {dense}"))?,
    })
}

pub fn model(config: &PipelineConfig) -> Result<Arc<dyn LanguageModel>> {
    let cache = ResponseCache::new(&config.cache.llm);
    Ok(match config.llm_backend {
        LlmBackend::Mock => Arc::new(MockModel::new(config.llm.clone(), cache)),
        LlmBackend::Openai => Arc::new(ChatClient::from_env(config.llm.clone(), cache)?),
    })
}

/// Shared, strategy-independent components.
pub struct Components {
    pub posts: Arc<Vec<Post>>,
    pub dict: Arc<ApiDictionary>,
    pub verbs: Arc<VerbLexicon>,
    pub template: Arc<ReasonTemplate>,
    pub model: Arc<dyn LanguageModel>,
    pub refine_prompt: Option<String>,
}

impl Components {
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        config.check_inputs()?;
        let dict = ApiDictionary::load(&config.dictionary)
            .with_context(|| format!("loading dictionary {}", config.dictionary.display()))?;
        let template = match &config.templates.reason {
            Some(p) => ReasonTemplate::from_file(p)?,
            None => ReasonTemplate::default(),
        };
        let refine_prompt = if config.templates.refine_with_llm {
            Some(match &config.templates.refine {
                Some(p) => std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?,
                None => REFINE_TEMPLATE_V1.to_string(),
            })
        } else {
            None
        };
        Ok(Components {
            posts: corpus(config)?,
            dict: Arc::new(dict),
            verbs: Arc::new(verbs(config)?),
            template: Arc::new(template),
            model: model(config)?,
            refine_prompt,
        })
    }

    pub fn pipeline(&self, retriever: Arc<Retriever>, options: PipelineOptions) -> Pipeline {
        let p = Pipeline::new(retriever, self.dict.clone(), self.model.clone())
            .with_verbs(self.verbs.clone())
            .with_template(self.template.clone())
            .with_options(options);
        match &self.refine_prompt {
            Some(t) => p.with_refiner(self.model.clone(), t.clone()),
            None => p,
        }
    }
}
