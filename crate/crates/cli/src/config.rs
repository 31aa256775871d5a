use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use apigen_core::generation::DemoOrder;
use apigen_core::{LlmConfig, PipelineOptions, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmBackend {
    /// Any OpenAI-compatible chat/completions endpoint.
    #[default]
    Openai,
    /// Replays the response cache; a miss is an error.
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingBackend {
    #[default]
    Http,
    /// Local feature hashing; no service needed.
    Hashing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub backend: EmbeddingBackend,
    pub endpoint: String,
    /// Model id used for `dense_sentence`.
    pub sentence_model: String,
    /// Model id used for `dense_code`.
    pub code_model: String,
    /// Expected vector size; checked when set.
    pub dims: Option<usize>,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            backend: EmbeddingBackend::Http,
            endpoint: "http://127.0.0.1:8080".into(),
            sentence_model: "all-MiniLM-L6-v2".into(),
            code_model: "codebert-base".into(),
            dims: None,
            timeout_secs: 30,
            max_retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    pub llm: PathBuf,
    pub embeddings: PathBuf,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            llm: "cache/llm".into(),
            embeddings: "cache/embeddings".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateConfig {
    /// Reasoning template file; the bundled version is used when unset.
    pub reason: Option<PathBuf>,
    /// Refinement prompt file; the bundled version is used when unset.
    pub refine: Option<PathBuf>,
    /// Refine demonstration questions with the LLM instead of the rule-based rewriter.
    pub refine_with_llm: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconConfig {
    pub verbs: Option<PathBuf>,
    pub categories: Option<PathBuf>,
}

/// Everything a run needs. Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub dictionary: PathBuf,
    pub strategy: Strategy,
    pub n_examples: usize,
    pub reasoning_enabled: bool,
    pub demo_order: DemoOrder,
    /// Queries processed concurrently.
    pub workers: usize,
    pub llm_backend: LlmBackend,
    pub llm: LlmConfig,
    pub embedding: EmbeddingConfig,
    pub cache: CacheConfig,
    pub templates: TemplateConfig,
    pub lexicon: LexiconConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let options = PipelineOptions::default();
        PipelineConfig {
            corpus: "data/posts.jsonl".into(),
            dictionary: "data/dictionary.jsonl".into(),
            strategy: Strategy::default(),
            n_examples: options.n_examples,
            reasoning_enabled: options.reasoning_enabled,
            demo_order: options.demo_order,
            workers: 4,
            llm_backend: LlmBackend::default(),
            llm: LlmConfig::default(),
            embedding: EmbeddingConfig::default(),
            cache: CacheConfig::default(),
            templates: TemplateConfig::default(),
            lexicon: LexiconConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads the file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config =
            Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.llm.validate()?;
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    pub fn options(&self) -> PipelineOptions {
        PipelineOptions {
            n_examples: self.n_examples,
            reasoning_enabled: self.reasoning_enabled,
            demo_order: self.demo_order,
        }
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.dictionary);
        fix(&mut self.cache.llm);
        fix(&mut self.cache.embeddings);
        for p in [
            &mut self.templates.reason,
            &mut self.templates.refine,
            &mut self.lexicon.verbs,
            &mut self.lexicon.categories,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Fails on the first input file that does not exist.
    pub fn check_inputs(&self) -> Result<()> {
        let mut required = vec![("corpus", &self.corpus), ("dictionary", &self.dictionary)];
        for (name, p) in [
            ("templates.reason", &self.templates.reason),
            ("templates.refine", &self.templates.refine),
            ("lexicon.verbs", &self.lexicon.verbs),
            ("lexicon.categories", &self.lexicon.categories),
        ] {
            if let Some(p) = p {
                required.push((name, p));
            }
        }
        for (name, p) in required {
            if !p.exists() {
                bail!("{name} file {} does not exist", p.display());
            }
        }
        Ok(())
    }
}
