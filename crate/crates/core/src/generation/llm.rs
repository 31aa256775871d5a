//! Chat-completions client, response cache, and the cache-replaying mock backend.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{atomic_write, sha256_hex, short_hash};
use crate::http::{build_client, post_json, RetryPolicy};

/// Environment variable holding the bearer token for the completions endpoint.
pub const LLM_KEY_ENV: &str = "APIGEN_LLM_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub top_p: f64,
    pub n_samples: u32,
    pub endpoint: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Upper bound on concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            model: "gpt-3.5-turbo".into(),
            temperature: 0.15,
            max_tokens: 512,
            top_p: 0.95,
            n_samples: 5,
            endpoint: "https://api.openai.com/v1".into(),
            timeout_secs: 60,
            max_retries: 3,
            max_in_flight: 4,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidArgument("temperature must be >= 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::InvalidArgument("top_p must be in (0, 1]".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        Ok(())
    }

    /// Hash of the settings that influence sampled text. The endpoint is excluded
    /// so a cache filled against one host replays against another.
    pub fn sampling_hash(&self) -> String {
        let key = serde_json::json!({
            "model": self.model,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "n": self.n_samples,
        });
        short_hash(key.to_string().as_bytes())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.max_retries + 1,
            ..RetryPolicy::default()
        }
    }
}

/// One sampled completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub text: String,
    /// The backend stopped on the token limit.
    pub truncated: bool,
}

/// Anything that turns a prompt into sampled completions.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<Vec<Sample>>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub model: String,
    pub config_hash: String,
    pub prompt_hash: String,
}

impl CacheKey {
    pub fn new(config: &LlmConfig, prompt: &str) -> Self {
        CacheKey {
            model: config.model.clone(),
            config_hash: config.sampling_hash(),
            prompt_hash: sha256_hex(prompt.as_bytes()),
        }
    }
}

/// Raw response bodies stored as `<dir>/<model>/<config hash>/<prompt hash>.json`.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        let model: String = key
            .model
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        self.dir
            .join(model)
            .join(&key.config_hash)
            .join(format!("{}.json", key.prompt_hash))
    }

    pub fn get(&self, key: &CacheKey) -> Option<Vec<u8>> {
        std::fs::read(self.path(key)).ok()
    }

    pub fn put(&self, key: &CacheKey, raw: &[u8]) -> Result<()> {
        atomic_write(&self.path(key), raw)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    index: usize,
    message: Option<ChoiceMessage>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Samples from one or more concatenated chat/completions response bodies.
pub fn parse_responses(raw: &[u8]) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for resp in serde_json::Deserializer::from_slice(raw).into_iter::<ChatResponse>() {
        let mut choices = resp?.choices;
        choices.sort_by_key(|c| c.index);
        samples.extend(choices.into_iter().map(|c| Sample {
            text: c
                .message
                .and_then(|m| m.content)
                .or(c.text)
                .unwrap_or_default(),
            truncated: c.finish_reason.as_deref() == Some("length"),
        }));
    }
    Ok(samples)
}

/// Builds a chat/completions response body; used to write cache fixtures.
pub fn synthetic_response(model: &str, texts: &[&str]) -> Vec<u8> {
    let choices: Vec<_> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            serde_json::json!({
                "index": i,
                "message": {"role": "assistant", "content": t},
                "finish_reason": "stop",
            })
        })
        .collect();
    let body = serde_json::json!({"object": "chat.completion", "model": model, "choices": choices});
    serde_json::to_vec_pretty(&body).expect("json value serializes")
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    n: u32,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

struct Semaphore {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore {
            permits: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut p = self.permits.lock().unwrap_or_else(|e| e.into_inner());
        while *p == 0 {
            p = self.freed.wait(p).unwrap_or_else(|e| e.into_inner());
        }
        *p -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

/// OpenAI-compatible `POST {endpoint}/chat/completions` client with a response cache.
pub struct ChatClient {
    config: LlmConfig,
    url: String,
    token: Option<String>,
    client: Client,
    cache: ResponseCache,
    retry: RetryPolicy,
    in_flight: Semaphore,
    requests: AtomicUsize,
}

impl ChatClient {
    pub fn new(config: LlmConfig, cache: ResponseCache, token: Option<String>) -> Result<Self> {
        config.validate()?;
        let client = build_client(Duration::from_secs(config.timeout_secs))?;
        Ok(ChatClient {
            url: format!("{}/chat/completions", config.endpoint.trim_end_matches('/')),
            retry: config.retry_policy(),
            in_flight: Semaphore::new(config.max_in_flight),
            config,
            token,
            client,
            cache,
            requests: AtomicUsize::new(0),
        })
    }

    /// Reads the bearer token from [`LLM_KEY_ENV`].
    pub fn from_env(config: LlmConfig, cache: ResponseCache) -> Result<Self> {
        Self::new(config, cache, std::env::var(LLM_KEY_ENV).ok())
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// HTTP requests issued so far (cache hits issue none).
    pub fn requests_sent(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    fn fetch(&self, prompt: &str) -> Result<Vec<u8>> {
        let wanted = self.config.n_samples as usize;
        let mut raw = Vec::new();
        let mut have = 0usize;
        // Some compatible servers ignore `n`; ask again for the remainder.
        for _ in 0..wanted {
            let body = ChatRequest {
                model: &self.config.model,
                messages: [Message {
                    role: "user",
                    content: prompt,
                }],
                temperature: self.config.temperature,
                top_p: self.config.top_p,
                max_tokens: self.config.max_tokens,
                n: (wanted - have) as u32,
            };
            let bytes = {
                let _permit = self.in_flight.acquire();
                self.requests.fetch_add(1, Ordering::Relaxed);
                post_json(&self.client, &self.url, self.token.as_deref(), &body, self.retry)?
            };
            let got = parse_responses(&bytes)?.len();
            if !raw.is_empty() {
                raw.push(b'\n');
            }
            raw.extend_from_slice(&bytes);
            have += got;
            if have >= wanted || got == 0 {
                break;
            }
        }
        Ok(raw)
    }
}

impl LanguageModel for ChatClient {
    fn complete(&self, prompt: &str) -> Result<Vec<Sample>> {
        let key = CacheKey::new(&self.config, prompt);
        let raw = match self.cache.get(&key) {
            Some(raw) => raw,
            None => {
                let raw = self.fetch(prompt)?;
                self.cache.put(&key, &raw)?;
                raw
            }
        };
        let mut samples = parse_responses(&raw)?;
        samples.truncate(self.config.n_samples as usize);
        for (i, _) in samples.iter().enumerate().filter(|(_, s)| s.truncated) {
            log::warn!("sample {i} for prompt {} hit the token limit", &key.prompt_hash[..12]);
        }
        Ok(samples)
    }
}

/// Replays cached responses and fails on a miss; never touches the network.
pub struct MockModel {
    config: LlmConfig,
    cache: ResponseCache,
}

impl MockModel {
    pub fn new(config: LlmConfig, cache: ResponseCache) -> Self {
        MockModel { config, cache }
    }
}

impl LanguageModel for MockModel {
    fn complete(&self, prompt: &str) -> Result<Vec<Sample>> {
        let key = CacheKey::new(&self.config, prompt);
        let raw = self.cache.get(&key).ok_or_else(|| Error::CacheMiss {
            model: key.model.clone(),
            prompt_hash: key.prompt_hash.clone(),
        })?;
        let mut samples = parse_responses(&raw)?;
        samples.truncate(self.config.n_samples as usize);
        Ok(samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reported_settings() {
        let c = LlmConfig::default();
        assert_eq!(c.temperature, 0.15);
        assert_eq!(c.max_tokens, 512);
        assert_eq!(c.top_p, 0.95);
        assert_eq!(c.n_samples, 5);
        c.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_values() {
        let bad = [
            LlmConfig { temperature: -0.1, ..Default::default() },
            LlmConfig { top_p: 0.0, ..Default::default() },
            LlmConfig { top_p: 1.5, ..Default::default() },
            LlmConfig { n_samples: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn sampling_hash_ignores_endpoint_but_not_temperature() {
        let a = LlmConfig::default();
        let b = LlmConfig { endpoint: "http://other".into(), ..Default::default() };
        let c = LlmConfig { temperature: 0.7, ..Default::default() };
        assert_eq!(a.sampling_hash(), b.sampling_hash());
        assert_ne!(a.sampling_hash(), c.sampling_hash());
    }

    #[test]
    fn parses_concatenated_bodies_in_index_order() {
        let first = br#"{"choices":[{"index":1,"message":{"content":"b"},"finish_reason":"length"},{"index":0,"message":{"content":"a"},"finish_reason":"stop"}]}"#;
        let mut raw = first.to_vec();
        raw.push(b'\n');
        raw.extend(synthetic_response("m", &["c"]));
        let s = parse_responses(&raw).unwrap();
        let texts: Vec<_> = s.iter().map(|x| x.text.as_str()).collect();
        assert_eq!(texts, ["a", "b", "c"]);
        assert!(s[1].truncated && !s[0].truncated);
    }

    #[test]
    fn mock_replays_and_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path());
        let cfg = LlmConfig { n_samples: 2, ..Default::default() };
        let key = CacheKey::new(&cfg, "prompt one");
        cache.put(&key, &synthetic_response(&cfg.model, &["x", "y", "z"])).unwrap();
        let mock = MockModel::new(cfg, cache);
        let s = mock.complete("prompt one").unwrap();
        assert_eq!(s.len(), 2);
        assert!(matches!(mock.complete("prompt two"), Err(Error::CacheMiss { .. })));
    }
}
