//! Embedding backends, the on-disk vector cache, and cosine similarity.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use crate::error::{Error, Result};
use crate::hashing::{atomic_write, sha256_hex};
use crate::http::{build_client, post_json, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Rejects empty vectors and non-finite components.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding has zero dimensions".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("embedding has non-finite values".into()));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine similarity; both vectors must share dimensions and have non-zero norm.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dims() != v.dims() {
        return Err(Error::DimensionMismatch {
            expected: u.dims(),
            actual: v.dims(),
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dot: f64 = u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// A source of sentence embeddings.
pub trait Embedder: Send + Sync {
    /// Stable identifier; part of the cache key.
    fn id(&self) -> &str;

    /// Vectors for `texts`, in input order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dims: usize,
    vectors: Vec<Vec<f64>>,
}

/// Client for a `POST {endpoint}/embed` service.
pub struct HttpEmbedder {
    id: String,
    url: String,
    token: Option<String>,
    dims: Option<usize>,
    client: Client,
    retry: RetryPolicy,
}

impl HttpEmbedder {
    pub fn new(
        id: impl Into<String>,
        endpoint: &str,
        token: Option<String>,
        dims: Option<usize>,
        timeout: Duration,
        retry: RetryPolicy,
    ) -> Result<Self> {
        Ok(HttpEmbedder {
            id: id.into(),
            url: format!("{}/embed", endpoint.trim_end_matches('/')),
            token,
            dims,
            client: build_client(timeout)?,
            retry,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let raw = post_json(
            &self.client,
            &self.url,
            self.token.as_deref(),
            &EmbedRequest { texts },
            self.retry,
        )?;
        let resp: EmbedResponse = serde_json::from_slice(&raw)?;
        if resp.vectors.len() != texts.len() {
            return Err(Error::Service {
                endpoint: self.url.clone(),
                attempts: 1,
                message: format!(
                    "expected {} vectors, got {}",
                    texts.len(),
                    resp.vectors.len()
                ),
            });
        }
        let expected = self.dims.unwrap_or(resp.dims);
        if resp.dims != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: resp.dims,
            });
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        actual: v.len(),
                    });
                }
                EmbeddingVector::new(v)
            })
            .collect()
    }
}

/// Offline bag-of-words embedder using signed feature hashing.
///
/// Deterministic across platforms. A constant bias component keeps every vector,
/// including the one for empty text, away from zero norm.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    id: String,
    dims: usize,
}

impl HashingEmbedder {
    pub fn new(id: impl Into<String>, dims: usize) -> Result<Self> {
        if dims < 2 {
            return Err(Error::InvalidArgument("hashing embedder needs at least 2 dims".into()));
        }
        Ok(HashingEmbedder { id: id.into(), dims })
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let mut values = vec![0.0; self.dims];
        values[0] = 1.0;
        for tok in tokenize(text) {
            let h = fnv1a(tok.as_bytes());
            let slot = 1 + (h % (self.dims as u64 - 1)) as usize;
            let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
            values[slot] += sign;
        }
        EmbeddingVector(values)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Embedder for HashingEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Content-addressed vector cache in front of another embedder.
///
/// Entries live at `<dir>/<backend id>/<sha256 of text>.json` and are written
/// atomically, so concurrent runs never observe partial files.
pub struct CachedEmbedder<E> {
    inner: E,
    dir: PathBuf,
    batch_size: usize,
    backend_calls: AtomicUsize,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E, cache_dir: &Path) -> Self {
        let dir = cache_dir.join(sanitize(inner.id()));
        CachedEmbedder {
            inner,
            dir,
            batch_size: 64,
            backend_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Number of batch requests forwarded to the wrapped backend.
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::Relaxed)
    }

    fn path_for(&self, text: &str) -> PathBuf {
        self.dir.join(format!("{}.json", sha256_hex(text.as_bytes())))
    }

    fn read_cached(&self, text: &str) -> Option<EmbeddingVector> {
        let bytes = std::fs::read(self.path_for(text)).ok()?;
        let vec: EmbeddingVector = serde_json::from_slice(&bytes).ok()?;
        EmbeddingVector::new(vec.0).ok()
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let mut out = self.embed_many(&[text.to_string()])?;
        Ok(out.remove(0))
    }

    /// Vectors for `texts` in order, fetching only uncached ones.
    pub fn embed_many(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let mut out: Vec<Option<EmbeddingVector>> = texts.iter().map(|t| self.read_cached(t)).collect();
        let mut missing: Vec<String> = Vec::new();
        for (t, v) in texts.iter().zip(&out) {
            if v.is_none() && !missing.contains(t) {
                missing.push(t.clone());
            }
        }
        let mut dims: Option<usize> = out.iter().flatten().map(EmbeddingVector::dims).next();
        for chunk in missing.chunks(self.batch_size) {
            self.backend_calls.fetch_add(1, Ordering::Relaxed);
            let vectors = self.inner.embed_batch(chunk)?;
            for (text, vector) in chunk.iter().zip(vectors) {
                let expected = *dims.get_or_insert(vector.dims());
                if vector.dims() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        actual: vector.dims(),
                    });
                }
                atomic_write(&self.path_for(text), &serde_json::to_vec(&vector)?)?;
                for (slot, t) in out.iter_mut().zip(texts) {
                    if t == text {
                        *slot = Some(vector.clone());
                    }
                }
            }
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| Error::InvalidArgument("embedding backend skipped a text".into())))
            .collect()
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        self.embed_many(texts)
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&v(&[0.3, 0.4]), &v(&[0.3, 0.4])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((c - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::ZeroNorm)));
        assert!(matches!(
            cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
        assert!(EmbeddingVector::new(vec![]).is_err());
    }

    #[test]
    fn hashing_embedder_is_deterministic_and_nonzero() {
        let e = HashingEmbedder::new("hash", 64).unwrap();
        assert_eq!(e.embed_one("convert string"), e.embed_one("convert string"));
        assert!(e.embed_one("").norm() > 0.0);
    }

    struct Counting {
        calls: Mutex<Vec<usize>>,
        dims: usize,
    }

    impl Embedder for Counting {
        fn id(&self) -> &str {
            "counting/v1"
        }
        fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
            self.calls.lock().unwrap().push(texts.len());
            Ok(texts.iter().map(|t| v(&vec![t.len() as f64 + 1.0; self.dims])).collect())
        }
    }

    #[test]
    fn cache_serves_repeats_without_backend_calls() {
        let dir = tempfile::tempdir().unwrap();
        let cached = CachedEmbedder::new(
            Counting {
                calls: Mutex::new(vec![]),
                dims: 3,
            },
            dir.path(),
        );
        let a = cached.embed("same text").unwrap();
        let b = cached.embed("same text").unwrap();
        assert_eq!(a, b);
        assert_eq!(cached.backend_calls(), 1);

        // duplicates inside one batch are fetched once
        let texts = vec!["x".to_string(), "y".to_string(), "x".to_string(), "same text".to_string()];
        let got = cached.embed_many(&texts).unwrap();
        assert_eq!(got[0], got[2]);
        assert_eq!(*cached.inner.calls.lock().unwrap(), vec![1, 2]);
        assert!(dir.path().join("counting_v1").is_dir());
    }
}
