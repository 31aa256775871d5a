//! The similarity evaluator: rank corpus posts against a query and keep the top n.

mod bm25;
mod embedding;
mod tokenize;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bm25::{Bm25Index, Bm25Params};
pub use embedding::{cosine, CachedEmbedder, Embedder, EmbeddingVector, HashingEmbedder, HttpEmbedder};
pub use tokenize::{tokenize, tokenize_doc, TokenStream};

use crate::corpus::Post;
use crate::error::{Error, Result};

/// Number of demonstrations retrieved when nothing else is configured.
pub const DEFAULT_TOP_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Bm25,
    #[default]
    DenseSentence,
    DenseCode,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Bm25, Strategy::DenseSentence, Strategy::DenseCode];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Bm25 => "bm25",
            Strategy::DenseSentence => "dense_sentence",
            Strategy::DenseCode => "dense_code",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown retrieval strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub post_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
    /// Position of the post in the corpus.
    #[serde(skip)]
    pub corpus_index: usize,
}

/// Scores every corpus document for a query, in corpus order.
pub trait Scorer: Send + Sync {
    fn score_all(&self, query: &str) -> Result<Vec<f64>>;
}

pub struct Bm25Scorer {
    index: Bm25Index,
}

impl Bm25Scorer {
    pub fn new(posts: &[Post], params: Bm25Params) -> Result<Self> {
        let streams = posts
            .iter()
            .map(|p| tokenize_doc(p.id.clone(), &p.question))
            .collect();
        Ok(Bm25Scorer {
            index: Bm25Index::build(streams, params)?,
        })
    }

    pub fn index(&self) -> &Bm25Index {
        &self.index
    }
}

impl Scorer for Bm25Scorer {
    fn score_all(&self, query: &str) -> Result<Vec<f64>> {
        Ok(self.index.score_all(&tokenize(query)))
    }
}

/// Exact cosine scan over precomputed question embeddings.
pub struct DenseScorer {
    embedder: Arc<dyn Embedder>,
    vectors: Vec<EmbeddingVector>,
}

impl DenseScorer {
    pub fn new(posts: &[Post], embedder: Arc<dyn Embedder>) -> Result<Self> {
        if posts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let questions: Vec<String> = posts.iter().map(|p| p.question.clone()).collect();
        let vectors = embedder.embed_batch(&questions)?;
        if vectors.len() != posts.len() {
            return Err(Error::InvalidArgument(
                "embedding backend returned the wrong number of vectors".into(),
            ));
        }
        Ok(DenseScorer { embedder, vectors })
    }

    pub fn vectors(&self) -> &[EmbeddingVector] {
        &self.vectors
    }
}

impl Scorer for DenseScorer {
    fn score_all(&self, query: &str) -> Result<Vec<f64>> {
        let q = self
            .embedder
            .embed_batch(&[query.to_string()])?
            .pop()
            .ok_or_else(|| Error::InvalidArgument("embedding backend returned nothing".into()))?;
        self.vectors.iter().map(|d| cosine(&q, d)).collect()
    }
}

/// Orders scores descending, ties by ascending corpus position, and keeps `n`.
pub fn top_n(ids: &[&str], scores: &[f64], n: usize) -> Result<Vec<RetrievalResult>> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > ids.len() {
        log::warn!(
            "requested {n} results from a corpus of {}; returning the full ranking",
            ids.len()
        );
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(rank, i)| RetrievalResult {
            post_id: ids[i].to_string(),
            score: scores[i],
            rank: rank + 1,
            corpus_index: i,
        })
        .collect())
}

/// A corpus plus the scorer chosen for it.
pub struct Retriever {
    posts: Arc<Vec<Post>>,
    strategy: Strategy,
    scorer: Box<dyn Scorer>,
}

impl Retriever {
    pub fn new(posts: Arc<Vec<Post>>, strategy: Strategy, scorer: Box<dyn Scorer>) -> Self {
        Retriever {
            posts,
            strategy,
            scorer,
        }
    }

    pub fn bm25(posts: Arc<Vec<Post>>, params: Bm25Params) -> Result<Self> {
        let scorer = Bm25Scorer::new(&posts, params)?;
        Ok(Self::new(posts, Strategy::Bm25, Box::new(scorer)))
    }

    pub fn dense(posts: Arc<Vec<Post>>, strategy: Strategy, embedder: Arc<dyn Embedder>) -> Result<Self> {
        let scorer = DenseScorer::new(&posts, embedder)?;
        Ok(Self::new(posts, strategy, Box::new(scorer)))
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    /// Top-`n` posts for `query`.
    pub fn retrieve(&self, query: &str, n: usize) -> Result<Vec<RetrievalResult>> {
        let scores = self.scorer.score_all(query)?;
        let ids: Vec<&str> = self.posts.iter().map(|p| p.id.as_str()).collect();
        top_n(&ids, &scores, n)
    }
}
