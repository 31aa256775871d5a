use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::tokenize::TokenStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone)]
struct IndexedDoc {
    id: String,
    len: usize,
    term_freqs: HashMap<String, u32>,
}

/// Okapi BM25 statistics over a fixed document collection.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    docs: Vec<IndexedDoc>,
    positions: HashMap<String, usize>,
    doc_freq: HashMap<String, u32>,
    avgdl: f64,
}

impl Bm25Index {
    /// Indexes token streams in order. Ids must be unique; the corpus must be non-empty.
    pub fn build(streams: Vec<TokenStream>, params: Bm25Params) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut docs = Vec::with_capacity(streams.len());
        let mut positions = HashMap::with_capacity(streams.len());
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        let mut total_len = 0usize;
        for stream in streams {
            if positions.insert(stream.doc_id.clone(), docs.len()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate document id {:?}",
                    stream.doc_id
                )));
            }
            let mut term_freqs: HashMap<String, u32> = HashMap::new();
            for t in &stream.tokens {
                *term_freqs.entry(t.clone()).or_default() += 1;
            }
            for t in term_freqs.keys() {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
            total_len += stream.tokens.len();
            docs.push(IndexedDoc {
                id: stream.doc_id,
                len: stream.tokens.len(),
                term_freqs,
            });
        }
        let avgdl = total_len as f64 / docs.len() as f64;
        Ok(Bm25Index {
            params,
            docs,
            positions,
            doc_freq,
            avgdl,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.positions.get(doc_id).map(|&i| self.docs[i].len)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.doc_freq.len()
    }

    /// Document ids in insertion order.
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    /// `ln((N - df + 0.5) / (df + 0.5) + 1)`, always positive.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.doc_freq(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// BM25 score of one document; repeated query terms count once.
    pub fn score(&self, query_tokens: &[String], doc_id: &str) -> Result<f64> {
        let pos = *self
            .positions
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        Ok(self.score_at(query_tokens, pos))
    }

    pub(crate) fn score_at(&self, query_tokens: &[String], pos: usize) -> f64 {
        self.score_terms(&self.weighted_terms(query_tokens), pos)
    }

    /// Distinct query terms, sorted, with their IDF; terms outside the vocabulary are dropped.
    fn weighted_terms<'q>(&self, query_tokens: &'q [String]) -> Vec<(&'q str, f64)> {
        let terms: BTreeSet<&str> = query_tokens.iter().map(String::as_str).collect();
        terms
            .into_iter()
            .filter(|t| self.doc_freq.contains_key(*t))
            .map(|t| (t, self.idf(t)))
            .collect()
    }

    fn score_terms(&self, terms: &[(&str, f64)], pos: usize) -> f64 {
        let doc = &self.docs[pos];
        let Bm25Params { k1, b } = self.params;
        let norm = 1.0 - b + b * doc.len as f64 / self.avgdl;
        terms
            .iter()
            .filter_map(|&(t, idf)| doc.term_freqs.get(t).map(|&tf| (idf, tf as f64)))
            .map(|(idf, tf)| idf * tf * (k1 + 1.0) / (tf + k1 * norm))
            .sum()
    }

    /// Scores of every document, in insertion order.
    pub fn score_all(&self, query_tokens: &[String]) -> Vec<f64> {
        let terms = self.weighted_terms(query_tokens);
        (0..self.docs.len()).map(|i| self.score_terms(&terms, i)).collect()
    }
}
