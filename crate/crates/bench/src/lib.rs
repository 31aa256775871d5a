//! Deterministic synthetic workloads for the benchmarks under `benches/`.

use apigen_core::evaluation::ScoredQuery;
use apigen_core::generation::Demonstration;
use apigen_core::retrieval::{tokenize_doc, TokenStream};
use apigen_core::{Post, ReasoningText};

const VERBS: [&str; 8] = ["convert", "read", "parse", "sort", "create", "delete", "check", "copy"];
const NOUNS: [&str; 12] = [
    "string", "int", "file", "list", "array", "map", "date", "line", "directory", "stream", "byte",
    "thread",
];

/// Cheap deterministic word picker (linear congruential).
struct Words(u64);

impl Words {
    fn next(&mut self, n: usize) -> usize {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) as usize % n
    }

    fn question(&mut self) -> String {
        let v = VERBS[self.next(VERBS.len())];
        let a = NOUNS[self.next(NOUNS.len())];
        let b = NOUNS[self.next(NOUNS.len())];
        format!("How do I {v} a {a} to a {b} in Java")
    }
}

pub fn corpus(n: usize) -> Vec<Post> {
    let mut w = Words(7);
    (0..n)
        .map(|i| Post {
            id: format!("p{i}"),
            question: w.question(),
            answer_apis: vec![format!("java.util.C{}.m{}", i % 50, i % 7)],
            source: Default::default(),
        })
        .collect()
}

pub fn token_streams(posts: &[Post]) -> Vec<TokenStream> {
    posts.iter().map(|p| tokenize_doc(p.id.clone(), &p.question)).collect()
}

pub fn demonstrations(n: usize) -> Vec<Demonstration> {
    corpus(n)
        .into_iter()
        .map(|p| Demonstration {
            reasoning: Some(ReasoningText {
                text: format!("The task intent is to {}. The API {} fits it.", p.question, p.answer_apis[0]),
                template_version: "reason-v1".into(),
            }),
            question: p.question,
            answer_apis: p.answer_apis,
        })
        .collect()
}

/// A model-like sample that mentions `apis` API names.
pub fn sample_text(apis: usize) -> String {
    (0..apis)
        .map(|i| format!("The API java.util.C{i}.m{} handles this. ", i % 3))
        .collect::<String>()
        + "\nAnswer: java.util.C0.m0"
}

pub fn scored_queries(n: usize) -> Vec<ScoredQuery> {
    (0..n)
        .map(|i| ScoredQuery {
            query_id: format!("q{i}"),
            predictions: (0..5).map(|j| format!("java.util.c{}.m{}", (i + j) % 9, j)).collect(),
            truth: vec![format!("java.util.c{}.m{}", i % 9, i % 5)],
        })
        .collect()
}
