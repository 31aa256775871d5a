//! Ranking metrics over canonicalized predictions.
//!
//! A prediction matches a truth at method level when the canonical names are
//! equal, when the prediction is a dotted suffix of exactly one truth (a bare
//! `Class.method`), or when a truth is a dotted suffix of the prediction. Class
//! level applies the same rule to class forms.

use serde::{Deserialize, Serialize};

use super::normalize::class_form;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Method,
    Class,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchLevel {
    None,
    ClassOnly,
    ExactMethod,
}

impl MatchLevel {
    /// Whether this match counts as correct when scoring at `level`.
    pub fn is_hit(self, level: Level) -> bool {
        match level {
            Level::Method => self == MatchLevel::ExactMethod,
            Level::Class => self != MatchLevel::None,
        }
    }

    /// Graded relevance used by NDCG: 2 exact, 1 class only, 0 otherwise.
    pub fn gain(self) -> f64 {
        match self {
            MatchLevel::ExactMethod => 2.0,
            MatchLevel::ClassOnly => 1.0,
            MatchLevel::None => 0.0,
        }
    }
}

/// One query's canonical predictions (in rank order) and canonical truth set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredQuery {
    pub query_id: String,
    /// Unparseable predictions are kept as empty strings so positions stay put.
    pub predictions: Vec<String>,
    pub truth: Vec<String>,
}

fn dotted_suffix(long: &str, short: &str) -> bool {
    long.len() > short.len()
        && long.ends_with(short)
        && long.as_bytes()[long.len() - short.len() - 1] == b'.'
}

fn name_hits<'t>(pred: &str, truths: impl Iterator<Item = (usize, &'t str)> + Clone) -> Vec<usize> {
    if pred.is_empty() {
        return Vec::new();
    }
    let exact: Vec<usize> = truths
        .clone()
        .filter(|(_, t)| *t == pred || dotted_suffix(pred, t))
        .map(|(i, _)| i)
        .collect();
    if !exact.is_empty() {
        return exact;
    }
    let suffix: Vec<(usize, &str)> = truths.filter(|(_, t)| dotted_suffix(t, pred)).collect();
    match suffix.first() {
        Some(&(_, name)) if suffix.iter().all(|&(_, t)| t == name) => {
            suffix.into_iter().map(|(i, _)| i).collect()
        }
        _ => Vec::new(),
    }
}

/// Indices into `truth` that `pred` matches at `level`.
pub fn hits(pred: &str, truth: &[String], level: Level) -> Vec<usize> {
    let methods = name_hits(pred, truth.iter().map(String::as_str).enumerate());
    match level {
        Level::Method => methods,
        Level::Class => {
            if pred.is_empty() {
                return Vec::new();
            }
            let classes = name_hits(
                class_form(pred),
                truth.iter().map(|t| class_form(t)).enumerate(),
            );
            let mut all: Vec<usize> = methods.into_iter().chain(classes).collect();
            all.sort_unstable();
            all.dedup();
            all
        }
    }
}

/// Best match of one prediction against a truth set.
pub fn match_api(pred: &str, truth: &[String]) -> MatchLevel {
    if !hits(pred, truth, Level::Method).is_empty() {
        MatchLevel::ExactMethod
    } else if !hits(pred, truth, Level::Class).is_empty() {
        MatchLevel::ClassOnly
    } else {
        MatchLevel::None
    }
}

fn mean(queries: &[ScoredQuery], per_query: impl Fn(&ScoredQuery) -> f64) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::InvalidArgument("no queries to score".into()));
    }
    Ok(queries.iter().map(per_query).sum::<f64>() / queries.len() as f64)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(())
}

pub fn has_correct(q: &ScoredQuery, k: usize, level: Level) -> bool {
    q.predictions
        .iter()
        .take(k)
        .any(|p| !hits(p, &q.truth, level).is_empty())
}

pub fn success_rate_at_k(queries: &[ScoredQuery], k: usize, level: Level) -> Result<f64> {
    check_k(k)?;
    mean(queries, |q| if has_correct(q, k, level) { 1.0 } else { 0.0 })
}

/// Average precision over the top `k`, normalized by `min(k, |truth|)`.
///
/// Each truth can be claimed by one prediction only, so repeated hits on the
/// same API are not relevant twice.
pub fn average_precision_at_k(q: &ScoredQuery, k: usize, level: Level) -> f64 {
    let m = k.min(q.truth.len());
    if m == 0 {
        return 0.0;
    }
    let mut claimed = vec![false; q.truth.len()];
    let mut correct = 0usize;
    let mut sum = 0.0;
    for (i, pred) in q.predictions.iter().take(k).enumerate() {
        let free = hits(pred, &q.truth, level).into_iter().find(|&t| !claimed[t]);
        if let Some(t) = free {
            claimed[t] = true;
            correct += 1;
            sum += correct as f64 / (i + 1) as f64;
        }
    }
    sum / m as f64
}

pub fn map_at_k(queries: &[ScoredQuery], k: usize, level: Level) -> Result<f64> {
    check_k(k)?;
    mean(queries, |q| average_precision_at_k(q, k, level))
}

/// 1-based position of the first correct prediction.
pub fn first_position(q: &ScoredQuery, level: Level) -> Option<usize> {
    q.predictions
        .iter()
        .position(|p| !hits(p, &q.truth, level).is_empty())
        .map(|i| i + 1)
}

pub fn mrr(queries: &[ScoredQuery], level: Level) -> Result<f64> {
    mean(queries, |q| first_position(q, level).map_or(0.0, |p| 1.0 / p as f64))
}

/// DCG of graded gains against the DCG of the same gains sorted descending.
pub fn ndcg_from_gains(gains: &[f64]) -> f64 {
    let dcg = |g: &[f64]| -> f64 {
        g.iter()
            .enumerate()
            .map(|(i, rel)| rel / ((i + 2) as f64).log2())
            .sum()
    };
    let mut ideal = gains.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(&ideal);
    if idcg == 0.0 {
        0.0
    } else {
        dcg(gains) / idcg
    }
}

pub fn ndcg_at_k(queries: &[ScoredQuery], k: usize) -> Result<f64> {
    check_k(k)?;
    mean(queries, |q| {
        let gains: Vec<f64> = q
            .predictions
            .iter()
            .take(k)
            .map(|p| match_api(p, &q.truth).gain())
            .collect();
        ndcg_from_gains(&gains)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(preds: &[&str], truth: &[&str]) -> ScoredQuery {
        ScoredQuery {
            query_id: "q".into(),
            predictions: preds.iter().map(|s| s.to_string()).collect(),
            truth: truth.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn match_levels() {
        let truth = vec!["java.lang.class.forname".to_string()];
        assert_eq!(match_api("java.lang.class.forname", &truth), MatchLevel::ExactMethod);
        assert_eq!(match_api("class.forname", &truth), MatchLevel::ExactMethod);
        assert_eq!(match_api("java.lang.class.getname", &truth), MatchLevel::ClassOnly);
        assert_eq!(match_api("java.io.file.exists", &truth), MatchLevel::None);
        assert_eq!(match_api("", &truth), MatchLevel::None);
    }

    #[test]
    fn ambiguous_bare_suffix_is_not_exact() {
        let truth = vec!["java.util.list.add".to_string(), "java.awt.list.add".to_string()];
        assert_eq!(match_api("list.add", &truth), MatchLevel::None);
    }

    #[test]
    fn bare_class_shared_by_two_truths_is_a_class_hit() {
        let truth = vec!["java.io.file.exists".to_string(), "java.io.file.delete".to_string()];
        assert_eq!(match_api("file.mkdirs", &truth), MatchLevel::ClassOnly);
        assert_eq!(hits("file.mkdirs", &truth, Level::Class), [0, 1]);
    }

    #[test]
    fn success_rate_examples() {
        assert_eq!(success_rate_at_k(&[q(&["a.b"], &["a.b"])], 1, Level::Method).unwrap(), 1.0);
        let two = [q(&["a.b"], &["a.b"]), q(&["x.y"], &["a.b"])];
        assert_eq!(success_rate_at_k(&two, 3, Level::Method).unwrap(), 0.5);
        let late = [q(&["b.b", "c.c", "a.a"], &["a.a"])];
        assert_eq!(success_rate_at_k(&late, 1, Level::Method).unwrap(), 0.0);
        assert_eq!(success_rate_at_k(&late, 3, Level::Method).unwrap(), 1.0);
        assert!(success_rate_at_k(&[], 1, Level::Method).is_err());
    }

    #[test]
    fn map_examples() {
        let m = |preds: &[&str], truth: &[&str]| map_at_k(&[q(preds, truth)], 3, Level::Method).unwrap();
        assert_abs_diff_eq!(m(&["a.a", "b.b", "c.c"], &["a.a"]), 1.0);
        assert_abs_diff_eq!(m(&["b.b", "a.a", "c.c"], &["a.a"]), 0.5);
        assert_abs_diff_eq!(m(&["a.a", "b.b", "c.c"], &["a.a", "b.b"]), 1.0);
        // repeated hit on the single truth is relevant once
        assert_abs_diff_eq!(m(&["a.a", "a.a"], &["a.a"]), 1.0);
    }

    #[test]
    fn mrr_examples() {
        assert_eq!(mrr(&[q(&["a.a"], &["a.a"])], Level::Method).unwrap(), 1.0);
        assert_abs_diff_eq!(
            mrr(&[q(&["b.b", "c.c", "a.a"], &["a.a"])], Level::Method).unwrap(),
            1.0 / 3.0
        );
        let two = [q(&["a.a"], &["a.a"]), q(&["b.b", "a.a"], &["a.a"])];
        assert_abs_diff_eq!(mrr(&two, Level::Method).unwrap(), 0.75);
        assert_eq!(mrr(&[q(&["b.b"], &["a.a"])], Level::Method).unwrap(), 0.0);
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg_at_k(&[q(&["a.a"], &["a.a"])], 1).unwrap(), 1.0);
        // independent hand evaluation: DCG = 1 + 2/log2(3), IDCG = 2 + 1/log2(3)
        let dcg = 1.0 + 2.0 / 3f64.log2();
        let idcg = 2.0 + 1.0 / 3f64.log2();
        assert_abs_diff_eq!(ndcg_from_gains(&[1.0, 2.0, 0.0]), dcg / idcg, epsilon = 1e-12);
        assert_abs_diff_eq!(ndcg_from_gains(&[1.0, 2.0, 0.0]), 0.8597, epsilon = 1e-4);
        assert_eq!(ndcg_from_gains(&[0.0, 0.0]), 0.0);
        // class-only then exact, built from real names
        let graded = q(&["x.c.other", "x.c.m", "y.z"], &["x.c.m"]);
        assert_abs_diff_eq!(ndcg_at_k(&[graded], 3).unwrap(), dcg / idcg, epsilon = 1e-12);
    }

    #[test]
    fn class_level_accepts_same_class() {
        let query = [q(&["x.c.other"], &["x.c.m"])];
        assert_eq!(success_rate_at_k(&query, 1, Level::Method).unwrap(), 0.0);
        assert_eq!(success_rate_at_k(&query, 1, Level::Class).unwrap(), 1.0);
    }
}
