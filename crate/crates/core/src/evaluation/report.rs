use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::metrics::{map_at_k, mrr, ndcg_at_k, success_rate_at_k, Level, ScoredQuery};
use super::normalize::normalize_api;
use crate::error::{Error, Result};

/// One line of a run file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub query_id: String,
    pub ranked_apis: Vec<String>,
}

/// One line of a ground-truth file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub query_id: String,
    pub apis: Vec<String>,
}

/// Canonical, deduplicated answer set for one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub query_id: String,
    pub apis: BTreeSet<String>,
}

impl GroundTruth {
    pub fn from_record(rec: &TruthRecord) -> Result<Self> {
        let apis = rec
            .apis
            .iter()
            .map(|a| normalize_api(a))
            .collect::<Result<BTreeSet<_>>>()?;
        if apis.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "ground truth for {:?} is empty",
                rec.query_id
            )));
        }
        Ok(GroundTruth {
            query_id: rec.query_id.clone(),
            apis,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtK {
    pub k: usize,
    pub success_rate: f64,
    pub map: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub level: Level,
    pub queries: usize,
    pub at_k: Vec<AtK>,
    pub mrr: f64,
}

impl EvalReport {
    pub fn at(&self, k: usize) -> Option<&AtK> {
        self.at_k.iter().find(|r| r.k == k)
    }
}

pub const DEFAULT_KS: [usize; 3] = [1, 3, 5];

/// Pairs runs with their truths in run order. Every run needs a truth record.
pub fn pair_runs(runs: &[RunRecord], truths: &[GroundTruth]) -> Result<Vec<ScoredQuery>> {
    let by_id: HashMap<&str, &GroundTruth> =
        truths.iter().map(|t| (t.query_id.as_str(), t)).collect();
    let missing: Vec<String> = runs
        .iter()
        .filter(|r| !by_id.contains_key(r.query_id.as_str()))
        .map(|r| r.query_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTruth(missing));
    }
    Ok(runs
        .iter()
        .map(|r| ScoredQuery {
            query_id: r.query_id.clone(),
            predictions: r
                .ranked_apis
                .iter()
                .map(|p| normalize_api(p).unwrap_or_default())
                .collect(),
            truth: by_id[r.query_id.as_str()].apis.iter().cloned().collect(),
        })
        .collect())
}

/// Computes every metric for one level.
pub fn score(queries: &[ScoredQuery], level: Level, ks: &[usize]) -> Result<EvalReport> {
    let at_k = ks
        .iter()
        .map(|&k| {
            Ok(AtK {
                k,
                success_rate: success_rate_at_k(queries, k, level)?,
                map: map_at_k(queries, k, level)?,
                ndcg: ndcg_at_k(queries, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        level,
        queries: queries.len(),
        at_k,
        mrr: mrr(queries, level)?,
    })
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

pub fn load_runs(path: &Path) -> Result<Vec<RunRecord>> {
    read_jsonl(path)
}

pub fn load_truths(path: &Path) -> Result<Vec<GroundTruth>> {
    read_jsonl::<TruthRecord>(path)?
        .iter()
        .map(GroundTruth::from_record)
        .collect()
}

/// Scores a run file against a truth file at each requested level.
pub fn evaluate(run_path: &Path, truth_path: &Path, levels: &[Level], ks: &[usize]) -> Result<Vec<EvalReport>> {
    let runs = load_runs(run_path)?;
    let truths = load_truths(truth_path)?;
    let queries = pair_runs(&runs, &truths)?;
    levels.iter().map(|&l| score(&queries, l, ks)).collect()
}

/// One JSON record per report.
pub fn reports_to_jsonl(reports: &[EvalReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Plain-text table with a header stating the AveP conventions.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str("# AveP@k: precision summed over ranks 1..k, normalized by m = min(k, |truth|)\n");
    out.push_str("# MRR: queries without a correct API contribute 0\n");
    for r in reports {
        let level = match r.level {
            Level::Method => "method",
            Level::Class => "class",
        };
        let _ = writeln!(out, "level={level} queries={} MRR={:.4}", r.queries, r.mrr);
        let _ = writeln!(out, "{:>4}  {:>12}  {:>8}  {:>8}", "k", "SuccessRate", "MAP", "NDCG");
        for row in &r.at_k {
            let _ = writeln!(
                out,
                "{:>4}  {:>12.4}  {:>8.4}  {:>8.4}",
                row.k, row.success_rate, row.map, row.ndcg
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(id: &str, apis: &[&str]) -> GroundTruth {
        GroundTruth::from_record(&TruthRecord {
            query_id: id.into(),
            apis: apis.iter().map(|s| s.to_string()).collect(),
        })
        .unwrap()
    }

    fn run(id: &str, apis: &[&str]) -> RunRecord {
        RunRecord {
            query_id: id.into(),
            ranked_apis: apis.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn perfect_run_scores_one_everywhere() {
        let q = pair_runs(&[run("1", &["java.lang.Integer.parseInt()"])], &[truth("1", &["java.lang.Integer.parseInt"])]).unwrap();
        for level in [Level::Method, Level::Class] {
            let r = score(&q, level, &DEFAULT_KS).unwrap();
            assert_eq!(r.mrr, 1.0);
            for row in &r.at_k {
                assert_eq!((row.success_rate, row.map, row.ndcg), (1.0, 1.0, 1.0));
            }
        }
    }

    #[test]
    fn empty_predictions_score_zero() {
        let q = pair_runs(&[run("1", &[]), run("2", &[])], &[truth("1", &["a.B.c"]), truth("2", &["d.E.f"])]).unwrap();
        let r = score(&q, Level::Method, &DEFAULT_KS).unwrap();
        assert_eq!(r.mrr, 0.0);
        assert!(r.at_k.iter().all(|row| row.success_rate == 0.0 && row.map == 0.0 && row.ndcg == 0.0));
    }

    #[test]
    fn missing_truth_lists_ids() {
        let err = pair_runs(&[run("1", &[]), run("7", &[])], &[truth("1", &["a.B.c"])]).unwrap_err();
        match err {
            Error::MissingTruth(ids) => assert_eq!(ids, vec!["7".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truth_is_canonical_set() {
        let t = truth("1", &["A.b()", "a.B", " a.b "]);
        assert_eq!(t.apis.len(), 1);
    }

    #[test]
    fn table_mentions_conventions() {
        let q = pair_runs(&[run("1", &["a.b"])], &[truth("1", &["a.b"])]).unwrap();
        let table = render_table(&[score(&q, Level::Method, &DEFAULT_KS).unwrap()]);
        assert!(table.contains("min(k, |truth|)"));
        assert!(table.contains("level=method"));
    }
}
