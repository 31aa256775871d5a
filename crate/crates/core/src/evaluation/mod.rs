//! SuccessRate@k, MAP@k, MRR and NDCG@k at method and class level.

mod metrics;
mod normalize;
mod report;

pub use metrics::{
    average_precision_at_k, first_position, has_correct, hits, map_at_k, match_api, mrr,
    ndcg_at_k, ndcg_from_gains, success_rate_at_k, Level, MatchLevel, ScoredQuery,
};
pub use normalize::{class_form, normalize_api};
pub use report::{
    evaluate, load_runs, load_truths, pair_runs, render_table, reports_to_jsonl, score, AtK,
    EvalReport, GroundTruth, RunRecord, TruthRecord, DEFAULT_KS,
};
