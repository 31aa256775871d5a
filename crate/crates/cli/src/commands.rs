use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use apigen_core::corpus::{build_dictionary, load_posts, PostFormat};
use apigen_core::evaluation::{
    evaluate, load_truths, pair_runs, render_table, reports_to_jsonl, score, GroundTruth,
    RunRecord,
};
use apigen_core::retrieval::Bm25Index;
use apigen_core::{EvalReport, Level, Post, Recommendation, Strategy};

use crate::config::PipelineConfig;
use crate::runtime::{self, Components};

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs `f` over `items` on a pool of `workers` threads; results keep input order.
pub fn run_pool<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

pub fn build_dict(
    html_root: &Path,
    out: &Path,
    config: &PipelineConfig,
    w: &mut dyn Write,
) -> Result<()> {
    let verbs = runtime::verbs(config)?;
    let lexicon = runtime::categories(config)?;
    let report = build_dictionary(html_root, &verbs, &lexicon)?;
    for warning in &report.warnings {
        log::warn!("{}: {}", warning.file.display(), warning.message);
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    report.dictionary.save(out)?;
    writeln!(
        w,
        "wrote {} entries to {} ({} deprecated excluded, {} rows skipped, {} warnings)",
        report.dictionary.len(),
        out.display(),
        report.deprecated_excluded,
        report.rows_skipped,
        report.warnings.len()
    )?;
    Ok(())
}

/// Builds the retrieval index; for dense strategies this fills the embedding cache.
pub fn index(config: &PipelineConfig, strategy: Strategy, w: &mut dyn Write) -> Result<()> {
    let posts = runtime::corpus(config)?;
    match strategy {
        Strategy::Bm25 => {
            let streams = posts
                .iter()
                .map(|p| apigen_core::retrieval::tokenize_doc(p.id.clone(), &p.question))
                .collect();
            let idx = Bm25Index::build(streams, Default::default())?;
            writeln!(
                w,
                "bm25: {} documents, {} terms, avgdl {:.3}",
                idx.doc_count(),
                idx.vocabulary_size(),
                idx.avgdl()
            )?;
        }
        dense => {
            let retriever = runtime::retriever(config, posts, dense)?;
            writeln!(
                w,
                "{dense}: {} posts embedded into {}",
                retriever.posts().len(),
                config.cache.embeddings.display()
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct RecommendArgs {
    pub query: Option<String>,
    pub queries: Option<PathBuf>,
    pub strategy: Option<Strategy>,
    pub n_examples: Option<usize>,
    pub no_reasoning: bool,
    pub dry_run: bool,
    pub out: Option<PathBuf>,
}

/// Query id used for a query given on the command line.
pub const INLINE_QUERY_ID: &str = "query";

fn load_queries(query: Option<&str>, queries: Option<&Path>) -> Result<Vec<Post>> {
    match (query, queries) {
        (Some(q), None) => Ok(vec![Post {
            id: INLINE_QUERY_ID.into(),
            question: q.into(),
            answer_apis: Vec::new(),
            source: Default::default(),
        }]),
        (None, Some(path)) => load_posts(path, PostFormat::Jsonl)
            .with_context(|| format!("loading queries {}", path.display())),
        _ => bail!("give exactly one of --query or --queries"),
    }
}

#[derive(Serialize)]
struct PromptRecord<'a> {
    query_id: &'a str,
    prompt: &'a str,
}

fn failures_error(failures: &[(String, anyhow::Error)], total: usize) -> anyhow::Error {
    let mut msg = format!("{} of {total} queries failed", failures.len());
    for (id, e) in failures {
        let _ = write!(msg, "\n  query {id}: {e:#}");
    }
    anyhow!(msg)
}

pub fn recommend(config: &PipelineConfig, args: &RecommendArgs, w: &mut dyn Write) -> Result<()> {
    let queries = load_queries(args.query.as_deref(), args.queries.as_deref())?;
    let mut options = config.options();
    if let Some(n) = args.n_examples {
        options.n_examples = n;
    }
    if args.no_reasoning {
        options.reasoning_enabled = false;
    }
    let strategy = args.strategy.unwrap_or(config.strategy);
    let components = Components::load(config)?;
    let retriever = Arc::new(runtime::retriever(config, components.posts.clone(), strategy)?);
    let pipeline = components.pipeline(retriever, options);

    let mut out = String::new();
    let mut failures = Vec::new();
    if args.dry_run {
        let bundles = run_pool(config.workers, &queries, |q| pipeline.prepare(&q.question))?;
        for (q, b) in queries.iter().zip(bundles) {
            match b {
                Ok(b) if args.query.is_some() => {
                    out.push_str(&b.rendered);
                    out.push('\n');
                }
                Ok(b) => {
                    out.push_str(&serde_json::to_string(&PromptRecord {
                        query_id: &q.id,
                        prompt: &b.rendered,
                    })?);
                    out.push('\n');
                }
                Err(e) => failures.push((q.id.clone(), e.into())),
            }
        }
    } else {
        let recs: Vec<apigen_core::Result<Recommendation>> =
            run_pool(config.workers, &queries, |q| pipeline.recommend(&q.id, &q.question))?;
        for (q, r) in queries.iter().zip(recs) {
            match r {
                Ok(r) => {
                    out.push_str(&serde_json::to_string(&r)?);
                    out.push('\n');
                }
                Err(e) => failures.push((q.id.clone(), e.into())),
            }
        }
    }
    match &args.out {
        Some(path) => write_file(path, &out)?,
        None => w.write_all(out.as_bytes())?,
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures_error(&failures, queries.len()))
    }
}

pub fn evaluate_files(
    run: &Path,
    truth: &Path,
    levels: &[Level],
    ks: &[usize],
    report_out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<Vec<EvalReport>> {
    let reports = evaluate(run, truth, levels, ks)?;
    if let Some(path) = report_out {
        write_file(path, &reports_to_jsonl(&reports)?)?;
    }
    w.write_all(render_table(&reports).as_bytes())?;
    Ok(reports)
}

/// Parses `1..3` (inclusive) or `1,3,5`.
pub fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad sweep start in {spec:?}"))?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad sweep end in {spec:?}"))?;
        if a > b {
            bail!("empty sweep {spec:?}");
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad sweep value {s:?}")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct AblateArgs {
    pub queries: PathBuf,
    pub truth: PathBuf,
    pub strategies: Vec<Strategy>,
    pub n_examples: Vec<usize>,
    pub reasoning: Vec<bool>,
    pub levels: Vec<Level>,
    pub ks: Vec<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub strategy: Strategy,
    pub n_examples: usize,
    pub reasoning_enabled: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn run_cell(
    components: &Components,
    retriever: &Arc<apigen_core::Retriever>,
    config: &PipelineConfig,
    options: apigen_core::PipelineOptions,
    queries: &[Post],
    truths: &[GroundTruth],
    args: &AblateArgs,
) -> Result<Vec<EvalReport>> {
    let pipeline = components.pipeline(retriever.clone(), options);
    let recs = run_pool(config.workers, queries, |q| pipeline.recommend(&q.id, &q.question))?;
    let mut runs = Vec::with_capacity(recs.len());
    for (q, r) in queries.iter().zip(recs) {
        let r = r.with_context(|| format!("query {}", q.id))?;
        runs.push(RunRecord {
            query_id: r.query_id,
            ranked_apis: r.ranked_apis,
        });
    }
    let scored = pair_runs(&runs, truths)?;
    Ok(args
        .levels
        .iter()
        .map(|&l| score(&scored, l, &args.ks))
        .collect::<apigen_core::Result<_>>()?)
}

/// Every strategy x example count x reasoning cell; a failing cell is recorded
/// and the sweep goes on.
pub fn ablate(config: &PipelineConfig, args: &AblateArgs, w: &mut dyn Write) -> Result<Vec<CellReport>> {
    let queries = load_posts(&args.queries, PostFormat::Jsonl)?;
    let truths = load_truths(&args.truth)?;
    let components = Components::load(config)?;
    let mut cells = Vec::new();
    for &strategy in &args.strategies {
        let retriever = runtime::retriever(config, components.posts.clone(), strategy).map(Arc::new);
        for &n in &args.n_examples {
            for &reasoning in &args.reasoning {
                let options = apigen_core::PipelineOptions {
                    n_examples: n,
                    reasoning_enabled: reasoning,
                    demo_order: config.demo_order,
                };
                let result = match &retriever {
                    Ok(r) => run_cell(&components, r, config, options, &queries, &truths, args),
                    Err(e) => Err(anyhow!("{e:#}")),
                };
                let (reports, error) = match result {
                    Ok(r) => (r, None),
                    Err(e) => {
                        log::error!("cell {strategy}/n={n}/reasoning={reasoning} failed: {e:#}");
                        (Vec::new(), Some(format!("{e:#}")))
                    }
                };
                cells.push(CellReport {
                    strategy,
                    n_examples: n,
                    reasoning_enabled: reasoning,
                    reports,
                    error,
                });
            }
        }
    }

    let mut jsonl = String::new();
    for c in &cells {
        jsonl.push_str(&serde_json::to_string(c)?);
        jsonl.push('\n');
    }
    if let Some(path) = &args.out {
        write_file(path, &jsonl)?;
    }
    w.write_all(render_matrix(&cells, &args.ks).as_bytes())?;
    Ok(cells)
}

fn render_matrix(cells: &[CellReport], ks: &[usize]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<15} {:>3} {:>9} {:>6}", "strategy", "n", "reasoning", "level");
    for k in ks {
        let _ = write!(out, " {:>7} {:>7} {:>7}", format!("SR@{k}"), format!("MAP@{k}"), format!("NDCG@{k}"));
    }
    out.push_str("     MRR\n");
    for c in cells {
        let head = format!(
            "{:<15} {:>3} {:>9}",
            c.strategy.as_str(),
            c.n_examples,
            if c.reasoning_enabled { "on" } else { "off" }
        );
        if let Some(e) = &c.error {
            let _ = writeln!(out, "{head} FAILED: {e}");
            continue;
        }
        for r in &c.reports {
            let level = match r.level {
                Level::Method => "method",
                Level::Class => "class",
            };
            let _ = write!(out, "{head} {level:>6}");
            for k in ks {
                match r.at(*k) {
                    Some(a) => {
                        let _ = write!(out, " {:>7.4} {:>7.4} {:>7.4}", a.success_rate, a.map, a.ndcg);
                    }
                    None => out.push_str("       -       -       -"),
                }
            }
            let _ = writeln!(out, " {:>7.4}", r.mrr);
        }
    }
    out
}

pub fn init_config(out: Option<&Path>, w: &mut dyn Write) -> Result<()> {
    let text = PipelineConfig::default().to_toml()?;
    match out {
        Some(path) => {
            if path.exists() {
                bail!("{} already exists", path.display());
            }
            write_file(path, &text)?;
            writeln!(w, "wrote {}", path.display())?;
        }
        None => w.write_all(text.as_bytes())?,
    }
    Ok(())
}
