//! Acceptance checks; prints one PASS/FAIL line per criterion.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use apigen_core::evaluation::{
    map_at_k, match_api, mrr, ndcg_at_k, ndcg_from_gains, success_rate_at_k, MatchLevel,
    ScoredQuery,
};
use apigen_core::intent::{explore, ConstituencyForm};
use apigen_core::reasoning::detect_knowledge;
use apigen_core::retrieval::{tokenize, tokenize_doc, Bm25Index, Bm25Params};
use apigen_core::{ApiDictionary, Level, Post, Retriever, VerbLexicon};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn apigen(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_apigen"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning apigen: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "apigen {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

// Reference scorer, written straight from the metric definitions.

const FQNS: [&str; 12] = [
    "a.b.c0.m0", "a.b.c0.m1", "a.b.c0.m2", "a.b.c1.m0", "a.b.c1.m1", "a.b.c1.m2",
    "x.y.c0.m0", "x.y.c0.m1", "x.y.c0.m2", "x.y.c2.m0", "x.y.c2.m1", "x.y.c2.m2",
];
const BARE: [&str; 6] = ["c0.m0", "c0.m1", "c1.m2", "c2.m0", "c2.m2", "c1.m1"];

fn owner(name: &str) -> &str {
    name.rsplit_once('.').map_or("", |(c, _)| c)
}

fn ends_with_segment(long: &str, short: &str) -> bool {
    long.len() > short.len() && long.ends_with(&format!(".{short}"))
}

/// Truth indices matched by name: equality or the truth as a dotted tail of the
/// prediction; otherwise the prediction as the dotted tail of one distinct truth name.
fn ref_name_match(pred: &str, truth: &[&str]) -> Vec<usize> {
    let direct: Vec<usize> = (0..truth.len())
        .filter(|&i| truth[i] == pred || ends_with_segment(pred, truth[i]))
        .collect();
    if !direct.is_empty() {
        return direct;
    }
    let tails: Vec<usize> = (0..truth.len()).filter(|&i| ends_with_segment(truth[i], pred)).collect();
    let mut names: Vec<&str> = tails.iter().map(|&i| truth[i]).collect();
    names.dedup();
    if names.len() == 1 {
        tails
    } else {
        vec![]
    }
}

fn ref_hits(pred: &str, truth: &[String], class_level: bool) -> Vec<usize> {
    let t: Vec<&str> = truth.iter().map(String::as_str).collect();
    let mut out = ref_name_match(pred, &t);
    if class_level {
        let classes: Vec<&str> = t.iter().map(|n| owner(n)).collect();
        for i in ref_name_match(owner(pred), &classes) {
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out.sort();
    }
    out
}

fn ref_gain(pred: &str, truth: &[String]) -> f64 {
    if !ref_hits(pred, truth, false).is_empty() {
        2.0
    } else if !ref_hits(pred, truth, true).is_empty() {
        1.0
    } else {
        0.0
    }
}

fn ref_success(qs: &[ScoredQuery], k: usize, class: bool) -> f64 {
    let mut total = 0.0;
    for q in qs {
        let mut found = false;
        for p in q.predictions.iter().take(k) {
            if !ref_hits(p, &q.truth, class).is_empty() {
                found = true;
            }
        }
        if found {
            total += 1.0;
        }
    }
    total / qs.len() as f64
}

fn ref_map(qs: &[ScoredQuery], k: usize, class: bool) -> f64 {
    let mut total = 0.0;
    for q in qs {
        let mut taken = vec![false; q.truth.len()];
        let mut rel = vec![0.0; k];
        for (i, p) in q.predictions.iter().take(k).enumerate() {
            for t in ref_hits(p, &q.truth, class) {
                if !taken[t] {
                    taken[t] = true;
                    rel[i] = 1.0;
                    break;
                }
            }
        }
        let mut ap = 0.0;
        for i in 0..k {
            let correct: f64 = rel[..=i].iter().sum();
            ap += correct / (i + 1) as f64 * rel[i];
        }
        total += ap / k.min(q.truth.len()) as f64;
    }
    total / qs.len() as f64
}

fn ref_mrr(qs: &[ScoredQuery], class: bool) -> f64 {
    let mut total = 0.0;
    for q in qs {
        for (i, p) in q.predictions.iter().enumerate() {
            if !ref_hits(p, &q.truth, class).is_empty() {
                total += 1.0 / (i + 1) as f64;
                break;
            }
        }
    }
    total / qs.len() as f64
}

fn dcg(gains: &[f64]) -> f64 {
    let mut s = 0.0;
    for (t, g) in gains.iter().enumerate() {
        s += g / ((t + 2) as f64).log2();
    }
    s
}

fn best_dcg(gains: &mut Vec<f64>, fixed: usize) -> f64 {
    if fixed == gains.len() {
        return dcg(gains);
    }
    let mut best = 0.0f64;
    for i in fixed..gains.len() {
        gains.swap(fixed, i);
        best = best.max(best_dcg(gains, fixed + 1));
        gains.swap(fixed, i);
    }
    best
}

fn ref_ndcg(qs: &[ScoredQuery], k: usize) -> f64 {
    let mut total = 0.0;
    for q in qs {
        let mut gains: Vec<f64> = q.predictions.iter().take(k).map(|p| ref_gain(p, &q.truth)).collect();
        let d = dcg(&gains);
        let ideal = best_dcg(&mut gains, 0);
        if ideal > 0.0 {
            total += d / ideal;
        }
    }
    total / qs.len() as f64
}

fn random_run(rng: &mut StdRng) -> Vec<ScoredQuery> {
    let n = rng.random_range(1..=10);
    (0..n)
        .map(|i| {
            let mut truth: Vec<String> = Vec::new();
            for _ in 0..rng.random_range(1..=3) {
                let t = FQNS[rng.random_range(0..FQNS.len())].to_string();
                if !truth.contains(&t) {
                    truth.push(t);
                }
            }
            truth.sort();
            let mut predictions: Vec<String> = Vec::new();
            for _ in 0..rng.random_range(0..=5) {
                let p = if rng.random_bool(0.25) {
                    BARE[rng.random_range(0..BARE.len())]
                } else {
                    FQNS[rng.random_range(0..FQNS.len())]
                };
                if !predictions.iter().any(|x| x == p) {
                    predictions.push(p.to_string());
                }
            }
            ScoredQuery { query_id: format!("q{i}"), predictions, truth }
        })
        .collect()
}

fn close(a: f64, b: f64, what: &str) -> Result<(), String> {
    ensure!((a - b).abs() <= 1e-12, "{what}: {a} vs reference {b}");
    Ok(())
}

fn metric_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    for case in 0..1000 {
        let qs = random_run(&mut rng);
        for q in &qs {
            for p in &q.predictions {
                let want = match ref_gain(p, &q.truth) as u8 {
                    2 => MatchLevel::ExactMethod,
                    1 => MatchLevel::ClassOnly,
                    _ => MatchLevel::None,
                };
                ensure!(match_api(p, &q.truth) == want, "case {case}: match({p}, {:?})", q.truth);
            }
        }
        for (level, class) in [(Level::Method, false), (Level::Class, true)] {
            for k in [1, 3, 5] {
                let tag = format!("case {case} {level:?} k={k}");
                close(success_rate_at_k(&qs, k, level).unwrap(), ref_success(&qs, k, class), &format!("{tag} SR"))?;
                close(map_at_k(&qs, k, level).unwrap(), ref_map(&qs, k, class), &format!("{tag} MAP"))?;
            }
            close(mrr(&qs, level).unwrap(), ref_mrr(&qs, class), &format!("case {case} {level:?} MRR"))?;
        }
        for k in [1, 3, 5] {
            close(ndcg_at_k(&qs, k).unwrap(), ref_ndcg(&qs, k), &format!("case {case} NDCG@{k}"))?;
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(format!("1000 instances in {took:.2?}"))
}

fn intent_worked_example() -> Result<String, String> {
    let a = explore("How do I convert a String to an int in Java", &VerbLexicon::default(), None);
    ensure!(a.refined.refined == "convert a String to an int in Java", "refined {:?}", a.refined.refined);
    ensure!(a.form == ConstituencyForm::VbNpPpX, "form {:?}", a.form);
    let r = &a.roles;
    let roles = [
        ("verb", r.text(r.verb), "convert"),
        ("dobj", r.text(r.dobj), "String"),
        ("dmod", r.text(r.dmod), "a"),
        ("pobj", r.text(r.pobj), "int"),
        ("pmod", r.text(r.pmod), "an"),
    ];
    for (name, got, want) in roles {
        ensure!(got == Some(want), "{name} = {got:?}");
    }
    let i = &a.intent;
    ensure!(i.action == "convert", "action {:?}", i.action);
    ensure!(i.object.as_deref() == Some("a String"), "object {:?}", i.object);
    ensure!(i.target.as_deref() == Some("an int"), "target {:?}", i.target);
    ensure!(i.condition.as_deref() == Some("in Java"), "condition {:?}", i.condition);
    Ok("(convert, a String, an int, in Java)".into())
}

fn knowledge_worked_example() -> Result<String, String> {
    let dict = ApiDictionary::load(&common::fixture("dictionary.jsonl")).map_err(|e| e.to_string())?;
    let k = detect_knowledge("java.lang.Integer.parseInt", &dict).map_err(|e| e.to_string())?;
    ensure!(k.description == "parse the string argument as a signed decimal integer", "description {:?}", k.description);
    ensure!(k.category == "convert/transform/parse", "category {:?}", k.category);
    Ok(format!("{} / {}", k.description, k.category))
}

fn ndcg_hand_case() -> Result<String, String> {
    let got = ndcg_from_gains(&[1.0, 2.0, 0.0]);
    let want = (1.0 + 2.0 / 3f64.log2()) / (2.0 + 1.0 / 3f64.log2());
    ensure!((got - 0.8597).abs() <= 1e-4 && (got - want).abs() <= 1e-12, "got {got}");
    Ok(format!("{got:.4}"))
}

fn bm25_hand_case() -> Result<String, String> {
    let idx = Bm25Index::build(
        vec![tokenize_doc("d1", "a b"), tokenize_doc("d2", "c d")],
        Bm25Params { k1: 1.2, b: 0.75 },
    )
    .map_err(|e| e.to_string())?;
    let s = idx.score(&tokenize("a"), "d1").map_err(|e| e.to_string())?;
    ensure!((s - 2f64.ln()).abs() <= 1e-6, "score {s}");
    let posts = ["a b", "c d"]
        .iter()
        .enumerate()
        .map(|(i, q)| Post {
            id: format!("d{}", i + 1),
            question: q.to_string(),
            answer_apis: vec!["x.Y.z".into()],
            source: Default::default(),
        })
        .collect();
    let r = Retriever::bm25(std::sync::Arc::new(posts), Bm25Params::default()).map_err(|e| e.to_string())?;
    let hits = r.retrieve("a", 2).map_err(|e| e.to_string())?;
    ensure!(hits[0].post_id == "d1", "ranked {:?} first", hits[0].post_id);
    Ok(format!("score {s:.6}, d1 ranked first"))
}

fn hermetic_run() -> Result<String, String> {
    let scratch = common::scratch();
    let cfg = common::config_file(scratch.path());
    let cfg = cfg.to_str().unwrap();
    let run = scratch.path().join("run.jsonl");
    let report = scratch.path().join("report.jsonl");
    let queries = common::fixture("queries.jsonl");
    let truth = common::fixture("truth.jsonl");
    let start = Instant::now();
    apigen(&["--config", cfg, "recommend", "--queries", queries.to_str().unwrap(), "--out", run.to_str().unwrap()])?;
    apigen(&[
        "evaluate", "--run", run.to_str().unwrap(), "--truth", truth.to_str().unwrap(),
        "--level", "both", "--report", report.to_str().unwrap(),
    ])?;
    let took = start.elapsed();
    ensure!(read(&run)? == read(&common::fixture("expected/recommendations.jsonl"))?, "recommendations differ from the frozen file");
    ensure!(read(&report)? == read(&common::fixture("expected/report.jsonl"))?, "report differs from the frozen file");
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("5 queries, frozen lists and report reproduced in {took:.2?}"))
}

fn ablation_prompts() -> Result<String, String> {
    let scratch = common::scratch();
    let cfg = common::config_file(scratch.path());
    let cfg = cfg.to_str().unwrap();
    let q = "How to convert a numeric string to an integer?";
    let variants: [(&[&str], &str); 3] = [
        (&[], "prompt_default.txt"),
        (&["--no-reasoning"], "prompt_no_reasoning.txt"),
        (&["--n-examples", "0"], "prompt_zero_examples.txt"),
    ];
    let mut samples = Vec::new();
    for (flags, golden) in variants {
        let mut args = vec!["--config", cfg, "recommend", "--query", q];
        args.extend_from_slice(flags);
        let mut dry = args.clone();
        dry.push("--dry-run");
        let prompt = apigen(&dry)?;
        ensure!(prompt == read(&common::fixture("expected").join(golden))?, "{golden} differs");
        let rec: serde_json::Value = serde_json::from_str(apigen(&args)?.trim()).map_err(|e| e.to_string())?;
        samples.push(rec["raw_samples"].clone());
    }
    ensure!(samples[0] != samples[1] && samples[0] != samples[2] && samples[1] != samples[2], "mock responses coincide across variants");
    Ok("default, --no-reasoning, --n-examples 0 match golden prompts; responses differ".into())
}

fn monotonicity() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    for case in 0..1000 {
        let qs = random_run(&mut rng);
        for level in [Level::Method, Level::Class] {
            let sr: Vec<f64> = [1, 3, 5].iter().map(|&k| success_rate_at_k(&qs, k, level).unwrap()).collect();
            ensure!(sr[0] <= sr[1] && sr[1] <= sr[2], "case {case} {level:?}: SR {sr:?}");
            for (i, k) in [1, 3, 5].into_iter().enumerate() {
                let map = map_at_k(&qs, k, level).unwrap();
                ensure!(map <= sr[i] + 1e-15, "case {case} {level:?}: MAP@{k} {map} > SR {}", sr[i]);
            }
        }
    }
    Ok("1000 runs, both levels".into())
}

fn defaults_audit() -> Result<String, String> {
    let text = apigen(&["init-config"])?;
    let v: toml::Value = toml::from_str(&text).map_err(|e| e.to_string())?;
    let checks = [
        ("llm.temperature", v["llm"]["temperature"].as_float() == Some(0.15)),
        ("llm.max_tokens", v["llm"]["max_tokens"].as_integer() == Some(512)),
        ("llm.top_p", v["llm"]["top_p"].as_float() == Some(0.95)),
        ("llm.n_samples", v["llm"]["n_samples"].as_integer() == Some(5)),
        ("n_examples", v["n_examples"].as_integer() == Some(3)),
        ("strategy", v["strategy"].as_str() == Some("dense_sentence")),
    ];
    for (key, ok) in checks {
        ensure!(ok, "{key} has the wrong default");
    }
    for line in ["temperature = 0.15", "max_tokens = 512", "top_p = 0.95", "n_samples = 5", "n_examples = 3", "strategy = \"dense_sentence\""] {
        ensure!(text.lines().any(|l| l.trim() == line), "missing line {line:?}");
    }
    Ok("temperature 0.15, max_tokens 512, top_p 0.95, n_samples 5, n_examples 3, dense_sentence".into())
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("metric oracle equivalence", metric_oracle),
        ("intent worked example", intent_worked_example),
        ("knowledge worked example", knowledge_worked_example),
        ("NDCG hand case", ndcg_hand_case),
        ("BM25 hand case", bm25_hand_case),
        ("hermetic end-to-end run", hermetic_run),
        ("ablation prompt contract", ablation_prompts),
        ("monotonicity and MAP <= SR", monotonicity),
        ("defaults audit", defaults_audit),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
