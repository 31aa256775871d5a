use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use apigen_cli::commands::{self, parse_sweep, AblateArgs, RecommendArgs};
use apigen_cli::PipelineConfig;
use apigen_core::{Level, Strategy};

#[derive(Parser)]
#[command(name = "apigen", version, about = "Generative API recommendation")]
struct Cli {
    /// Pipeline config file (TOML). Built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the API dictionary from a javadoc HTML tree.
    BuildDict {
        html_root: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the retrieval index, embedding the corpus for dense strategies.
    Index {
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
    },
    /// Recommend APIs for one query or a file of queries.
    Recommend(RecommendCli),
    /// Score a run file against ground truth.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        /// Also write the reports as JSON lines.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep strategies, example counts and reasoning on/off.
    Ablate {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Comma-separated strategies; defaults to the configured one.
        #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
        strategies: Vec<Strategy>,
        /// Example counts, `1..9` or `1,3,5`; defaults to the configured count.
        #[arg(long = "n-examples")]
        n_examples: Option<String>,
        #[arg(long, value_enum, default_value = "both")]
        reasoning: ReasoningSweep,
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print (or write) a config file holding every default.
    InitConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RecommendCli {
    #[arg(long, conflicts_with = "queries")]
    query: Option<String>,
    /// JSON lines with `id` and `question`.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    #[arg(long)]
    n_examples: Option<usize>,
    #[arg(long)]
    no_reasoning: bool,
    /// Print the rendered prompt instead of calling the model.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Scoring {
    #[arg(long, value_enum, default_value = "method")]
    level: LevelArg,
    /// Cut-offs, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    k: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Method,
    Class,
    Both,
}

impl LevelArg {
    fn levels(self) -> Vec<Level> {
        match self {
            LevelArg::Method => vec![Level::Method],
            LevelArg::Class => vec![Level::Class],
            LevelArg::Both => vec![Level::Method, Level::Class],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReasoningSweep {
    On,
    Off,
    Both,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: apigen_core::Error| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::BuildDict { html_root, out } => {
            commands::build_dict(&html_root, &out, &load_config(config_path)?, &mut w)
        }
        Command::Index { strategy } => {
            let config = load_config(config_path)?;
            commands::index(&config, strategy.unwrap_or(config.strategy), &mut w)
        }
        Command::Recommend(r) => {
            let args = RecommendArgs {
                query: r.query,
                queries: r.queries,
                strategy: r.strategy,
                n_examples: r.n_examples,
                no_reasoning: r.no_reasoning,
                dry_run: r.dry_run,
                out: r.out,
            };
            commands::recommend(&load_config(config_path)?, &args, &mut w)
        }
        Command::Evaluate {
            run,
            truth,
            scoring,
            report,
        } => commands::evaluate_files(
            &run,
            &truth,
            &scoring.level.levels(),
            &scoring.k,
            report.as_deref(),
            &mut w,
        )
        .map(drop),
        Command::Ablate {
            queries,
            truth,
            strategies,
            n_examples,
            reasoning,
            scoring,
            out,
        } => {
            let config = load_config(config_path)?;
            let args = AblateArgs {
                queries,
                truth,
                strategies: if strategies.is_empty() {
                    vec![config.strategy]
                } else {
                    strategies
                },
                n_examples: match n_examples {
                    Some(spec) => parse_sweep(&spec)?,
                    None => vec![config.n_examples],
                },
                reasoning: match reasoning {
                    ReasoningSweep::On => vec![true],
                    ReasoningSweep::Off => vec![false],
                    ReasoningSweep::Both => vec![true, false],
                },
                levels: scoring.level.levels(),
                ks: scoring.k,
                out,
            };
            let cells = commands::ablate(&config, &args, &mut w)?;
            let failed = cells.iter().filter(|c| c.error.is_some()).count();
            if failed > 0 {
                anyhow::bail!("{failed} of {} ablation cells failed", cells.len());
            }
            Ok(())
        }
        Command::InitConfig { out } => commands::init_config(out.as_deref(), &mut w),
    }?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
