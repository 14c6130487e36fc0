//! Command line front end: summarize a model on a CSV dataset, generate
//! synthetic data, or benchmark the summary stage over a grid.
//!
//! Failures print a single line naming the failing stage, e.g.
//! `error [data]: ...`. Usage problems (bad flags or specs) exit with 1,
//! data and model problems with 2.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use modelsum::data::{make_task_with, TaskSpec};
use modelsum::learner::{fit, Learner};
use modelsum::resampling::ResamplingStrategy;
use modelsum::{
    load_csv, parse_grid, render_json, render_text, run_bench, simulate, summarize,
    write_bench_csv, write_csv, BenchSpec, SummaryControl,
};

/// Environment variable supplying the default worker count.
const WORKERS_ENV: &str = "MODELSUM_WORKERS";

#[derive(Parser)]
#[command(name = "modelsum", version, about = "Model-agnostic summaries for tabular models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit and resample a learner on a CSV dataset, then print a summary.
    Summarize(SummarizeArgs),
    /// Generate a synthetic regression dataset as CSV.
    Simulate(SimulateArgs),
    /// Time the summary stage over a grid of simulated datasets.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SummarizeArgs {
    /// Input CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Target column.
    #[arg(long)]
    target: String,
    /// Positive class for binary targets.
    #[arg(long)]
    positive: Option<String>,
    /// Protected attribute column; enables the fairness paragraph.
    #[arg(long)]
    protected: Option<String>,
    /// Keep the protected attribute in the feature set.
    #[arg(long)]
    protected_as_feature: bool,
    /// Learner spec, e.g. `tree` or `random_forest:num_trees=100`.
    #[arg(long, default_value = "random_forest")]
    learner: String,
    /// Resampling spec: `cv<k>`, `holdout[:ratio]`, or
    /// `subsampling[:ratio*repeats]`.
    #[arg(long, default_value = "cv3")]
    resampling: String,
    /// JSON file with summary control settings.
    #[arg(long)]
    control: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
    /// Parallel workers; defaults to MODELSUM_WORKERS or 1.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed for splitting, fitting, and permutation.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Split classification folds without stratification.
    #[arg(long)]
    no_stratify: bool,
    /// Text report width.
    #[arg(long, default_value_t = 100)]
    width: usize,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of rows.
    #[arg(long)]
    n: usize,
    /// Number of features (at least 5).
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Relative noise scale; 0 reproduces the signal exactly.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Write the CSV to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid spec, e.g. `n=100,500;p=5,25`.
    #[arg(long)]
    grid: String,
    /// Comma-separated learner specs.
    #[arg(long, default_value = "random_forest")]
    learners: String,
    /// Comma-separated worker counts.
    #[arg(long, default_value = "1")]
    workers: String,
    /// Raw timings per cell.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the timing CSV to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Print a one-line diagnostic naming the stage and exit.
fn fail(stage: &str, err: impl Display, code: i32) -> ! {
    eprintln!("error [{stage}]: {err}");
    exit(code);
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                exit(0);
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            fail("args", first, 1);
        }
    };
    match cli.command {
        Command::Summarize(args) => cmd_summarize(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn env_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.parse().ok()
}

fn cmd_summarize(args: SummarizeArgs) {
    let workers = args.workers.or_else(env_workers).unwrap_or(1);
    let control = match &args.control {
        Some(path) => {
            let text = fs::read_to_string(path)
                .unwrap_or_else(|e| fail("control", format!("{}: {e}", path.display()), 1));
            SummaryControl::from_json(&text).unwrap_or_else(|e| fail("control", e, 1))
        }
        None => SummaryControl::default(),
    };
    let learner =
        Learner::parse(&args.learner).unwrap_or_else(|e| fail("learner", e, 1));
    let mut strategy = ResamplingStrategy::parse(&args.resampling, args.seed)
        .unwrap_or_else(|e| fail("resampling", e, 1));
    if args.no_stratify {
        strategy.stratify = false;
    }

    let frame = load_csv(&args.data, &[])
        .unwrap_or_else(|e| fail("data", format!("{}: {e}", args.data.display()), 2));
    let task = make_task_with(
        frame,
        TaskSpec {
            target: args.target.clone(),
            positive_class: args.positive.clone(),
            protected: args.protected.clone(),
            protected_as_feature: args.protected_as_feature,
        },
    )
    .unwrap_or_else(|e| fail("task", e, 2));

    let rr = modelsum::resample(&task, &learner, &strategy, workers)
        .unwrap_or_else(|e| fail("resample", e, 2));
    let all: Vec<usize> = (0..task.frame().n_rows()).collect();
    let model =
        fit(&learner, &task, &all, args.seed).unwrap_or_else(|e| fail("fit", e, 2));
    let report =
        summarize(&model, &rr, &control, workers).unwrap_or_else(|e| fail("summarize", e, 2));

    let output = match args.format.as_str() {
        "json" => {
            let mut s = render_json(&report).unwrap_or_else(|e| fail("render", e, 2));
            s.push('\n');
            s
        }
        _ => render_text(&report, args.width).unwrap_or_else(|e| fail("render", e, 1)),
    };
    emit(&output, args.out.as_deref());
}

fn cmd_simulate(args: SimulateArgs) {
    let frame = simulate(args.n, args.p, args.seed, args.noise)
        .unwrap_or_else(|e| fail("simulate", e, 1));
    match &args.out {
        Some(path) => modelsum::save_csv(&frame, path)
            .unwrap_or_else(|e| fail("write", format!("{}: {e}", path.display()), 2)),
        None => write_csv(&frame, std::io::stdout().lock())
            .unwrap_or_else(|e| fail("write", e, 2)),
    }
}

fn cmd_bench(args: BenchArgs) {
    let (ns, ps) = parse_grid(&args.grid).unwrap_or_else(|e| fail("bench", e, 1));
    let learners: Vec<String> = args
        .learners
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if learners.is_empty() {
        fail("bench", "no learners given", 1);
    }
    let workers: Vec<usize> = args
        .workers
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad worker count {s}"))
        })
        .collect::<Result<_, _>>()
        .unwrap_or_else(|e| fail("bench", e, 1));
    if args.repeats == 0 {
        fail("bench", "repeats must be at least 1", 1);
    }
    let spec = BenchSpec {
        ns,
        ps,
        learners,
        workers,
        repeats: args.repeats,
        seed: args.seed,
    };
    let rows = run_bench(&spec, |row| {
        let seconds = row
            .seconds
            .map(|s| format!("{s:.3}s"))
            .unwrap_or_else(|| "NA".to_string());
        let setup = row
            .setup_seconds
            .map(|s| format!("{s:.3}s"))
            .unwrap_or_else(|| "NA".to_string());
        eprintln!(
            "bench n={} p={} learner={} workers={} run={}: summarize {seconds} (setup {setup})",
            row.n, row.p, row.learner, row.workers, row.run
        );
    });
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .unwrap_or_else(|e| fail("write", format!("{}: {e}", path.display()), 2));
            write_bench_csv(&rows, file).unwrap_or_else(|e| fail("write", e, 2));
        }
        None => write_bench_csv(&rows, std::io::stdout().lock())
            .unwrap_or_else(|e| fail("write", e, 2)),
    }
}

fn emit(output: &str, out: Option<&std::path::Path>) {
    match out {
        Some(path) => fs::write(path, output)
            .unwrap_or_else(|e| fail("write", format!("{}: {e}", path.display()), 2)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.as_bytes())
                .unwrap_or_else(|e| fail("write", e, 2));
        }
    }
}
