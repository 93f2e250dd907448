use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use promptevo::config::{load_experiment, EvaluatorSection};
use promptevo::evaluator::{RetryPolicy, ScoreParams, ENDPOINT_ENV};
use promptevo::fitness::FitnessWeights;
use promptevo::ga::GaConfig;
use promptevo::harness::{
    aggregate, final_scores, load_records, read_dataset, read_external_scores, render, run_experiment, run_unit,
    sample_prompts, ExperimentConfig, Method, ReportFormat, SummaryTable,
};
use promptevo::tokenize::make_prompt;
use promptevo::Error;

#[derive(Parser)]
#[command(
    name = "promptevo",
    version,
    about = "Evolve text-encoder token vectors for text-to-image prompts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a single prompt with one method.
    Optimize(OptimizeArgs),
    /// Run a prompts × methods × seeds grid from a TOML config file.
    Experiment(ExperimentArgs),
    /// Build a summary table from finished runs.
    Aggregate(AggregateArgs),
    /// Render a summary table.
    Report(ReportArgs),
    /// Sample prompts per category from a dataset CSV.
    SamplePrompts(SampleArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    /// Prompt text.
    #[arg(long)]
    text: String,
    #[arg(long, default_value = "prompt")]
    prompt_id: String,
    #[arg(long, default_value = "")]
    category: String,
    #[arg(long, default_value = "ga_mutated")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    population_size: usize,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Aesthetic and CLIP weights, e.g. `0.4,0.6`.
    #[arg(long, value_parser = parse_weights, default_value = "0.4,0.6")]
    weights: FitnessWeights,
    /// Random-search evaluations; population size × generations by default.
    #[arg(long)]
    budget: Option<usize>,
    /// Scoring service URL. Without it the synthetic oracle is used.
    #[arg(long, env = ENDPOINT_ENV)]
    endpoint: Option<String>,
    /// Content positions per genotype (remote only).
    #[arg(long)]
    content_len: Option<usize>,
    /// Oracle style-token count.
    #[arg(long, default_value_t = 50)]
    style_count: usize,
    #[arg(long, default_value_t = 0)]
    landscape_seed: u64,
    #[arg(long, default_value = "promptevo-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment TOML file.
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    concurrency: Option<usize>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Experiment output directory (or its `runs/` subdirectory).
    runs: PathBuf,
    #[arg(long, default_value = "baseline_no_opt")]
    baseline: String,
    /// Extra method scored elsewhere, as `name=scores.csv` with columns
    /// `prompt_id,aesthetic,clip`. Repeatable.
    #[arg(long = "external", value_parser = parse_external)]
    externals: Vec<(String, PathBuf)>,
    /// Weights applied to external scores.
    #[arg(long, value_parser = parse_weights, default_value = "0.4,0.6")]
    weights: FitnessWeights,
    /// Summary JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Summary JSON written by `aggregate`.
    summary: PathBuf,
    /// csv, text or markdown.
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    dataset: PathBuf,
    #[arg(long, default_value_t = 3)]
    per_category: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<FitnessWeights, String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    FitnessWeights::new(a, b).map_err(|e| e.to_string())
}

fn parse_external(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected `name=path`")?;
    Ok((name.to_owned(), PathBuf::from(path)))
}

/// Successful completion, or completion with some failed units.
enum Done {
    Ok,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Experiment(a) => experiment(a),
        Command::Aggregate(a) => aggregate_cmd(a),
        Command::Report(a) => report(a),
        Command::SamplePrompts(a) => sample(a),
    };
    match result {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_)
                | Error::InvalidPrompt { .. }
                | Error::InvalidGenotype(_)
                | Error::Precondition(_)
                | Error::MissingBaseline { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> promptevo::Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn optimize(a: OptimizeArgs) -> promptevo::Result<Done> {
    let section = match a.endpoint {
        Some(endpoint) => EvaluatorSection::Remote {
            endpoint,
            content_len: a.content_len,
            params: ScoreParams::default(),
            retry: RetryPolicy::default(),
        },
        None => EvaluatorSection::Oracle {
            style_count: a.style_count,
            landscape_seed: a.landscape_seed,
            vocab_file: None,
        },
    };
    let backend = section.build(Path::new("."))?;
    let prompt = make_prompt(backend.tokenizer.as_ref(), &a.prompt_id, &a.category, &a.text)?;
    let ga = GaConfig {
        population_size: a.population_size,
        generations: a.generations,
        weights: a.weights,
        ..GaConfig::default()
    };
    let cfg = ExperimentConfig {
        prompts: vec![prompt],
        methods: vec![a.method],
        eval_budget: a.budget.unwrap_or_else(|| ExperimentConfig::matched_budget(&ga)),
        ga,
        seeds: vec![a.seed],
        vocab: backend.vocab,
        output_dir: a.out,
        concurrency: 1,
        cache: true,
    };
    cfg.check()?;
    let runs = cfg.runs_dir();
    fs::create_dir_all(&runs)?;
    let record = run_unit(
        &cfg,
        &cfg.prompts[0],
        a.method,
        a.seed,
        backend.evaluator.as_ref(),
        &runs,
    )?;
    println!("{}", serde_json::to_string_pretty(&record.final_best)?);
    if let Some(err) = &record.error {
        eprintln!("run failed after {} evaluations: {err}", record.evaluations);
        return Ok(Done::Partial);
    }
    Ok(Done::Ok)
}

fn experiment(a: ExperimentArgs) -> promptevo::Result<Done> {
    let mut loaded = load_experiment(&a.config)?;
    if let Some(dir) = a.output_dir {
        loaded.config.output_dir = dir;
    }
    if let Some(n) = a.concurrency {
        loaded.config.concurrency = n;
    }
    let outcome = run_experiment(&loaded.config, loaded.backend.evaluator.as_ref())?;
    eprintln!(
        "{} units: {} run, {} already complete, {} failed",
        outcome.records.len(),
        outcome.executed,
        outcome.skipped,
        outcome.failed()
    );
    for r in outcome.records.iter().filter(|r| !r.is_complete()) {
        eprintln!(
            "  {} {} s{}: {}",
            r.prompt_id,
            r.method,
            r.seed,
            r.error.as_deref().unwrap_or("unknown error")
        );
    }
    Ok(if outcome.failed() > 0 { Done::Partial } else { Done::Ok })
}

fn aggregate_cmd(a: AggregateArgs) -> promptevo::Result<Done> {
    let records = load_records(&a.runs)?;
    let failed = records.iter().filter(|r| !r.is_complete()).count();
    let mut scores = final_scores(&records);
    for (name, path) in &a.externals {
        scores.extend(read_external_scores(fs::File::open(path)?, name, a.weights)?);
    }
    let table = aggregate(&scores, &a.baseline)?;
    write_or_print(
        a.out.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&table)?),
    )?;
    if failed > 0 {
        eprintln!("{failed} failed units left out");
        return Ok(Done::Partial);
    }
    Ok(Done::Ok)
}

fn report(a: ReportArgs) -> promptevo::Result<Done> {
    let table: SummaryTable = serde_json::from_str(&fs::read_to_string(&a.summary)?)?;
    write_or_print(a.out.as_deref(), &render(&table, a.format)?)?;
    Ok(Done::Ok)
}

fn sample(a: SampleArgs) -> promptevo::Result<Done> {
    let dataset = read_dataset(&a.dataset)?;
    let picked = sample_prompts(&dataset, a.per_category, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for entry in &picked {
        w.serialize(entry)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_or_print(
        a.out.as_deref(),
        &String::from_utf8(bytes).expect("csv output is utf-8"),
    )?;
    Ok(Done::Ok)
}
