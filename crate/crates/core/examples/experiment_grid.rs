//! Running a prompts × methods × seeds grid from a TOML file, then
//! aggregating and rendering the summary table.
//!
//! ```text
//! cargo run --example experiment_grid -- [config.toml] [output_dir]
//! ```

use std::path::PathBuf;

use promptevo::config::load_experiment;
use promptevo::harness::{aggregate, final_scores, load_records, render, run_experiment, ReportFormat};

fn main() -> promptevo::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/oracle_experiment.toml"));
    let mut loaded = load_experiment(&config)?;
    loaded.config.output_dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("promptevo-grid"));

    let outcome = run_experiment(&loaded.config, loaded.backend.evaluator.as_ref())?;
    println!(
        "{} units in {}: {} run, {} reused, {} failed",
        outcome.records.len(),
        loaded.config.output_dir.display(),
        outcome.executed,
        outcome.skipped,
        outcome.failed()
    );

    let records = load_records(&loaded.config.output_dir)?;
    let table = aggregate(&final_scores(&records), "baseline_no_opt")?;
    print!("{}", render(&table, ReportFormat::Text)?);
    Ok(())
}
