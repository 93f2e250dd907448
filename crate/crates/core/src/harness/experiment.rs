//! Experiment grid: prompts × methods × seeds, one persisted unit each.
//!
//! Layout under `output_dir/runs/`:
//!
//! ```text
//! <unit>.jsonl            one line per evaluation
//! <unit>.summary.json     RunRecord; written last, marks the unit done
//! <unit>.checkpoint.json  GA state when an evaluator failure interrupted it
//! <unit>.cache.jsonl      score cache spill (when caching is enabled)
//! ```

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::random_search::random_search;
use crate::error::{Error, Result};
use crate::evaluator::{CachedEvaluator, Evaluator};
use crate::fitness::FitnessScore;
use crate::ga::{self, Checkpoint, GaConfig, InitStrategy, RunError};
use crate::genome::{genotype_from_prompt, Prompt, TokenId, VocabSpec};
use crate::objective::{BestSoFar, Objective, RunTracker};
use crate::sink::{read_eval_log, GenerationRow, JsonlSink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GaMutated,
    GaEmpty,
    GaRandom,
    RandomSearch,
    BaselineNoOpt,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::BaselineNoOpt,
        Method::GaMutated,
        Method::GaEmpty,
        Method::GaRandom,
        Method::RandomSearch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::GaMutated => "ga_mutated",
            Method::GaEmpty => "ga_empty",
            Method::GaRandom => "ga_random",
            Method::RandomSearch => "random_search",
            Method::BaselineNoOpt => "baseline_no_opt",
        }
    }

    pub fn init_strategy(&self) -> Option<InitStrategy> {
        match self {
            Method::GaMutated => Some(InitStrategy::Mutated),
            Method::GaEmpty => Some(InitStrategy::Empty),
            Method::GaRandom => Some(InitStrategy::Random),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub prompts: Vec<Prompt>,
    pub methods: Vec<Method>,
    pub ga: GaConfig,
    /// Random-search evaluations per unit.
    pub eval_budget: usize,
    pub seeds: Vec<u64>,
    pub vocab: VocabSpec,
    pub output_dir: PathBuf,
    /// Units run in parallel.
    pub concurrency: usize,
    /// Memoize scores per unit, spilling them next to the unit's log.
    pub cache: bool,
}

impl ExperimentConfig {
    /// Budget matching the GA: population size × generations.
    pub fn matched_budget(ga: &GaConfig) -> usize {
        ga.population_size * ga.generations
    }

    pub fn check(&self) -> Result<()> {
        self.ga.check()?;
        self.vocab.check()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        if self.methods.contains(&Method::RandomSearch) && self.eval_budget == 0 {
            return Err(Error::Config("eval_budget must be positive".into()));
        }
        if self.concurrency == 0 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        let mut ids: Vec<&str> = self.prompts.iter().map(|p| p.prompt_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate prompt ids".into()));
        }
        Ok(())
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.output_dir.join("runs")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalBest {
    pub token_ids: Vec<TokenId>,
    pub genotype_digest: String,
    pub fitness: FitnessScore,
    pub found_at_generation: u64,
    pub found_at_evaluation: u64,
    /// Readable form of the genotype, when one is known.
    pub text: Option<String>,
}

impl FinalBest {
    fn from_best(best: &BestSoFar, text: Option<String>) -> Self {
        let g = &best.individual.genotype;
        FinalBest {
            token_ids: g.ids().to_vec(),
            genotype_digest: g.digest(),
            fitness: best.fitness(),
            found_at_generation: best.found_at_generation,
            found_at_evaluation: best.found_at_evaluation,
            text,
        }
    }
}

/// Summary of one (prompt, method, seed) unit. The per-evaluation rows live
/// in the JSONL file named by `eval_log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub prompt_id: String,
    pub method: Method,
    pub seed: u64,
    pub status: UnitStatus,
    pub error: Option<String>,
    pub evaluations: u64,
    pub generations: Vec<GenerationRow>,
    pub final_best: Option<FinalBest>,
    pub eval_log: String,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.status == UnitStatus::Complete
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub executed: usize,
    pub skipped: usize,
}

impl ExperimentOutcome {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| !r.is_complete()).count()
    }
}

#[derive(Serialize, Deserialize)]
struct UnitCheckpoint {
    checkpoint: Checkpoint,
    generations: Vec<GenerationRow>,
}

fn unit_stem(prompt_id: &str, method: Method, seed: u64) -> String {
    let safe: String = prompt_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}__{method}__s{seed}")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Runs every unit of the grid not already completed in `output_dir`.
///
/// A failing unit is recorded and the others continue.
pub fn run_experiment(cfg: &ExperimentConfig, evaluator: &dyn Evaluator) -> Result<ExperimentOutcome> {
    cfg.check()?;
    let runs = cfg.runs_dir();
    fs::create_dir_all(&runs)?;

    let mut units = Vec::new();
    for prompt in &cfg.prompts {
        for &method in &cfg.methods {
            for &seed in &cfg.seeds {
                units.push((prompt, method, seed));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<(RunRecord, bool)>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(prompt, method, seed)| {
                let summary = runs.join(format!("{}.summary.json", unit_stem(&prompt.prompt_id, method, seed)));
                if summary.exists() {
                    let record: RunRecord = serde_json::from_str(&fs::read_to_string(&summary)?)?;
                    if record.is_complete() {
                        return Ok((record, false));
                    }
                }
                Ok((run_unit(cfg, prompt, method, seed, evaluator, &runs)?, true))
            })
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    let mut executed = 0;
    for r in results {
        let (record, ran) = r?;
        executed += ran as usize;
        records.push(record);
    }
    let skipped = records.len() - executed;
    Ok(ExperimentOutcome {
        records,
        executed,
        skipped,
    })
}

/// Runs one unit and persists its log and summary. Evaluator failures end up
/// in the record; only I/O on the output directory is an `Err`.
pub fn run_unit(
    cfg: &ExperimentConfig,
    prompt: &Prompt,
    method: Method,
    seed: u64,
    evaluator: &dyn Evaluator,
    runs_dir: &Path,
) -> Result<RunRecord> {
    let stem = unit_stem(&prompt.prompt_id, method, seed);
    let log_path = runs_dir.join(format!("{stem}.jsonl"));
    let checkpoint_path = runs_dir.join(format!("{stem}.checkpoint.json"));

    let cached;
    let evaluator: &dyn Evaluator = if cfg.cache {
        cached = CachedEvaluator::with_spill(evaluator, &runs_dir.join(format!("{stem}.cache.jsonl")))?;
        &cached
    } else {
        evaluator
    };

    let ga_cfg = GaConfig {
        seed,
        init_strategy: method.init_strategy().unwrap_or(cfg.ga.init_strategy),
        ..cfg.ga.clone()
    };
    let weights = ga_cfg.weights;
    let generation_seed = ga_cfg.effective_generation_seed();

    let mut record = RunRecord {
        prompt_id: prompt.prompt_id.clone(),
        method,
        seed,
        status: UnitStatus::Complete,
        error: None,
        evaluations: 0,
        generations: Vec::new(),
        final_best: None,
        eval_log: format!("{stem}.jsonl"),
    };

    let base = match genotype_from_prompt(prompt, &cfg.vocab) {
        Ok(b) => b,
        Err(e) => {
            record.status = UnitStatus::Failed;
            record.error = Some(e.to_string());
            write_atomic(
                &runs_dir.join(format!("{stem}.summary.json")),
                &serde_json::to_vec_pretty(&record)?,
            )?;
            return Ok(record);
        }
    };

    let outcome: std::result::Result<(BestSoFar, u64, Vec<GenerationRow>), String> = match method {
        Method::BaselineNoOpt => {
            let mut sink = JsonlSink::create(&log_path)?;
            let objective = Objective::new(evaluator, prompt, generation_seed, weights);
            let mut tracker = RunTracker::new(objective, &mut sink);
            let res = tracker
                .score(std::slice::from_ref(&base), 0)
                .and_then(|s| tracker.finish_generation(0, &[s[0].combined]));
            let evaluations = tracker.evaluations();
            let (best, _) = tracker.into_parts();
            match res {
                Ok(()) => Ok((best.expect("one evaluation"), evaluations, sink.generations)),
                Err(e) => Err(e.to_string()),
            }
        }
        Method::RandomSearch => {
            let mut sink = JsonlSink::create(&log_path)?;
            let objective = Objective::new(evaluator, prompt, generation_seed, weights);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match random_search(
                &base,
                &cfg.vocab,
                cfg.eval_budget,
                ga_cfg.population_size,
                objective,
                &mut rng,
                &mut sink,
            ) {
                Ok(out) => Ok((out.best, out.evaluations, sink.generations)),
                Err(e) => Err(e.to_string()),
            }
        }
        Method::GaMutated | Method::GaEmpty | Method::GaRandom => {
            let resumed: Option<UnitCheckpoint> = checkpoint_path
                .exists()
                .then(|| fs::read_to_string(&checkpoint_path))
                .transpose()?
                .and_then(|s| serde_json::from_str(&s).ok());
            let result = match resumed {
                Some(uc) => {
                    // keep exactly the rows the checkpoint accounts for
                    let mut rows = read_eval_log(&log_path).unwrap_or_default();
                    rows.truncate(uc.checkpoint.evaluations as usize);
                    let mut w = BufWriter::new(File::create(&log_path)?);
                    for row in &rows {
                        serde_json::to_writer(&mut w, row)?;
                        w.write_all(b"\n")?;
                    }
                    w.flush()?;
                    let file = OpenOptions::new().append(true).open(&log_path)?;
                    let mut sink = JsonlSink::new(BufWriter::new(file));
                    sink.generations = uc.generations;
                    let r = ga::resume(uc.checkpoint, &ga_cfg, &cfg.vocab, evaluator, prompt, &mut sink);
                    (r, sink.generations)
                }
                None => {
                    let mut sink = JsonlSink::create(&log_path)?;
                    let r = ga::run(&ga_cfg, &base, &cfg.vocab, evaluator, prompt, &mut sink);
                    (r, sink.generations)
                }
            };
            match result {
                (Ok(out), generations) => {
                    if checkpoint_path.exists() {
                        fs::remove_file(&checkpoint_path)?;
                    }
                    Ok((out.best, out.evaluations, generations))
                }
                (Err(RunError::Interrupted { source, checkpoint }), generations) => {
                    let uc = UnitCheckpoint {
                        checkpoint: *checkpoint,
                        generations,
                    };
                    write_atomic(&checkpoint_path, &serde_json::to_vec(&uc)?)?;
                    Err(source.to_string())
                }
                (Err(RunError::Invalid(e)), _) => Err(e.to_string()),
            }
        }
    };

    match outcome {
        Ok((best, evaluations, generations)) => {
            let text = (method == Method::BaselineNoOpt).then(|| prompt.text.clone());
            record.final_best = Some(FinalBest::from_best(&best, text));
            record.evaluations = evaluations;
            record.generations = generations;
        }
        Err(message) => {
            record.status = UnitStatus::Failed;
            record.error = Some(message);
            record.evaluations = read_eval_log(&log_path).map(|r| r.len() as u64).unwrap_or(0);
        }
    }
    write_atomic(
        &runs_dir.join(format!("{stem}.summary.json")),
        &serde_json::to_vec_pretty(&record)?,
    )?;
    Ok(record)
}

/// Reads every unit summary under `dir` (an experiment output directory or
/// its `runs/` subdirectory), sorted by (prompt, method, seed).
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let runs = if dir.join("runs").is_dir() {
        dir.join("runs")
    } else {
        dir.to_path_buf()
    };
    let mut records = Vec::new();
    for entry in fs::read_dir(&runs)? {
        let path = entry?.path();
        if path.to_string_lossy().ends_with(".summary.json") {
            records.push(serde_json::from_str::<RunRecord>(&fs::read_to_string(&path)?)?);
        }
    }
    records.sort_by(|a, b| (&a.prompt_id, a.method, a.seed).cmp(&(&b.prompt_id, b.method, b.seed)));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
        assert!("promptist".parse::<Method>().is_err());
    }

    #[test]
    fn unit_stem_is_filesystem_safe() {
        assert_eq!(unit_stem("a/b c", Method::GaEmpty, 3), "a_b_c__ga_empty__s3");
    }
}
