//! Experiment configuration files (TOML).
//!
//! ```toml
//! output_dir = "out/demo"          # relative paths resolve against this file
//! methods = ["baseline_no_opt", "ga_mutated", "random_search"]
//! seeds = [0]
//! eval_budget = 6400               # default: population_size × generations
//! concurrency = 4
//! cache = true
//!
//! [prompts]
//! dataset = "prompts.csv"          # prompt_id,category,challenge,text
//! per_category = 3
//! sample_seed = 0
//!
//! [ga]                             # any GaConfig field; omitted ones keep defaults
//! population_size = 64
//! generations = 100
//!
//! [evaluator]
//! kind = "oracle"                  # or "remote"
//! style_count = 50
//! landscape_seed = 0
//! ```
//!
//! A remote evaluator takes `endpoint`, optional `content_len`, and
//! `[evaluator.params]` / `[evaluator.retry]` tables. The `PROMPTEVO_ENDPOINT`
//! environment variable overrides `endpoint`.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, OracleEvaluator, RemoteEvaluator, RetryPolicy, ScoreParams, ENDPOINT_ENV};
use crate::ga::GaConfig;
use crate::genome::VocabSpec;
use crate::harness::{read_dataset, sample_prompts, tokenize_entries, ExperimentConfig, Method};
use crate::tokenize::{HashTokenizer, Tokenizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub output_dir: PathBuf,
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub eval_budget: Option<usize>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_true")]
    pub cache: bool,
    pub prompts: PromptsSection,
    #[serde(default)]
    pub ga: GaConfig,
    pub evaluator: EvaluatorSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_concurrency() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptsSection {
    pub dataset: PathBuf,
    /// Sample this many per category; all prompts when absent.
    pub per_category: Option<usize>,
    #[serde(default)]
    pub sample_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorSection {
    Oracle {
        #[serde(default = "default_style_count")]
        style_count: usize,
        #[serde(default)]
        landscape_seed: u64,
        /// VocabSpec JSON; the bundled 1000-token fixture when absent.
        vocab_file: Option<PathBuf>,
    },
    Remote {
        endpoint: String,
        /// Content positions per genotype; the service maximum when absent.
        content_len: Option<usize>,
        #[serde(default)]
        params: ScoreParams,
        #[serde(default)]
        retry: RetryPolicy,
    },
}

fn default_style_count() -> usize {
    50
}

/// A ready-to-use scoring backend and the vocabulary it works over.
pub struct Backend {
    pub evaluator: Box<dyn Evaluator>,
    pub tokenizer: Box<dyn Tokenizer>,
    pub vocab: VocabSpec,
}

impl EvaluatorSection {
    /// Connects (for a remote backend) and returns the evaluator, tokenizer and
    /// vocabulary. `base` resolves relative file paths.
    pub fn build(&self, base: &Path) -> Result<Backend> {
        match self {
            EvaluatorSection::Oracle {
                style_count,
                landscape_seed,
                vocab_file,
            } => {
                let vocab = match vocab_file {
                    Some(p) => VocabSpec::from_json(&std::fs::read_to_string(base.join(p))?)?,
                    None => VocabSpec::fixture(),
                };
                Ok(Backend {
                    evaluator: Box::new(OracleEvaluator::per_prompt(vocab, *style_count, *landscape_seed)?),
                    tokenizer: Box::new(HashTokenizer::new(vocab)),
                    vocab,
                })
            }
            EvaluatorSection::Remote {
                endpoint,
                content_len,
                params,
                retry,
            } => {
                let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| endpoint.clone());
                let (client, meta) = RemoteEvaluator::connect(&endpoint, params.clone(), retry.clone())?;
                let mut vocab = meta.vocab_spec();
                if let Some(k) = content_len {
                    if *k > meta.max_content_len {
                        return Err(Error::Config(format!(
                            "content_len {k} exceeds the service maximum {}",
                            meta.max_content_len
                        )));
                    }
                    vocab.content_len = *k;
                }
                vocab.check()?;
                Ok(Backend {
                    evaluator: Box::new(client.clone()),
                    tokenizer: Box::new(client),
                    vocab,
                })
            }
        }
    }
}

pub struct LoadedExperiment {
    pub config: ExperimentConfig,
    pub backend: Backend,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Builds the backend, samples and tokenizes prompts, and assembles the
    /// runnable configuration.
    pub fn load(&self, base: &Path) -> Result<LoadedExperiment> {
        self.ga.check()?;
        let backend = self.evaluator.build(base)?;
        let dataset = read_dataset(&base.join(&self.prompts.dataset))?;
        let entries = match self.prompts.per_category {
            Some(k) => sample_prompts(&dataset, k, &mut ChaCha8Rng::seed_from_u64(self.prompts.sample_seed))?,
            None => dataset,
        };
        let prompts = tokenize_entries(&entries, backend.tokenizer.as_ref())?;
        let config = ExperimentConfig {
            prompts,
            methods: self.methods.clone(),
            ga: self.ga.clone(),
            eval_budget: self
                .eval_budget
                .unwrap_or_else(|| ExperimentConfig::matched_budget(&self.ga)),
            seeds: self.seeds.clone(),
            vocab: backend.vocab,
            output_dir: base.join(&self.output_dir),
            concurrency: self.concurrency,
            cache: self.cache,
        };
        config.check()?;
        Ok(LoadedExperiment { config, backend })
    }
}

/// Reads and loads a config file, resolving paths against its directory.
pub fn load_experiment(path: &Path) -> Result<LoadedExperiment> {
    let file = ExperimentFile::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.load(base)
}
