//! Evolutionary search over text-encoder token vectors.
//!
//! A genotype is a fixed-length vector of token IDs that conditions a
//! text-to-image generator. A [`ga`] evolves a population of them against a
//! weighted combination of an aesthetic score and a prompt–image CLIP score,
//! obtained from a pluggable [`evaluator::Evaluator`]: a synthetic oracle for
//! offline runs, or a remote scoring service over HTTP. The [`harness`]
//! module runs budget-matched baselines, whole experiment grids, and builds
//! summary tables.
//!
//! ```
//! use promptevo::evaluator::{OracleEvaluator, OracleSpec};
//! use promptevo::ga::{self, GaConfig};
//! use promptevo::genome::{genotype_from_prompt, Prompt, VocabSpec};
//! use promptevo::sink::NullSink;
//!
//! let vocab = VocabSpec::fixture();
//! let oracle = OracleSpec::derived(&vocab, 50, 1, "demo").unwrap();
//! let evaluator = OracleEvaluator::new(vocab, oracle).unwrap();
//! let prompt = Prompt {
//!     prompt_id: "demo".into(),
//!     text: "a lighthouse at dusk".into(),
//!     category: "Outdoor Scenes".into(),
//!     token_ids: vec![17, 230, 41],
//! };
//! let base = genotype_from_prompt(&prompt, &vocab).unwrap();
//! let cfg = GaConfig { population_size: 16, generations: 5, ..Default::default() };
//! let out = ga::run(&cfg, &base, &vocab, &evaluator, &prompt, NullSink).unwrap();
//! assert!(out.best.fitness().combined > 0.0);
//! ```

pub mod config;
pub mod error;
pub mod evaluator;
pub mod fitness;
pub mod ga;
pub mod genome;
pub mod harness;
pub mod objective;
pub mod protocol;
pub mod sink;
pub mod tokenize;

pub use error::{Error, Result};
