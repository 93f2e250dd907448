//! Pluggable fitness backends.
//!
//! Every backend maps an ordered batch of genotypes to one [`RawScores`] per
//! genotype, positionally matched. The engine never sees images; it only sees
//! the scores that come back.

mod cache;
mod oracle;
mod remote;

use std::sync::Arc;

use thiserror::Error;

use crate::fitness::RawScores;
use crate::genome::{validate, Prompt, TokenVector, VocabSpec};

pub use cache::{cached, CacheKey, CacheStats, CachedEvaluator};
pub use oracle::{oracle_score, OracleEvaluator, OracleSpec};
pub use remote::{
    RemoteEvaluator, RetryPolicy, ScoreParams, ServiceMeta, ENDPOINT_ENV, META_PATH, SCORE_PATH, TOKENIZE_PATH,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// Transport or service failure that may succeed on retry.
    #[error("scoring backend unavailable: {0}")]
    Unavailable(String),

    #[error("malformed evaluation request: {0}")]
    Malformed(String),

    #[error("scoring response does not match the protocol: {0}")]
    Schema(String),

    #[error("scoring failed for batch item {index}: {message}")]
    Item { index: usize, message: String },
}

impl EvalError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, EvalError::Unavailable(_))
    }
}

/// One batch of genotypes to score against a prompt.
#[derive(Debug, Clone, Copy)]
pub struct EvalRequest<'a> {
    pub prompt: &'a Prompt,
    pub genotypes: &'a [TokenVector],
    pub generation_seed: u64,
}

impl<'a> EvalRequest<'a> {
    pub fn new(prompt: &'a Prompt, genotypes: &'a [TokenVector], generation_seed: u64) -> Self {
        EvalRequest {
            prompt,
            genotypes,
            generation_seed,
        }
    }

    /// Non-empty batch, every genotype valid under `vocab`.
    pub fn check(&self, vocab: &VocabSpec) -> Result<(), EvalError> {
        if self.genotypes.is_empty() {
            return Err(EvalError::Malformed("empty genotype batch".into()));
        }
        for (i, g) in self.genotypes.iter().enumerate() {
            validate(g, vocab).map_err(|v| EvalError::Malformed(format!("genotype {i}: {v}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalResult {
    pub scores: Vec<RawScores>,
    /// Opaque per-genotype artifact references, when the backend keeps images.
    pub image_refs: Option<Vec<Option<String>>>,
}

impl EvalResult {
    pub fn from_scores(scores: Vec<RawScores>) -> Self {
        EvalResult {
            scores,
            image_refs: None,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn image_ref(&self, i: usize) -> Option<&str> {
        self.image_refs.as_ref()?.get(i)?.as_deref()
    }
}

/// A fitness backend.
///
/// Implementations may score items concurrently but must return results in
/// request order. Scores must be deterministic in
/// `(genotype, prompt, generation_seed)` for caching and elitism to hold.
pub trait Evaluator: Send + Sync {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        (**self).evaluate_batch(req)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        (**self).evaluate_batch(req)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Arc<E> {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        (**self).evaluate_batch(req)
    }
}

pub(crate) fn check_cardinality(expected: usize, result: &EvalResult) -> Result<(), EvalError> {
    if result.scores.len() != expected {
        return Err(EvalError::Schema(format!(
            "expected {expected} results, got {}",
            result.scores.len()
        )));
    }
    if let Some(refs) = &result.image_refs {
        if refs.len() != expected {
            return Err(EvalError::Schema(format!(
                "expected {expected} image references, got {}",
                refs.len()
            )));
        }
    }
    Ok(())
}
