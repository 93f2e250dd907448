use std::io;

use thiserror::Error;

use crate::evaluator::EvalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid prompt {prompt_id}: {reason}")]
    InvalidPrompt { prompt_id: String, reason: String },

    #[error("invalid genotype: {0}")]
    InvalidGenotype(String),

    #[error("score is NaN")]
    NanScore,

    #[error("cosine similarity of a zero-norm vector")]
    ZeroNorm,

    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),

    #[error("percentage change against a zero baseline")]
    ZeroBaseline,

    #[error("unevaluated individual at index {0}")]
    Unevaluated(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("missing baseline `{method}` for prompt {prompt_id}")]
    MissingBaseline { method: String, prompt_id: String },

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
