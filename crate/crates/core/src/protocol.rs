//! JSON bodies of the scoring-service protocol.
//!
//! ```text
//! GET  /v1/meta      -> MetaResponse
//! POST /v1/tokenize  TokenizeRequest -> TokenizeResponse
//! POST /v1/score     ScoreRequest -> ScoreResponse
//! ```

use serde::{Deserialize, Serialize};

use crate::genome::{TokenId, VocabSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelIds {
    pub generator: String,
    pub clip: String,
    pub aesthetic: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaResponse {
    pub vocab_size: u32,
    pub pad_id: TokenId,
    pub bos_id: TokenId,
    pub eos_id: TokenId,
    pub max_content_len: usize,
    pub max_batch: usize,
    pub model_ids: ModelIds,
}

impl MetaResponse {
    pub fn vocab_spec(&self) -> VocabSpec {
        VocabSpec {
            vocab_size: self.vocab_size,
            pad_id: self.pad_id,
            bos_id: self.bos_id,
            eos_id: self.eos_id,
            content_len: self.max_content_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeResponse {
    pub token_ids: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchItem {
    pub token_ids: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub prompt: String,
    pub generation_seed: u64,
    pub steps: u32,
    pub guidance_scale: f64,
    pub width: u32,
    pub height: u32,
    pub return_images: bool,
    pub batch: Vec<BatchItem>,
}

/// One scored genotype. `error` is set instead of the scores when the
/// service failed on this item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreItem {
    #[serde(default)]
    pub aesthetic: Option<f64>,
    #[serde(default)]
    pub clip_score: Option<f64>,
    #[serde(default)]
    pub image_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub results: Vec<ScoreItem>,
}

/// Body of a 500 response reporting per-item inference faults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemErrors {
    pub errors: Vec<ItemError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemError {
    pub index: usize,
    pub message: String,
}
