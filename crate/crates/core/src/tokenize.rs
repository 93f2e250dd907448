//! Text to content token IDs.
//!
//! Real tokenization belongs to the scoring service. [`HashTokenizer`] is a
//! deterministic stand-in for oracle runs over the fixture vocabulary.

use sha2::{Digest, Sha256};

use crate::evaluator::EvalError;
use crate::genome::{Prompt, TokenId, VocabSpec};

pub trait Tokenizer: Send + Sync {
    /// Content token IDs for `text`, without begin/end markers.
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>, EvalError>;
}

/// Maps each lowercase whitespace-separated word to a non-padding ID of the
/// mutation domain by hashing.
#[derive(Debug, Clone, Copy)]
pub struct HashTokenizer {
    vocab: VocabSpec,
}

impl HashTokenizer {
    pub fn new(vocab: VocabSpec) -> Self {
        HashTokenizer { vocab }
    }

    fn word_id(&self, word: &str) -> TokenId {
        let digest = Sha256::digest(word.as_bytes());
        let h = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let domain = self.vocab.mutation_domain_size() as u64;
        let mut id = self.vocab.domain_token((h % domain) as u32);
        if id == self.vocab.pad_id {
            id = self.vocab.domain_token(((h + 1) % domain) as u32);
        }
        id
    }
}

impl Tokenizer for HashTokenizer {
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>, EvalError> {
        Ok(text
            .split_whitespace()
            .map(|w| self.word_id(&w.to_lowercase()))
            .take(self.vocab.content_len)
            .collect())
    }
}

/// Builds a [`Prompt`] by tokenizing `text`.
pub fn make_prompt(
    tokenizer: &dyn Tokenizer,
    prompt_id: &str,
    category: &str,
    text: &str,
) -> Result<Prompt, EvalError> {
    Ok(Prompt {
        prompt_id: prompt_id.to_owned(),
        text: text.to_owned(),
        category: category.to_owned(),
        token_ids: tokenizer.tokenize(text)?,
    })
}
