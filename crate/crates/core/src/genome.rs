//! Vocabulary contract and the token-ID genotype.
//!
//! A genotype is a fixed-length vector of content token IDs. Begin/end
//! markers are never part of it; they are added by whoever builds the
//! encoder context (the scoring service). Padding may appear anywhere.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;

/// Integer token ID in an encoder vocabulary.
pub type TokenId = u32;

/// Default number of content positions: a 77-slot CLIP context minus bos/eos.
pub const DEFAULT_CONTENT_LEN: usize = 75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabSpec {
    pub vocab_size: u32,
    pub pad_id: TokenId,
    pub bos_id: TokenId,
    pub eos_id: TokenId,
    pub content_len: usize,
}

impl VocabSpec {
    /// CLIP ViT-L/14 tokenizer layout (pad coincides with eos).
    pub const CLIP: VocabSpec = VocabSpec {
        vocab_size: 49408,
        pad_id: 49407,
        bos_id: 49406,
        eos_id: 49407,
        content_len: DEFAULT_CONTENT_LEN,
    };

    pub fn new(
        vocab_size: u32,
        pad_id: TokenId,
        bos_id: TokenId,
        eos_id: TokenId,
        content_len: usize,
    ) -> Result<Self, Error> {
        let spec = VocabSpec {
            vocab_size,
            pad_id,
            bos_id,
            eos_id,
            content_len,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Checks the special IDs are in range and K ≥ 1.
    ///
    /// `bos_id` must differ from the other two. `pad_id == eos_id` is accepted
    /// since CLIP pads with its end marker; that shared ID then counts as
    /// padding and is legal inside a genotype.
    pub fn check(&self) -> Result<(), Error> {
        if self.vocab_size == 0 {
            return Err(Error::Config("vocab_size must be positive".into()));
        }
        if self.content_len == 0 {
            return Err(Error::Config("content_len must be at least 1".into()));
        }
        for (name, id) in [
            ("pad_id", self.pad_id),
            ("bos_id", self.bos_id),
            ("eos_id", self.eos_id),
        ] {
            if id >= self.vocab_size {
                return Err(Error::Config(format!(
                    "{name}={id} is outside vocabulary of size {}",
                    self.vocab_size
                )));
            }
        }
        if self.bos_id == self.eos_id || self.bos_id == self.pad_id {
            return Err(Error::Config("bos_id must differ from eos_id and pad_id".into()));
        }
        if self.mutation_domain_size() == 0 {
            return Err(Error::Config("vocabulary has no content tokens".into()));
        }
        Ok(())
    }

    /// True for IDs that may not appear in a genotype: bos, and eos unless
    /// it doubles as padding.
    pub fn is_forbidden(&self, id: TokenId) -> bool {
        id == self.bos_id || (id == self.eos_id && self.eos_id != self.pad_id)
    }

    fn forbidden_sorted(&self) -> ([TokenId; 2], usize) {
        if self.eos_id == self.pad_id {
            ([self.bos_id, self.bos_id], 1)
        } else {
            let (a, b) = (self.bos_id.min(self.eos_id), self.bos_id.max(self.eos_id));
            ([a, b], 2)
        }
    }

    /// Number of IDs a mutation may draw: `{0..V} \ {bos, eos}`, padding included.
    pub fn mutation_domain_size(&self) -> u32 {
        self.vocab_size.saturating_sub(self.forbidden_sorted().1 as u32)
    }

    /// Maps `i ∈ [0, mutation_domain_size)` onto the i-th allowed ID.
    pub fn domain_token(&self, i: u32) -> TokenId {
        debug_assert!(i < self.mutation_domain_size());
        let (forbidden, n) = self.forbidden_sorted();
        let mut id = i;
        for &f in &forbidden[..n] {
            if id >= f {
                id += 1;
            }
        }
        id
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let spec: VocabSpec = serde_json::from_str(s)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    /// The bundled 1000-token test vocabulary used for oracle runs.
    pub fn fixture() -> Self {
        Self::from_json(include_str!("../fixtures/vocab.json")).expect("fixture vocab is valid")
    }
}

/// A fixed-length genotype of content token IDs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenVector(Vec<TokenId>);

impl TokenVector {
    pub fn new(ids: Vec<TokenId>) -> Self {
        TokenVector(ids)
    }

    /// All positions set to `spec.pad_id`.
    pub fn padding(spec: &VocabSpec) -> Self {
        TokenVector(vec![spec.pad_id; spec.content_len])
    }

    pub fn ids(&self) -> &[TokenId] {
        &self.0
    }

    pub fn ids_mut(&mut self) -> &mut [TokenId] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_ids(self) -> Vec<TokenId> {
        self.0
    }

    /// Hex SHA-256 over the little-endian IDs, truncated to 16 characters.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for id in &self.0 {
            h.update(id.to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn hamming(&self, other: &TokenVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<TokenId>> for TokenVector {
    fn from(ids: Vec<TokenId>) -> Self {
        TokenVector(ids)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    WrongLength { expected: usize, actual: usize },
    OutOfRange { id: TokenId },
    BosInContent,
    EosInContent,
}

/// First invariant a [`TokenVector`] breaks under a [`VocabSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Offending position; `None` for a length mismatch.
    pub index: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.index) {
            (ViolationKind::WrongLength { expected, actual }, _) => {
                write!(f, "length {actual} differs from content_len {expected}")
            }
            (ViolationKind::OutOfRange { id }, Some(i)) => {
                write!(f, "token {id} at index {i} is outside the vocabulary")
            }
            (ViolationKind::BosInContent, Some(i)) => write!(f, "bos token at index {i}"),
            (ViolationKind::EosInContent, Some(i)) => write!(f, "eos token at index {i}"),
            (kind, None) => write!(f, "{kind:?}"),
        }
    }
}

pub fn validate(v: &TokenVector, spec: &VocabSpec) -> Result<(), Violation> {
    if v.len() != spec.content_len {
        return Err(Violation {
            index: None,
            kind: ViolationKind::WrongLength {
                expected: spec.content_len,
                actual: v.len(),
            },
        });
    }
    check_content_ids(v.ids(), spec)
}

fn check_content_ids(ids: &[TokenId], spec: &VocabSpec) -> Result<(), Violation> {
    for (i, &id) in ids.iter().enumerate() {
        let kind = if id >= spec.vocab_size {
            ViolationKind::OutOfRange { id }
        } else if id == spec.bos_id {
            ViolationKind::BosInContent
        } else if id == spec.eos_id && spec.eos_id != spec.pad_id {
            ViolationKind::EosInContent
        } else {
            continue;
        };
        return Err(Violation { index: Some(i), kind });
    }
    Ok(())
}

/// Count of positions holding something other than padding.
pub fn effective_length(v: &TokenVector, spec: &VocabSpec) -> usize {
    v.ids().iter().filter(|&&id| id != spec.pad_id).count()
}

/// A user prompt and its content tokenization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub prompt_id: String,
    pub text: String,
    pub category: String,
    pub token_ids: Vec<TokenId>,
}

/// Copies the prompt's tokens into a genotype, truncating past K and
/// filling the tail with padding.
pub fn genotype_from_prompt(p: &Prompt, spec: &VocabSpec) -> Result<TokenVector, Error> {
    check_content_ids(&p.token_ids, spec).map_err(|v| Error::InvalidPrompt {
        prompt_id: p.prompt_id.clone(),
        reason: v.to_string(),
    })?;
    let mut ids: Vec<TokenId> = p.token_ids.iter().copied().take(spec.content_len).collect();
    ids.resize(spec.content_len, spec.pad_id);
    Ok(TokenVector(ids))
}
