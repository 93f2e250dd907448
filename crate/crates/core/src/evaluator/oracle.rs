//! Synthetic hidden-target landscape.
//!
//! Stands in for the generator and both scorers so the engine can be verified
//! without any model. The clip channel is an affine image of the fraction of
//! positions matching a hidden target; the aesthetic channel is an affine
//! image of the fraction of positions holding a "style" token.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{EvalError, EvalRequest, EvalResult, Evaluator};
use crate::error::{Error, Result};
use crate::fitness::RawScores;
use crate::ga::random_token;
use crate::genome::{validate, TokenId, TokenVector, VocabSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    pub target: TokenVector,
    pub style_set: BTreeSet<TokenId>,
}

impl OracleSpec {
    pub fn new(target: TokenVector, style_set: BTreeSet<TokenId>, vocab: &VocabSpec) -> Result<Self> {
        let spec = OracleSpec { target, style_set };
        spec.check(vocab)?;
        Ok(spec)
    }

    pub fn check(&self, vocab: &VocabSpec) -> Result<()> {
        validate(&self.target, vocab).map_err(|v| Error::InvalidGenotype(format!("oracle target: {v}")))?;
        if let Some(bad) = self
            .style_set
            .iter()
            .find(|&&t| t >= vocab.vocab_size || vocab.is_forbidden(t))
        {
            return Err(Error::Config(format!(
                "style token {bad} is outside the mutation domain"
            )));
        }
        Ok(())
    }

    /// Uniform random target and `style_count` distinct style tokens, both
    /// drawn from the mutation domain.
    pub fn random<R: Rng + ?Sized>(vocab: &VocabSpec, style_count: usize, rng: &mut R) -> Result<Self> {
        let domain = vocab.mutation_domain_size() as usize;
        if style_count > domain {
            return Err(Error::Config(format!(
                "style set of {style_count} exceeds mutation domain of {domain}"
            )));
        }
        let target = TokenVector::new((0..vocab.content_len).map(|_| random_token(vocab, rng)).collect());
        let style_set = rand::seq::index::sample(rng, domain, style_count)
            .into_iter()
            .map(|i| vocab.domain_token(i as u32))
            .collect();
        Ok(OracleSpec { target, style_set })
    }

    /// Landscape derived from `(seed, key)`, e.g. one per prompt id.
    pub fn derived(vocab: &VocabSpec, style_count: usize, seed: u64, key: &str) -> Result<Self> {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(key.as_bytes());
        let digest = h.finalize();
        let mut rng = ChaCha8Rng::from_seed(digest.into());
        Self::random(vocab, style_count, &mut rng)
    }
}

/// Scores `g` against the hidden landscape.
pub fn oracle_score(g: &TokenVector, o: &OracleSpec) -> RawScores {
    let k = g.len().max(1) as f64;
    let matches = g.ids().iter().zip(o.target.ids()).filter(|(a, b)| a == b).count() as f64;
    let styled = g.ids().iter().filter(|t| o.style_set.contains(t)).count() as f64;
    RawScores {
        aesthetic: 1.0 + 9.0 * (styled / k),
        clip: 2.0 * (matches / k) - 1.0,
    }
}

#[derive(Debug, Clone)]
enum Landscape {
    Fixed(OracleSpec),
    PerPrompt { style_count: usize, seed: u64 },
}

/// [`Evaluator`] over the synthetic landscape. Ignores `generation_seed`.
#[derive(Debug, Clone)]
pub struct OracleEvaluator {
    vocab: VocabSpec,
    landscape: Landscape,
}

impl OracleEvaluator {
    /// One landscape shared by every prompt.
    pub fn new(vocab: VocabSpec, oracle: OracleSpec) -> Result<Self> {
        oracle.check(&vocab)?;
        Ok(OracleEvaluator {
            vocab,
            landscape: Landscape::Fixed(oracle),
        })
    }

    /// A distinct landscape per prompt id, derived from `seed`.
    pub fn per_prompt(vocab: VocabSpec, style_count: usize, seed: u64) -> Result<Self> {
        // surface a bad style_count now rather than on first request
        OracleSpec::derived(&vocab, style_count, seed, "")?;
        Ok(OracleEvaluator {
            vocab,
            landscape: Landscape::PerPrompt { style_count, seed },
        })
    }

    pub fn vocab(&self) -> &VocabSpec {
        &self.vocab
    }

    pub fn landscape_for(&self, prompt_id: &str) -> OracleSpec {
        match &self.landscape {
            Landscape::Fixed(o) => o.clone(),
            Landscape::PerPrompt { style_count, seed } => {
                OracleSpec::derived(&self.vocab, *style_count, *seed, prompt_id)
                    .expect("style_count checked at construction")
            }
        }
    }
}

impl Evaluator for OracleEvaluator {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        req.check(&self.vocab)?;
        let oracle = match &self.landscape {
            Landscape::Fixed(o) => std::borrow::Cow::Borrowed(o),
            Landscape::PerPrompt { .. } => std::borrow::Cow::Owned(self.landscape_for(&req.prompt.prompt_id)),
        };
        let scores = req.genotypes.iter().map(|g| oracle_score(g, &oracle)).collect();
        Ok(EvalResult::from_scores(scores))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Prompt;

    fn vocab4() -> VocabSpec {
        VocabSpec::new(20, 0, 18, 19, 4).unwrap()
    }

    fn oracle4() -> OracleSpec {
        OracleSpec::new(vec![3, 4, 5, 6].into(), [3, 4, 5, 6, 7, 8].into(), &vocab4()).unwrap()
    }

    fn prompt() -> Prompt {
        Prompt {
            prompt_id: "p0".into(),
            text: "x".into(),
            category: "c".into(),
            token_ids: vec![],
        }
    }

    #[test]
    fn score_examples() {
        let o = oracle4();
        assert_eq!(oracle_score(&vec![3, 4, 5, 6].into(), &o), RawScores::new(10.0, 1.0));
        assert_eq!(oracle_score(&vec![9, 10, 11, 12].into(), &o), RawScores::new(1.0, -1.0));
        // 1 match (pos 0), style tokens {3, 7}
        assert_eq!(oracle_score(&vec![3, 7, 10, 11].into(), &o), RawScores::new(5.5, -0.5));
        // half the positions
        assert_eq!(oracle_score(&vec![3, 4, 10, 11].into(), &o).clip, 0.0);
    }

    #[test]
    fn evaluator_matches_pure_score() {
        let ev = OracleEvaluator::new(vocab4(), oracle4()).unwrap();
        let gs: Vec<TokenVector> = vec![vec![3, 4, 5, 6].into(), vec![9, 10, 11, 12].into()];
        let p = prompt();
        let res = ev.evaluate_batch(&EvalRequest::new(&p, &gs, 0)).unwrap();
        assert_eq!(res.scores, vec![RawScores::new(10.0, 1.0), RawScores::new(1.0, -1.0)]);
    }

    #[test]
    fn rejects_empty_and_invalid_batches() {
        let ev = OracleEvaluator::new(vocab4(), oracle4()).unwrap();
        let p = prompt();
        let err = ev.evaluate_batch(&EvalRequest::new(&p, &[], 0)).unwrap_err();
        assert!(matches!(err, EvalError::Malformed(_)));
        let bad = [TokenVector::new(vec![18, 1, 2, 3])];
        assert!(matches!(
            ev.evaluate_batch(&EvalRequest::new(&p, &bad, 0)),
            Err(EvalError::Malformed(_))
        ));
    }

    #[test]
    fn random_spec_is_valid_and_reproducible() {
        let vocab = VocabSpec::fixture();
        let a = OracleSpec::derived(&vocab, 50, 7, "p1").unwrap();
        let b = OracleSpec::derived(&vocab, 50, 7, "p1").unwrap();
        let c = OracleSpec::derived(&vocab, 50, 7, "p2").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.style_set.len(), 50);
        a.check(&vocab).unwrap();
        assert!(OracleSpec::derived(&vocab, 5000, 7, "p1").is_err());
    }

    #[test]
    fn style_set_must_avoid_specials() {
        let v = vocab4();
        assert!(OracleSpec::new(vec![3, 4, 5, 6].into(), [18].into(), &v).is_err());
        assert!(OracleSpec::new(vec![3, 4, 5, 19].into(), [3].into(), &v).is_err());
    }

    #[test]
    fn monotone_in_matches_and_style() {
        let o = oracle4();
        let mut g: TokenVector = vec![9, 10, 11, 12].into();
        let mut last = oracle_score(&g, &o);
        for i in 0..4 {
            g.ids_mut()[i] = o.target.ids()[i];
            let s = oracle_score(&g, &o);
            assert!(s.clip > last.clip);
            assert!(s.aesthetic > last.aesthetic);
            assert!((-1.0..=1.0).contains(&s.clip) && (1.0..=10.0).contains(&s.aesthetic));
            last = s;
        }
    }
}
