use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::random_genotype;
use crate::genome::{TokenVector, VocabSpec};
use crate::objective::{BestSoFar, Objective, RunTracker};
use crate::sink::RunSink;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: BestSoFar,
    pub evaluations: u64,
    pub batches: u64,
}

/// Scores `budget` uniformly random genotypes, `batch_size` per backend call,
/// and keeps the best. Each batch is logged like a GA generation.
///
/// `base` only fixes the genotype length; samples ignore its contents.
pub fn random_search<S: RunSink, R: Rng + ?Sized>(
    base: &TokenVector,
    vocab: &VocabSpec,
    budget: usize,
    batch_size: usize,
    objective: Objective<'_>,
    rng: &mut R,
    sink: S,
) -> Result<SearchOutcome> {
    if budget == 0 || batch_size == 0 {
        return Err(Error::Precondition(
            "random search needs budget and batch size ≥ 1".into(),
        ));
    }
    if base.len() != vocab.content_len {
        return Err(Error::InvalidGenotype(format!(
            "base has {} positions, vocabulary expects {}",
            base.len(),
            vocab.content_len
        )));
    }
    let mut tracker = RunTracker::new(objective, sink);
    let mut remaining = budget;
    let mut batch = 0u64;
    while remaining > 0 {
        let n = remaining.min(batch_size);
        let genotypes: Vec<TokenVector> = (0..n).map(|_| random_genotype(vocab, rng)).collect();
        let scores = tracker.score(&genotypes, batch)?;
        let fitness: Vec<f64> = scores.iter().map(|s| s.combined).collect();
        tracker.finish_generation(batch, &fitness)?;
        remaining -= n;
        batch += 1;
    }
    let evaluations = tracker.evaluations();
    let (best, _) = tracker.into_parts();
    Ok(SearchOutcome {
        best: best.expect("budget ≥ 1"),
        evaluations,
        batches: batch,
    })
}
