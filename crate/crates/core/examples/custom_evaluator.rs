//! Plugging a hand-written scorer into the GA.
//!
//! The evaluator here prefers short prompts built from low token IDs; any
//! type implementing [`Evaluator`] works the same way, from a local model to
//! a batch queue.

use promptevo::evaluator::{EvalError, EvalRequest, EvalResult, Evaluator};
use promptevo::fitness::{FitnessWeights, RawScores};
use promptevo::ga::{self, GaConfig, InitStrategy};
use promptevo::genome::{effective_length, genotype_from_prompt, Prompt, VocabSpec};
use promptevo::sink::NullSink;

struct Brevity {
    vocab: VocabSpec,
}

impl Evaluator for Brevity {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        req.check(&self.vocab)?;
        let k = self.vocab.content_len as f64;
        let scores = req
            .genotypes
            .iter()
            .map(|g| {
                let used = effective_length(g, &self.vocab) as f64;
                let low = g.ids().iter().filter(|&&t| t != self.vocab.pad_id && t < 100).count() as f64;
                let clip = if used == 0.0 { -1.0 } else { 2.0 * low / used - 1.0 };
                RawScores::new(10.0 - 9.0 * used / k, clip)
            })
            .collect();
        Ok(EvalResult::from_scores(scores))
    }
}

fn main() -> promptevo::Result<()> {
    let vocab = VocabSpec::new(1000, 0, 998, 999, 12)?;
    let prompt = Prompt {
        prompt_id: "custom".into(),
        text: "twelve arbitrary tokens".into(),
        category: String::new(),
        token_ids: vec![512, 7, 930, 41, 388, 260, 77, 801, 15, 642, 333, 909],
    };
    let base = genotype_from_prompt(&prompt, &vocab)?;
    let cfg = GaConfig {
        population_size: 32,
        generations: 60,
        init_strategy: InitStrategy::Mutated,
        weights: FitnessWeights::new(0.5, 0.5)?,
        ..Default::default()
    };
    let out = ga::run(&cfg, &base, &vocab, &Brevity { vocab }, &prompt, NullSink)
        .map_err(|e| promptevo::Error::Precondition(e.to_string()))?;
    println!("start {:?}", base.ids());
    println!("best  {:?}", out.best.individual.genotype.ids());
    println!("fitness {:.4}", out.best.fitness().combined);
    Ok(())
}
