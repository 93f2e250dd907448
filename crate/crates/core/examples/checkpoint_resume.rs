//! Interrupting a GA run with a failing backend and resuming it from the
//! checkpoint to the same result as an uninterrupted run.

use std::sync::atomic::{AtomicUsize, Ordering};

use promptevo::evaluator::{EvalError, EvalRequest, EvalResult, Evaluator, OracleEvaluator};
use promptevo::ga::{self, GaConfig, RunError};
use promptevo::genome::{genotype_from_prompt, VocabSpec};
use promptevo::sink::MemorySink;
use promptevo::tokenize::{make_prompt, HashTokenizer};

struct Outage<E> {
    inner: E,
    calls: AtomicUsize,
    down_at: usize,
}

impl<E: Evaluator> Evaluator for Outage<E> {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) == self.down_at {
            return Err(EvalError::Unavailable("scoring service restarted".into()));
        }
        self.inner.evaluate_batch(req)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = VocabSpec::fixture();
    let oracle = OracleEvaluator::per_prompt(vocab, 50, 2)?;
    let prompt = make_prompt(&HashTokenizer::new(vocab), "p2", "Vehicles", "a red tram in the rain")?;
    let base = genotype_from_prompt(&prompt, &vocab)?;
    let cfg = GaConfig {
        generations: 30,
        ..Default::default()
    };

    let reference = ga::run(&cfg, &base, &vocab, &oracle, &prompt, MemorySink::default())?;

    let flaky = Outage {
        inner: oracle.clone(),
        calls: AtomicUsize::new(0),
        down_at: 12,
    };
    let mut sink = MemorySink::default();
    let checkpoint = match ga::run(&cfg, &base, &vocab, &flaky, &prompt, &mut sink) {
        Err(RunError::Interrupted { source, checkpoint }) => {
            println!(
                "interrupted in generation {} after {} evaluations: {source}",
                checkpoint.population.generation + 1,
                checkpoint.evaluations
            );
            checkpoint
        }
        other => panic!("expected an interruption, got {other:?}"),
    };

    let json = serde_json::to_string(&checkpoint)?;
    println!("checkpoint is {} bytes of JSON", json.len());
    let resumed = ga::resume(serde_json::from_str(&json)?, &cfg, &vocab, &oracle, &prompt, &mut sink)?;

    println!(
        "resumed best {:.4} after {} evaluations; uninterrupted best {:.4} after {}",
        resumed.best.fitness().combined,
        resumed.evaluations,
        reference.best.fitness().combined,
        reference.evaluations
    );
    assert_eq!(resumed.best, reference.best);
    Ok(())
}
