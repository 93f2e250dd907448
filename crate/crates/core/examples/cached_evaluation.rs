//! Memoizing scores so repeated genotypes never reach the backend twice.

use promptevo::evaluator::{cached, EvalRequest, Evaluator, OracleEvaluator};
use promptevo::ga::{self, random_genotype, GaConfig};
use promptevo::genome::{genotype_from_prompt, VocabSpec};
use promptevo::sink::NullSink;
use promptevo::tokenize::{make_prompt, HashTokenizer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = VocabSpec::fixture();
    let oracle = OracleEvaluator::per_prompt(vocab, 50, 1)?;
    let prompt = make_prompt(
        &HashTokenizer::new(vocab),
        "p1",
        "Food",
        "a bowl of ramen with a soft egg",
    )?;

    let cache = cached(&oracle);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut batch: Vec<_> = (0..54).map(|_| random_genotype(&vocab, &mut rng)).collect();
    batch.extend(batch[..10].to_vec());
    cache.evaluate_batch(&EvalRequest::new(&prompt, &batch, 0))?;
    println!("batch of {}: {:?}", batch.len(), cache.stats());

    let base = genotype_from_prompt(&prompt, &vocab)?;
    let cache = cached(&oracle);
    let out = ga::run(&GaConfig::default(), &base, &vocab, &cache, &prompt, NullSink)?;
    let stats = cache.stats();
    println!(
        "GA run: {} evaluations, {} distinct genotypes scored, {} cache hits",
        out.evaluations,
        cache.len(),
        stats.hits
    );
    Ok(())
}
