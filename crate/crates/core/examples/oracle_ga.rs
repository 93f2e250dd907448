//! One GA run against the synthetic oracle, printing per-generation statistics.
//!
//! ```text
//! cargo run --example oracle_ga -- [seed]
//! ```

use promptevo::evaluator::{OracleEvaluator, OracleSpec};
use promptevo::ga::{self, GaConfig};
use promptevo::genome::{genotype_from_prompt, VocabSpec};
use promptevo::sink::MemorySink;
use promptevo::tokenize::{make_prompt, HashTokenizer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let vocab = VocabSpec::fixture();
    let prompt = make_prompt(
        &HashTokenizer::new(vocab),
        "demo",
        "Outdoor Scenes",
        "a lighthouse at dusk",
    )?;
    let landscape = OracleSpec::derived(&vocab, 50, seed, &prompt.prompt_id)?;
    let evaluator = OracleEvaluator::new(vocab, landscape.clone())?;
    let base = genotype_from_prompt(&prompt, &vocab)?;

    let cfg = GaConfig {
        seed,
        generations: 40,
        ..Default::default()
    };
    let mut sink = MemorySink::default();
    let out = ga::run(&cfg, &base, &vocab, &evaluator, &prompt, &mut sink)?;

    for g in sink.generations.iter().step_by(5) {
        println!(
            "gen {:>3}  evals {:>5}  best {:.4}  mean {:.4}  std {:.4}",
            g.generation, g.evaluations, g.best, g.mean, g.std
        );
    }
    let best = out.best.fitness();
    println!(
        "best fitness {:.4} (aesthetic {:.2}, clip {:.2}) found in generation {}",
        best.combined, best.raw.aesthetic, best.raw.clip, out.best.found_at_generation
    );
    println!("target     {:?}", landscape.target.ids());
    println!("best       {:?}", out.best.individual.genotype.ids());
    Ok(())
}
