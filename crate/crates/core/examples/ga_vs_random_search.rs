//! GA against budget-matched random search on a few oracle landscapes.

use promptevo::evaluator::{OracleEvaluator, OracleSpec};
use promptevo::ga::{self, GaConfig, InitStrategy};
use promptevo::genome::{genotype_from_prompt, VocabSpec};
use promptevo::harness::{random_search, ExperimentConfig};
use promptevo::objective::Objective;
use promptevo::sink::NullSink;
use promptevo::tokenize::{make_prompt, HashTokenizer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> promptevo::Result<()> {
    let vocab = VocabSpec::fixture();
    let prompt = make_prompt(
        &HashTokenizer::new(vocab),
        "demo",
        "Animals",
        "a fox asleep in the snow",
    )?;
    let base = genotype_from_prompt(&prompt, &vocab)?;

    println!("seed  ga_mutated  ga_empty  ga_random  random_search");
    for seed in 0..5 {
        let evaluator = OracleEvaluator::new(vocab, OracleSpec::derived(&vocab, 50, seed, "demo")?)?;
        let mut row = format!("{seed:>4}");
        let mut cfg = GaConfig {
            seed,
            ..Default::default()
        };
        for init in [InitStrategy::Mutated, InitStrategy::Empty, InitStrategy::Random] {
            cfg.init_strategy = init;
            let out = ga::run(&cfg, &base, &vocab, &evaluator, &prompt, NullSink)
                .map_err(|e| promptevo::Error::Precondition(e.to_string()))?;
            row.push_str(&format!("  {:>10.4}", out.best.fitness().combined));
        }
        let objective = Objective::new(&evaluator, &prompt, seed, cfg.weights);
        let budget = ExperimentConfig::matched_budget(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rs = random_search(
            &base,
            &vocab,
            budget,
            cfg.population_size,
            objective,
            &mut rng,
            NullSink,
        )?;
        row.push_str(&format!("  {:>13.4}", rs.best.fitness().combined));
        println!("{row}");
    }
    Ok(())
}
