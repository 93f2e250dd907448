use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::operators::{init_population, mutate_genes, one_point_crossover, tournament_select};
use super::{GaConfig, Population};
use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::genome::Prompt;
use crate::genome::{TokenVector, VocabSpec};
use crate::objective::{BestSoFar, Individual, Objective, RunTracker};
use crate::sink::RunSink;

/// Engine state before the generation that failed. Resuming from it replays
/// exactly what an uninterrupted run would have done.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Last fully evaluated population, or the unevaluated initial one.
    pub population: Population,
    pub best: Option<BestSoFar>,
    pub evaluations: u64,
    pub rng: ChaCha8Rng,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Invalid(Error),

    #[error("run interrupted at generation {}: {source}", checkpoint.population.generation)]
    Interrupted { source: Error, checkpoint: Box<Checkpoint> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: BestSoFar,
    pub population: Population,
    pub evaluations: u64,
}

/// Produces the next population from a fully evaluated one.
///
/// Elites are copied first, unchanged and keeping their fitness. The other
/// slots are filled pairwise: two tournament winners, crossover with
/// `crossover_prob`, then each child mutated with `mutation_prob`. An odd last
/// slot takes the first child only. New members are scored in one batch.
pub fn step_generation<S: RunSink, R: Rng + ?Sized>(
    pop: &Population,
    cfg: &GaConfig,
    vocab: &VocabSpec,
    tracker: &mut RunTracker<'_, S>,
    rng: &mut R,
) -> Result<Population> {
    if !pop.is_evaluated() {
        return Err(Error::Precondition(
            "step_generation needs an evaluated population".into(),
        ));
    }
    let n = cfg.population_size;
    let mut next: Vec<Individual> = Vec::with_capacity(n);
    for i in pop.top_indices(cfg.elite_count)? {
        next.push(pop.members[i].clone());
    }

    while next.len() < n {
        let a = tournament_select(&pop.members, cfg.tournament_size, rng)?;
        let b = tournament_select(&pop.members, cfg.tournament_size, rng)?;
        let (p1, p2) = (&pop.members[a].genotype, &pop.members[b].genotype);
        let (c1, c2) = if p1.len() >= 2 && rng.random_bool(cfg.crossover_prob) {
            one_point_crossover(p1, p2, rng)?
        } else {
            (p1.clone(), p2.clone())
        };
        for mut child in [c1, c2] {
            if next.len() == n {
                break;
            }
            if rng.random_bool(cfg.mutation_prob) {
                mutate_genes(&mut child, cfg.gene_mutation_prob, vocab, rng)?;
            }
            next.push(Individual::unevaluated(child));
        }
    }

    let mut out = Population {
        generation: pop.generation + 1,
        members: next,
    };
    evaluate_pending(&mut out, tracker)?;
    Ok(out)
}

fn evaluate_pending<S: RunSink>(pop: &mut Population, tracker: &mut RunTracker<'_, S>) -> Result<()> {
    let pending: Vec<usize> = (0..pop.len()).filter(|&i| pop.members[i].fitness.is_none()).collect();
    if !pending.is_empty() {
        let genotypes: Vec<TokenVector> = pending.iter().map(|&i| pop.members[i].genotype.clone()).collect();
        let scores = tracker.score(&genotypes, pop.generation)?;
        for (i, f) in pending.into_iter().zip(scores) {
            pop.members[i].fitness = Some(f);
        }
    }
    let fitness: Vec<f64> = pop.members.iter().filter_map(Individual::combined).collect();
    tracker.finish_generation(pop.generation, &fitness)
}

/// Evolves `cfg.generations` generations from `base` and returns the best
/// individual ever evaluated.
pub fn run<S: RunSink>(
    cfg: &GaConfig,
    base: &TokenVector,
    vocab: &VocabSpec,
    evaluator: &dyn Evaluator,
    prompt: &Prompt,
    sink: S,
) -> std::result::Result<GaOutcome, RunError> {
    cfg.check().map_err(RunError::Invalid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let population = init_population(cfg, base, vocab, &mut rng).map_err(RunError::Invalid)?;
    let checkpoint = Checkpoint {
        population,
        best: None,
        evaluations: 0,
        rng,
    };
    resume(checkpoint, cfg, vocab, evaluator, prompt, sink)
}

/// Continues a run from a checkpoint.
pub fn resume<S: RunSink>(
    checkpoint: Checkpoint,
    cfg: &GaConfig,
    vocab: &VocabSpec,
    evaluator: &dyn Evaluator,
    prompt: &Prompt,
    sink: S,
) -> std::result::Result<GaOutcome, RunError> {
    cfg.check().map_err(RunError::Invalid)?;
    let objective = Objective::new(evaluator, prompt, cfg.effective_generation_seed(), cfg.weights);
    let Checkpoint {
        mut population,
        best,
        evaluations,
        mut rng,
    } = checkpoint;
    let mut tracker = RunTracker::restore(objective, sink, evaluations, best);

    let interrupted =
        |source, population: Population, tracker: &RunTracker<'_, S>, rng: ChaCha8Rng| RunError::Interrupted {
            source,
            checkpoint: Box::new(Checkpoint {
                population,
                best: tracker.best().cloned(),
                evaluations: tracker.evaluations(),
                rng,
            }),
        };

    if !population.is_evaluated() {
        let mut pending = population.clone();
        match evaluate_pending(&mut pending, &mut tracker) {
            Ok(()) => population = pending,
            Err(e) => return Err(interrupted(e, population, &tracker, rng)),
        }
    }

    while (population.generation as usize) < cfg.generations {
        let before = rng.clone();
        match step_generation(&population, cfg, vocab, &mut tracker, &mut rng) {
            Ok(next) => population = next,
            Err(e) => return Err(interrupted(e, population, &tracker, before)),
        }
    }

    let evaluations = tracker.evaluations();
    let (best, _) = tracker.into_parts();
    Ok(GaOutcome {
        best: best.expect("population is non-empty and evaluated"),
        population,
        evaluations,
    })
}
