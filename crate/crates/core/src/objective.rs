//! Glue between an optimizer and its evaluator: scoring, bookkeeping of
//! evaluation indices and best-so-far, and streaming to a sink.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{EvalError, EvalRequest, Evaluator};
use crate::fitness::{combine, FitnessScore, FitnessWeights};
use crate::genome::{Prompt, TokenVector};
use crate::sink::{EvalRow, GenerationRow, RunSink};

/// What is being maximized: a prompt, a backend, a seed, and the weights.
#[derive(Clone, Copy)]
pub struct Objective<'a> {
    pub evaluator: &'a dyn Evaluator,
    pub prompt: &'a Prompt,
    pub generation_seed: u64,
    pub weights: FitnessWeights,
}

impl<'a> Objective<'a> {
    pub fn new(
        evaluator: &'a dyn Evaluator,
        prompt: &'a Prompt,
        generation_seed: u64,
        weights: FitnessWeights,
    ) -> Self {
        Objective {
            evaluator,
            prompt,
            generation_seed,
            weights,
        }
    }

    /// One batched backend call, combined into fitness scores.
    pub fn score(&self, genotypes: &[TokenVector]) -> Result<Vec<FitnessScore>> {
        let req = EvalRequest::new(self.prompt, genotypes, self.generation_seed);
        let result = self.evaluator.evaluate_batch(&req)?;
        crate::evaluator::check_cardinality(genotypes.len(), &result)?;
        result
            .scores
            .into_iter()
            .map(|raw| {
                combine(raw, self.weights).map_err(|_| Error::Eval(EvalError::Schema("NaN score from backend".into())))
            })
            .collect()
    }
}

/// A scored genotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: TokenVector,
    pub fitness: Option<FitnessScore>,
}

impl Individual {
    pub fn unevaluated(genotype: TokenVector) -> Self {
        Individual {
            genotype,
            fitness: None,
        }
    }

    pub fn combined(&self) -> Option<f64> {
        self.fitness.map(|f| f.combined)
    }
}

/// Highest-fitness individual seen so far in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub individual: Individual,
    pub found_at_generation: u64,
    pub found_at_evaluation: u64,
}

impl BestSoFar {
    pub fn fitness(&self) -> FitnessScore {
        self.individual.fitness.expect("best-so-far is always evaluated")
    }
}

/// Numbers evaluations, tracks the best, and streams rows to a sink.
pub struct RunTracker<'a, S: RunSink> {
    objective: Objective<'a>,
    sink: S,
    evaluations: u64,
    best: Option<BestSoFar>,
}

impl<'a, S: RunSink> RunTracker<'a, S> {
    pub fn new(objective: Objective<'a>, sink: S) -> Self {
        RunTracker {
            objective,
            sink,
            evaluations: 0,
            best: None,
        }
    }

    pub(crate) fn restore(objective: Objective<'a>, sink: S, evaluations: u64, best: Option<BestSoFar>) -> Self {
        RunTracker {
            objective,
            sink,
            evaluations,
            best,
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn best(&self) -> Option<&BestSoFar> {
        self.best.as_ref()
    }

    pub fn into_parts(self) -> (Option<BestSoFar>, S) {
        (self.best, self.sink)
    }

    /// Scores a batch and logs one row per genotype. Nothing is logged if the
    /// backend fails.
    pub fn score(&mut self, genotypes: &[TokenVector], generation: u64) -> Result<Vec<FitnessScore>> {
        let scores = self.objective.score(genotypes)?;
        for (g, f) in genotypes.iter().zip(&scores) {
            let eval_index = self.evaluations;
            self.evaluations += 1;
            if self.best.as_ref().is_none_or(|b| f.combined > b.fitness().combined) {
                self.best = Some(BestSoFar {
                    individual: Individual {
                        genotype: g.clone(),
                        fitness: Some(*f),
                    },
                    found_at_generation: generation,
                    found_at_evaluation: eval_index,
                });
            }
            let row = EvalRow {
                eval_index,
                generation,
                genotype_digest: g.digest(),
                token_ids: g.ids().to_vec(),
                aesthetic: f.raw.aesthetic,
                clip: f.raw.clip,
                fitness: f.combined,
                best_so_far: self.best.as_ref().map_or(f.combined, |b| b.fitness().combined),
            };
            self.sink.evaluation(&row)?;
        }
        Ok(scores)
    }

    pub fn finish_generation(&mut self, generation: u64, fitness: &[f64]) -> Result<()> {
        let best_so_far = self.best.as_ref().map_or(f64::NAN, |b| b.fitness().combined);
        let row = GenerationRow::from_fitness(generation, self.evaluations, fitness, best_so_far);
        self.sink.generation(&row)?;
        Ok(())
    }
}
