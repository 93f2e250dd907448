//! Generational GA over token vectors.
//!
//! Tournament selection, one-point crossover, uniform integer mutation and
//! elitism, with best-so-far tracking across every evaluation.

mod engine;
mod operators;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::FitnessWeights;

pub use crate::objective::{BestSoFar, Individual};
pub use engine::{resume, run, step_generation, Checkpoint, GaOutcome, RunError};
pub use operators::{
    crossover_at, init_population, mutate_genes, one_point_crossover, random_genotype, random_token, tournament_select,
    uniform_gene_mutation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// Mutated copies of the prompt's own genotype.
    Mutated,
    /// All-padding vectors.
    Empty,
    /// Uniformly random tokens.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Chance that a child goes through mutation at all.
    pub mutation_prob: f64,
    /// Per-position resample chance once a child is mutated.
    pub gene_mutation_prob: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub weights: FitnessWeights,
    pub seed: u64,
    /// Image-generation seed sent with every request; defaults to `seed`.
    pub generation_seed: Option<u64>,
    pub init_strategy: InitStrategy,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 64,
            generations: 100,
            crossover_prob: 0.7,
            mutation_prob: 0.9,
            gene_mutation_prob: 0.1,
            tournament_size: 3,
            elite_count: 1,
            weights: FitnessWeights::default(),
            seed: 0,
            generation_seed: None,
            init_strategy: InitStrategy::Mutated,
        }
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.population_size == 0 {
            return fail("population_size must be positive".into());
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament_size {} must be in 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        if self.elite_count >= self.population_size {
            return fail(format!(
                "elite_count {} must be below population_size {}",
                self.elite_count, self.population_size
            ));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("gene_mutation_prob", self.gene_mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name}={p} is not a probability"));
            }
        }
        Ok(())
    }

    pub fn effective_generation_seed(&self) -> u64 {
        self.generation_seed.unwrap_or(self.seed)
    }

    /// Upper bound on evaluator calls for one run: `N·(T+1)`.
    pub fn max_evaluations(&self) -> usize {
        self.population_size * (self.generations + 1)
    }
}

/// One generation of individuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub generation: u64,
    pub members: Vec<Individual>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_evaluated(&self) -> bool {
        self.members.iter().all(|m| m.fitness.is_some())
    }

    /// Highest combined fitness among evaluated members.
    pub fn max_fitness(&self) -> Option<f64> {
        self.members.iter().filter_map(Individual::combined).reduce(f64::max)
    }

    /// Indices of the `n` fittest members, ties going to the lower index.
    pub fn top_indices(&self, n: usize) -> Result<Vec<usize>> {
        let mut ranked: Vec<(usize, f64)> = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| m.combined().map(|f| (i, f)).ok_or(Error::Unevaluated(i)))
            .collect::<Result<_>>()?;
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked.into_iter().take(n).map(|(i, _)| i).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::{combine, RawScores};
    use crate::genome::TokenVector;

    fn scored(c: f64) -> Individual {
        let mut f = combine(RawScores::new(1.0, -1.0), FitnessWeights::default()).unwrap();
        f.combined = c;
        Individual {
            genotype: TokenVector::new(vec![3]),
            fitness: Some(f),
        }
    }

    #[test]
    fn defaults_are_table_values() {
        let c = GaConfig::default();
        assert_eq!((c.population_size, c.generations), (64, 100));
        assert_eq!(
            (c.crossover_prob, c.mutation_prob, c.gene_mutation_prob),
            (0.7, 0.9, 0.1)
        );
        assert_eq!((c.tournament_size, c.elite_count), (3, 1));
        assert_eq!((c.weights.aesthetic(), c.weights.clip()), (0.4, 0.6));
        assert_eq!(c.max_evaluations(), 6464);
        c.check().unwrap();
    }

    #[test]
    fn config_checks() {
        let bad = [
            GaConfig {
                tournament_size: 65,
                ..Default::default()
            },
            GaConfig {
                elite_count: 64,
                ..Default::default()
            },
            GaConfig {
                crossover_prob: 1.5,
                ..Default::default()
            },
            GaConfig {
                population_size: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.check().is_err(), "{c:?}");
        }
    }

    #[test]
    fn top_indices_breaks_ties_by_index() {
        let pop = Population {
            generation: 0,
            members: vec![scored(0.5), scored(0.9), scored(0.9), scored(0.1)],
        };
        assert_eq!(pop.top_indices(2).unwrap(), vec![1, 2]);
        assert_eq!(pop.top_indices(1).unwrap(), vec![1]);
        assert_eq!(pop.max_fitness(), Some(0.9));
    }
}
