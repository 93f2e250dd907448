use rand::Rng;

use super::{GaConfig, InitStrategy, Population};
use crate::error::{Error, Result};
use crate::genome::{validate, TokenId, TokenVector, VocabSpec};
use crate::objective::Individual;

/// Uniform draw from the mutation domain (every ID except bos/eos).
pub fn random_token<R: Rng + ?Sized>(vocab: &VocabSpec, rng: &mut R) -> TokenId {
    vocab.domain_token(rng.random_range(0..vocab.mutation_domain_size()))
}

pub fn random_genotype<R: Rng + ?Sized>(vocab: &VocabSpec, rng: &mut R) -> TokenVector {
    TokenVector::new((0..vocab.content_len).map(|_| random_token(vocab, rng)).collect())
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("gene mutation probability {p} is not in [0, 1]")))
    }
}

/// Resamples each position with probability `gene_prob`, in place.
/// Returns how many positions were resampled (a resample may redraw the
/// same token).
pub fn mutate_genes<R: Rng + ?Sized>(
    v: &mut TokenVector,
    gene_prob: f64,
    vocab: &VocabSpec,
    rng: &mut R,
) -> Result<usize> {
    check_prob(gene_prob)?;
    let mut resampled = 0;
    for id in v.ids_mut() {
        if rng.random_bool(gene_prob) {
            *id = random_token(vocab, rng);
            resampled += 1;
        }
    }
    Ok(resampled)
}

pub fn uniform_gene_mutation<R: Rng + ?Sized>(
    v: &TokenVector,
    gene_prob: f64,
    vocab: &VocabSpec,
    rng: &mut R,
) -> Result<TokenVector> {
    let mut out = v.clone();
    mutate_genes(&mut out, gene_prob, vocab, rng)?;
    Ok(out)
}

/// Swaps the suffixes starting at `cut`.
pub fn crossover_at(p1: &TokenVector, p2: &TokenVector, cut: usize) -> (TokenVector, TokenVector) {
    let (a, b) = (p1.ids(), p2.ids());
    let c1 = a[..cut].iter().chain(&b[cut..]).copied().collect();
    let c2 = b[..cut].iter().chain(&a[cut..]).copied().collect();
    (TokenVector::new(c1), TokenVector::new(c2))
}

/// Cut point uniform on `1..K`, so both children mix both parents.
pub fn one_point_crossover<R: Rng + ?Sized>(
    p1: &TokenVector,
    p2: &TokenVector,
    rng: &mut R,
) -> Result<(TokenVector, TokenVector)> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch(p1.len(), p2.len()));
    }
    if p1.len() < 2 {
        return Err(Error::Precondition("crossover needs at least two positions".into()));
    }
    let cut = rng.random_range(1..p1.len());
    Ok(crossover_at(p1, p2, cut))
}

/// Draws `k` members with replacement and returns the index of the fittest.
/// Among equally fit contestants the one drawn first wins.
pub fn tournament_select<R: Rng + ?Sized>(members: &[Individual], k: usize, rng: &mut R) -> Result<usize> {
    if members.is_empty() || k == 0 || k > members.len() {
        return Err(Error::Precondition(format!(
            "tournament of size {k} over {} members",
            members.len()
        )));
    }
    let mut winner: Option<(usize, f64)> = None;
    for _ in 0..k {
        let i = rng.random_range(0..members.len());
        let f = members[i].combined().ok_or(Error::Unevaluated(i))?;
        winner = match winner {
            Some((w, wf)) if wf >= f => Some((w, wf)),
            _ => Some((i, f)),
        };
    }
    Ok(winner.expect("k >= 1").0)
}

pub fn init_population<R: Rng + ?Sized>(
    cfg: &GaConfig,
    base: &TokenVector,
    vocab: &VocabSpec,
    rng: &mut R,
) -> Result<Population> {
    let members = match cfg.init_strategy {
        InitStrategy::Mutated => {
            validate(base, vocab).map_err(|v| Error::InvalidGenotype(format!("base genotype: {v}")))?;
            (0..cfg.population_size)
                .map(|_| uniform_gene_mutation(base, cfg.gene_mutation_prob, vocab, rng))
                .collect::<Result<Vec<_>>>()?
        }
        InitStrategy::Empty => vec![TokenVector::padding(vocab); cfg.population_size],
        InitStrategy::Random => (0..cfg.population_size).map(|_| random_genotype(vocab, rng)).collect(),
    };
    Ok(Population {
        generation: 0,
        members: members.into_iter().map(Individual::unevaluated).collect(),
    })
}
