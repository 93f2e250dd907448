//! The variation operators on their own.

use promptevo::fitness::{combine, FitnessWeights, RawScores};
use promptevo::ga::{crossover_at, one_point_crossover, tournament_select, uniform_gene_mutation, Individual};
use promptevo::genome::{validate, TokenVector, VocabSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> promptevo::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vocab = VocabSpec::CLIP;

    let p1: TokenVector = vec![1, 2, 3, 4, 5, 6].into();
    let p2: TokenVector = vec![60, 50, 40, 30, 20, 10].into();
    let (a, b) = crossover_at(&p1, &p2, 2);
    println!("cut at 2:   {:?} {:?}", a.ids(), b.ids());
    let (a, b) = one_point_crossover(&p1, &p2, &mut rng)?;
    println!("random cut: {:?} {:?}", a.ids(), b.ids());

    let v = TokenVector::new(vec![320; vocab.content_len]);
    let m = uniform_gene_mutation(&v, 0.1, &vocab, &mut rng)?;
    let changed: Vec<_> = (0..m.len()).filter(|&i| m.ids()[i] != 320).collect();
    println!("mutation changed positions {changed:?}");
    assert!(validate(&m, &vocab).is_ok());

    let members: Vec<Individual> = [(4.0, 0.1), (8.0, 0.3), (6.0, 0.2), (2.0, 0.0)]
        .into_iter()
        .map(|(a, c)| Individual {
            genotype: vec![1, 2].into(),
            fitness: Some(combine(RawScores::new(a, c), FitnessWeights::default()).unwrap()),
        })
        .collect();
    let mut wins = [0; 4];
    for _ in 0..10_000 {
        wins[tournament_select(&members, 3, &mut rng)?] += 1;
    }
    println!("tournament wins out of 10000 (k = 3): {wins:?}");
    Ok(())
}
