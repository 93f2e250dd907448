//! Score normalization, the weighted fitness, and percentage change.

use promptevo::fitness::{combine, cosine_similarity, delta_percent, FitnessWeights, RawScores};

fn main() -> promptevo::Result<()> {
    let weights = FitnessWeights::default();
    let baseline = combine(RawScores::new(5.78, 0.2672), weights)?;
    let optimized = combine(RawScores::new(7.30, 0.3266), weights)?;

    for (name, s) in [("baseline", baseline), ("optimized", optimized)] {
        println!(
            "{name:>9}: aesthetic {:.2} -> {:.4}, clip {:.4} -> {:.4}, fitness {:.5}",
            s.raw.aesthetic, s.norm_aesthetic, s.raw.clip, s.norm_clip, s.combined
        );
    }
    println!(
        "fitness change: {:+.2}%",
        delta_percent(optimized.combined, baseline.combined)?
    );

    let aesthetic_only = FitnessWeights::new(1.0, 0.0)?;
    println!(
        "aesthetic-only weights: {:.4}",
        combine(RawScores::new(7.30, -1.0), aesthetic_only)?.combined
    );

    let u = [1.0, 2.0, 2.0];
    let v = [2.0, 1.0, 2.0];
    println!("cos(u, v) = {:.4}", cosine_similarity(&u, &v)?);
    Ok(())
}
