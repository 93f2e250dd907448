//! Streaming destinations for evaluation and per-generation rows.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::genome::TokenId;

/// One fitness evaluation, as written to the evaluation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub eval_index: u64,
    pub generation: u64,
    pub genotype_digest: String,
    pub token_ids: Vec<TokenId>,
    pub aesthetic: f64,
    pub clip: f64,
    pub fitness: f64,
    pub best_so_far: f64,
}

/// Combined-fitness statistics of one generation (or one random-search batch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    pub generation: u64,
    /// Cumulative evaluation count at the end of this generation.
    pub evaluations: u64,
    pub best: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub best_so_far: f64,
}

impl GenerationRow {
    pub fn from_fitness(generation: u64, evaluations: u64, fitness: &[f64], best_so_far: f64) -> Self {
        let n = fitness.len().max(1) as f64;
        let best = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = fitness.iter().sum::<f64>() / n;
        let var = fitness.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
        GenerationRow {
            generation,
            evaluations,
            best,
            mean,
            std: var.sqrt(),
            best_so_far,
        }
    }
}

pub trait RunSink {
    fn evaluation(&mut self, row: &EvalRow) -> io::Result<()>;
    fn generation(&mut self, row: &GenerationRow) -> io::Result<()>;
}

impl<S: RunSink + ?Sized> RunSink for &mut S {
    fn evaluation(&mut self, row: &EvalRow) -> io::Result<()> {
        (**self).evaluation(row)
    }

    fn generation(&mut self, row: &GenerationRow) -> io::Result<()> {
        (**self).generation(row)
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl RunSink for NullSink {
    fn evaluation(&mut self, _: &EvalRow) -> io::Result<()> {
        Ok(())
    }

    fn generation(&mut self, _: &GenerationRow) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct MemorySink {
    pub evaluations: Vec<EvalRow>,
    pub generations: Vec<GenerationRow>,
}

impl RunSink for MemorySink {
    fn evaluation(&mut self, row: &EvalRow) -> io::Result<()> {
        self.evaluations.push(row.clone());
        Ok(())
    }

    fn generation(&mut self, row: &GenerationRow) -> io::Result<()> {
        self.generations.push(row.clone());
        Ok(())
    }
}

/// Writes evaluations as JSON lines and keeps generation rows in memory.
///
/// Each line is flushed so a crashed run leaves a readable prefix.
#[derive(Debug)]
pub struct JsonlSink<W: Write> {
    out: W,
    pub generations: Vec<GenerationRow>,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        JsonlSink {
            out,
            generations: Vec::new(),
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl JsonlSink<BufWriter<File>> {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write> RunSink for JsonlSink<W> {
    fn evaluation(&mut self, row: &EvalRow) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, row)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    fn generation(&mut self, row: &GenerationRow) -> io::Result<()> {
        self.generations.push(row.clone());
        Ok(())
    }
}

/// Reads an evaluation log written by [`JsonlSink`].
pub fn read_eval_log(path: &Path) -> io::Result<Vec<EvalRow>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(io::Error::other))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_stats() {
        let row = GenerationRow::from_fitness(3, 10, &[0.2, 0.4, 0.6], 0.7);
        assert!((row.mean - 0.4).abs() < 1e-12);
        assert!((row.std - (0.08f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(row.best, 0.6);
    }

    #[test]
    fn jsonl_has_required_keys() {
        let mut sink = JsonlSink::new(Vec::new());
        let row = EvalRow {
            eval_index: 0,
            generation: 0,
            genotype_digest: "abc".into(),
            token_ids: vec![1, 2],
            aesthetic: 5.0,
            clip: 0.25,
            fitness: 0.5,
            best_so_far: 0.5,
        };
        sink.evaluation(&row).unwrap();
        let text = String::from_utf8(sink.into_inner()).unwrap();
        let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        for key in [
            "eval_index",
            "genotype_digest",
            "token_ids",
            "aesthetic",
            "clip",
            "fitness",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(text.ends_with('\n'));
    }
}
