use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::experiment::{Method, RunRecord};
use crate::error::{Error, Result};
use crate::fitness::{combine, delta_percent, FitnessWeights, RawScores};

/// Final-best scores of one method on one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScore {
    pub prompt_id: String,
    pub method: String,
    pub aesthetic: f64,
    pub clip: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Aesthetic,
    Clip,
    Fitness,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Aesthetic, Metric::Clip, Metric::Fitness];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Aesthetic => "aesthetic",
            Metric::Clip => "clip",
            Metric::Fitness => "fitness",
        }
    }

    fn of(&self, s: &FinalScore) -> f64 {
        match self {
            Metric::Aesthetic => s.aesthetic,
            Metric::Clip => s.clip,
            Metric::Fitness => s.fitness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub avg: f64,
    /// Sample standard deviation (n − 1); zero for a single prompt.
    pub std: f64,
    pub max: f64,
    /// Change of `avg` relative to the baseline's `avg`, in percent.
    pub delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub aesthetic: MetricStats,
    pub clip: MetricStats,
    pub fitness: MetricStats,
    /// Prompts on which this method had the strictly highest fitness.
    pub wins: usize,
}

impl MethodSummary {
    pub fn stats(&self, metric: Metric) -> &MetricStats {
        match metric {
            Metric::Aesthetic => &self.aesthetic,
            Metric::Clip => &self.clip,
            Metric::Fitness => &self.fitness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub baseline: String,
    pub prompt_count: usize,
    /// Baseline first, then built-in methods, then external ones by name.
    pub rows: Vec<MethodSummary>,
}

impl SummaryTable {
    pub fn row(&self, method: &str) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Final-best scores of completed records; failed units are left out.
pub fn final_scores(records: &[RunRecord]) -> Vec<FinalScore> {
    records
        .iter()
        .filter(|r| r.is_complete())
        .filter_map(|r| {
            let best = r.final_best.as_ref()?;
            Some(FinalScore {
                prompt_id: r.prompt_id.clone(),
                method: r.method.as_str().to_owned(),
                aesthetic: best.fitness.raw.aesthetic,
                clip: best.fitness.raw.clip,
                fitness: best.fitness.combined,
            })
        })
        .collect()
}

/// Reads externally produced per-prompt scores (`prompt_id,aesthetic,clip`)
/// and combines them with `weights` so they can compete in [`aggregate`].
pub fn read_external_scores<R: Read>(reader: R, method: &str, weights: FitnessWeights) -> Result<Vec<FinalScore>> {
    #[derive(Deserialize)]
    struct Row {
        prompt_id: String,
        aesthetic: f64,
        clip: f64,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        let f = combine(RawScores::new(row.aesthetic, row.clip), weights)?;
        out.push(FinalScore {
            prompt_id: row.prompt_id,
            method: method.to_owned(),
            aesthetic: row.aesthetic,
            clip: row.clip,
            fitness: f.combined,
        });
    }
    Ok(out)
}

fn mean_sorted(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stats(mut xs: Vec<f64>) -> (f64, f64, f64) {
    // fixed summation order keeps results independent of input order
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let avg = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (avg, std, *xs.last().expect("non-empty"))
}

fn method_rank(name: &str, baseline: &str) -> (u8, usize, String) {
    if name == baseline {
        return (0, 0, String::new());
    }
    match Method::ALL.iter().position(|m| m.as_str() == name) {
        Some(i) => (1, i, String::new()),
        None => (2, 0, name.to_owned()),
    }
}

/// Per-method mean, sample std and max of each metric over prompts, deltas
/// against `baseline`, and strict-win counts.
///
/// Several entries for one (prompt, method), e.g. from several seeds, are
/// averaged first.
pub fn aggregate(scores: &[FinalScore], baseline: &str) -> Result<SummaryTable> {
    let mut grouped: BTreeMap<(&str, &str), Vec<&FinalScore>> = BTreeMap::new();
    for s in scores {
        grouped
            .entry((s.method.as_str(), s.prompt_id.as_str()))
            .or_default()
            .push(s);
    }
    let per_prompt: BTreeMap<(&str, &str), FinalScore> = grouped
        .into_iter()
        .map(|((method, prompt_id), group)| {
            let avg = |m: Metric| mean_sorted(group.iter().map(|s| m.of(s)).collect());
            let merged = FinalScore {
                prompt_id: prompt_id.to_owned(),
                method: method.to_owned(),
                aesthetic: avg(Metric::Aesthetic),
                clip: avg(Metric::Clip),
                fitness: avg(Metric::Fitness),
            };
            ((method, prompt_id), merged)
        })
        .collect();

    let prompts: BTreeSet<&str> = per_prompt.keys().map(|(_, p)| *p).collect();
    let mut methods: Vec<&str> = per_prompt
        .keys()
        .map(|(m, _)| *m)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if methods.is_empty() {
        return Err(Error::Precondition("no scores to aggregate".into()));
    }
    methods.sort_by_key(|m| method_rank(m, baseline));

    if let Some(p) = prompts.iter().find(|p| !per_prompt.contains_key(&(baseline, **p))) {
        return Err(Error::MissingBaseline {
            method: baseline.to_owned(),
            prompt_id: (*p).to_owned(),
        });
    }
    for &p in &prompts {
        for &m in &methods {
            if !per_prompt.contains_key(&(m, p)) {
                return Err(Error::Precondition(format!(
                    "method `{m}` has no result for prompt {p}"
                )));
            }
        }
    }

    let mut wins: BTreeMap<&str, usize> = methods.iter().map(|m| (*m, 0)).collect();
    for &p in &prompts {
        let mut best: Option<(&str, f64)> = None;
        let mut tied = false;
        for &m in &methods {
            let f = per_prompt[&(m, p)].fitness;
            match best {
                Some((_, bf)) if f < bf => {}
                Some((_, bf)) if f == bf => tied = true,
                _ => {
                    best = Some((m, f));
                    tied = false;
                }
            }
        }
        if let (Some((m, _)), false) = (best, tied) {
            *wins.get_mut(m).expect("known method") += 1;
        }
    }

    let summarize = |m: &str, metric: Metric| -> (f64, f64, f64) {
        stats(prompts.iter().map(|p| metric.of(&per_prompt[&(m, *p)])).collect())
    };
    let base_avg: BTreeMap<Metric, f64> = Metric::ALL.iter().map(|&k| (k, summarize(baseline, k).0)).collect();

    let mut rows = Vec::with_capacity(methods.len());
    for &m in &methods {
        let mut per_metric = Vec::with_capacity(3);
        for metric in Metric::ALL {
            let (avg, std, max) = summarize(m, metric);
            per_metric.push(MetricStats {
                avg,
                std,
                max,
                delta_pct: delta_percent(avg, base_avg[&metric])?,
            });
        }
        rows.push(MethodSummary {
            method: m.to_owned(),
            aesthetic: per_metric[0],
            clip: per_metric[1],
            fitness: per_metric[2],
            wins: wins[m],
        });
    }

    Ok(SummaryTable {
        baseline: baseline.to_owned(),
        prompt_count: prompts.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(prompt: &str, method: &str, fitness: f64) -> FinalScore {
        FinalScore {
            prompt_id: prompt.into(),
            method: method.into(),
            aesthetic: 5.0 + fitness,
            clip: fitness / 2.0,
            fitness,
        }
    }

    #[test]
    fn wins_with_one_tie() {
        // (A, B) fitness per prompt: (0.5, 0.6), (0.7, 0.2), (0.4, 0.4)
        let scores = vec![
            fs("p1", "a", 0.5),
            fs("p1", "b", 0.6),
            fs("p2", "a", 0.7),
            fs("p2", "b", 0.2),
            fs("p3", "a", 0.4),
            fs("p3", "b", 0.4),
        ];
        let t = aggregate(&scores, "a").unwrap();
        assert_eq!(t.row("a").unwrap().wins, 1);
        assert_eq!(t.row("b").unwrap().wins, 1);
        assert_eq!(t.prompt_count, 3);
    }

    #[test]
    fn identical_to_baseline() {
        let scores = vec![
            fs("p1", "base", 0.5),
            fs("p1", "m", 0.5),
            fs("p2", "base", 0.3),
            fs("p2", "m", 0.3),
        ];
        let t = aggregate(&scores, "base").unwrap();
        for row in &t.rows {
            assert_eq!(row.wins, 0);
            for m in Metric::ALL {
                assert_eq!(row.stats(m).delta_pct, 0.0);
            }
        }
    }

    #[test]
    fn sample_std_and_max() {
        let scores = vec![fs("p1", "base", 0.2), fs("p2", "base", 0.4), fs("p3", "base", 0.6)];
        let t = aggregate(&scores, "base").unwrap();
        let f = t.rows[0].fitness;
        assert!((f.avg - 0.4).abs() < 1e-12);
        assert!((f.std - 0.2).abs() < 1e-12);
        assert_eq!(f.max, 0.6);
    }

    #[test]
    fn seeds_are_averaged() {
        let scores = vec![fs("p1", "base", 0.2), fs("p1", "m", 0.4), fs("p1", "m", 0.6)];
        let t = aggregate(&scores, "base").unwrap();
        assert!((t.row("m").unwrap().fitness.avg - 0.5).abs() < 1e-12);
    }

    #[test]
    fn missing_rows_rejected() {
        let scores = vec![fs("p1", "base", 0.2), fs("p2", "m", 0.4)];
        assert!(matches!(aggregate(&scores, "base"), Err(Error::MissingBaseline { .. })));
        let scores = vec![fs("p1", "base", 0.2), fs("p2", "base", 0.4), fs("p2", "m", 0.4)];
        assert!(matches!(aggregate(&scores, "base"), Err(Error::Precondition(_))));
        assert!(aggregate(&[], "base").is_err());
    }

    #[test]
    fn row_order() {
        let scores = vec![
            fs("p1", "zeta", 0.1),
            fs("p1", "random_search", 0.1),
            fs("p1", "baseline_no_opt", 0.2),
            fs("p1", "ga_mutated", 0.3),
            fs("p1", "alpha", 0.1),
        ];
        let t = aggregate(&scores, "baseline_no_opt").unwrap();
        let names: Vec<_> = t.rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(
            names,
            ["baseline_no_opt", "ga_mutated", "random_search", "alpha", "zeta"]
        );
    }

    #[test]
    fn external_scores_combine() {
        let csv = "prompt_id,aesthetic,clip\np1,7.30,0.3266\np2,10,1\n";
        let rows = read_external_scores(csv.as_bytes(), "promptist", FitnessWeights::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].fitness - 0.67798).abs() < 1e-12);
        assert_eq!(rows[1].fitness, 1.0);
        assert_eq!(rows[0].method, "promptist");
    }
}
