//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use promptevo::evaluator::{
    cached, EvalError, EvalRequest, EvalResult, Evaluator, OracleEvaluator, OracleSpec, RemoteEvaluator, ScoreParams,
    META_PATH, SCORE_PATH,
};
use promptevo::fitness::{
    combine, cosine_similarity, delta_percent, norm_aesthetic, norm_clip, FitnessWeights, RawScores,
};
use promptevo::ga::{
    self, crossover_at, mutate_genes, random_genotype, tournament_select, GaConfig, Individual, InitStrategy,
};
use promptevo::genome::{genotype_from_prompt, Prompt, TokenVector, VocabSpec};
use promptevo::harness::{
    aggregate, random_search, read_dataset, render, tokenize_entries, FinalScore, MethodSummary, MetricStats,
    ReportFormat, SummaryTable,
};
use promptevo::objective::Objective;
use promptevo::protocol::{ScoreRequest, ScoreResponse};
use promptevo::sink::{EvalRow, GenerationRow, JsonlSink, MemorySink};
use promptevo::tokenize::HashTokenizer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Collects named sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn report(id: usize, title: &str, started: Instant, checks: Checks) -> bool {
    let ok = checks.failed.is_empty();
    let mut detail = checks.notes.join("; ");
    if !ok {
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        detail.push_str("failed: ");
        detail.push_str(&checks.failed.join("; "));
    }
    println!(
        "{} {id} {title} [{:.2}s]: {detail}",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    ok
}

struct ReferenceRow {
    method: String,
    stats: [MetricStats; 3],
    wins: usize,
}

fn reference_rows() -> Vec<ReferenceRow> {
    let mut rdr = csv::Reader::from_path(common::fixture_path("reference_results.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let f = |i: usize| r[i].parse::<f64>().unwrap();
            let stats = |o: usize| MetricStats {
                avg: f(o),
                std: f(o + 1),
                max: f(o + 2),
                delta_pct: f(o + 3),
            };
            ReferenceRow {
                method: r[0].to_owned(),
                stats: [stats(1), stats(5), stats(9)],
                wins: r[13].parse().unwrap(),
            }
        })
        .collect()
}

const METRIC_NAMES: [&str; 3] = ["aesthetic", "clip", "fitness"];

fn delta_reproduction() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let rows = reference_rows();
    let base = &rows[0];
    let mut within = 0;
    let mut total = 0;
    for row in &rows[1..] {
        for (m, name) in METRIC_NAMES.iter().enumerate() {
            let got = delta_percent(row.stats[m].avg, base.stats[m].avg).unwrap();
            let want = row.stats[m].delta_pct;
            total += 1;
            if (got - want).abs() <= 0.01 {
                within += 1;
            } else {
                c.check(false, format!("{} {name}: {got:.4} vs reference {want:.2}", row.method));
            }
        }
    }
    c.note(format!("{within}/{total} reference deltas reproduced within ±0.01"));
    let elapsed = started.elapsed();
    c.check(elapsed < Duration::from_secs(1), format!("runtime {elapsed:?} ≥ 1 s"));
    report(1, "delta reproduction", started, c)
}

struct OracleCase {
    vocab: VocabSpec,
    evaluator: OracleEvaluator,
    prompt: Prompt,
    base: TokenVector,
}

fn oracle_cases(n: usize) -> Vec<OracleCase> {
    let vocab = VocabSpec::fixture();
    let dataset = read_dataset(&common::fixture_path("prompts.csv")).unwrap();
    let prompts = tokenize_entries(&dataset[..n], &HashTokenizer::new(vocab)).unwrap();
    prompts
        .into_iter()
        .enumerate()
        .map(|(seed, prompt)| {
            let landscape = OracleSpec::derived(&vocab, 50, seed as u64, &prompt.prompt_id).unwrap();
            let evaluator = OracleEvaluator::new(vocab, landscape).unwrap();
            let base = genotype_from_prompt(&prompt, &vocab).unwrap();
            OracleCase {
                vocab,
                evaluator,
                prompt,
                base,
            }
        })
        .collect()
}

struct PairedRun {
    ga_best: f64,
    rs_best: f64,
    ga_generations: Vec<GenerationRow>,
    ga_evals: Vec<EvalRow>,
    rs_evals: Vec<EvalRow>,
}

fn paired_runs() -> (Vec<PairedRun>, Duration) {
    let started = Instant::now();
    let runs = oracle_cases(20)
        .iter()
        .enumerate()
        .map(|(seed, case)| {
            let seed = seed as u64;
            let cfg = GaConfig {
                seed,
                init_strategy: InitStrategy::Mutated,
                ..Default::default()
            };
            let mut ga_sink = MemorySink::default();
            let ga = ga::run(
                &cfg,
                &case.base,
                &case.vocab,
                &case.evaluator,
                &case.prompt,
                &mut ga_sink,
            )
            .unwrap();

            let mut rs_sink = MemorySink::default();
            let objective = Objective::new(&case.evaluator, &case.prompt, seed, cfg.weights);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rs = random_search(&case.base, &case.vocab, 6400, 64, objective, &mut rng, &mut rs_sink).unwrap();
            PairedRun {
                ga_best: ga.best.fitness().combined,
                rs_best: rs.best.fitness().combined,
                ga_generations: ga_sink.generations,
                ga_evals: ga_sink.evaluations,
                rs_evals: rs_sink.evaluations,
            }
        })
        .collect();
    (runs, started.elapsed())
}

fn oracle_superiority(runs: &[PairedRun], elapsed: Duration) -> bool {
    let started = Instant::now() - elapsed;
    let mut c = Checks::default();
    let wins = runs.iter().filter(|r| r.ga_best > r.rs_best).count();
    let mean = |f: fn(&PairedRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    c.note(format!(
        "GA beat random search in {wins}/{} seeds (mean best {:.4} vs {:.4})",
        runs.len(),
        mean(|r| r.ga_best),
        mean(|r| r.rs_best)
    ));
    c.check(wins >= 19, format!("only {wins}/20 seeds"));
    c.check(elapsed < Duration::from_secs(60), format!("runtime {elapsed:?} ≥ 60 s"));
    report(2, "oracle superiority", started, c)
}

fn monotonicity(runs: &[PairedRun]) -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut traces: Vec<(String, Vec<GenerationRow>, Vec<EvalRow>)> = runs
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            [
                (format!("ga_mutated s{i}"), r.ga_generations.clone(), r.ga_evals.clone()),
                (format!("random_search s{i}"), Vec::new(), r.rs_evals.clone()),
            ]
        })
        .collect();
    for (seed, case) in oracle_cases(5).iter().enumerate() {
        for init in [InitStrategy::Empty, InitStrategy::Random] {
            let cfg = GaConfig {
                seed: seed as u64,
                init_strategy: init,
                ..Default::default()
            };
            let mut sink = MemorySink::default();
            ga::run(&cfg, &case.base, &case.vocab, &case.evaluator, &case.prompt, &mut sink).unwrap();
            traces.push((format!("{init:?} s{seed}"), sink.generations, sink.evaluations));
        }
    }
    let mut violations = 0;
    let mut generations = 0;
    for (name, gens, evals) in &traces {
        generations += gens.len();
        for w in gens.windows(2) {
            if w[1].best < w[0].best {
                violations += 1;
                c.check(
                    false,
                    format!(
                        "{name}: generation {} max {} < {}",
                        w[1].generation, w[1].best, w[0].best
                    ),
                );
            }
        }
        for w in evals.windows(2) {
            if w[1].best_so_far < w[0].best_so_far {
                violations += 1;
                c.check(
                    false,
                    format!("{name}: best-so-far fell at evaluation {}", w[1].eval_index),
                );
            }
        }
    }
    c.note(format!(
        "{violations} violations over {} runs, {generations} GA generations",
        traces.len()
    ));
    report(3, "elitism monotonicity", started, c)
}

fn jsonl_ga(cfg: &GaConfig, case: &OracleCase) -> Vec<u8> {
    let mut sink = JsonlSink::new(Vec::new());
    ga::run(cfg, &case.base, &case.vocab, &case.evaluator, &case.prompt, &mut sink).unwrap();
    sink.into_inner()
}

fn jsonl_rs(seed: u64, case: &OracleCase) -> Vec<u8> {
    let mut sink = JsonlSink::new(Vec::new());
    let objective = Objective::new(&case.evaluator, &case.prompt, seed, FitnessWeights::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_search(&case.base, &case.vocab, 6400, 64, objective, &mut rng, &mut sink).unwrap();
    sink.into_inner()
}

fn determinism() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let cases = oracle_cases(3);
    let mut compared = 0;
    let mut bytes = 0;
    for (seed, case) in cases.iter().enumerate() {
        for init in [InitStrategy::Mutated, InitStrategy::Empty, InitStrategy::Random] {
            let cfg = GaConfig {
                seed: seed as u64,
                init_strategy: init,
                ..Default::default()
            };
            let (a, b) = (jsonl_ga(&cfg, case), jsonl_ga(&cfg, case));
            c.check(!a.is_empty() && a == b, format!("GA {init:?} seed {seed} logs differ"));
            compared += 1;
            bytes += a.len();
        }
        let (a, b) = (jsonl_rs(seed as u64, case), jsonl_rs(seed as u64, case));
        c.check(
            !a.is_empty() && a == b,
            format!("random search seed {seed} logs differ"),
        );
        compared += 1;
        bytes += a.len();
    }
    c.note(format!(
        "{compared} replayed runs, {bytes} log bytes, zero diff required"
    ));
    report(4, "determinism replay", started, c)
}

fn member(fitness: f64) -> Individual {
    Individual {
        genotype: TokenVector::new(vec![1, 2]),
        fitness: Some(
            combine(RawScores::new(1.0, -1.0), FitnessWeights::default())
                .map(|mut f| {
                    f.combined = fitness;
                    f
                })
                .unwrap(),
        ),
    }
}

fn operator_properties() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut cuts = 0;
    for k in 2..=8usize {
        for _ in 0..50 {
            let p1 = TokenVector::new((0..k).map(|_| rng.random_range(0..5)).collect());
            let p2 = TokenVector::new((0..k).map(|_| rng.random_range(0..5)).collect());
            for cut in 1..k {
                cuts += 1;
                let (c1, c2) = crossover_at(&p1, &p2, cut);
                let ok = (0..k).all(|i| {
                    let mut got = [c1.ids()[i], c2.ids()[i]];
                    let mut want = [p1.ids()[i], p2.ids()[i]];
                    got.sort_unstable();
                    want.sort_unstable();
                    got == want
                });
                c.check(ok, format!("crossover K={k} cut={cut} lost a token"));
            }
        }
    }
    c.note(format!("crossover: {cuts} (parents, cut) cases for K=2..8"));

    let vocab = VocabSpec::CLIP;
    let mut v = random_genotype(&vocab, &mut rng);
    let mut resampled = 0usize;
    let rounds = 1400;
    for _ in 0..rounds {
        resampled += mutate_genes(&mut v, 0.1, &vocab, &mut rng).unwrap();
    }
    let genes = (rounds * vocab.content_len) as f64;
    let freq = resampled as f64 / genes;
    let tol = 3.0 * (0.1f64 * 0.9 / genes).sqrt();
    c.note(format!("mutation: rate {freq:.5} over {genes} genes (0.1 ± {tol:.5})"));
    c.check(genes >= 1e5 && (freq - 0.1).abs() <= tol, "mutation rate outside 3σ");

    let members: Vec<Individual> = [0.2, 0.6, 0.9, 0.4].into_iter().map(member).collect();
    let draws = 100_000;
    let best = (0..draws)
        .filter(|_| tournament_select(&members, 3, &mut rng).unwrap() == 2)
        .count();
    let p = 1.0 - 0.75f64.powi(3);
    let freq = best as f64 / draws as f64;
    let tol = 3.0 * (p * (1.0 - p) / draws as f64).sqrt();
    c.note(format!(
        "tournament: best won {freq:.5} of {draws} draws ({p:.5} ± {tol:.5})"
    ));
    c.check((freq - p).abs() <= tol, "tournament frequency outside 3σ");
    report(5, "operator properties", started, c)
}

fn fitness_math() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w = FitnessWeights::default();
    let samples = 20_000;

    let mut bounds = true;
    let mut monotone = true;
    let mut boundary = true;
    let mut scale = true;
    let only_aes = FitnessWeights::new(1.0, 0.0).unwrap();
    let only_clip = FitnessWeights::new(0.0, 1.0).unwrap();
    for _ in 0..samples {
        let a = rng.random_range(-5.0..15.0);
        let s = rng.random_range(-2.0..2.0);
        let (na, nc) = (norm_aesthetic(a).unwrap(), norm_clip(s).unwrap());
        bounds &= (0.0..=1.0).contains(&na) && (0.0..=1.0).contains(&nc);

        let base = combine(RawScores::new(a, s), w).unwrap().combined;
        let da = rng.random_range(0.0..3.0);
        let ds = rng.random_range(0.0..0.5);
        monotone &= combine(RawScores::new(a + da, s), w).unwrap().combined >= base;
        monotone &= combine(RawScores::new(a, s + ds), w).unwrap().combined >= base;

        let s2 = rng.random_range(-1.0..1.0);
        let a2 = rng.random_range(1.0..10.0);
        boundary &= combine(RawScores::new(a, s), only_aes).unwrap().combined
            == combine(RawScores::new(a, s2), only_aes).unwrap().combined;
        boundary &= combine(RawScores::new(a, s), only_clip).unwrap().combined
            == combine(RawScores::new(a2, s), only_clip).unwrap().combined;

        let u: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = rng.random_range(1e-3..1e3);
        let scaled: Vec<f64> = u.iter().map(|x| x * k).collect();
        let (c1, c2) = (
            cosine_similarity(&u, &v).unwrap(),
            cosine_similarity(&scaled, &v).unwrap(),
        );
        scale &= (c1 - c2).abs() <= 1e-9 * c1.abs().max(f64::MIN_POSITIVE);
    }
    bounds &= norm_aesthetic(1.0).unwrap() == 0.0 && norm_aesthetic(10.0).unwrap() == 1.0;
    bounds &= norm_clip(-1.0).unwrap() == 0.0 && norm_clip(1.0).unwrap() == 1.0;
    c.check(bounds, "normalized score outside [0, 1]");
    c.check(monotone, "combine not monotone");
    c.check(boundary, "boundary weights depend on the zero-weighted score");
    c.check(scale, "cosine not scale invariant");
    c.note(format!(
        "{samples} sampled cases for bounds, monotonicity, boundary weights, cosine scale"
    ));

    let got = combine(RawScores::new(7.30, 0.3266), w).unwrap().combined;
    let want = 0.678;
    c.note(format!("combine(7.30, 0.3266, (0.4, 0.6)) = {got:.12}"));
    c.check(
        (got - want).abs() <= 1e-12,
        format!("combine example {got:.12} ≠ {want} ± 1e-12"),
    );
    report(6, "fitness math", started, c)
}

/// Counts how often the backend scored each genotype.
struct Counting<E> {
    inner: E,
    seen: Mutex<HashMap<Vec<u32>, usize>>,
}

impl<E: Evaluator> Evaluator for Counting<E> {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        let mut seen = self.seen.lock().unwrap();
        for g in req.genotypes {
            *seen.entry(g.ids().to_vec()).or_default() += 1;
        }
        drop(seen);
        self.inner.evaluate_batch(req)
    }
}

fn cache_soundness() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut total = 0;
    let mut unique = 0;
    for (seed, case) in oracle_cases(3).into_iter().enumerate() {
        let cfg = GaConfig {
            seed: seed as u64,
            ..Default::default()
        };
        let plain = jsonl_ga(&cfg, &case);

        let counting = Counting {
            inner: case.evaluator.clone(),
            seen: Mutex::new(HashMap::new()),
        };
        let cache = cached(&counting);
        let mut sink = JsonlSink::new(Vec::new());
        let out = ga::run(&cfg, &case.base, &case.vocab, &cache, &case.prompt, &mut sink).unwrap();
        let with_cache = sink.into_inner();

        let seen = counting.seen.lock().unwrap();
        let repeated = seen.values().filter(|&&n| n > 1).count();
        c.check(
            repeated == 0,
            format!("seed {seed}: {repeated} genotypes scored more than once"),
        );
        c.check(
            plain == with_cache,
            format!("seed {seed}: cached trace differs from uncached"),
        );
        total += out.evaluations;
        unique += seen.len();
    }

    let vocab = VocabSpec::fixture();
    let case = &oracle_cases(1)[0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let distinct: Vec<TokenVector> = (0..54).map(|_| random_genotype(&vocab, &mut rng)).collect();
    let mut batch = distinct.clone();
    batch.extend(distinct[..10].iter().cloned());
    batch.shuffle(&mut rng);
    let counting = Counting {
        inner: case.evaluator.clone(),
        seen: Mutex::new(HashMap::new()),
    };
    let cache = cached(&counting);
    cache
        .evaluate_batch(&EvalRequest::new(&case.prompt, &batch, 0))
        .unwrap();
    let scored: usize = counting.seen.lock().unwrap().values().sum();
    c.check(
        scored <= 54,
        format!("64-genotype batch with 10 duplicates scored {scored}"),
    );
    c.note(format!(
        "{total} evaluations served by {unique} backend scorings; 64-batch with 10 duplicates scored {scored}"
    ));
    report(7, "cache soundness", started, c)
}

fn reference_summary() -> SummaryTable {
    let rows = reference_rows();
    SummaryTable {
        baseline: rows[0].method.clone(),
        prompt_count: 36,
        rows: rows
            .into_iter()
            .map(|r| MethodSummary {
                method: r.method,
                aesthetic: r.stats[0],
                clip: r.stats[1],
                fitness: r.stats[2],
                wins: r.wins,
            })
            .collect(),
    }
}

fn bold_cells(markdown: &str) -> BTreeSet<(String, usize)> {
    let mut out = BTreeSet::new();
    for line in markdown.lines().skip(2) {
        let cells: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        let method = cells[0].trim_matches('*').to_owned();
        for (i, cell) in cells.iter().enumerate() {
            if cell.starts_with("**") && cell.ends_with("**") {
                out.insert((method.clone(), i));
            }
        }
    }
    out
}

fn aggregation() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let methods = [
        "baseline_no_opt",
        "ga_mutated",
        "ga_empty",
        "ga_random",
        "random_search",
        "promptist",
    ];
    let prompts = 36;
    let mut scores = Vec::new();
    let mut used = BTreeSet::new();
    for p in 0..prompts {
        for m in methods {
            let fitness: f64 = loop {
                let f = (rng.random_range(0.0..1.0f64) * 1e6).round() / 1e6;
                if used.insert(f.to_bits()) {
                    break f;
                }
            };
            scores.push(FinalScore {
                prompt_id: format!("p{p:03}"),
                method: m.into(),
                aesthetic: rng.random_range(1.0..10.0),
                clip: rng.random_range(-1.0..1.0),
                fitness,
            });
        }
    }
    let table = aggregate(&scores, "baseline_no_opt").unwrap();
    let wins: usize = table.rows.iter().map(|r| r.wins).sum();
    c.check(wins == prompts, format!("wins sum to {wins}, expected {prompts}"));

    let shuffles = 25;
    for i in 0..shuffles {
        let mut shuffled = scores.clone();
        shuffled.shuffle(&mut rng);
        let t = aggregate(&shuffled, "baseline_no_opt").unwrap();
        c.check(t == table, format!("shuffle {i} changed the table"));
    }
    c.note(format!(
        "wins sum {wins}/{prompts}; {shuffles} shuffled orders give identical tables"
    ));

    let fixture = reference_summary();
    let md = render(&fixture, ReportFormat::Markdown).unwrap();
    // column indices: 0 method, 1-4 aesthetic, 5-8 clip, 9-12 fitness, 13 wins
    let expected: BTreeSet<(String, usize)> = [
        ("ga_mutated", 0),
        ("ga_empty", 1),
        ("ga_empty", 4),
        ("ga_mutated", 5),
        ("ga_mutated", 8),
        ("ga_mutated", 9),
        ("ga_mutated", 12),
    ]
    .into_iter()
    .map(|(m, i)| (m.to_owned(), i))
    .collect();
    let got = bold_cells(&md);
    c.check(got == expected, format!("bold cells {got:?}"));
    let text = render(&fixture, ReportFormat::Text).unwrap();
    c.check(
        text.lines()
            .any(|l| l.starts_with("ga_mutated*") && l.contains("0.6840*") && l.contains("23.93*")),
        "text report marks",
    );
    c.note(format!("reference table renders {} bold cells", got.len()));
    report(8, "aggregation and report", started, c)
}

fn protocol_conformance() -> bool {
    let started = Instant::now();
    let mut c = Checks::default();
    let results = |n: Option<usize>| {
        move |req: &common::Recorded, _: usize| match req.path.as_str() {
            META_PATH => (200, common::fixture("protocol/meta.json")),
            SCORE_PATH => {
                let mut v = common::fixture_json("protocol/score_response.json");
                if let Some(n) = n {
                    let items = v["results"].as_array_mut().unwrap();
                    let first = items[0].clone();
                    items.resize(n, first);
                }
                (200, v.to_string())
            }
            _ => (404, "{}".into()),
        }
    };

    let request: ScoreRequest = serde_json::from_str(&common::fixture("protocol/score_request.json")).unwrap();
    let batch: Vec<TokenVector> = request
        .batch
        .iter()
        .map(|b| TokenVector::new(b.token_ids.clone()))
        .collect();
    let prompt = Prompt {
        prompt_id: "p0".into(),
        text: request.prompt.clone(),
        category: String::new(),
        token_ids: Vec::new(),
    };
    let expected: ScoreResponse = serde_json::from_str(&common::fixture("protocol/score_response.json")).unwrap();

    let stub = common::Stub::start(results(None));
    let (client, _) = RemoteEvaluator::connect(&stub.url, ScoreParams::default(), common::fast_retry(1)).unwrap();
    match client.evaluate_batch(&EvalRequest::new(&prompt, &batch, request.generation_seed)) {
        Ok(out) => {
            let sent = stub.requests_to(SCORE_PATH);
            c.check(
                sent.len() == 1 && sent[0].json() == common::fixture_json("protocol/score_request.json"),
                "request body differs from fixture",
            );
            let want: Vec<RawScores> = expected
                .results
                .iter()
                .map(|r| RawScores::new(r.aesthetic.unwrap(), r.clip_score.unwrap()))
                .collect();
            c.check(out.scores == want, "scores differ from fixture");
            let refs: Vec<Option<String>> = expected.results.iter().map(|r| r.image_ref.clone()).collect();
            c.check(out.image_refs == Some(refs), "image refs differ from fixture");
        }
        Err(e) => c.check(false, format!("round trip failed: {e}")),
    }
    drop(stub);

    for n in [2, 4, 0] {
        let stub = common::Stub::start(results(Some(n)));
        let (client, _) = RemoteEvaluator::connect(&stub.url, ScoreParams::default(), common::fast_retry(3)).unwrap();
        let err = client.evaluate_batch(&EvalRequest::new(&prompt, &batch, 0));
        c.check(
            matches!(err, Err(EvalError::Schema(_))),
            format!("{n} results for 3 genotypes gave {err:?}"),
        );
    }
    c.note("fixture round trip exact; 0, 2 and 4 results for 3 genotypes rejected as schema errors");
    report(9, "protocol conformance", started, c)
}

fn main() -> ExitCode {
    let (runs, paired_elapsed) = paired_runs();
    let results = [
        delta_reproduction(),
        oracle_superiority(&runs, paired_elapsed),
        monotonicity(&runs),
        determinism(),
        operator_properties(),
        fitness_math(),
        cache_soundness(),
        aggregation(),
        protocol_conformance(),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
