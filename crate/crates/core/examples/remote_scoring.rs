//! Talking to a scoring service: metadata, tokenization, one scored batch,
//! and a short GA run.
//!
//! ```text
//! PROMPTEVO_ENDPOINT=http://127.0.0.1:8000 cargo run --example remote_scoring -- "a castle made of glass"
//! ```

use promptevo::evaluator::{EvalRequest, Evaluator, RemoteEvaluator, RetryPolicy, ScoreParams, ENDPOINT_ENV};
use promptevo::ga::{self, GaConfig};
use promptevo::genome::{genotype_from_prompt, TokenVector};
use promptevo::sink::JsonlSink;
use promptevo::tokenize::make_prompt;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Ok(endpoint) = std::env::var(ENDPOINT_ENV) else {
        eprintln!("set {ENDPOINT_ENV} to the scoring service URL");
        std::process::exit(2);
    };
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "a castle made of glass".into());

    let (client, meta) = RemoteEvaluator::connect(&endpoint, ScoreParams::default(), RetryPolicy::default())?;
    println!(
        "{}: vocab {} (pad {}, bos {}, eos {}), {} content tokens, batches of {}",
        meta.model_ids.generator,
        meta.vocab_size,
        meta.pad_id,
        meta.bos_id,
        meta.eos_id,
        meta.max_content_len,
        meta.max_batch
    );
    let vocab = meta.vocab_spec();
    let prompt = make_prompt(&client, "cli", "", &text)?;
    println!("{} tokens: {:?}", prompt.token_ids.len(), prompt.token_ids);

    let base = genotype_from_prompt(&prompt, &vocab)?;
    let batch = vec![base.clone(), TokenVector::padding(&vocab)];
    let out = client.evaluate_batch(&EvalRequest::new(&prompt, &batch, 0))?;
    println!("prompt as written: {:?}", out.scores[0]);
    println!("all padding:       {:?}", out.scores[1]);

    let cfg = GaConfig {
        population_size: 8,
        generations: 3,
        ..Default::default()
    };
    let log = std::env::temp_dir().join("promptevo-remote.jsonl");
    let run = ga::run(&cfg, &base, &vocab, &client, &prompt, JsonlSink::create(&log)?)?;
    println!(
        "GA best {:.4} after {} evaluations, log in {}",
        run.best.fitness().combined,
        run.evaluations,
        log.display()
    );
    Ok(())
}
