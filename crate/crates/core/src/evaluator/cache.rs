//! Per-run memoization of backend scores.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{check_cardinality, EvalError, EvalRequest, EvalResult, Evaluator};
use crate::fitness::RawScores;
use crate::genome::{TokenId, TokenVector};

/// SHA-256 of `(genotype ids, prompt_id, generation_seed)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey([u8; 32]);

impl CacheKey {
    pub fn new(ids: &[TokenId], prompt_id: &str, generation_seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update((ids.len() as u64).to_le_bytes());
        for id in ids {
            h.update(id.to_le_bytes());
        }
        h.update((prompt_id.len() as u64).to_le_bytes());
        h.update(prompt_id.as_bytes());
        h.update(generation_seed.to_le_bytes());
        CacheKey(h.finalize().into())
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 64 || !s.is_ascii() {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok()?;
        }
        Some(CacheKey(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    /// Batches forwarded to the wrapped evaluator.
    pub backend_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    scores: RawScores,
    image_ref: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SpillLine {
    key: String,
    aesthetic: f64,
    clip: f64,
    image_ref: Option<String>,
}

/// Memoizing wrapper around another [`Evaluator`].
///
/// Keys include the prompt and generation seed, so entries never leak across
/// seeds. Intended to live for one run.
#[derive(Debug)]
pub struct CachedEvaluator<E> {
    inner: E,
    entries: RwLock<HashMap<CacheKey, Entry>>,
    spill: Option<Mutex<BufWriter<File>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    backend_calls: AtomicU64,
}

pub fn cached<E: Evaluator>(evaluator: E) -> CachedEvaluator<E> {
    CachedEvaluator::new(evaluator)
}

impl<E: Evaluator> CachedEvaluator<E> {
    pub fn new(inner: E) -> Self {
        CachedEvaluator {
            inner,
            entries: RwLock::new(HashMap::new()),
            spill: None,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            backend_calls: AtomicU64::new(0),
        }
    }

    /// Loads entries previously spilled to `path` and appends new ones to it.
    pub fn with_spill(inner: E, path: &Path) -> std::io::Result<Self> {
        let mut cache = Self::new(inner);
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            let entries = cache.entries.get_mut().expect("fresh lock");
            for line in reader.lines() {
                let line = line?;
                // a torn trailing line from an interrupted run is skipped
                let Ok(l) = serde_json::from_str::<SpillLine>(&line) else {
                    continue;
                };
                if let Some(key) = CacheKey::from_hex(&l.key) {
                    entries.insert(
                        key,
                        Entry {
                            scores: RawScores::new(l.aesthetic, l.clip),
                            image_ref: l.image_ref,
                        },
                    );
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        cache.spill = Some(Mutex::new(BufWriter::new(file)));
        Ok(cache)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    fn spill(&self, new: &[(CacheKey, Entry)]) -> Result<(), EvalError> {
        let Some(spill) = &self.spill else { return Ok(()) };
        let mut w = spill.lock().expect("spill lock");
        let io = |e: std::io::Error| EvalError::Unavailable(format!("cache spill: {e}"));
        for (key, entry) in new {
            let line = SpillLine {
                key: key.to_hex(),
                aesthetic: entry.scores.aesthetic,
                clip: entry.scores.clip,
                image_ref: entry.image_ref.clone(),
            };
            serde_json::to_writer(&mut *w, &line).map_err(|e| EvalError::Unavailable(e.to_string()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

impl<E: Evaluator> Evaluator for CachedEvaluator<E> {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        if req.genotypes.is_empty() {
            return Err(EvalError::Malformed("empty genotype batch".into()));
        }
        let keys: Vec<CacheKey> = req
            .genotypes
            .iter()
            .map(|g| CacheKey::new(g.ids(), &req.prompt.prompt_id, req.generation_seed))
            .collect();

        let mut slots: Vec<Option<Entry>> = Vec::with_capacity(keys.len());
        // unique missing keys, in first-seen order, with their genotype
        let mut missing: Vec<(CacheKey, TokenVector)> = Vec::new();
        let mut missing_index: HashMap<CacheKey, usize> = HashMap::new();
        {
            let entries = self.entries.read().expect("cache lock");
            for (key, g) in keys.iter().zip(req.genotypes) {
                match entries.get(key) {
                    Some(e) => slots.push(Some(e.clone())),
                    None => {
                        slots.push(None);
                        missing_index.entry(*key).or_insert_with(|| {
                            missing.push((*key, g.clone()));
                            missing.len() - 1
                        });
                    }
                }
            }
        }

        let mut fresh: Vec<(CacheKey, Entry)> = Vec::new();
        if !missing.is_empty() {
            let genotypes: Vec<TokenVector> = missing.iter().map(|(_, g)| g.clone()).collect();
            let sub = EvalRequest::new(req.prompt, &genotypes, req.generation_seed);
            self.backend_calls.fetch_add(1, Ordering::Relaxed);
            let result = self.inner.evaluate_batch(&sub)?;
            check_cardinality(genotypes.len(), &result)?;
            fresh = missing
                .iter()
                .enumerate()
                .map(|(i, (key, _))| {
                    let entry = Entry {
                        scores: result.scores[i],
                        image_ref: result.image_ref(i).map(str::to_owned),
                    };
                    (*key, entry)
                })
                .collect();
            self.misses.fetch_add(fresh.len() as u64, Ordering::Relaxed);
            self.spill(&fresh)?;
            let mut entries = self.entries.write().expect("cache lock");
            for (key, entry) in &fresh {
                entries.insert(*key, entry.clone());
            }
        }

        let mut hits = 0u64;
        let mut first_use = vec![false; fresh.len()];
        let mut scores = Vec::with_capacity(keys.len());
        let mut refs = Vec::with_capacity(keys.len());
        for (key, slot) in keys.iter().zip(slots) {
            let entry = match slot {
                Some(e) => {
                    hits += 1;
                    e
                }
                None => {
                    let i = missing_index[key];
                    if first_use[i] {
                        hits += 1;
                    }
                    first_use[i] = true;
                    fresh[i].1.clone()
                }
            };
            scores.push(entry.scores);
            refs.push(entry.image_ref);
        }
        self.hits.fetch_add(hits, Ordering::Relaxed);
        let image_refs = refs.iter().any(Option::is_some).then_some(refs);
        Ok(EvalResult { scores, image_refs })
    }
}
