//! HTTP client for the scoring service.

use std::thread;
use std::time::Duration;

use ureq::Agent;

use super::{EvalError, EvalRequest, EvalResult, Evaluator};
use crate::fitness::RawScores;
use crate::genome::{TokenId, VocabSpec};
use crate::protocol::{
    BatchItem, ItemErrors, MetaResponse, ScoreRequest, ScoreResponse, TokenizeRequest, TokenizeResponse,
};
use crate::tokenize::Tokenizer;

pub const META_PATH: &str = "/v1/meta";
pub const TOKENIZE_PATH: &str = "/v1/tokenize";
pub const SCORE_PATH: &str = "/v1/score";

/// Environment variable overriding the configured service endpoint.
pub const ENDPOINT_ENV: &str = "PROMPTEVO_ENDPOINT";

pub type ServiceMeta = MetaResponse;

/// Generation settings sent with every score call.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ScoreParams {
    pub steps: u32,
    pub guidance_scale: f64,
    pub width: u32,
    pub height: u32,
    pub return_images: bool,
}

impl Default for ScoreParams {
    /// One denoising step, no guidance, 512×512.
    fn default() -> Self {
        ScoreParams {
            steps: 1,
            guidance_scale: 0.0,
            width: 512,
            height: 512,
            return_images: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    #[serde(with = "millis")]
    pub initial_backoff: Duration,
    #[serde(with = "millis")]
    pub max_backoff: Duration,
    #[serde(with = "millis")]
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(8),
            timeout: Duration::from_secs(600),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based), doubling each time.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt.saturating_sub(1));
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Client speaking the `/v1/*` scoring protocol.
#[derive(Debug, Clone)]
pub struct RemoteEvaluator {
    base_url: String,
    agent: Agent,
    params: ScoreParams,
    retry: RetryPolicy,
    max_batch: Option<usize>,
    vocab: Option<VocabSpec>,
}

impl RemoteEvaluator {
    pub fn new(base_url: &str, params: ScoreParams, retry: RetryPolicy) -> Self {
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(retry.timeout))
            .build()
            .into();
        RemoteEvaluator {
            base_url: base_url.trim_end_matches('/').to_owned(),
            agent,
            params,
            retry,
            max_batch: None,
            vocab: None,
        }
    }

    /// Builds a client and adopts the service's batch limit and vocabulary.
    pub fn connect(base_url: &str, params: ScoreParams, retry: RetryPolicy) -> Result<(Self, ServiceMeta), EvalError> {
        let mut client = Self::new(base_url, params, retry);
        let meta = client.meta()?;
        client.max_batch = Some(meta.max_batch.max(1));
        client.vocab = Some(meta.vocab_spec());
        Ok((client, meta))
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn with_max_batch(mut self, max_batch: usize) -> Self {
        self.max_batch = Some(max_batch.max(1));
        self
    }

    pub fn meta(&self) -> Result<ServiceMeta, EvalError> {
        self.with_retry(|| {
            let resp = self.agent.get(&self.url(META_PATH)).call().map_err(transport)?;
            read_json(resp)
        })
    }

    pub fn tokenize_text(&self, text: &str) -> Result<Vec<TokenId>, EvalError> {
        let body = TokenizeRequest { text: text.to_owned() };
        let resp: TokenizeResponse = self.with_retry(|| {
            let resp = self
                .agent
                .post(&self.url(TOKENIZE_PATH))
                .send_json(&body)
                .map_err(transport)?;
            read_json(resp)
        })?;
        Ok(resp.token_ids)
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base_url, path)
    }

    fn with_retry<T>(&self, mut f: impl FnMut() -> Result<T, EvalError>) -> Result<T, EvalError> {
        let attempts = self.retry.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match f() {
                Err(e) if e.is_retryable() && attempt < attempts => {
                    thread::sleep(self.retry.backoff(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn score_chunk(
        &self,
        req: &EvalRequest<'_>,
        offset: usize,
        len: usize,
    ) -> Result<Vec<(RawScores, Option<String>)>, EvalError> {
        let genotypes = &req.genotypes[offset..offset + len];
        let body = ScoreRequest {
            prompt: req.prompt.text.clone(),
            generation_seed: req.generation_seed,
            steps: self.params.steps,
            guidance_scale: self.params.guidance_scale,
            width: self.params.width,
            height: self.params.height,
            return_images: self.params.return_images,
            batch: genotypes
                .iter()
                .map(|g| BatchItem {
                    token_ids: g.ids().to_vec(),
                })
                .collect(),
        };
        let resp: ScoreResponse = self
            .with_retry(|| {
                let resp = self
                    .agent
                    .post(&self.url(SCORE_PATH))
                    .send_json(&body)
                    .map_err(transport)?;
                read_json(resp)
            })
            .map_err(|e| match e {
                EvalError::Item { index, message } => EvalError::Item {
                    index: index + offset,
                    message,
                },
                other => other,
            })?;

        if resp.results.len() != len {
            return Err(EvalError::Schema(format!(
                "sent {len} genotypes, service returned {} results",
                resp.results.len()
            )));
        }
        resp.results
            .into_iter()
            .enumerate()
            .map(|(i, item)| {
                let index = offset + i;
                if let Some(message) = item.error {
                    return Err(EvalError::Item { index, message });
                }
                let (Some(aesthetic), Some(clip)) = (item.aesthetic, item.clip_score) else {
                    return Err(EvalError::Schema(format!("result {index} is missing a score")));
                };
                if !aesthetic.is_finite() || !clip.is_finite() {
                    return Err(EvalError::Schema(format!("result {index} has a non-finite score")));
                }
                Ok((RawScores::new(aesthetic, clip).clamped(), item.image_ref))
            })
            .collect()
    }
}

fn transport(e: ureq::Error) -> EvalError {
    EvalError::Unavailable(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(mut resp: ureq::http::Response<ureq::Body>) -> Result<T, EvalError> {
    let status = resp.status().as_u16();
    let body = resp.body_mut().read_to_string().map_err(transport)?;
    match status {
        200..=299 => serde_json::from_str(&body).map_err(|e| EvalError::Schema(format!("{e}: {body}"))),
        500 => match serde_json::from_str::<ItemErrors>(&body) {
            Ok(errs) if !errs.errors.is_empty() => {
                let first = &errs.errors[0];
                Err(EvalError::Item {
                    index: first.index,
                    message: first.message.clone(),
                })
            }
            _ => Err(EvalError::Unavailable(format!("HTTP 500: {body}"))),
        },
        408 | 429 | 502..=504 => Err(EvalError::Unavailable(format!("HTTP {status}: {body}"))),
        _ => Err(EvalError::Malformed(format!("HTTP {status}: {body}"))),
    }
}

impl Evaluator for RemoteEvaluator {
    fn evaluate_batch(&self, req: &EvalRequest<'_>) -> Result<EvalResult, EvalError> {
        match &self.vocab {
            Some(vocab) => req.check(vocab)?,
            None if req.genotypes.is_empty() => return Err(EvalError::Malformed("empty genotype batch".into())),
            None => {}
        }
        let n = req.genotypes.len();
        let chunk = self.max_batch.unwrap_or(n);
        let mut scores = Vec::with_capacity(n);
        let mut refs = Vec::with_capacity(n);
        let mut offset = 0;
        while offset < n {
            let len = chunk.min(n - offset);
            for (s, r) in self.score_chunk(req, offset, len)? {
                scores.push(s);
                refs.push(r);
            }
            offset += len;
        }
        let image_refs = refs.iter().any(Option::is_some).then_some(refs);
        Ok(EvalResult { scores, image_refs })
    }
}

impl Tokenizer for RemoteEvaluator {
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>, EvalError> {
        self.tokenize_text(text)
    }
}
