//! Sentence scoring used to rank candidate sentences.
//!
//! The built-in scorer is the [`NgramModel`]. An external service (for
//! example a masked LM) can take its place through the `/score` HTTP
//! contract implemented by [`ExternalScorer`]; [`FallbackScorer`] chains an
//! external scorer with a local model for when the service is down.

use std::sync::Arc;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ngram::NgramModel;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(1000);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScorerError {
    #[error("scorer unavailable: {0}")]
    Unavailable(String),
    #[error("malformed scorer response: {0}")]
    MalformedResponse(String),
    #[error("empty scoring batch")]
    EmptyBatch,
}

/// Ranks token sequences; higher is better. Scores are only comparable
/// within one batch.
pub trait SentenceScorer: Send + Sync {
    /// How many preceding tokens can influence the score of a token, or
    /// `None` when the whole sentence matters.
    fn context_window(&self) -> Option<usize>;

    /// One score per sequence, in order. `complete` tells whether each
    /// sequence ends the sentence or is a prefix of it.
    fn score_batch(&self, batch: &[Vec<&str>], complete: bool) -> Result<Vec<f64>, ScorerError>;
}

impl SentenceScorer for NgramModel {
    fn context_window(&self) -> Option<usize> {
        Some(self.order() - 1)
    }

    fn score_batch(&self, batch: &[Vec<&str>], complete: bool) -> Result<Vec<f64>, ScorerError> {
        if batch.is_empty() {
            return Err(ScorerError::EmptyBatch);
        }
        Ok(batch
            .iter()
            .map(|tokens| {
                if complete {
                    self.score(tokens).logprob
                } else {
                    self.score_open(tokens).logprob
                }
            })
            .collect())
    }
}

impl<T: SentenceScorer + ?Sized> SentenceScorer for Arc<T> {
    fn context_window(&self) -> Option<usize> {
        (**self).context_window()
    }

    fn score_batch(&self, batch: &[Vec<&str>], complete: bool) -> Result<Vec<f64>, ScorerError> {
        (**self).score_batch(batch, complete)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub sentences: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
}

/// Client for `POST <base>/score` with body `{"sentences": [...]}` and
/// response `{"scores": [...]}`.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    endpoint: String,
    agent: ureq::Agent,
}

impl ExternalScorer {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:9000`; a URL
    /// already ending in `/score` is used as is.
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let trimmed = base_url.trim_end_matches('/');
        let endpoint = if trimmed.ends_with("/score") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/score")
        };
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        ExternalScorer { endpoint, agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Scores whole sentences given as text.
    pub fn score_sentences(&self, sentences: &[String]) -> Result<Vec<f64>, ScorerError> {
        if sentences.is_empty() {
            return Err(ScorerError::EmptyBatch);
        }
        let request = ScoreRequest {
            sentences: sentences.to_vec(),
        };
        let response = self
            .agent
            .post(&self.endpoint)
            .send_json(&request)
            .map_err(|e| ScorerError::Unavailable(e.to_string()))?;
        let body: ScoreResponse = response
            .into_json()
            .map_err(|e| ScorerError::MalformedResponse(e.to_string()))?;
        if body.scores.len() != sentences.len() {
            return Err(ScorerError::MalformedResponse(format!(
                "expected {} scores, got {}",
                sentences.len(),
                body.scores.len()
            )));
        }
        if body.scores.iter().any(|s| !s.is_finite()) {
            return Err(ScorerError::MalformedResponse("non-finite score".into()));
        }
        Ok(body.scores)
    }
}

impl SentenceScorer for ExternalScorer {
    fn context_window(&self) -> Option<usize> {
        None
    }

    fn score_batch(&self, batch: &[Vec<&str>], _complete: bool) -> Result<Vec<f64>, ScorerError> {
        let sentences: Vec<String> = batch.iter().map(|tokens| tokens.join(" ")).collect();
        self.score_sentences(&sentences)
    }
}

/// Tries `primary` first and answers from `fallback` when it fails.
pub struct FallbackScorer {
    primary: Box<dyn SentenceScorer>,
    fallback: Option<Arc<NgramModel>>,
}

impl FallbackScorer {
    pub fn new(primary: Box<dyn SentenceScorer>, fallback: Option<Arc<NgramModel>>) -> Self {
        FallbackScorer { primary, fallback }
    }
}

impl SentenceScorer for FallbackScorer {
    fn context_window(&self) -> Option<usize> {
        match (self.primary.context_window(), &self.fallback) {
            (Some(p), Some(lm)) => Some(p.max(lm.order() - 1)),
            (p, _) => p,
        }
    }

    fn score_batch(&self, batch: &[Vec<&str>], complete: bool) -> Result<Vec<f64>, ScorerError> {
        match self.primary.score_batch(batch, complete) {
            Ok(scores) => Ok(scores),
            Err(ScorerError::EmptyBatch) => Err(ScorerError::EmptyBatch),
            Err(err) => match &self.fallback {
                Some(lm) => {
                    warn!("external scorer failed, using local model: {err}");
                    lm.score_batch(batch, complete)
                }
                None => Err(err),
            },
        }
    }
}
