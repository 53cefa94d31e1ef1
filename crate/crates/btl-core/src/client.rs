//! HTTP client for a stage-two analysis-model endpoint.
//!
//! Contract: one `POST {base_url}` per request with the JSON body
//! `{elements, instruction, history, lambda}`; the reply is
//! `{"ranked_ids": [...]}`. Auth is a bearer token read from the
//! environment variable named in the config. Transport failures and 5xx
//! replies are retried with exponential backoff.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotationRequest, Provenance, RankError, RankerOutcome, RoiRanker};
use crate::scalar::Scalar;

/// Endpoint settings; times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    pub base_url: String,
    #[serde(default = "default_token_env")]
    pub auth_token_env_var: String,
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff: f64,
}

fn default_token_env() -> String {
    "BTL_MODEL_TOKEN".to_string()
}
fn default_timeout() -> f64 {
    10.0
}
fn default_retries() -> u32 {
    2
}
fn default_backoff() -> f64 {
    0.5
}

impl ModelEndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            auth_token_env_var: default_token_env(),
            timeout: default_timeout(),
            max_retries: default_retries(),
            backoff: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<(), RankError> {
        if self.base_url.is_empty() {
            return Err(RankError::Config("base_url must be non-empty".into()));
        }
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return Err(RankError::Config("timeout must be positive".into()));
        }
        if self.backoff.is_nan() || self.backoff < 0.0 {
            return Err(RankError::Config("backoff must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RankReply {
    ranked_ids: Vec<i64>,
}

/// Blocking endpoint client; safe to share across annotation workers.
pub struct ModelClient {
    cfg: ModelEndpointConfig,
    http: reqwest::blocking::Client,
}

impl ModelClient {
    pub fn new(cfg: ModelEndpointConfig) -> Result<Self, RankError> {
        cfg.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout))
            .build()
            .map_err(|e| RankError::Config(e.to_string()))?;
        Ok(Self { cfg, http })
    }

    pub fn config(&self) -> &ModelEndpointConfig {
        &self.cfg
    }

    fn backoff_delay(&self, retry: u32) -> Duration {
        Duration::from_secs_f64(self.cfg.backoff * 2f64.powi(retry as i32))
    }
}

impl<T: Scalar> RoiRanker<T> for ModelClient {
    fn rank(&self, req: &AnnotationRequest<T>) -> Result<RankerOutcome, RankError> {
        let token = std::env::var(&self.cfg.auth_token_env_var).ok();
        let attempts = self.cfg.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff_delay(attempt - 1));
            }
            let mut request = self.http.post(&self.cfg.base_url).json(req);
            if let Some(token) = &token {
                request = request.bearer_auth(token);
            }
            let response = match request.send() {
                Ok(r) => r,
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            };
            let status = response.status();
            if status.is_success() {
                let text = match response.text() {
                    Ok(t) => t,
                    Err(e) => {
                        last_error = e.to_string();
                        continue;
                    }
                };
                let reply: RankReply = serde_json::from_str(&text)
                    .map_err(|e| RankError::InvalidReply(e.to_string()))?;
                return Ok(RankerOutcome {
                    ranked_ids: reply.ranked_ids,
                    raw_reply: Some(text),
                });
            }
            if status.is_server_error() {
                last_error = format!("HTTP {status}");
                continue;
            }
            // client errors are not retryable
            return Err(RankError::ModelUnavailable {
                attempts: attempt + 1,
                reason: format!("HTTP {status}"),
            });
        }
        Err(RankError::ModelUnavailable {
            attempts,
            reason: last_error,
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::Model
    }
}
