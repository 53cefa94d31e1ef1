//! Tool configuration: built-in defaults, JSON config file, flag overrides
//! (highest precedence last).

use std::path::Path;

use serde::{Deserialize, Serialize};

use btl_core::client::ModelEndpointConfig;
use btl_core::grpo::GrpoConfig;
use btl_core::reward::RewardConfig;

/// Reward allocation scheme for matched ROIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    /// IoU threshold for blink matching.
    pub tau: f64,
    /// Maximum number of blink ROIs.
    pub lambda_max: usize,
    /// KL coefficient for advantage reporting.
    pub beta: f64,
    /// Click tolerance as a fraction of screen width.
    pub coordinate_tolerance: f64,
    pub allocation: Allocation,
    /// Fall back to the offline heuristic when the model endpoint fails.
    pub fallback_ranker: bool,
    /// Worker parallelism for batch annotation.
    pub concurrency: usize,
    pub endpoint: Option<ModelEndpointConfig>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            tau: btl_core::reward::DEFAULT_TAU,
            lambda_max: btl_core::format::DEFAULT_LAMBDA_MAX,
            beta: btl_core::grpo::DEFAULT_BETA,
            coordinate_tolerance: btl_core::reward::DEFAULT_COORD_TOLERANCE,
            allocation: Allocation::Linear,
            fallback_ranker: true,
            concurrency: 4,
            endpoint: None,
        }
    }
}

/// Flag-level overrides; `None` leaves the config value untouched.
#[derive(Debug, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub lambda: Option<usize>,
    pub beta: Option<f64>,
    pub endpoint_url: Option<String>,
    pub fallback: Option<bool>,
}

impl ToolConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("invalid config {}: {e}", path.display()))
            }
        }
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(tau) = overrides.tau {
            self.tau = tau;
        }
        if let Some(lambda) = overrides.lambda {
            self.lambda_max = lambda;
        }
        if let Some(beta) = overrides.beta {
            self.beta = beta;
        }
        if let Some(url) = &overrides.endpoint_url {
            match &mut self.endpoint {
                Some(endpoint) => endpoint.base_url = url.clone(),
                None => self.endpoint = Some(ModelEndpointConfig::new(url.clone())),
            }
        }
        if let Some(fallback) = overrides.fallback {
            self.fallback_ranker = fallback;
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(format!("tau must be in (0, 1], got {}", self.tau));
        }
        if self.lambda_max == 0 {
            return Err("lambda must be at least 1".into());
        }
        if !(self.beta >= 0.0) {
            return Err(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(self.coordinate_tolerance > 0.0 && self.coordinate_tolerance < 1.0) {
            return Err(format!(
                "coordinate_tolerance must be in (0, 1), got {}",
                self.coordinate_tolerance
            ));
        }
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        if let Some(endpoint) = &self.endpoint {
            endpoint.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn reward_config(&self) -> RewardConfig<f64> {
        RewardConfig {
            tau: self.tau,
            coord_tolerance: self.coordinate_tolerance,
            lambda_max: self.lambda_max,
        }
    }

    pub fn grpo_config(&self) -> GrpoConfig<f64> {
        GrpoConfig {
            beta: self.beta,
            ..GrpoConfig::default()
        }
    }
}
