//! Group-relative advantages and the surrogate objective.
//!
//! Consumers bring their own trainer: these functions take rewards and
//! summed sequence log-probabilities and return plain numbers. Summation is
//! left-to-right over input order so results are reproducible.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrpoError {
    #[error("log-prob gap {delta} exceeds the overflow cap {cap}")]
    Overflow { delta: f64, cap: f64 },
    #[error("completion list must be non-empty")]
    EmptyInput,
}

/// Rewards of one completion group, `N >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardGroup<T = f64> {
    rewards: Vec<T>,
}

impl<T: Scalar> RewardGroup<T> {
    pub fn try_new(rewards: Vec<T>) -> Result<Self, GrpoError> {
        if rewards.is_empty() {
            return Err(GrpoError::EmptyInput);
        }
        Ok(Self { rewards })
    }

    pub fn rewards(&self) -> &[T] {
        &self.rewards
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Summed sequence log-probabilities of one completion under the trainable,
/// behaviour and reference policies. All values must be finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionStats<T = f64> {
    pub logp_policy: T,
    pub logp_old: T,
    pub logp_ref: T,
}

/// GRPO hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpoConfig<T = f64> {
    /// KL penalty coefficient, `>= 0`.
    pub beta: T,
    /// Lower bound on the normalizing standard deviation, `> 0`.
    pub epsilon_std: T,
    /// KL estimator overflow cap on `logp_ref - logp_policy`.
    pub kl_cap: T,
}

pub const DEFAULT_BETA: f64 = 0.04;
pub const DEFAULT_EPSILON_STD: f64 = 1e-8;
pub const DEFAULT_KL_CAP: f64 = 30.0;

impl<T: Scalar> Default for GrpoConfig<T> {
    fn default() -> Self {
        Self {
            beta: T::from_f64_lossy(DEFAULT_BETA),
            epsilon_std: T::from_f64_lossy(DEFAULT_EPSILON_STD),
            kl_cap: T::from_f64_lossy(DEFAULT_KL_CAP),
        }
    }
}

/// Group-normalized advantages `(R_i - mean) / max(std, epsilon_std)` with
/// the population standard deviation. A group of identical rewards yields
/// exact zeros rather than `0 / epsilon` noise.
pub fn group_advantages<T: Scalar>(group: &RewardGroup<T>, cfg: &GrpoConfig<T>) -> Vec<T> {
    let rewards = group.rewards();
    if rewards.windows(2).all(|w| w[0] == w[1]) {
        return vec![T::zero(); rewards.len()];
    }
    let n = T::from_usize(rewards.len()).expect("group size fits scalar");
    let mean = rewards.iter().fold(T::zero(), |acc, &r| acc + r) / n;
    let variance = rewards
        .iter()
        .fold(T::zero(), |acc, &r| acc + (r - mean) * (r - mean))
        / n;
    let denom = variance.sqrt().max(cfg.epsilon_std);
    rewards.iter().map(|&r| (r - mean) / denom).collect()
}

/// Nonnegative single-sample KL estimator at sequence granularity:
/// `exp(d) - d - 1` with `d = logp_ref - logp_policy`. Zero iff the two
/// log-probabilities coincide; errors when `d` exceeds the overflow cap.
pub fn kl_estimate<T: Scalar>(stats: &CompletionStats<T>, cfg: &GrpoConfig<T>) -> Result<T, GrpoError> {
    let delta = stats.logp_ref - stats.logp_policy;
    if delta > cfg.kl_cap {
        return Err(GrpoError::Overflow {
            delta: delta.to_f64().unwrap_or(f64::NAN),
            cap: cfg.kl_cap.to_f64().unwrap_or(f64::NAN),
        });
    }
    // exp_m1 keeps the small-|d| result at d^2/2 instead of cancelling to
    // rounding noise, so nonnegativity holds numerically as well.
    Ok(delta.exp_m1() - delta)
}

/// The surrogate objective
/// `(1/N) * sum_i [ exp(logp_policy_i - logp_old_i) * A_i - beta * KL_i ]`
/// over precomputed advantages, unclipped.
pub fn grpo_objective<T: Scalar>(
    completions: &[(CompletionStats<T>, T)],
    cfg: &GrpoConfig<T>,
) -> Result<T, GrpoError> {
    if completions.is_empty() {
        return Err(GrpoError::EmptyInput);
    }
    let mut sum = T::zero();
    for (stats, advantage) in completions {
        let ratio = (stats.logp_policy - stats.logp_old).exp();
        let kl = kl_estimate(stats, cfg)?;
        sum = sum + ratio * *advantage - cfg.beta * kl;
    }
    let n = T::from_usize(completions.len()).expect("count fits scalar");
    Ok(sum / n)
}
