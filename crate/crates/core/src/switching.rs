//! The switch distribution: a mixture over sequences of experts.
//!
//! [`SwitchEnsemble`] maintains one weight per expert and processes each
//! symbol in `O(N)` time. After step `t` the weights satisfy
//!
//! ```text
//! w_j = Σ_{i<t} w(i_{<t} j) · Π_k ρ_{i_k}(x_k | x_{<k})
//! ```
//!
//! so their sum is the mixture probability of the data seen so far.
//! Weights are held as log₂ values; they decay geometrically with the
//! sequence length.

use crate::logmath::{log2_add, log2_sum};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SwitchError {
    #[error("a switch ensemble needs at least two models, got {0}")]
    TooFewModels(usize),
    #[error("expected {expected} conditional probabilities, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("conditional probability {value} for model {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("model index {index} out of range for {models} models")]
    IndexOutOfRange { index: usize, models: usize },
    #[error("switch rate {rate} at step {step} is outside [0, 1]")]
    RateOutOfRange { step: u64, rate: f64 },
}

/// Switch rate as a function of the time index `t ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchSchedule {
    /// α_t = 1/t.
    Decaying,
    /// α_t = α for every t (fixed share).
    Fixed(f64),
}

impl SwitchSchedule {
    #[inline]
    pub fn rate(&self, t: u64) -> f64 {
        match *self {
            SwitchSchedule::Decaying => 1.0 / t.max(1) as f64,
            SwitchSchedule::Fixed(alpha) => alpha,
        }
    }

    fn checked_rate(&self, t: u64) -> Result<f64, SwitchError> {
        let rate = self.rate(t);
        if (0.0..=1.0).contains(&rate) {
            Ok(rate)
        } else {
            Err(SwitchError::RateOutOfRange { step: t, rate })
        }
    }
}

#[derive(Debug, Clone)]
pub struct SwitchEnsemble {
    log_weights: Vec<f64>,
    /// Index of the next symbol, starting at 1.
    step: u64,
    schedule: SwitchSchedule,
    total_log_prob: f64,
    // scratch
    joint: Vec<f64>,
    suffix: Vec<f64>,
}

impl SwitchEnsemble {
    pub fn new(models: usize, schedule: SwitchSchedule) -> Result<Self, SwitchError> {
        if models < 2 {
            return Err(SwitchError::TooFewModels(models));
        }
        let w = -(models as f64).log2();
        Ok(Self {
            log_weights: vec![w; models],
            step: 1,
            schedule,
            total_log_prob: 0.0,
            joint: vec![0.0; models],
            suffix: vec![0.0; models + 1],
        })
    }

    pub fn models(&self) -> usize {
        self.log_weights.len()
    }

    /// Index of the symbol the next call to [`step`](Self::step) will consume.
    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp2()).collect()
    }

    /// log₂ of the mixture probability of everything seen so far.
    pub fn total_log_prob(&self) -> f64 {
        self.total_log_prob
    }

    /// Conditional probability the ensemble would assign to the next symbol
    /// given each expert's conditional probability for it.
    pub fn predict(&self, cond_probs: &[f64]) -> Result<f64, SwitchError> {
        self.check(cond_probs)?;
        let joint: Vec<f64> = self
            .log_weights
            .iter()
            .zip(cond_probs)
            .map(|(w, p)| w + p.log2())
            .collect();
        Ok((log2_sum(&joint) - log2_sum(&self.log_weights)).exp2())
    }

    /// Consumes one symbol. `cond_probs[j]` is expert j's conditional
    /// probability of the observed symbol. Returns the ensemble's
    /// conditional probability of that symbol.
    pub fn step(&mut self, cond_probs: &[f64]) -> Result<f64, SwitchError> {
        self.check(cond_probs)?;
        let n = self.models();
        let alpha = self.schedule.checked_rate(self.step + 1)?;

        for (j, (w, p)) in self.log_weights.iter().zip(cond_probs).enumerate() {
            self.joint[j] = w + p.log2();
        }
        let log_r = log2_sum(&self.joint);
        let prev = self.total_log_prob;

        let log_alpha = alpha.log2();
        let log_nm1 = ((n - 1) as f64).log2();
        let k = (1.0 - alpha) * n as f64 - 1.0;
        if k >= 0.0 {
            // w_j ← (α r + k w_j ρ_j) / (N − 1)
            let log_k = k.log2();
            let mixed = log_alpha + log_r;
            for (w, &m) in self.log_weights.iter_mut().zip(&self.joint) {
                *w = log2_add(mixed, log_k + m) - log_nm1;
            }
        } else {
            // Same update, rearranged so no term is negative:
            // w_j ← α/(N−1) · Σ_{i≠j} w_i ρ_i + (1 − α) w_j ρ_j
            self.suffix[n] = f64::NEG_INFINITY;
            for j in (0..n).rev() {
                self.suffix[j] = log2_add(self.suffix[j + 1], self.joint[j]);
            }
            let log_stay = (1.0 - alpha).log2();
            let mut prefix = f64::NEG_INFINITY;
            for j in 0..n {
                let others = log2_add(prefix, self.suffix[j + 1]);
                self.log_weights[j] =
                    log2_add(log_alpha - log_nm1 + others, log_stay + self.joint[j]);
                prefix = log2_add(prefix, self.joint[j]);
            }
        }

        self.total_log_prob = log_r;
        self.step += 1;
        Ok((log_r - prev).exp2())
    }

    fn check(&self, cond_probs: &[f64]) -> Result<(), SwitchError> {
        if cond_probs.len() != self.models() {
            return Err(SwitchError::WrongArity {
                expected: self.models(),
                got: cond_probs.len(),
            });
        }
        for (index, &value) in cond_probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(SwitchError::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(())
    }
}

/// log₂ of the prior weight w(i_{1:n}) of a sequence of (zero-based)
/// model indices, evaluated by its defining recursion.
pub fn switch_prior_log_weight(
    indices: &[usize],
    models: usize,
    schedule: SwitchSchedule,
) -> Result<f64, SwitchError> {
    if models < 2 {
        return Err(SwitchError::TooFewModels(models));
    }
    if let Some(&index) = indices.iter().find(|&&i| i >= models) {
        return Err(SwitchError::IndexOutOfRange { index, models });
    }
    let Some(_) = indices.first() else {
        return Ok(0.0);
    };
    let mut log_w = -(models as f64).log2();
    for (t, pair) in (2u64..).zip(indices.windows(2)) {
        let alpha = schedule.checked_rate(t)?;
        log_w += if pair[0] == pair[1] {
            (1.0 - alpha).log2()
        } else {
            (alpha / (models - 1) as f64).log2()
        };
    }
    Ok(log_w)
}

/// Number of switches m(i_{1:n}) in an index sequence.
pub fn switch_count(indices: &[usize]) -> usize {
    indices.windows(2).filter(|w| w[0] != w[1]).count()
}
