//! Krichevsky-Trofimov estimator for binary sources.
//!
//! The estimator is the Bayes mixture over Bernoulli parameters under the
//! Beta(½, ½) prior. Sequentially it predicts
//!
//! ```text
//! P(1 | a zeros, b ones) = (b + ½) / (a + b + 1)
//! ```
//!
//! Counts are kept as reals so that the count-scaled variant (counts
//! multiplied by a constant after each update) shares the same code path.

/// Zero/one counts for a single context together with the accumulated
/// log₂ probability of the subsequence seen in that context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KtCounts {
    /// Number of zeros observed (possibly scaled).
    pub a: f64,
    /// Number of ones observed (possibly scaled).
    pub b: f64,
    /// log₂ of the KT probability of everything seen so far.
    pub log_prob: f64,
}

impl Default for KtCounts {
    fn default() -> Self {
        Self::new()
    }
}

impl KtCounts {
    pub const fn new() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            log_prob: 0.0,
        }
    }

    /// Probability that the next symbol equals `symbol`.
    #[inline]
    pub fn predict(&self, symbol: u8) -> f64 {
        let count = if symbol == 0 { self.a } else { self.b };
        (count + 0.5) / (self.a + self.b + 1.0)
    }

    /// Probability that the next symbol is a one.
    #[inline]
    pub fn predict_one(&self) -> f64 {
        self.predict(1)
    }

    /// Observes `symbol`: accumulates log₂ of its predicted probability,
    /// increments the matching count, then multiplies both counts by
    /// `scale`. Returns the probability that was assigned to `symbol`.
    ///
    /// `scale` is 1 for the plain estimator.
    #[inline]
    pub fn update(&mut self, symbol: u8, scale: f64) -> f64 {
        self.update_logged(symbol, scale).0
    }

    /// [`update`](Self::update), also returning log₂ of the probability.
    #[inline]
    pub fn update_logged(&mut self, symbol: u8, scale: f64) -> (f64, f64) {
        let p = self.predict(symbol);
        let log_p = p.log2();
        self.log_prob += log_p;
        if symbol == 0 {
            self.a += 1.0;
        } else {
            self.b += 1.0;
        }
        if scale != 1.0 {
            self.a *= scale;
            self.b *= scale;
        }
        (p, log_p)
    }

    /// Total number of observations (scaled counts when scaling is on).
    pub fn total(&self) -> f64 {
        self.a + self.b
    }
}

/// log₂ of the KT probability of a whole bit sequence, computed by the
/// chain rule.
pub fn kt_log_prob(bits: &[u8]) -> f64 {
    let mut counts = KtCounts::new();
    for &bit in bits {
        counts.update(bit, 1.0);
    }
    counts.log_prob
}
