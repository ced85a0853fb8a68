//! Depth-bounded context-tree models over a binary stream.
//!
//! Every node on the path selected by the last `D` bits mixes two experts:
//! its own KT estimate of the bits seen in that context, and the product of
//! its two children's models. Context Tree Weighting mixes them with a
//! fixed ½/½ prior over the two choices; Context Tree Switching runs a
//! two-expert switch distribution at each node, with switch rate
//! `1/(n+1)` keyed to the global symbol count `n`.
//!
//! Each node stores the absolute log₂ value of its model on the data seen
//! in its context together with `log₂(k/s)`, the log-odds between its two
//! mixture terms `k` (KT expert) and `s` (split expert). Since `k + s`
//! always equals the node's model value, the pair recovers `k` and `s`,
//! and per-symbol conditional probabilities stay in linear space where
//! they never underflow.

use crate::kt::KtCounts;
use crate::logmath::sigmoid2;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest context depth representable in the container header.
pub const MAX_DEPTH: usize = u16::MAX as usize;

const NO_CHILD: u32 = 0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("context depth {0} exceeds the maximum of {MAX_DEPTH}")]
    DepthTooLarge(usize),
    #[error("unknown model variant `{0}` (expected ctw, cts or cts-star)")]
    UnknownVariant(String),
}

/// Anything that can drive a binary arithmetic coder.
pub trait BitPredictor {
    /// Probability that the next bit is a one.
    fn p_one(&mut self) -> f64;
    /// Feeds the actual next bit.
    fn update(&mut self, bit: u8);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Ctw,
    Cts,
    /// CTS with count scaling, asymmetric initial switch weights and the
    /// byte-oriented binary decomposition.
    CtsStar,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Ctw, Variant::Cts, Variant::CtsStar];

    pub fn code(self) -> u8 {
        match self {
            Variant::Ctw => 0,
            Variant::Cts => 1,
            Variant::CtsStar => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Variant::Ctw),
            1 => Some(Variant::Cts),
            2 => Some(Variant::CtsStar),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ctw => "ctw",
            Variant::Cts => "cts",
            Variant::CtsStar => "cts-star",
        }
    }

    fn switches(self) -> bool {
        !matches!(self, Variant::Ctw)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ctw" => Ok(Variant::Ctw),
            "cts" => Ok(Variant::Cts),
            "cts-star" | "cts_star" | "cts*" | "ctsstar" => Ok(Variant::CtsStar),
            _ => Err(ModelError::UnknownVariant(s.to_string())),
        }
    }
}

/// Model configuration. The estimator and initialization parameters are
/// fixed by the variant so that a `(variant, depth)` pair fully determines
/// the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    depth: usize,
    variant: Variant,
    count_scale: f64,
    init_s: f64,
    init_k: f64,
}

impl ModelConfig {
    pub fn new(variant: Variant, depth: usize) -> Result<Self, ModelError> {
        if depth > MAX_DEPTH {
            return Err(ModelError::DepthTooLarge(depth));
        }
        let (count_scale, init_s, init_k) = match variant {
            Variant::Ctw | Variant::Cts => (1.0, 0.5, 0.5),
            Variant::CtsStar => (0.98, 0.925, 0.075),
        };
        Ok(Self {
            depth,
            variant,
            count_scale,
            init_s,
            init_k,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Factor applied to both KT counts after every update.
    pub fn count_scale(&self) -> f64 {
        self.count_scale
    }

    /// Initial weight of the split expert at a fresh node.
    pub fn init_s(&self) -> f64 {
        self.init_s
    }

    /// Initial weight of the KT expert at a fresh node.
    pub fn init_k(&self) -> f64 {
        self.init_k
    }

    fn init_log_odds(&self) -> f64 {
        match self.variant {
            Variant::Ctw => 0.0,
            _ => (self.init_k / self.init_s).log2(),
        }
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.variant, self.depth)
    }
}

/// The last `capacity` bits of a stream, most recent first. Bits before
/// the start of the stream read as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitHistory {
    words: Vec<u64>,
    capacity: usize,
}

impl BitHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// The `i`-th most recent bit (0 = the last bit pushed).
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.capacity);
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    #[inline]
    pub fn push(&mut self, bit: u8) {
        let mut carry = (bit & 1) as u64;
        for w in &mut self.words {
            let out = *w >> 63;
            *w = (*w << 1) | carry;
            carry = out;
        }
    }
}

/// One context-tree node.
#[derive(Debug, Clone, Copy)]
pub struct CtsNode {
    pub kt: KtCounts,
    log_model: f64,
    log_odds: f64,
    children: [u32; 2],
}

impl CtsNode {
    fn fresh(log_odds: f64) -> Self {
        Self {
            kt: KtCounts::new(),
            log_model: 0.0,
            log_odds,
            children: [NO_CHILD; 2],
        }
    }

    /// log₂ of this node's model probability of its context's data.
    pub fn log_model(&self) -> f64 {
        self.log_model
    }

    /// log₂ of the KT-expert weight `k`. Meaningful for internal nodes.
    pub fn log_k(&self) -> f64 {
        self.log_model - softplus2(-self.log_odds)
    }

    /// log₂ of the split-expert weight `s`. Meaningful for internal nodes.
    pub fn log_s(&self) -> f64 {
        self.log_model - softplus2(self.log_odds)
    }

    /// log₂(k/s).
    pub fn log_odds(&self) -> f64 {
        self.log_odds
    }
}

/// log₂(1 + 2^x).
fn softplus2(x: f64) -> f64 {
    if x > 0.0 {
        x + (1.0 + (-x).exp2()).log2()
    } else {
        (1.0 + x.exp2()).log2()
    }
}

#[derive(Debug, Clone)]
struct TreeCore {
    config: ModelConfig,
    nodes: Vec<CtsNode>,
    symbols_seen: u64,
    /// Node index per depth along the current context path.
    path: Vec<u32>,
    /// KT-expert posterior weight k/(k+s) per depth, cached by `prepare`.
    weight: Vec<f64>,
    prepared: bool,
}

impl TreeCore {
    fn new(config: ModelConfig) -> Self {
        Self {
            config,
            nodes: Vec::new(),
            symbols_seen: 0,
            path: vec![0; config.depth + 1],
            weight: vec![0.5; config.depth],
            prepared: false,
        }
    }

    fn fresh_node(&self) -> CtsNode {
        CtsNode::fresh(self.config.init_log_odds())
    }

    /// Non-mutating dry run: probability of `symbol` under context `ctx`.
    fn predict(&self, ctx: &BitHistory, symbol: u8) -> f64 {
        let depth = self.config.depth;
        if self.nodes.is_empty() {
            return 0.5;
        }
        let mut path = Vec::with_capacity(depth + 1);
        let mut idx = 0u32;
        path.push(idx);
        for d in 0..depth {
            let child = self.nodes[idx as usize].children[ctx.bit(d) as usize];
            if child == NO_CHILD {
                break;
            }
            idx = child;
            path.push(idx);
        }
        // Any missing node is fresh and predicts ½.
        let mut p = 0.5;
        for (d, &idx) in path.iter().enumerate().rev() {
            let node = &self.nodes[idx as usize];
            let xi = node.kt.predict(symbol);
            p = if d == depth {
                xi
            } else {
                let w = sigmoid2(node.log_odds);
                w * xi + (1.0 - w) * p
            };
        }
        p
    }

    /// Materializes the context path and caches the mixing weights.
    /// Returns the probability that the next bit is a one.
    fn prepare(&mut self, ctx: &BitHistory) -> f64 {
        let depth = self.config.depth;
        if self.nodes.is_empty() {
            let root = self.fresh_node();
            self.nodes.push(root);
        }
        let mut idx = 0u32;
        self.path[0] = 0;
        for d in 0..depth {
            let bit = ctx.bit(d) as usize;
            let mut child = self.nodes[idx as usize].children[bit];
            if child == NO_CHILD {
                child = u32::try_from(self.nodes.len()).expect("context tree exceeds u32 nodes");
                let fresh = self.fresh_node();
                self.nodes.push(fresh);
                self.nodes[idx as usize].children[bit] = child;
            }
            idx = child;
            self.path[d + 1] = idx;
        }
        let mut p = self.nodes[self.path[depth] as usize].kt.predict_one();
        for d in (0..depth).rev() {
            let node = &self.nodes[self.path[d] as usize];
            let w = sigmoid2(node.log_odds);
            self.weight[d] = w;
            p = w * node.kt.predict_one() + (1.0 - w) * p;
        }
        self.prepared = true;
        p
    }

    fn update(&mut self, ctx: &BitHistory, bit: u8) {
        if !self.prepared {
            self.prepare(ctx);
        }
        let depth = self.config.depth;
        let scale = self.config.count_scale;
        let switching = self.config.variant.switches();
        // α_{n+1} for the n-th symbol, n counted from 1.
        let alpha = 1.0 / (self.symbols_seen + 2) as f64;

        let leaf = &mut self.nodes[self.path[depth] as usize];
        let (mut z, mut log_z) = leaf.kt.update_logged(bit, scale);
        leaf.log_model = leaf.kt.log_prob;

        for d in (0..depth).rev() {
            let w = self.weight[d];
            let node = &mut self.nodes[self.path[d] as usize];
            let (xi, log_xi) = node.kt.update_logged(bit, scale);
            let kt_term = w * xi;
            let split_term = (1.0 - w) * z;
            let p = kt_term + split_term;
            let log_p = p.log2();
            if switching {
                let k = alpha * p + (1.0 - 2.0 * alpha) * kt_term;
                let s = alpha * p + (1.0 - 2.0 * alpha) * split_term;
                node.log_odds = (k / s).log2();
            } else {
                node.log_odds += log_xi - log_z;
            }
            node.log_model += log_p;
            z = p;
            log_z = log_p;
        }
        self.symbols_seen += 1;
        self.prepared = false;
    }

    fn log_prob(&self) -> f64 {
        self.nodes.first().map_or(0.0, |root| root.log_model)
    }

    fn find(&self, context: &[u8]) -> Option<&CtsNode> {
        if context.len() > self.config.depth {
            return None;
        }
        let mut node = self.nodes.first()?;
        for &bit in context {
            let idx = node.children[(bit & 1) as usize];
            if idx == NO_CHILD {
                return None;
            }
            node = &self.nodes[idx as usize];
        }
        Some(node)
    }
}

/// A context-tree model over a flat bit stream. The history starts as `D`
/// zero bits so every symbol has a full-length context.
#[derive(Debug, Clone)]
pub struct ContextTree {
    core: TreeCore,
    history: BitHistory,
}

impl ContextTree {
    pub fn new(config: ModelConfig) -> Self {
        Self {
            core: TreeCore::new(config),
            history: BitHistory::new(config.depth),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.core.config
    }

    /// Conditional probability of `symbol` given the history, without
    /// changing the model.
    pub fn predict(&self, symbol: u8) -> f64 {
        self.core.predict(&self.history, symbol)
    }

    /// Same as [`predict`](Self::predict) but with an externally supplied
    /// context instead of this tree's own history.
    pub fn predict_in(&self, ctx: &BitHistory, symbol: u8) -> f64 {
        self.core.predict(ctx, symbol)
    }

    /// Probability of a one under an external context. Creates the path
    /// nodes so that a following [`update_in`](Self::update_in) with the
    /// same context reuses the work.
    pub fn p_one_in(&mut self, ctx: &BitHistory) -> f64 {
        self.core.prepare(ctx)
    }

    /// Updates the model with `bit` observed under an external context.
    /// This tree's own history is left untouched.
    pub fn update_in(&mut self, ctx: &BitHistory, bit: u8) {
        self.core.update(ctx, bit);
    }

    /// Observes the next bit of the stream.
    pub fn update_bit(&mut self, bit: u8) {
        self.core.update(&self.history, bit);
        self.history.push(bit);
    }

    /// log₂ of the model probability of the whole stream so far.
    pub fn log_prob(&self) -> f64 {
        self.core.log_prob()
    }

    pub fn symbols_seen(&self) -> u64 {
        self.core.symbols_seen
    }

    pub fn node_count(&self) -> usize {
        self.core.nodes.len()
    }

    pub fn history(&self) -> &BitHistory {
        &self.history
    }

    pub fn root(&self) -> Option<&CtsNode> {
        self.core.nodes.first()
    }

    /// The node for `context`, given most recent bit first.
    pub fn node(&self, context: &[u8]) -> Option<&CtsNode> {
        self.core.find(context)
    }

    /// All materialized nodes with their depth.
    pub fn nodes_with_depth(&self) -> Vec<(usize, &CtsNode)> {
        let mut out = Vec::with_capacity(self.core.nodes.len());
        let mut stack = Vec::new();
        if !self.core.nodes.is_empty() {
            stack.push((0usize, 0u32));
        }
        while let Some((d, idx)) = stack.pop() {
            let node = &self.core.nodes[idx as usize];
            out.push((d, node));
            for &c in &node.children {
                if c != NO_CHILD {
                    stack.push((d + 1, c));
                }
            }
        }
        out
    }
}

impl BitPredictor for ContextTree {
    fn p_one(&mut self) -> f64 {
        self.core.prepare(&self.history)
    }

    fn update(&mut self, bit: u8) {
        self.update_bit(bit);
    }
}
