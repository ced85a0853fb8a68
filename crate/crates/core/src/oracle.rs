//! Brute-force reference implementations.
//!
//! Everything here evaluates the defining sums directly, in linear space,
//! over tiny inputs. Nothing is shared with the incremental models except
//! the KT prediction formula, which is restated locally. These functions
//! exist to check the fast paths and the redundancy bounds.
//!
//! Contexts are written most recent bit first: the context `[0, 1]` means
//! the previous bit was 0 and the one before it was 1. Bits before the
//! start of a sequence read as zero.

use crate::model::{ContextTree, ModelConfig, Variant};
use crate::switching::{SwitchEnsemble, SwitchSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Largest depth for which suffix sets are enumerated (|C₅| = 458330).
pub const MAX_ENUM_DEPTH: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("suffix-set enumeration is limited to depth {MAX_ENUM_DEPTH}, got {0}")]
    DepthTooLarge(usize),
    #[error("suffix set is not proper: {0:?} is a suffix of another member")]
    NotProper(Vec<u8>),
    #[error("suffix set is not complete")]
    NotComplete,
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("parameter {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("input too large for exhaustive evaluation: {0}")]
    TooLarge(String),
}

/// A set of contexts, each most recent bit first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SuffixSet(Vec<Vec<u8>>);

impl SuffixSet {
    pub fn new(mut members: Vec<Vec<u8>>) -> Self {
        members.sort();
        Self(members)
    }

    /// Builds a set from strings written oldest bit first, e.g.
    /// `["1", "10", "00"]`, where the last character is the most recent bit.
    pub fn from_strings(members: &[&str]) -> Self {
        Self::new(
            members
                .iter()
                .map(|s| s.bytes().rev().map(|c| (c == b'1') as u8).collect())
                .collect(),
        )
    }

    pub fn members(&self) -> &[Vec<u8>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// d(S): length of the longest member.
    pub fn depth(&self) -> usize {
        self.0.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// No member is a suffix (here: a most-recent-first prefix) of another.
    pub fn is_proper(&self) -> bool {
        self.first_improper().is_none()
    }

    fn first_improper(&self) -> Option<&Vec<u8>> {
        self.0.iter().enumerate().find_map(|(i, a)| {
            self.0
                .iter()
                .enumerate()
                .any(|(j, b)| i != j && b.starts_with(a))
                .then_some(a)
        })
    }

    /// Every history has a suffix in the set. For a proper set this is
    /// equivalent to the Kraft sum being exactly one.
    pub fn is_complete(&self) -> bool {
        let d = self.depth();
        // Count histories of length d covered by some member.
        let mut covered = 0u64;
        for h in 0u64..(1u64 << d) {
            let hist: Vec<u8> = (0..d).map(|i| ((h >> i) & 1) as u8).collect();
            if self.0.iter().any(|s| hist.starts_with(s)) {
                covered += 1;
            }
        }
        covered == 1u64 << d
    }

    /// Index of the member matching the context that precedes position
    /// `t` of `x`, with zero padding.
    pub fn matching(&self, x: &[u8], t: usize) -> Option<usize> {
        self.0
            .iter()
            .position(|s| s.iter().enumerate().all(|(i, &b)| past_bit(x, t, i) == b))
    }
}

/// Bit `i + 1` places before position `t`, zero before the start.
fn past_bit(x: &[u8], t: usize, i: usize) -> u8 {
    if i < t {
        x[t - 1 - i]
    } else {
        0
    }
}

/// C_D: every complete, proper suffix set of depth at most `depth`.
pub fn enumerate_suffix_sets(depth: usize) -> Result<Vec<SuffixSet>, OracleError> {
    if depth > MAX_ENUM_DEPTH {
        return Err(OracleError::DepthTooLarge(depth));
    }
    Ok(enumerate_raw(depth).into_iter().map(SuffixSet::new).collect())
}

fn enumerate_raw(depth: usize) -> Vec<Vec<Vec<u8>>> {
    let mut out = vec![vec![Vec::new()]];
    if depth == 0 {
        return out;
    }
    let sub = enumerate_raw(depth - 1);
    for ones in &sub {
        for zeros in &sub {
            let mut set = Vec::with_capacity(ones.len() + zeros.len());
            for s in ones {
                let mut m = vec![1];
                m.extend_from_slice(s);
                set.push(m);
            }
            for s in zeros {
                let mut m = vec![0];
                m.extend_from_slice(s);
                set.push(m);
            }
            out.push(set);
        }
    }
    out
}

/// Γ_D(S): length of the pre-order structure code — one bit per internal
/// node, one per leaf shallower than `depth`, none for leaves at `depth`.
pub fn structure_cost(set: &SuffixSet, depth: usize) -> u32 {
    let internal: BTreeSet<&[u8]> = set
        .members()
        .iter()
        .flat_map(|s| (0..s.len()).map(move |k| &s[..k]))
        .collect();
    let shallow_leaves = set.members().iter().filter(|s| s.len() < depth).count();
    (internal.len() + shallow_leaves) as u32
}

/// γ(k): k on [0, 1), ½ log₂ k + 1 beyond.
pub fn gamma(k: f64) -> f64 {
    if k < 1.0 {
        k
    } else {
        0.5 * k.log2() + 1.0
    }
}

/// Linear KT probability of a bit sequence, counts optionally scaled after
/// each update.
pub fn kt_probability(bits: &[u8], scale: f64) -> f64 {
    let (mut zeros, mut ones) = (0.0f64, 0.0f64);
    let mut p = 1.0;
    for &b in bits {
        let c = if b == 0 { zeros } else { ones };
        p *= (c + 0.5) / (zeros + ones + 1.0);
        if b == 0 {
            zeros += 1.0;
        } else {
            ones += 1.0;
        }
        zeros *= scale;
        ones *= scale;
    }
    p
}

/// Positions of `x` whose preceding context starts with `ctx`.
fn positions_in_context(x: &[u8], ctx: &[u8], upto: usize) -> Vec<usize> {
    (0..upto)
        .filter(|&t| ctx.iter().enumerate().all(|(i, &b)| past_bit(x, t, i) == b))
        .collect()
}

fn subsequence(x: &[u8], positions: &[usize]) -> Vec<u8> {
    positions.iter().map(|&t| x[t]).collect()
}

/// Direct CTW: Σ_{S∈C_D} 2^{−Γ_D(S)} Π_{s∈S} ξ_KT(x^s).
pub fn brute_ctw(x: &[u8], depth: usize) -> Result<f64, OracleError> {
    if depth > 3 {
        return Err(OracleError::DepthTooLarge(depth));
    }
    let mut total = 0.0;
    for set in enumerate_suffix_sets(depth)? {
        let prior = 0.5f64.powi(structure_cost(&set, depth) as i32);
        let lik: f64 = set
            .members()
            .iter()
            .map(|s| kt_probability(&subsequence(x, &positions_in_context(x, s, x.len())), 1.0))
            .product();
        total += prior * lik;
    }
    Ok(total)
}

/// Calls `f` with every sequence in {0..models}^len.
pub fn for_each_index_sequence(models: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut seq = vec![0usize; len];
    loop {
        f(&seq);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < models {
                break;
            }
            seq[i] = 0;
        }
    }
}

/// Linear prior w(i_{1:n}) of an index sequence, with `rate(k)` the switch
/// rate applied between positions k−1 and k (1-based).
pub fn prior_weight(indices: &[usize], models: usize, rate: impl Fn(usize) -> f64) -> f64 {
    if indices.is_empty() {
        return 1.0;
    }
    let mut w = 1.0 / models as f64;
    for k in 2..=indices.len() {
        let alpha = rate(k);
        w *= if indices[k - 1] == indices[k - 2] {
            1.0 - alpha
        } else {
            alpha / (models - 1) as f64
        };
    }
    w
}

fn schedule_rate(schedule: SwitchSchedule) -> impl Fn(usize) -> f64 {
    move |k| schedule.rate(k as u64)
}

/// Direct switch distribution: Σ over all N^n index sequences of
/// w(i_{1:n}) Π ρ_{i_k}. `rho[t][j]` is model j's conditional probability
/// of symbol t.
pub fn brute_switch(rho: &[Vec<f64>], schedule: SwitchSchedule) -> Result<f64, OracleError> {
    let n = rho.len();
    let models = rho.first().map_or(2, Vec::len);
    check_enumeration(models, n, 3usize.pow(8))?;
    let rate = schedule_rate(schedule);
    let mut total = 0.0;
    for_each_index_sequence(models, n, |seq| {
        let lik: f64 = seq.iter().enumerate().map(|(t, &j)| rho[t][j]).product();
        total += prior_weight(seq, models, &rate) * lik;
    });
    Ok(total)
}

/// Brute-force internal weights: for each t in 1..=n+1 and model j,
/// Σ_{i<t} w(i_{<t} j) Π_{k<t} ρ_{i_k}.
pub fn brute_switch_weights(rho: &[Vec<f64>], schedule: SwitchSchedule) -> Result<Vec<Vec<f64>>, OracleError> {
    let n = rho.len();
    let models = rho.first().map_or(2, Vec::len);
    check_enumeration(models, n + 1, 3usize.pow(9))?;
    let rate = schedule_rate(schedule);
    let mut out = Vec::with_capacity(n + 1);
    for t in 1..=n + 1 {
        let mut weights = vec![0.0; models];
        for_each_index_sequence(models, t, |seq| {
            let lik: f64 = seq[..t - 1].iter().enumerate().map(|(k, &j)| rho[k][j]).product();
            weights[seq[t - 1]] += prior_weight(seq, models, &rate) * lik;
        });
        out.push(weights);
    }
    Ok(out)
}

fn check_enumeration(models: usize, len: usize, limit: usize) -> Result<(), OracleError> {
    let size = (models as f64).powi(len as i32);
    if models < 2 || size > limit as f64 {
        return Err(OracleError::TooLarge(format!("{models}^{len} index sequences")));
    }
    Ok(())
}

/// Direct CTS: the nested switch sums over per-context index sequences,
/// with the KT expert chosen by index 0. The rate between a context's
/// k-th and (k+1)-th visit is 1/(t+1), where t is the 1-based global
/// position of the k-th visit. The first index is the KT expert with
/// prior `init_k`, the split expert with prior `1 − init_k`.
pub fn brute_cts(x: &[u8], depth: usize, init_k: f64, count_scale: f64) -> Result<f64, OracleError> {
    if depth > 2 || x.len() > 10 {
        return Err(OracleError::TooLarge(format!("depth {depth}, length {}", x.len())));
    }
    Ok(cts_value(x, &[], depth, x.len(), init_k, count_scale))
}

/// cts^c_d(x_{1:upto}).
fn cts_value(x: &[u8], ctx: &[u8], d: usize, upto: usize, init_k: f64, scale: f64) -> f64 {
    let positions = positions_in_context(x, ctx, upto);
    let sub = subsequence(x, &positions);
    if d == 0 {
        return kt_probability(&sub, scale);
    }
    if positions.is_empty() {
        return 1.0;
    }
    // Per-visit conditional probability under each expert.
    let mut ratios = Vec::with_capacity(positions.len());
    for (k, &t) in positions.iter().enumerate() {
        let kt = kt_probability(&sub[..=k], scale) / kt_probability(&sub[..k], scale);
        let mut split = 1.0;
        for bit in [0u8, 1] {
            let mut child = ctx.to_vec();
            child.push(bit);
            split *= cts_value(x, &child, d - 1, t + 1, init_k, scale)
                / cts_value(x, &child, d - 1, t, init_k, scale);
        }
        ratios.push([kt, split]);
    }
    let nc = positions.len();
    let mut total = 0.0;
    for_each_index_sequence(2, nc, |seq| {
        let mut w = if seq[0] == 0 { init_k } else { 1.0 - init_k };
        for k in 1..nc {
            let alpha = 1.0 / (positions[k - 1] + 2) as f64;
            w *= if seq[k] == seq[k - 1] { 1.0 - alpha } else { alpha };
        }
        let lik: f64 = seq.iter().zip(&ratios).map(|(&i, r)| r[i]).product();
        total += w * lik;
    });
    total
}

/// A prediction suffix tree: a complete, proper suffix set with one
/// Bernoulli parameter (probability of a one) per member.
#[derive(Debug, Clone, PartialEq)]
pub struct PstModel {
    suffix_set: SuffixSet,
    params: Vec<f64>,
}

impl PstModel {
    /// `params[i]` belongs to `suffix_set.members()[i]`.
    pub fn new(suffix_set: SuffixSet, params: Vec<f64>) -> Result<Self, OracleError> {
        if let Some(bad) = suffix_set.first_improper() {
            return Err(OracleError::NotProper(bad.clone()));
        }
        if !suffix_set.is_complete() {
            return Err(OracleError::NotComplete);
        }
        if params.len() != suffix_set.len() {
            return Err(OracleError::ParameterCount {
                expected: suffix_set.len(),
                got: params.len(),
            });
        }
        if let Some(&p) = params.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(OracleError::ParameterOutOfRange(p));
        }
        Ok(Self { suffix_set, params })
    }

    /// The example tree with θ₁ = 0.1, θ₁₀ = 0.3, θ₀₀ = 0.5.
    pub fn example_tree() -> Self {
        let set = SuffixSet::from_strings(&["1", "10", "00"]);
        let params = set
            .members()
            .iter()
            .map(|m| match m.as_slice() {
                [1] => 0.1,
                [0, 1] => 0.3,
                _ => 0.5,
            })
            .collect();
        Self::new(set, params).expect("valid example tree")
    }

    pub fn suffix_set(&self) -> &SuffixSet {
        &self.suffix_set
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Parameter for the context preceding position `t` of `x`.
    pub fn theta_at(&self, x: &[u8], t: usize) -> f64 {
        let i = self.suffix_set.matching(x, t).expect("complete suffix set");
        self.params[i]
    }
}

/// Samples `n` bits from a PST, zero-padded history, deterministic per seed.
pub fn pst_sample(pst: &PstModel, n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    for t in 0..n {
        let theta = pst.theta_at(&x, t);
        x.push((rng.gen::<f64>() < theta) as u8);
    }
    x
}

/// log₂ Pr(x | S, Θ_S).
pub fn pst_log_prob(pst: &PstModel, x: &[u8]) -> f64 {
    (0..x.len())
        .map(|t| {
            let theta = pst.theta_at(x, t);
            if x[t] == 1 {
                theta.log2()
            } else {
                (1.0 - theta).log2()
            }
        })
        .sum()
}

/// Terms of the redundancy bounds for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Γ_D(S).
    pub model_cost: f64,
    /// |S| γ(n/|S|).
    pub param_cost: f64,
    /// (d(S) + 1) log₂ n.
    pub switch_cost: f64,
    /// −log₂ Pr(x | S, Θ_S).
    pub data_cost: f64,
    /// Realized code length in bits (ideal −log₂ of the model probability,
    /// or an actual arithmetic-coded length).
    pub realized: f64,
}

impl BoundReport {
    pub fn new(pst: &PstModel, depth: usize, x: &[u8], realized: f64) -> Self {
        let set = pst.suffix_set();
        let n = x.len() as f64;
        let size = set.len() as f64;
        Self {
            model_cost: structure_cost(set, depth) as f64,
            param_cost: size * gamma(n / size),
            switch_cost: if x.is_empty() {
                0.0
            } else {
                (set.depth() + 1) as f64 * n.log2()
            },
            data_cost: -pst_log_prob(pst, x),
            realized,
        }
    }

    /// Γ + |S|γ(n/|S|) − log₂ Pr.
    pub fn ctw_bound(&self) -> f64 {
        self.model_cost + self.param_cost + self.data_cost
    }

    /// The CTW bound plus (d(S)+1) log₂ n.
    pub fn cts_bound(&self) -> f64 {
        self.ctw_bound() + self.switch_cost
    }
}

/// Outcome of one self-test check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Runs the fast-path versus brute-force equivalences at reduced scale.
pub fn selftest(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let counts: Vec<usize> = (0..=MAX_ENUM_DEPTH)
        .map(|d| enumerate_suffix_sets(d).map_or(0, |s| s.len()))
        .collect();
    checks.push(Check {
        name: "suffix-set class sizes",
        passed: counts == [1, 2, 5, 26, 677],
        detail: format!("{counts:?}"),
    });

    let mut worst = 0.0f64;
    for d in 0..=MAX_ENUM_DEPTH {
        let sum: f64 = enumerate_suffix_sets(d)
            .unwrap_or_default()
            .iter()
            .map(|s| 0.5f64.powi(structure_cost(s, d) as i32))
            .sum();
        worst = worst.max((sum - 1.0).abs());
    }
    checks.push(Check {
        name: "structure code completeness",
        passed: worst < 1e-12,
        detail: format!("max |Σ2^-Γ − 1| = {worst:.3e}"),
    });

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let models = rng.gen_range(2..=3usize);
        let n = rng.gen_range(1..=7usize);
        let rho: Vec<Vec<f64>> = (0..n).map(|_| (0..models).map(|_| rng.gen::<f64>()).collect()).collect();
        let mut ens = SwitchEnsemble::new(models, SwitchSchedule::Decaying).expect("N ≥ 2");
        for row in &rho {
            ens.step(row).expect("valid probabilities");
        }
        let brute = brute_switch(&rho, SwitchSchedule::Decaying).expect("small");
        worst = worst.max(rel_err(ens.total_log_prob().exp2(), brute));
    }
    checks.push(Check {
        name: "switch ensemble vs enumeration",
        passed: worst < 1e-10,
        detail: format!("max rel err {worst:.3e}"),
    });

    let mut worst = 0.0f64;
    for _ in 0..40 {
        let d = rng.gen_range(0..=3usize);
        let n = rng.gen_range(0..=12usize);
        let x = random_bits(&mut rng, n);
        let mut tree = ContextTree::new(ModelConfig::new(Variant::Ctw, d).expect("small depth"));
        for &b in &x {
            tree.update_bit(b);
        }
        let brute = brute_ctw(&x, d).expect("small");
        worst = worst.max(rel_err(tree.log_prob().exp2(), brute));
    }
    checks.push(Check {
        name: "CTW vs suffix-set enumeration",
        passed: worst < 1e-9,
        detail: format!("max rel err {worst:.3e}"),
    });

    let mut worst = 0.0f64;
    for _ in 0..40 {
        let d = rng.gen_range(0..=1usize);
        let n = rng.gen_range(0..=8usize);
        let x = random_bits(&mut rng, n);
        let mut tree = ContextTree::new(ModelConfig::new(Variant::Cts, d).expect("small depth"));
        for &b in &x {
            tree.update_bit(b);
        }
        let brute = brute_cts(&x, d, 0.5, 1.0).expect("small");
        worst = worst.max(rel_err(tree.log_prob().exp2(), brute));
    }
    checks.push(Check {
        name: "CTS vs switch-sequence enumeration",
        passed: worst < 1e-9,
        detail: format!("max rel err {worst:.3e}"),
    });

    checks
}
