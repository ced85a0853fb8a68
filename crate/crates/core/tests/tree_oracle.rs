use cts::model::{ContextTree, ModelConfig, Variant};
use cts::oracle::{brute_ctw, brute_cts, enumerate_suffix_sets, structure_cost, SuffixSet};
use cts::switching::{SwitchEnsemble, SwitchSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn tree_prob(variant: Variant, depth: usize, x: &[u8]) -> f64 {
    let mut tree = ContextTree::new(ModelConfig::new(variant, depth).unwrap());
    for &b in x {
        tree.update_bit(b);
    }
    tree.log_prob().exp2()
}

/// Random bits with a mix of fair, biased and periodic draws.
fn sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    match rng.gen_range(0..3) {
        0 => (0..n).map(|_| rng.gen_range(0..2)).collect(),
        1 => {
            let p = rng.gen_range(0.0..1.0);
            (0..n).map(|_| rng.gen_bool(p) as u8).collect()
        }
        _ => {
            let period = rng.gen_range(1..4);
            (0..n).map(|i| ((i / period) % 2) as u8 ^ rng.gen_bool(0.1) as u8).collect()
        }
    }
}

#[test]
fn ctw_matches_suffix_set_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let depth = case % 4;
        let n = rng.gen_range(0..=16);
        let x = sample(&mut rng, n);
        let fast = tree_prob(Variant::Ctw, depth, &x);
        let brute = brute_ctw(&x, depth).unwrap();
        assert!(rel_err(fast, brute) < 1e-9, "D={depth} x={x:?}: {fast} vs {brute}");
    }
}

#[test]
fn ctw_single_context_example() {
    assert!((tree_prob(Variant::Ctw, 1, &[1, 1]) - 5.0 / 16.0).abs() < 1e-15);
}

#[test]
fn structure_code_is_complete() {
    for depth in 0..=4 {
        let sum: f64 = enumerate_suffix_sets(depth)
            .unwrap()
            .iter()
            .map(|s| 0.5f64.powi(structure_cost(s, depth) as i32))
            .sum();
        assert!((sum - 1.0).abs() < 1e-12, "D={depth}: {sum}");
    }
}

#[test]
fn example_tree_costs() {
    let s = SuffixSet::from_strings(&["1", "10", "00"]);
    assert_eq!(structure_cost(&s, 3), 5);
    assert_eq!(structure_cost(&s, 2), 3);
}

#[test]
fn cts_matches_switch_sequence_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..100 {
        let depth = case % 2;
        let n = rng.gen_range(0..=8);
        let x = sample(&mut rng, n);
        let fast = tree_prob(Variant::Cts, depth, &x);
        let brute = brute_cts(&x, depth, 0.5, 1.0).unwrap();
        assert!(rel_err(fast, brute) < 1e-9, "D={depth} x={x:?}: {fast} vs {brute}");
    }
}

#[test]
fn cts_matches_enumeration_at_depth_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let n = rng.gen_range(0..=7);
        let x = sample(&mut rng, n);
        let fast = tree_prob(Variant::Cts, 2, &x);
        let brute = brute_cts(&x, 2, 0.5, 1.0).unwrap();
        assert!(rel_err(fast, brute) < 1e-9, "x={x:?}");
    }
}

#[test]
fn enhanced_preset_matches_enumeration() {
    // Scaled counts and the 0.075 / 0.925 expert priors, on a flat stream.
    let config = ModelConfig::new(Variant::CtsStar, 1).unwrap();
    assert_eq!(config.init_k(), 0.075);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let depth = rng.gen_range(0..=2);
        let n = rng.gen_range(0..=7);
        let x = sample(&mut rng, n);
        let fast = tree_prob(Variant::CtsStar, depth, &x);
        let brute = brute_cts(&x, depth, config.init_k(), config.count_scale()).unwrap();
        assert!(rel_err(fast, brute) < 1e-9, "D={depth} x={x:?}");
    }
}

/// The inline two-expert switch at the root agrees with the general
/// ensemble fed the same expert conditionals.
#[test]
fn root_switch_agrees_with_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10 {
        let x = sample(&mut rng, 200);
        let mut tree = ContextTree::new(ModelConfig::new(Variant::Cts, 3).unwrap());
        let mut ens = SwitchEnsemble::new(2, SwitchSchedule::Decaying).unwrap();
        for &b in &x {
            let ctx = tree.history().bit(0);
            let kt = tree.root().map_or(0.5, |r| r.kt.predict(b));
            let child_before = tree.node(&[ctx]).map_or(0.0, |c| c.log_model());
            tree.update_bit(b);
            let child_after = tree.node(&[ctx]).unwrap().log_model();
            ens.step(&[kt, (child_after - child_before).exp2()]).unwrap();
            let diff = (tree.log_prob() - ens.total_log_prob()).abs();
            assert!(diff < 1e-9, "{diff}");
        }
    }
}

#[test]
fn conditionals_chain_to_the_block_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for variant in Variant::ALL {
        let x = sample(&mut rng, 500);
        let mut tree = ContextTree::new(ModelConfig::new(variant, 12).unwrap());
        let mut sum = 0.0;
        for &b in &x {
            sum += tree.predict(b).log2();
            tree.update_bit(b);
        }
        assert!((sum - tree.log_prob()).abs() < 1e-8, "{variant}");
    }
}
