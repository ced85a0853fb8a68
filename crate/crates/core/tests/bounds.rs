use cts::coder::encode_bits;
use cts::model::{ContextTree, ModelConfig, Variant};
use cts::oracle::{enumerate_suffix_sets, pst_sample, BoundReport, PstModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THETA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

fn random_pst(rng: &mut ChaCha8Rng, max_depth: usize) -> PstModel {
    let sets = enumerate_suffix_sets(max_depth).unwrap();
    let set = sets.choose(rng).unwrap().clone();
    let params = (0..set.len()).map(|_| *THETA_GRID.choose(rng).unwrap()).collect();
    PstModel::new(set, params).unwrap()
}

struct Run {
    log_prob: f64,
    coded_bits: f64,
}

fn run(variant: Variant, depth: usize, x: &[u8]) -> Run {
    let config = ModelConfig::new(variant, depth).unwrap();
    let mut ideal = ContextTree::new(config);
    for &b in x {
        ideal.update_bit(b);
    }
    let mut coded = ContextTree::new(config);
    let payload = encode_bits(&mut coded, x).unwrap();
    Run {
        log_prob: ideal.log_prob(),
        coded_bits: payload.bits as f64,
    }
}

#[test]
fn redundancy_bounds_hold_on_sampled_trees() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pst = random_pst(&mut rng, 3);
        let depth = rng.gen_range(pst.suffix_set().depth()..=3);
        for n in [64, 256, 1024] {
            let x = pst_sample(&pst, n, seed);

            let ctw = run(Variant::Ctw, depth, &x);
            let r = BoundReport::new(&pst, depth, &x, -ctw.log_prob);
            assert!(r.realized < r.ctw_bound(), "seed {seed} n {n}: CTW {} vs {}", r.realized, r.ctw_bound());
            assert!(ctw.coded_bits < r.ctw_bound() + 2.0, "seed {seed} n {n}: coded CTW");

            let cts = run(Variant::Cts, depth, &x);
            let r = BoundReport::new(&pst, depth, &x, -cts.log_prob);
            assert!(r.realized < r.cts_bound(), "seed {seed} n {n}: CTS {} vs {}", r.realized, r.cts_bound());
            assert!(cts.coded_bits < r.cts_bound() + 2.0, "seed {seed} n {n}: coded CTS");
        }
    }
}

#[test]
fn example_tree_at_depth_two() {
    let pst = PstModel::example_tree();
    let x = pst_sample(&pst, 10_000, 5);
    let ctw = run(Variant::Ctw, 2, &x);
    let cts = run(Variant::Cts, 2, &x);
    let r = BoundReport::new(&pst, 2, &x, 0.0);
    assert!(-ctw.log_prob < r.ctw_bound());
    assert!(-cts.log_prob < r.cts_bound());
}

#[test]
fn example_tree_sampler_frequencies() {
    let pst = PstModel::example_tree();
    let n = 100_000;
    let x = pst_sample(&pst, n, 7);
    let mut ones = [0usize; 3];
    let mut seen = [0usize; 3];
    for t in 0..n {
        let i = pst.suffix_set().matching(&x, t).unwrap();
        seen[i] += 1;
        ones[i] += x[t] as usize;
    }
    for i in 0..3 {
        let theta = pst.params()[i];
        let freq = ones[i] as f64 / seen[i] as f64;
        let sigma = (theta * (1.0 - theta) / seen[i] as f64).sqrt();
        assert!((freq - theta).abs() < 3.0 * sigma, "context {:?}: {freq} vs {theta}", pst.suffix_set().members()[i]);
    }
}

#[test]
fn coded_length_tracks_ideal_length() {
    let pst = PstModel::example_tree();
    let x = pst_sample(&pst, 4096, 99);
    for variant in Variant::ALL {
        let r = run(variant, 3, &x);
        let excess = r.coded_bits + r.log_prob;
        assert!((-0.01..2.01).contains(&excess), "{variant}: {excess}");
    }
}

#[test]
fn bound_terms_for_example_tree() {
    let pst = PstModel::example_tree();
    let x = pst_sample(&pst, 256, 1);
    let r = BoundReport::new(&pst, 3, &x, 0.0);
    assert_eq!(r.model_cost, 5.0);
    // 3 γ(256/3)
    assert!((r.param_cost - 3.0 * (0.5 * (256.0f64 / 3.0).log2() + 1.0)).abs() < 1e-12);
    assert_eq!(r.switch_cost, 3.0 * 8.0);
}
