use cts::codec::{compress, compress_with_report, decompress, HEADER_LEN};
use cts::model::{ContextTree, ModelConfig, Variant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Ctw), Just(Variant::Cts), Just(Variant::CtsStar)]
}

/// Random, constant, periodic or text-like bytes.
fn structured_bytes(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        proptest::collection::vec(any::<u8>(), 0..max_len),
        (any::<u8>(), 0..max_len).prop_map(|(b, n)| vec![b; n]),
        (proptest::collection::vec(any::<u8>(), 1..8), 0..max_len)
            .prop_map(|(unit, n)| unit.iter().copied().cycle().take(n).collect()),
        proptest::collection::vec(prop_oneof![Just(b' '), b'a'..=b'e', Just(b'\n')], 0..max_len),
    ]
}

#[test]
fn conditionals_normalize_over_many_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut states = 0;
    for variant in Variant::ALL {
        for depth in [0, 1, 5, 16, 48] {
            let mut tree = ContextTree::new(ModelConfig::new(variant, depth).unwrap());
            let bias = rng.gen_range(0.05..0.95);
            for _ in 0..6_700 {
                let sum = tree.predict(0) + tree.predict(1);
                assert!((sum - 1.0).abs() < 1e-12, "{variant} D={depth}: {sum}");
                tree.update_bit(rng.gen_bool(bias) as u8);
                states += 1;
            }
        }
    }
    assert!(states >= 100_000);
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let x: Vec<u8> = (0..4000).map(|i| (i % 7 == 0) as u8 ^ rng.gen_bool(0.2) as u8).collect();
    for variant in Variant::ALL {
        let config = ModelConfig::new(variant, 24).unwrap();
        let trace = || {
            let mut tree = ContextTree::new(config);
            x.iter()
                .map(|&b| {
                    tree.update_bit(b);
                    tree.log_prob().to_bits()
                })
                .collect::<Vec<u64>>()
        };
        assert_eq!(trace(), trace());
    }
}

#[test]
fn round_trip_hundred_thousand_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut data: Vec<u8> = (0..50_000).map(|_| rng.gen()).collect();
    data.extend(b"the quick brown fox jumps over the lazy dog. ".iter().cycle().take(50_000));
    let config = ModelConfig::new(Variant::Cts, 8).unwrap();
    assert_eq!(decompress(&compress(&data, &config)).unwrap(), data);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(data in structured_bytes(2_000), v in variant(), depth in prop_oneof![Just(0usize), Just(1), Just(8), Just(48)]) {
        let config = ModelConfig::new(v, depth).unwrap();
        let packed = compress(&data, &config);
        prop_assert_eq!(decompress(&packed).unwrap(), data);
    }

    #[test]
    fn code_length_within_two_bits_of_model(data in structured_bytes(1_000), v in variant(), depth in 0usize..20) {
        let config = ModelConfig::new(v, depth).unwrap();
        let (packed, report) = compress_with_report(&data, &config);
        let ideal = -report.model_log_prob;
        prop_assert!((report.payload_bits as f64) < ideal.ceil() + 2.0, "{} vs {}", report.payload_bits, ideal);
        prop_assert!(report.payload_bits as f64 >= ideal - 1e-6);
        prop_assert_eq!(packed.len(), HEADER_LEN + (report.payload_bits as usize).div_ceil(8));
    }

    #[test]
    fn compression_is_deterministic(data in structured_bytes(500), v in variant()) {
        let config = ModelConfig::new(v, 16).unwrap();
        prop_assert_eq!(compress(&data, &config), compress(&data, &config));
    }

    #[test]
    fn corrupt_streams_never_panic(data in structured_bytes(300), flips in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..4)) {
        let config = ModelConfig::new(Variant::Cts, 8).unwrap();
        let mut packed = compress(&data, &config);
        for (pos, mask) in flips {
            let i = pos % packed.len();
            packed[i] ^= mask;
        }
        // Any outcome but a panic is acceptable; a successful decode has the framed length.
        if let Ok(out) = decompress(&packed) {
            let len = u64::from_le_bytes(packed[7..15].try_into().unwrap());
            prop_assert_eq!(out.len() as u64, len);
        }
    }
}
