use dyadic_core::DyadicStepFunction;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weights::*;

fn positive_step(depth: u32) -> impl Strategy<Value = DyadicStepFunction> {
    prop::collection::vec(0.01f64..10.0, 1usize << depth)
        .prop_map(move |v| DyadicStepFunction::new(depth, v).unwrap())
}

proptest! {
    #[test]
    fn a1_at_least_one_and_one_iff_constant(w in (0u32..7).prop_flat_map(positive_step)) {
        let q = a1_constant(&w).unwrap();
        prop_assert!(q >= 1.0);
        let constant = w.values().iter().all(|&v| v == w.values()[0]);
        prop_assert_eq!(q == 1.0, constant);
    }

    #[test]
    fn a1_scale_invariant(w in (0u32..7).prop_flat_map(positive_step), s in 0.01f64..100.0) {
        let q = a1_constant(&w).unwrap();
        let qs = a1_constant(&w.map(|v| s * v).unwrap()).unwrap();
        prop_assert!((q - qs).abs() <= 1e-12 * q);
    }

    #[test]
    fn sibling_doubling_bounded_by_a1(w in (0u32..7).prop_flat_map(positive_step)) {
        let q = a1_constant(&w).unwrap();
        let d = doubling_report(&w, 2).unwrap();
        prop_assert!(d.constant <= 2.0 * q - 1.0 + 1e-9);
    }

    #[test]
    fn cascade_respects_certified_bound(seed in any::<u64>(), depth in 1u32..9, delta in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, bound) = random_cascade_weight(&mut rng, depth, delta).unwrap();
        prop_assert!(w.a1_constant() <= bound * (1.0 + 1e-12));
        let d = doubling_report(w.weight(), 2).unwrap();
        prop_assert!(d.constant <= 2.0 * w.a1_constant() - 1.0 + 1e-9);
    }
}
