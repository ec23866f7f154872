use dyadic_core::*;
use proptest::prelude::*;

fn step(depth: u32) -> impl Strategy<Value = DyadicStepFunction> {
    prop::collection::vec(-10.0f64..10.0, 1usize << depth)
        .prop_map(move |v| DyadicStepFunction::new(depth, v).unwrap())
}

fn spec(depth: u32) -> impl Strategy<Value = TransformSpec> {
    let rows: Vec<_> = (0..depth)
        .map(|d| prop::collection::vec(-1.0f64..=1.0, 1usize << d))
        .collect();
    rows.prop_map(|r| TransformSpec::from_levels(r).unwrap())
}

fn signs(depth: u32) -> impl Strategy<Value = TransformSpec> {
    let rows: Vec<_> = (0..depth)
        .map(|d| {
            prop::collection::vec(
                prop::bool::ANY.prop_map(|b| if b { 1.0 } else { -1.0 }),
                1usize << d,
            )
        })
        .collect();
    rows.prop_map(|r| TransformSpec::from_levels(r).unwrap())
}

proptest! {
    #[test]
    fn reconstruction_is_exact(f in (0u32..8).prop_flat_map(step)) {
        let r = haar_decompose(&f).reconstruct().unwrap();
        for (a, b) in r.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn parseval(f in (0u32..9).prop_flat_map(step)) {
        let h = haar_decompose(&f);
        let m = f.mean();
        let centered = f.map(|x| x - m).unwrap();
        prop_assert!((centered.l2_norm_sq() - h.sum_of_squares()).abs() <= 1e-10);
    }

    #[test]
    fn transform_is_linear(
        (f, g, s) in (1u32..7).prop_flat_map(|d| (step(d), step(d), spec(d))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let comb = f.zip_with(&g, |x, y| a * x + b * y).unwrap();
        let lhs = martingale_transform(&comb, &s).unwrap();
        let tf = martingale_transform(&f, &s).unwrap();
        let tg = martingale_transform(&g, &s).unwrap();
        for i in 0..lhs.values().len() {
            let rhs = a * tf.values()[i] + b * tg.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn transform_output_has_zero_mean((f, s) in (0u32..8).prop_flat_map(|d| (step(d), spec(d)))) {
        prop_assert!(martingale_transform(&f, &s).unwrap().mean().abs() <= 1e-12);
    }

    #[test]
    fn sign_transforms_are_isometries((f, s) in (0u32..8).prop_flat_map(|d| (step(d), signs(d)))) {
        let t = martingale_transform(&f, &s).unwrap();
        let m = f.mean();
        let centered = f.map(|x| x - m).unwrap();
        prop_assert!((t.l2_norm_sq() - centered.l2_norm_sq()).abs() <= 1e-9);
    }

    #[test]
    fn level_set_monotone_and_additive(
        (g, w1, w2) in (0u32..7).prop_flat_map(|d| (step(d), step(d), step(d))),
        l1 in -10.0f64..10.0,
        dl in 0.0f64..5.0,
    ) {
        let w1 = w1.map(f64::abs).unwrap();
        let w2 = w2.map(f64::abs).unwrap();
        let a = weighted_level_set_measure(&g, l1, &w1).unwrap();
        let b = weighted_level_set_measure(&g, l1 + dl, &w1).unwrap();
        prop_assert!(b <= a + 1e-12);
        let sum = w1.zip_with(&w2, |x, y| x + y).unwrap();
        let s = weighted_level_set_measure(&g, l1, &sum).unwrap();
        let c = weighted_level_set_measure(&g, l1, &w2).unwrap();
        prop_assert!((s - a - c).abs() <= 1e-10);
    }

    #[test]
    fn four_adic_differences_of_distinct_generations_are_orthogonal(
        a in prop::collection::vec(-2.0f64..2.0, 1 + 4 + 16),
        b in prop::collection::vec(-2.0f64..2.0, 1 + 4 + 16),
        n in 0usize..3,
        m in 0usize..3,
    ) {
        prop_assume!(n != m);
        let offsets = [0usize, 1, 5, 21];
        let only = |kind, src: &[f64], gen: usize| {
            let mut mart = FourAdicMartingale::new(kind, 0.0, 3);
            for i in 0..(1usize << (2 * gen)) {
                mart.set_coeff(FourAdicInterval::new(gen as u32, i as u64).unwrap(), src[offsets[gen] + i]).unwrap();
            }
            mart.to_step_function().unwrap()
        };
        let f_n = only(MartingaleKind::H, &a, n);
        let g_m = only(MartingaleKind::G, &b, m);
        prop_assert!(f_n.inner(&g_m).unwrap().abs() <= 1e-12);
        let f_m = only(MartingaleKind::H, &b, m);
        prop_assert!(f_n.inner(&f_m).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn h_and_g_patterns_have_zero_integral() {
    for kind in [MartingaleKind::H, MartingaleKind::G] {
        let s: f64 = (0..4).map(|q| kind.quarter_value(q)).sum();
        assert_eq!(s, 0.0);
    }
}
