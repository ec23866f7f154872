use bellman_weighted::*;
use dyadic_core::{weighted_level_set_measure, DyadicStepFunction, TransformSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

const Q: f64 = 4.0;
const K: usize = 3;

struct Fixture {
    dp: WeightedDp,
    tol: f64,
}

fn fixture(class: WeightedClass) -> &'static Fixture {
    static SIGNS: OnceLock<Fixture> = OnceLock::new();
    static CONTRACTIVE: OnceLock<Fixture> = OnceLock::new();
    let cell = if class == WeightedClass::Signs {
        &SIGNS
    } else {
        &CONTRACTIVE
    };
    cell.get_or_init(|| {
        let dp = WeightedDp::run(K, Q, WeightedConfig::coarse().with_class(class)).unwrap();
        let tol = dp.interpolation_residual(K, 300).unwrap();
        Fixture { dp, tol }
    })
}

fn b(fx: &Fixture, alpha: f64, beta: f64, gamma: f64) -> f64 {
    fx.dp.reduced_value(K, alpha, beta, gamma).unwrap()
}

fn reduced() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..4.0, 1.0f64..Q, -1.0f64..1.0).prop_map(|(a, be, s)| (a, be, s * a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increasing_in_alpha_and_beta((a, be, g) in reduced(), da in 0.0f64..1.0, db in 0.0f64..1.0) {
        for class in [WeightedClass::Signs, WeightedClass::Contractive] {
            let fx = fixture(class);
            let base = b(fx, a, be, g);
            prop_assert!(b(fx, a + da, be, g) >= base - fx.tol);
            let be2 = (be + db).min(Q);
            prop_assert!(b(fx, a, be2, g) >= base - fx.tol);
        }
    }

    #[test]
    fn even_in_gamma((a, be, g) in reduced()) {
        for class in [WeightedClass::Signs, WeightedClass::Contractive] {
            let fx = fixture(class);
            prop_assert!((b(fx, a, be, g) - b(fx, a, be, -g)).abs() <= fx.tol);
        }
    }

    #[test]
    fn constant_along_rays((a, be, g) in reduced(), m in 0.2f64..5.0, t in 0.2f64..5.0) {
        let fx = fixture(WeightedClass::Signs);
        let p = WeightedBellmanPoint { big_f: a * m, w: be * m, m, f: g, lambda: 1.0, q: Q };
        let v = fx.dp.value(K, &p).unwrap();
        prop_assert!((v - m * b(fx, a, be, g)).abs() <= 1e-9 * (1.0 + v));
        prop_assert!((fx.dp.value(K, &p.scale_level(t)).unwrap() - v).abs() <= 1e-9 * (1.0 + v));
    }

    #[test]
    fn concave_in_gamma_for_contractive((a, be, g) in reduced(), s in 0.0f64..1.0) {
        let fx = fixture(WeightedClass::Contractive);
        let h = s * (a - g.abs());
        let mid = b(fx, a, be, g);
        let avg = 0.5 * (b(fx, a, be, g + h) + b(fx, a, be, g - h));
        prop_assert!(mid >= avg - fx.tol);
    }

    #[test]
    fn witness_resimulates((a, be, g) in reduced()) {
        let fx = fixture(WeightedClass::Signs);
        let p = ReducedPoint { alpha: a, beta: be, gamma: g }.to_point(Q);
        let wit = fx.dp.witness(K, &p).unwrap();
        let t = dyadic_core::martingale_transform(&wit.phi, &wit.spec).unwrap();
        let again = weighted_level_set_measure(&t, p.lambda, &wit.w).unwrap();
        prop_assert_eq!(again, wit.measure);
        prop_assert!(wit.a1 <= Q * (1.0 + 1e-9));
        prop_assert!(wit.big_f_actual <= p.big_f * (1.0 + 1e-9) + 1e-12);
        prop_assert!((wit.phi.mean() - p.f).abs() <= 1e-9);
        prop_assert!((wit.w.mean() - p.w).abs() <= 1e-9);
        prop_assert!(wit.measure <= wit.value + fx.tol);
    }

    #[test]
    fn weak_norm_ratio_is_scale_free(
        phi in prop::collection::vec(-3.0f64..3.0, 8),
        w in prop::collection::vec(1.0f64..4.0, 8),
        eps in prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 1.0]), 7),
        s in 0.1f64..10.0,
        t in 0.1f64..10.0,
    ) {
        let spec = TransformSpec::from_levels(vec![eps[..1].to_vec(), eps[1..3].to_vec(), eps[3..].to_vec()]).unwrap();
        let f = DyadicStepFunction::new(3, phi.clone()).unwrap();
        let wf = DyadicStepFunction::new(3, w.clone()).unwrap();
        let r = weak_norm_ratio(&f, &wf, &spec).unwrap();
        let f2 = DyadicStepFunction::new(3, phi.iter().map(|x| x * t).collect()).unwrap();
        let w2 = DyadicStepFunction::new(3, w.iter().map(|x| x * s).collect()).unwrap();
        let r2 = weak_norm_ratio(&f2, &w2, &spec).unwrap();
        prop_assert!((r - r2).abs() <= 1e-9 * (1.0 + r));
        prop_assert!(r >= 0.0);
    }
}
