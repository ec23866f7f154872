use bellman_unweighted::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn dp() -> &'static UnweightedDp {
    static DP: OnceLock<UnweightedDp> = OnceLock::new();
    DP.get_or_init(|| UnweightedDp::run(5, DpConfig::coarse()).unwrap())
}

fn point() -> impl Strategy<Value = BellmanPoint> {
    (0.01f64..3.0, -1.0f64..=1.0, -0.5f64..6.0).prop_map(|(big_f, v, lambda)| BellmanPoint {
        big_f,
        f: v * big_f,
        lambda,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_is_even_in_f(p in point()) {
        let q = BellmanPoint { f: -p.f, ..p };
        prop_assert_eq!(closed_form_b(p).unwrap(), closed_form_b(q).unwrap());
    }

    #[test]
    fn closed_form_in_unit_interval_and_weak_bound(p in point()) {
        let v = closed_form_b(p).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        if p.lambda > 0.0 {
            prop_assert!(v <= 2.0 * p.big_f / p.lambda + 1e-12);
        }
    }

    #[test]
    fn closed_form_homogeneous(p in point(), t in 0.1f64..10.0) {
        let a = closed_form_b(p).unwrap();
        let c = closed_form_b(p.scaled(t)).unwrap();
        prop_assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn main_inequality_random(p in point(), s1 in -1.0f64..=1.0, s2 in -1.0f64..=1.0, mi2 in any::<bool>()) {
        let dp_ = s1 * (p.big_f - p.f);
        let dq = s2 * (p.big_f + p.f);
        let pat = if mi2 { MainPattern::Mi2 } else { MainPattern::Mi1 };
        let (plus, minus) = Split::pattern(0.5 * (dp_ + dq), 0.5 * (dq - dp_), pat).children(p);
        if plus.validate().is_ok() && minus.validate().is_ok() {
            prop_assert!(check_main_inequality(closed_form_b, p, plus, minus).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn dp_monotone_in_depth(p in point()) {
        let dp = dp();
        for k in 0..dp.depth() {
            prop_assert!(dp.value(k + 1, p).unwrap() >= dp.value(k, p).unwrap() - 1e-12);
        }
    }

    #[test]
    fn dp_dominated_by_closed_form(p in point()) {
        let dp = dp();
        let tol = dp.interpolation_tolerance();
        let v = dp.value(dp.depth(), p).unwrap();
        prop_assert!(v <= closed_form_b(p).unwrap() + tol, "{} vs {}", v, closed_form_b(p).unwrap());
    }

    #[test]
    fn witness_reaches_its_estimate(p in point(), k in 0usize..=5) {
        let dp = dp();
        let w = dp.witness(k, p).unwrap();
        prop_assert!((w.phi.l1_norm() - p.big_f).abs() < 1e-9 * (1.0 + p.big_f));
        prop_assert!((w.phi.mean() - p.f).abs() < 1e-9 * (1.0 + p.big_f));
        prop_assert!(w.measure >= w.lower - dp.witness_tolerance(), "{:?}", (w.measure, w.lower, w.value));
        prop_assert!(w.lower <= w.value + 1e-12);
    }

    #[test]
    fn grid_interpolation_is_exact_on_affine_data(x in 0.0f64..2.0, y in -1.0f64..1.0, z in 0.5f64..3.0) {
        let axes = [
            ValueGrid3::uniform_axis(0.0, 2.0, 5),
            ValueGrid3::uniform_axis(-1.0, 1.0, 7),
            ValueGrid3::uniform_axis(0.5, 3.0, 4),
        ];
        let g = ValueGrid3::from_fn(axes, GridMeta::default(), |[a, b, c]| 1.0 + 2.0 * a - b + 0.5 * c).unwrap();
        let want = 1.0 + 2.0 * x - y + 0.5 * z;
        prop_assert!((g.interpolate([x, y, z]) - want).abs() < 1e-12);
    }
}
