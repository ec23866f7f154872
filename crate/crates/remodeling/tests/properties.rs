mod common;

use common::{q8, synthetic, xi_distribution};
use proptest::prelude::*;
use remodeling::*;

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

fn grid(bits: std::ops::RangeInclusive<u32>) -> impl Strategy<Value = Vec<f64>> {
    bits.prop_flat_map(|b| prop::collection::vec(-5.0f64..5.0, 1usize << b))
}

fn exponents() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::btree_set(1u32..=7, 1..=3).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_skew_symmetric(f in grid(2..=9), seed in any::<u64>()) {
        let g: Vec<f64> = f.iter().enumerate().map(|(i, v)| ((i as f64 + seed as f64 % 97.0) * 1.7).sin() + v * 0.1).collect();
        let hf = periodic_hilbert_transform(&f).unwrap();
        let hg = periodic_hilbert_transform(&g).unwrap();
        let fc: Vec<f64> = f.iter().map(|v| v - hf.removed_mean).collect();
        let gc: Vec<f64> = g.iter().map(|v| v - hg.removed_mean).collect();
        prop_assert!((inner(&hf.values, &gc) + inner(&fc, &hg.values)).abs() < 1e-8);
    }

    #[test]
    fn transform_does_not_increase_energy(f in grid(2..=10)) {
        let h = periodic_hilbert_transform(&f).unwrap();
        let fc: Vec<f64> = f.iter().map(|v| v - h.removed_mean).collect();
        prop_assert!(inner(&h.values, &h.values) <= inner(&fc, &fc) + 1e-9);
        prop_assert!(h.values.iter().sum::<f64>().abs() < 1e-8);
    }

    #[test]
    fn transform_squared_is_minus_identity_off_nyquist(f in grid(2..=9)) {
        let h = periodic_hilbert_transform(&f).unwrap();
        let hh = periodic_hilbert_transform(&h.values).unwrap();
        let m = f.len();
        let nyq = f.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -v }).sum::<f64>() / m as f64;
        for j in 0..m {
            let alt = if j % 2 == 0 { nyq } else { -nyq };
            prop_assert!((hh.values[j] + f[j] - h.removed_mean - alt).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_and_kernel_forms_agree(f in grid(2..=8)) {
        let a = periodic_hilbert_transform(&f).unwrap();
        let b = periodic_hilbert_by_kernel(&f).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn transform_commutes_with_shifts(f in grid(2..=8), k in 0usize..256) {
        let m = f.len();
        let shifted: Vec<f64> = (0..m).map(|j| f[(j + k) % m]).collect();
        let a = periodic_hilbert_transform(&f).unwrap().values;
        let b = periodic_hilbert_transform(&shifted).unwrap().values;
        for j in 0..m {
            prop_assert!((b[j] - a[(j + k) % m]).abs() < 1e-9);
        }
    }

    #[test]
    fn locate_inverts_start(e in exponents(), x in 0.0f64..1.0) {
        let s = ProliferationSchedule::new(e).unwrap();
        let a = s.locate(x).unwrap();
        s.validate(&a).unwrap();
        let len = 4f64.powi(-(s.total_digits() as i32));
        let x0 = s.start(&a);
        prop_assert!(x0 <= x + 1e-12 && x < x0 + len + 1e-12);
        prop_assert_eq!(s.locate((x0 + 0.5 * len).min(1.0 - 1e-16)).unwrap(), a);
    }

    #[test]
    fn square_wave_steps_follow_residues(n in 1u32..=6, i in 0u64..4096) {
        let i = i % steps(n);
        prop_assert_eq!(sqs_step(i), sqs_step(i % 4));
        prop_assert_eq!(sqc_step(i), sqc_step(i % 4));
        let live = i >= 4 && i < steps(n) - 4;
        prop_assert_eq!(sqsm_step(n, i), if live { sqs_step(i) } else { 0.0 });
    }

    #[test]
    fn remodeled_values_sit_in_the_model_ranges(e in exponents(), x in 0.0f64..1.0) {
        let gens = e.len();
        let q = q8().padded_to(3).unwrap();
        let q = if gens == 3 { q } else { synthetic((0..gens).map(|j| vec![0.5; 1 << (2 * j)]).collect(), 2.0) };
        let r = remodel(&q, &ProliferationSchedule::new(e).unwrap()).unwrap();
        let v = r.eval(x).unwrap();
        let lo = |m: &dyadic_core::FourAdicMartingale| m.cell_values().into_iter().fold(f64::INFINITY, f64::min);
        let hi = |m: &dyadic_core::FourAdicMartingale| m.cell_values().into_iter().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v.rho >= lo(&q.g) - 1e-12 && v.rho <= hi(&q.g) + 1e-12);
        prop_assert!(v.phi >= lo(&q.f) - 1e-12 && v.phi <= hi(&q.f) + 1e-12);
        prop_assert!(v.w > 0.0 && v.w <= hi(&q.w) + 1e-12);
    }

    #[test]
    fn deeper_schedules_never_increase_the_weighted_distance(k in 0u32..=3) {
        let s = ProliferationSchedule::new(vec![1, 2, 3]).unwrap().shifted(k).unwrap();
        let a = remodel(q8(), &s).unwrap().distribution_report();
        let b = remodel(q8(), &s.shifted(1).unwrap()).unwrap().distribution_report();
        prop_assert!(b.rho_weighted <= a.rho_weighted + 1e-15);
        prop_assert!(a.rho_lebesgue < 1e-12 && b.rho_lebesgue < 1e-12);
    }

    #[test]
    fn estimate_decreases_in_delta(d1 in 0.05f64..0.5, d2 in 0.05f64..0.5, seed in any::<u64>()) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let d = xi_distribution();
        let a = lemma83_monte_carlo(d, &[0.5; 4], 0.0, lo, 20_000, seed).unwrap();
        let b = lemma83_monte_carlo(d, &[0.5; 4], 0.0, hi, 20_000, seed).unwrap();
        prop_assert!(b.estimate <= a.estimate);
    }
}
