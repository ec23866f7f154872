mod common;

use common::{q8, synthetic, xi_distribution, zero_levels};
use dyadic_core::MartingaleKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use remodeling::*;
use std::f64::consts::PI;

fn schedule(e: &[u32]) -> ProliferationSchedule {
    ProliferationSchedule::new(e.to_vec()).unwrap()
}

#[test]
fn q8_quadruple_has_all_properties() {
    let q = q8();
    let r = q.verify().unwrap();
    assert!(r.domination_slack >= -1e-12);
    assert!(r.a1 <= 8.0 + 1e-9);
    assert!(r.link_defect <= 1e-12);
    assert!(r.payoff > 1.0, "payoff {}", r.payoff);
    assert!((r.payoff - q.payoff()).abs() < 1e-12);
    assert_eq!(q.generations, 3);
    assert!((q.level_set_weight() - q.flipped_level_set_weight().unwrap()).abs() < 1e-12);
}

#[test]
fn payoff_grows_with_q() {
    let cfg = bellman_weighted::WeightedConfig::coarse;
    let p1 = build_extremal_quadruple(1.0, 3, cfg()).unwrap();
    let r1 = p1.verify().unwrap();
    assert_eq!(r1.a1, 1.0);
    assert_eq!(r1.doubling, 1.0);
    assert!(p1.payoff() < q8().payoff());
}

#[test]
fn g_coefficients_mirror_f() {
    let q = q8();
    assert_eq!(q.g.constant, 0.0);
    for (rf, rg) in q.f.levels().iter().zip(q.g.levels()) {
        for (a, b) in rf.iter().zip(rg) {
            assert_eq!(*b, -a);
        }
    }
    let [_, _, a, b] = q.coefficients(0, 0);
    assert_eq!(b, -a);
    assert_eq!(q.coefficients(9, 0), [0.0; 4]);
}

#[test]
fn padding_adds_zero_generations() {
    let p = q8().padded_to(5).unwrap();
    assert_eq!(p.generations, 5);
    assert_eq!(p.coefficients(4, 17), [0.0; 4]);
    assert!((p.payoff() - q8().payoff()).abs() < 1e-12);
}

#[test]
fn square_waves_at_n1() {
    let s = sqsin_sqcos(1).unwrap();
    assert_eq!(s.sqsin.len(), 16);
    assert_eq!(s.sqsin, [-1.0, -1.0, 1.0, 1.0].repeat(4));
    assert_eq!(s.sqcos, [1.0, -1.0, -1.0, 1.0].repeat(4));
    let cross: f64 = s.sqsin.iter().zip(&s.sqcos).map(|(a, b)| a * b).sum();
    assert_eq!(cross, 0.0);
    assert_eq!(s.sqsm.iter().sum::<f64>(), 0.0);
    assert!(s.sqsm[..4].iter().chain(&s.sqsm[12..]).all(|v| *v == 0.0));
    assert_eq!(&s.sqsm[4..12], &s.sqsin[4..12]);
    assert_eq!(s.eval(0.65).unwrap(), (1.0, -1.0, 1.0));
    assert!(sqsin_sqcos(0).is_err());
    assert!(s.eval(1.0).is_err());
}

#[test]
fn schedule_rejects_shallow_input() {
    assert!(ProliferationSchedule::new(vec![]).is_err());
    assert!(ProliferationSchedule::new(vec![3, 3]).is_err());
    assert!(ProliferationSchedule::new(vec![5, 4]).is_err());
    assert!(ProliferationSchedule::new(vec![0, 2]).is_err());
    assert!(ProliferationSchedule::new(vec![13]).is_err());
    let s = schedule(&[3, 5, 7]);
    assert_eq!(s.shifted(2).unwrap().exponents(), &[5, 7, 9]);
    assert_eq!(s.total_digits(), 18);
    assert_eq!(ProliferationSchedule::from_json(&s.to_json()).unwrap(), s);
    assert!(ProliferationSchedule::from_json("{\"exponents\":[2,1]}").is_err());
    assert!(remodel(q8(), &schedule(&[3, 5])).is_err());
}

#[test]
fn locate_and_start_agree() {
    let s = schedule(&[1, 2]);
    let a = s.locate(0.3).unwrap();
    assert_eq!(a.0, vec![4, 51]);
    assert!((s.start(&a) - (4.0 / 16.0 + 51.0 / 1024.0)).abs() < 1e-15);
    assert_eq!(s.supervisor(&a, 1).index, 0);
    assert!(s.locate(-0.1).is_err());
    assert!(schedule(&[8, 9, 10]).locate(0.5).is_err());
}

#[test]
fn zero_coefficients_give_constant_weight_and_zero_rho() {
    let q = synthetic(zero_levels(2), 3.0);
    let r = remodel(&q, &schedule(&[2, 3])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let v = r.eval(rng.gen()).unwrap();
        assert_eq!(v.w, 3.0);
        assert_eq!(v.rho, 0.0);
        assert_eq!(v.phi, 0.0);
    }
    assert_eq!(r.w_doubling().constant, 1.0);
}

#[test]
fn pointwise_values_follow_the_display_formulas() {
    let q = q8();
    let s = schedule(&[1, 2, 3]);
    let r = remodel(q, &s).unwrap();
    let addr = CellAddress(vec![6, 9, 200]);
    let v = r.eval_cell(&addr).unwrap();
    let h = |i: u64| MartingaleKind::H.quarter_value((i % 4) as usize);
    let g = |i: u64| MartingaleKind::G.quarter_value((i % 4) as usize);
    let sups = [0usize, 2, 2 * 4 + 1];
    let mut rho = 0.0;
    let mut phi = q.f.constant;
    let mut w = q.w.constant;
    for (j, &i) in addr.0.iter().enumerate() {
        let [c, _, a, b] = q.coefficients(j, sups[j]);
        rho += b * g(i);
        phi += a * h(i);
        let n = s.exponents()[j] as u64;
        let live = i >= 4 && i < 4u64.pow(n as u32 + 1) - 4;
        if live {
            w += c * h(i);
        }
    }
    assert!((v.rho - rho).abs() < 1e-12);
    assert!((v.phi - phi).abs() < 1e-12);
    assert!((v.w - w).abs() < 1e-12);
    assert!(r.eval_cell(&CellAddress(vec![16, 0, 0])).is_err());
}

#[test]
fn distributions_match_at_3_5_7() {
    let r = remodel(q8(), &schedule(&[3, 5, 7])).unwrap();
    let d = r.distribution_report();
    assert!(d.rho_lebesgue < 1e-12);
    assert!(d.rho_weighted <= 0.05, "{d:?}");
    assert!(d.min_w > 0.0);
    assert!((d.payoff_remodeled - d.payoff_model).abs() <= 1e-9);
    let finer = remodel(q8(), &schedule(&[5, 7, 9]))
        .unwrap()
        .distribution_report();
    assert!(finer.rho_weighted <= 0.75 * d.rho_weighted, "{finer:?}");
    assert!(finer.weight_lebesgue < d.weight_lebesgue);
}

/// Weighted empirical CDFs of `ρ` (weight `W`) and `g` (weight `w`) from independent
/// uniform points.
#[test]
fn two_sample_comparison_agrees_with_exact_distance() {
    let q = q8();
    let r = remodel(q, &schedule(&[3, 5, 7])).unwrap();
    let exact = r.distribution_report().rho_weighted;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mut model: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut remodeled: Vec<(f64, f64)> = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        model.push((q.g.evaluate(x).unwrap(), q.w.evaluate(x).unwrap()));
        let v = r.eval(rng.gen()).unwrap();
        remodeled.push((v.rho, v.w));
    }
    let ecdf = |s: &[(f64, f64)], t: f64| {
        let total: f64 = s.iter().map(|p| p.1).sum();
        s.iter().filter(|p| p.0 <= t).map(|p| p.1).sum::<f64>() / total
    };
    let mut points: Vec<f64> = q.g.cell_values();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let dist = points
        .iter()
        .map(|&t| (ecdf(&model, t) - ecdf(&remodeled, t)).abs())
        .fold(0.0, f64::max);
    assert!(dist <= 0.05, "empirical distance {dist}");
    assert!(
        (dist - exact).abs() <= 0.03,
        "empirical {dist} exact {exact}"
    );
}

#[test]
fn red_set_identity_is_exact() {
    let small = remodel(q8(), &schedule(&[1, 2, 3]))
        .unwrap()
        .red_set_identity()
        .unwrap();
    assert!(small.holds);
    assert_eq!(small.mismatches, 0);
    assert_eq!(small.cells_enumerated, 1 << 18);
    assert!((small.red_lebesgue - small.level_set_lebesgue).abs() < 1e-12);
    let big = remodel(q8(), &schedule(&[3, 5, 7]))
        .unwrap()
        .red_set_identity()
        .unwrap();
    assert!(big.holds);
    assert_eq!(big.red_chains, small.red_chains);
    assert!(!big.red_chains.is_empty());
}

#[test]
fn weight_doubling_is_bounded_across_schedules() {
    for e in [[1u32, 2, 3], [3, 5, 7], [5, 7, 9]] {
        let d = remodel(q8(), &schedule(&e)).unwrap().w_doubling();
        assert!(d.constant <= 8.0, "{e:?}: {d:?}");
        assert!(d.constant >= 1.0);
    }
}

#[test]
fn hilbert_of_cosine_is_sine() {
    let m = 256;
    let f: Vec<f64> = (0..m)
        .map(|j| (2.0 * PI * 3.0 * j as f64 / m as f64).cos() + 0.5)
        .collect();
    let h = periodic_hilbert_transform(&f).unwrap();
    assert!((h.removed_mean - 0.5).abs() < 1e-12);
    for (j, v) in h.values.iter().enumerate() {
        assert!((v - (2.0 * PI * 3.0 * j as f64 / m as f64).sin()).abs() < 1e-12);
    }
    let k = periodic_hilbert_by_kernel(&f).unwrap();
    assert!(k
        .values
        .iter()
        .zip(&h.values)
        .all(|(a, b)| (a - b).abs() < 1e-8));
}

#[test]
fn hilbert_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| 2.5 * x - 0.75 * y).collect();
    let (hf, hg, hm) = (
        periodic_hilbert_transform(&f).unwrap().values,
        periodic_hilbert_transform(&g).unwrap().values,
        periodic_hilbert_transform(&mix).unwrap().values,
    );
    for i in 0..1024 {
        assert!((hm[i] - (2.5 * hf[i] - 0.75 * hg[i])).abs() < 1e-10);
    }
}

#[test]
fn fft_and_kernel_agree_on_square_waves() {
    let s = sqsin_sqcos(2).unwrap();
    let f: Vec<f64> = s.sqsin.iter().flat_map(|v| [*v; 8]).collect();
    let a = periodic_hilbert_transform(&f).unwrap().values;
    let b = periodic_hilbert_by_kernel(&f).unwrap().values;
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
}

#[test]
fn grid_must_be_a_power_of_two() {
    assert!(periodic_hilbert_transform(&[1.0; 12]).is_err());
    assert!(periodic_hilbert_by_kernel(&[1.0; 2]).is_err());
    assert!(xi_report(1000, 4, 1, 0).is_err());
}

#[test]
fn xi_signs_zeros_and_skew_at_2_16() {
    let r = xi_report(1 << 16, 4, 4, 3).unwrap();
    assert!(r.sign_agreement >= 0.99, "{r:?}");
    assert!(r.zero_offset_cells <= 1.0);
    assert!(r.skew_defect <= 1e-8);
    assert!(r.min_xi >= -1e-12);
}

#[test]
fn xi_table_matches_the_analytic_conjugate() {
    let m = 1 << 16;
    let t = XiTable::compute(m).unwrap();
    for j in (0..m).step_by(97) {
        let x = (j as f64 + 0.5) / m as f64;
        if [0.0, 0.5, 1.0].iter().all(|s| (x - s).abs() >= 1.0 / 64.0) {
            assert!((t.values[j] - xi_analytic(x)).abs() < 1e-3, "x = {x}");
        }
    }
    assert!(t.at(0.0) > t.at(0.1) && t.at(0.1) > t.at(0.2));
    assert!(t.at(0.49999) > 6.0);
    let coarse = XiTable::compute(1 << 10).unwrap();
    assert!(
        t.at(0.0) > coarse.at(0.0) + 2.0,
        "log growth at the singular point"
    );
}

#[test]
fn single_generation_copy_has_no_remainder() {
    let q = synthetic(vec![vec![1.0]], 1.0);
    for n in 3..=8u32 {
        let r = remodel(&q, &schedule(&[n])).unwrap();
        let d = hilbert_remodel_decomposition(&r, 1 << 18)
            .unwrap()
            .report(0.1)
            .unwrap();
        assert!(d.theta_sup < 1e-9, "n = {n}: {d:?}");
    }
}

#[test]
fn remainder_shrinks_as_the_second_generation_refines() {
    let q = synthetic(vec![vec![1.0], vec![0.5, -0.5, 1.0, 0.25]], 1.0);
    let mut prev = f64::INFINITY;
    for n in 2..=7u32 {
        let r = remodel(&q, &schedule(&[1, n])).unwrap();
        let d = hilbert_remodel_decomposition(&r, 1 << 20)
            .unwrap()
            .report(0.1)
            .unwrap();
        assert!(d.theta_measure < 0.5 * prev, "n = {n}: {d:?}");
        prev = d.theta_measure;
    }
    assert!(prev < 1e-3);
}

#[test]
fn zero_coefficients_give_zero_remainder() {
    let q = synthetic(zero_levels(2), 1.0);
    let r = remodel(&q, &schedule(&[1, 3])).unwrap();
    let d = hilbert_remodel_decomposition(&r, 1 << 12).unwrap();
    assert!(d.theta.iter().chain(&d.main_sum).all(|v| *v == 0.0));
}

#[test]
fn q8_decomposition_carries_the_payoff() {
    let mut prev = f64::INFINITY;
    for e in [[1u32, 2, 3], [1, 2, 4]] {
        let r = remodel(q8(), &schedule(&e)).unwrap();
        let d = hilbert_remodel_decomposition(&r, 1 << 22).unwrap();
        let rep = d.report(0.2).unwrap();
        assert!(rep.payoff_holds, "{rep:?}");
        assert!(rep.theta_measure < prev);
        prev = rep.theta_measure;
        assert!((d.removed_mean - q8().f.constant).abs() < 1e-9);
    }
    let r = remodel(q8(), &schedule(&[1, 2, 3])).unwrap();
    assert!(hilbert_remodel_decomposition(&r, 1 << 16).is_err());
    assert!(hilbert_remodel_decomposition(&r, 1 << 22)
        .unwrap()
        .report(0.0)
        .is_err());
}

#[test]
fn frozen_delta_is_below_calibration() {
    let d = xi_distribution();
    let c = d.calibrate_delta();
    assert!(FROZEN_DELTA <= c, "calibrated {c}");
    assert!(c < 0.5);
    assert!((d.mean - 0.7424).abs() < 1e-3);
    assert!(d.max_window(2.0 * c) <= 1.0 - c + 1e-6);
}

#[test]
fn single_variable_bound() {
    let e =
        lemma83_monte_carlo(xi_distribution(), &[1.0], 0.0, FROZEN_DELTA, 1_000_000, 1).unwrap();
    assert!(e.pass(), "{e:?}");
    assert!(e.half_width > 0.0 && e.half_width < 0.002);
}

#[test]
fn bound_holds_for_every_shift_at_m64() {
    let th = vec![0.125; 64];
    let d = xi_distribution();
    let centre = -8.0 * d.mean;
    for e in lemma83_sweep(d, &th, &[-2.0, 0.0, 2.0, centre], FROZEN_DELTA, 200_000, 2).unwrap() {
        assert!(e.pass(), "{e:?}");
    }
}

#[test]
fn monte_carlo_is_deterministic_and_rejects_bad_input() {
    let d = xi_distribution();
    let a = lemma83_monte_carlo(d, &[0.5; 4], -1.0, 0.3, 70_000, 9).unwrap();
    let b = lemma83_monte_carlo(d, &[0.5; 4], -1.0, 0.3, 70_000, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.csv_line().starts_with("9,70000,4,-1,"));
    assert!(lemma83_monte_carlo(d, &[1.0], 0.0, 0.3, 0, 1).is_err());
    assert!(lemma83_monte_carlo(d, &[1.0, -1.0], 0.0, 0.3, 10, 1).is_err());
    assert!(lemma83_monte_carlo(d, &[], 0.0, 0.3, 10, 1).is_err());
}

#[test]
fn case_split_routing() {
    let d = xi_distribution();
    let one = [1.0 / d.mean];
    let r = case_split_check(d, &one, 50_000, 1).unwrap();
    assert_eq!(r.case, CaseSplit::Large);
    assert!(r.large.is_some() && r.pass);
    let m = 64;
    let th = vec![1.0 / (m as f64 * d.mean); m];
    let r = case_split_check(d, &th, 100_000, 1).unwrap();
    assert_eq!(r.case, CaseSplit::Small);
    assert!(
        r.independent.unwrap() >= 0.5 && r.remodeled.unwrap() >= 0.25 && r.pass,
        "{r:?}"
    );
    assert!(r.chebyshev.unwrap() >= 0.5);
    assert!(matches!(
        case_split_check(d, &[1.0], 10, 1),
        Err(RemodelError::Unnormalized(_))
    ));
}

#[test]
fn boundary_of_the_case_split_is_case_two() {
    assert_eq!(CaseSplit::classify(0.125), CaseSplit::Large);
    assert_eq!(CaseSplit::classify(0.125 - 1e-15), CaseSplit::Small);
    assert_eq!(C0, 1.0 / 8.0);
}
