use bellman_unweighted::{BellmanPoint, Box3, DpConfig, GridMeta, UnweightedDp, ValueGrid3};
use bellman_weighted::*;
use dyadic_core::{DyadicStepFunction, TransformSpec};
use std::sync::OnceLock;

fn pt(big_f: f64, w: f64, m: f64, f: f64, lambda: f64, q: f64) -> WeightedBellmanPoint {
    WeightedBellmanPoint::new(big_f, w, m, f, lambda, q).unwrap()
}

fn signs_dp() -> &'static WeightedDp {
    static DP: OnceLock<WeightedDp> = OnceLock::new();
    DP.get_or_init(|| WeightedDp::run(3, 4.0, WeightedConfig::coarse()).unwrap())
}

fn four_adic_dp() -> &'static WeightedDp {
    static DP: OnceLock<WeightedDp> = OnceLock::new();
    DP.get_or_init(|| {
        WeightedDp::run(
            3,
            4.0,
            WeightedConfig::coarse().with_class(WeightedClass::FourAdic),
        )
        .unwrap()
    })
}

#[test]
fn reduction_examples() {
    let r = reduce(pt(2.0, 3.0, 1.5, 0.6, 0.5, 4.0)).unwrap();
    assert!((r.alpha - 2.0 / 0.75).abs() < 1e-12);
    assert!((r.beta - 2.0).abs() < 1e-12);
    assert!((r.gamma - 1.2).abs() < 1e-12);
    assert!(r.in_domain(4.0));
    assert!(!r.in_domain(1.5));
    let back = reduce(r.to_point(4.0)).unwrap();
    assert!((back.alpha - r.alpha).abs() < 1e-12 && (back.gamma - r.gamma).abs() < 1e-12);
}

#[test]
fn reduction_errors() {
    let p = pt(1.0, 2.0, 1.0, 0.5, 0.0, 4.0);
    assert_eq!(reduce(p), Err(WeightedError::NotReducible));
    assert!(matches!(
        WeightedBellmanPoint::new(0.1, 2.0, 1.0, 0.5, 1.0, 4.0),
        Err(WeightedError::OutsideDomain(..))
    ));
    assert!(matches!(
        WeightedBellmanPoint::new(1.0, 5.0, 1.0, 0.0, 1.0, 4.0),
        Err(WeightedError::OutsideDomain(..))
    ));
    assert!(WeightedBellmanPoint::new(1.0, 2.0, 1.0, f64::NAN, 1.0, 4.0).is_err());
}

#[test]
fn main_inequality_trivial_split_is_zero() {
    let p = pt(1.0, 2.0, 1.0, 0.3, 0.8, 4.0);
    let b = |x: &WeightedBellmanPoint| x.w * x.lambda;
    for pat in [
        WeightedPattern::Mi11,
        WeightedPattern::Mi21,
        WeightedPattern::Flat,
    ] {
        assert_eq!(
            check_weighted_main_inequality(b, &p, &p, &p, pat).unwrap(),
            0.0
        );
    }
}

#[test]
fn main_inequality_rejects_wrong_patterns() {
    let p = pt(1.0, 2.0, 1.0, 0.3, 0.8, 4.0);
    let b = |_: &WeightedBellmanPoint| 0.0;
    let plus = WeightedBellmanPoint {
        big_f: 1.2,
        w: 2.5,
        f: 0.5,
        lambda: 1.0,
        ..p
    };
    let minus = WeightedBellmanPoint {
        big_f: 0.8,
        w: 1.5,
        f: 0.1,
        lambda: 0.6,
        ..p
    };
    assert!(check_weighted_main_inequality(b, &p, &plus, &minus, WeightedPattern::Mi11).is_ok());
    assert!(matches!(
        check_weighted_main_inequality(b, &p, &plus, &minus, WeightedPattern::Mi21),
        Err(WeightedError::Pattern(..))
    ));
    assert!(matches!(
        check_weighted_main_inequality(b, &p, &plus, &minus, WeightedPattern::Flat),
        Err(WeightedError::Pattern(..))
    ));
    let skewed = WeightedBellmanPoint { w: 1.4, ..minus };
    assert!(check_weighted_main_inequality(b, &p, &plus, &skewed, WeightedPattern::Mi11).is_err());
}

#[test]
fn four_point_stencil_layout() {
    let p = pt(2.0, 2.0, 1.0, 0.5, 1.0, 4.0);
    let s = four_point_stencil(&p, 0.5, 0.5, 0.25).unwrap();
    let got: Vec<[f64; 4]> = s.iter().map(|x| [x.big_f, x.w, x.f, x.lambda]).collect();
    assert_eq!(
        got,
        vec![
            [1.5, 1.5, 0.25, 0.75],
            [1.5, 1.5, 0.75, 0.75],
            [2.5, 2.5, 0.25, 1.25],
            [2.5, 2.5, 0.75, 1.25]
        ]
    );
    assert!(s.iter().all(|x| x.m == 1.0));
    let lin = |x: &WeightedBellmanPoint| 3.0 * x.big_f - x.w + 2.0 * x.f + x.lambda;
    assert!(
        check_four_point_concavity(lin, &p, 0.5, 0.5, 0.25)
            .unwrap()
            .abs()
            < 1e-12
    );
    assert!(four_point_stencil(&p, 0.5, 1.5, 0.25).is_err());
}

#[test]
fn monotonicity_in_m_detects_increase() {
    let p = pt(2.0, 2.0, 1.0, 0.5, 1.0, 4.0);
    assert!(!check_monotone_in_m(|x| x.m, &p, 1.5, 1e-9).unwrap());
    assert!(check_monotone_in_m(|x| -x.m, &p, 1.5, 1e-9).unwrap());
    assert!(check_monotone_in_m(|x| x.m, &p, 0.5, 0.0).is_err());
}

/// Depth-0 problem by brute force with `m = F = 1`: the light half has weight `W ≥ 1`,
/// the heavy half `2β - W`, `φ = c ∓ t` with `(|c - t| W + |c + t| (2β - W)) / 2 ≤ 1`
/// (either sign of `t`), and one half enters the level set when `|t| > a`.
fn n0_oracle(a: f64, beta: f64, c: f64) -> f64 {
    if a < 0.0 {
        return beta;
    }
    let mut best: f64 = 0.0;
    let n = 400;
    for i in 0..=n {
        let w1 = 1.0 + (beta - 1.0) * i as f64 / n as f64;
        let w2 = 2.0 * beta - w1;
        for j in -n..=n {
            let t = 4.0 * j as f64 / n as f64;
            let cost = 0.5 * ((c - t).abs() * w1 + (c + t).abs() * w2);
            if cost <= 1.0 + 1e-12 && t.abs() > a {
                best = best.max(0.5 * w1.max(w2));
            }
        }
    }
    best
}

#[test]
fn n0_matches_brute_force() {
    for &beta in &[1.0, 1.7, 3.0, 4.0] {
        for &c in &[-1.0f64, -0.4, 0.0, 0.25, 0.9] {
            let thr = (1.0 + c.abs() * (beta - 1.0)) / beta;
            for &a in &[-0.5, 0.0, 0.2, 0.6, 1.0, 1.6, 3.0] {
                if (a - thr).abs() < 0.05 {
                    continue;
                }
                let got = n0_reduced(WeightedClass::Signs, a, beta, c);
                let want = n0_oracle(a, beta, c);
                assert!(
                    (got - want).abs() < 1e-9,
                    "a={a} beta={beta} c={c}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn n0_at_the_heavy_corner() {
    for &q in &[2.0, 4.0, 16.0] {
        assert_eq!(
            n0_reduced(WeightedClass::Signs, 0.5, q, 1.0),
            (2.0 * q - 1.0) / 2.0
        );
    }
    assert_eq!(n0_reduced(WeightedClass::FourAdic, 0.5, 2.0, 0.3), 0.0);
    assert_eq!(n0_reduced(WeightedClass::FourAdic, 0.0, 2.0, 0.3), 2.0);
    assert_eq!(n0_reduced(WeightedClass::FourAdic, 0.0, 2.0, 0.6), 0.0);
}

#[test]
fn q_one_agrees_with_the_unweighted_recursion() {
    let k = 8;
    let ucfg = DpConfig::coarse();
    let cfg = WeightedConfig {
        na: ucfg.nu,
        nc: ucfg.nv,
        split_w: 3,
        split_f: ucfg.split,
        split_big_f: ucfg.split,
        refine_rounds: 2,
        ..WeightedConfig::default()
    };
    let wdp = WeightedDp::run_values(k, 1.0, cfg).unwrap();
    let udp = UnweightedDp::run(k, ucfg).unwrap();
    let tol = udp.interpolation_tolerance() + wdp.interpolation_residual(k, 400).unwrap();
    let table = wdp.level(k).unwrap();
    let mut worst: f64 = 0.0;
    for ia in 0..table.na - 1 {
        for ic in 0..table.nc {
            let [a, _, c] = table.node(ia, 0, ic);
            let u = udp
                .value(
                    k,
                    BellmanPoint {
                        big_f: 1.0,
                        f: c,
                        lambda: a,
                    },
                )
                .unwrap();
            worst = worst.max((table.at(ia, 0, ic) - u).abs());
        }
    }
    assert!(worst <= tol, "sup gap {worst} above {tol}");
}

#[test]
fn values_grow_with_depth() {
    let dp = signs_dp();
    for k in 1..=dp.depth() {
        let (hi, lo) = (dp.level(k).unwrap(), dp.level(k - 1).unwrap());
        for (x, y) in hi.values.iter().zip(&lo.values) {
            assert!(*x >= *y - 1e-9, "N_{k} below N_{}", k - 1);
        }
    }
}

#[test]
fn homogeneity_of_the_tables() {
    let dp = signs_dp();
    let p = pt(1.3, 2.5, 1.0, -0.4, 0.7, 4.0);
    let v = dp.value(3, &p).unwrap();
    assert!((dp.value(3, &p.scale_weight(2.5)).unwrap() - 2.5 * v).abs() < 1e-9);
    assert!((dp.value(3, &p.scale_level(0.3)).unwrap() - v).abs() < 1e-9);
    let r = reduce(p).unwrap();
    assert!((dp.reduced_value(3, r.alpha, r.beta, r.gamma).unwrap() - v).abs() < 1e-9);
}

#[test]
fn dyadic_witness_replays_its_table_value() {
    let dp = signs_dp();
    let p = ReducedPoint {
        alpha: 1.2,
        beta: 3.0,
        gamma: 0.4,
    }
    .to_point(4.0);
    let wit = dp.witness(3, &p).unwrap();
    // The replay is an explicit admissible pair, so its measure is a true lower bound;
    // on the coarse tables it stays within a few percent of the upper-node estimate.
    assert!(
        wit.measure >= 0.95 * wit.lower,
        "{} vs {}",
        wit.measure,
        wit.lower
    );
    assert!(wit.measure <= wit.value + 1e-9);
    assert!(wit.a1 <= 4.0 + 1e-9);
    assert!(wit.big_f_actual <= p.big_f + 1e-9);
    assert_eq!(wit.phi.depth(), 4);
    let direct = weak_norm_ratio(&wit.phi, &wit.w, &wit.spec).unwrap();
    assert!(direct >= wit.ratio() - 1e-12);
    assert!(matches!(
        four_adic_dp().witness(3, &p),
        Err(WeightedError::Config(..))
    ));
}

#[test]
fn four_adic_replay_is_admissible() {
    let dp = four_adic_dp();
    for &(a, b, c) in &[(1.0, 2.0, 0.5), (0.5, 3.0, -0.3), (2.0, 4.0, 1.0)] {
        let p = ReducedPoint {
            alpha: a,
            beta: b,
            gamma: c,
        }
        .to_point(4.0);
        let r = dp.four_adic_replay(3, &p).unwrap();
        assert!(
            r.level_set_weight() >= r.lower - 1e-9,
            "{} < {}",
            r.level_set_weight(),
            r.lower
        );
        let (bf, f, w) = (r.big_f.cell_values(), r.f.cell_values(), r.w.cell_values());
        for i in 0..w.len() {
            assert!(
                bf[i] >= f[i].abs() * w[i] * (1.0 - 1e-9) - 1e-12,
                "cell {i} not constant-admissible"
            );
            assert!(w[i] >= 1.0 - 1e-9);
        }
        let step = r.w.to_step_function().unwrap();
        assert!(weights::a1_constant(&step).unwrap() <= 4.0 * (1.0 + 1e-9));
        assert!((r.payoff() * p.big_f - r.level_set_weight()).abs() < 1e-9);
    }
}

#[test]
fn obstacle_configuration() {
    for &q in &[4.0, 16.0, 64.0] {
        let rep = verify_weighted_obstacle(q).unwrap();
        assert!((rep.ratio - q / (2.0 * (q + 1.0))).abs() < 1e-12);
        assert!(rep.pass);
        assert!(rep.psi_on_plus_minus >= rep.b / 2.0 && rep.b / 2.0 >= rep.lambda);
        assert!((rep.a1 - (q + 1.0) / 2.0).abs() < 1e-9);
    }
    assert!(verify_weighted_obstacle(1.0).is_err());
    assert!(verify_weighted_obstacle_with(4.0, 1.0, 0.5).is_err());
}

fn quadratic_grid() -> ValueGrid3 {
    let bounds = Box3 {
        lo: [0.5, 1.0, -0.5],
        hi: [3.0, 3.0, 2.0],
    };
    let res = [11, 9, 11];
    let axes = [0, 1, 2].map(|i| ValueGrid3::uniform_axis(bounds.lo[i], bounds.hi[i], res[i]));
    let meta = GridMeta {
        q: Some(4.0),
        k: 0,
        bounds: Some(bounds),
        resolution: res,
        smoothing: "none".into(),
        coordinates: ["alpha".into(), "beta".into(), "gamma".into()],
    };
    ValueGrid3::from_fn(axes, meta, |[a, b, g]| {
        2.0 * a - a * a - 0.5 * b * b + a * b - g * g
    })
    .unwrap()
}

#[test]
fn quadratic_form_of_a_quadratic() {
    let grid = quadratic_grid();
    let (al, be, ga) = (1.5, 2.0, 0.25);
    let s = quadratic_form_sample(
        &grid,
        ReducedPoint {
            alpha: al,
            beta: be,
            gamma: ga,
        },
        [0.25, 0.25, 0.25],
        1e-9,
    )
    .unwrap();
    // B_αα = -2, B_ββ = -1, B_αβ = 1, B_γγ = -2, B_α = 2 - 2α + β, B_γ = -2γ.
    let psi = 2.0 * al * al - 2.0 * al * be + be * be;
    let a2 = 2.0 * al * (2.0 - 2.0 * al + be) - 2.0 * al * al;
    let k = psi + (2.0 * al * al + be * be) * ga;
    let l = -psi + a2 + be * be;
    let n = 2.0 * (1.0 + 3.0 * ga + ga * ga) + 4.0 * ga * ga - a2 + 2.0 * al * al * ga;
    assert!((s.psi - psi).abs() < 1e-9);
    assert!((s.k - k).abs() < 1e-9 && (s.l - l).abs() < 1e-9 && (s.n - n).abs() < 1e-9);
    assert!((s.b_gamma + 2.0 * ga).abs() < 1e-9);
    assert_eq!(
        s.status,
        if n >= l * l / (4.0 * k) {
            FormStatus::Holds
        } else {
            FormStatus::Fails
        }
    );
    assert_eq!(
        quadratic_form_sample(
            &grid,
            ReducedPoint {
                alpha: 0.6,
                beta: 2.0,
                gamma: 0.0
            },
            [0.25; 3],
            1e-9
        ),
        Err(WeightedError::StencilExit)
    );
    let (sweep, samples) = quadratic_form_sweep(&grid, 1, 1e-9).unwrap();
    assert_eq!(sweep.samples, samples.len());
    assert!(samples.iter().all(|x| x.point.gamma >= 0.0));
}

#[test]
fn weak_norm_ratio_examples() {
    let w = DyadicStepFunction::new(1, vec![1.0, 1.0]).unwrap();
    let spec = TransformSpec::from_levels(vec![vec![1.0]]).unwrap();
    let zero = DyadicStepFunction::new(1, vec![0.0, 0.0]).unwrap();
    assert_eq!(weak_norm_ratio(&zero, &w, &spec).unwrap(), 0.0);
    // T φ = (-1/2, 1/2), ‖φ‖ = 1/2, level 1/2 hits half the interval.
    let phi = DyadicStepFunction::new(1, vec![0.0, 1.0]).unwrap();
    assert!((weak_norm_ratio(&phi, &w, &spec).unwrap() - 0.5).abs() < 1e-15);
    // A1 constant 2 and weight 3 on the level set.
    let w = DyadicStepFunction::new(1, vec![1.0, 3.0]).unwrap();
    let want = 0.5 * 1.5 / (1.5 * 2.0);
    assert!((weak_norm_ratio(&phi, &w, &spec).unwrap() - want).abs() < 1e-15);
}

#[test]
fn log_growth_fit_recovers_an_exact_power() {
    let qs = powers_of_two(8);
    let ratios: Vec<f64> = qs.iter().map(|q: &f64| 1.5 * q.ln().powf(0.3)).collect();
    let fit = fit_log_growth(&qs, &ratios).unwrap();
    assert!((fit.exponent - 0.3).abs() < 1e-12);
    assert!(fit.half_width < 1e-9);
    assert!(fit_log_growth(&qs[..2], &ratios[..2]).is_err());
}

#[test]
fn bookkeeping_statuses() {
    let qs = powers_of_two(60);
    let k = BookkeepingConstants::default();
    let r = bookkeeping_witness(0.1, &qs, k).unwrap();
    assert_eq!(r.threshold(), Some(2.0));
    assert!(r.rows.last().unwrap().lhs > 6.0);
    let r = bookkeeping_witness(0.2, &qs, k).unwrap();
    assert_eq!(r.status, BookkeepingStatus::Inconclusive);
    let r = bookkeeping_witness(0.5, &qs, k).unwrap();
    assert_eq!(r.status, BookkeepingStatus::NoContradiction);
    assert!(r.final_slope < -1.0);
    assert!(bookkeeping_witness(1.5, &qs, k).is_err());
    assert!(bookkeeping_witness(0.5, &[4.0, 2.0], k).is_err());
}
