use bellman_unweighted::{BellmanPoint, Box3, UnweightedDp};
use bellman_weighted::{
    bookkeeping_witness, empirical_weak_norm_ratio, fit_log_growth, four_point_stencil,
    powers_of_two, quadratic_form_sweep, verify_weighted_obstacle, BookkeepingStatus, FormStatus,
    WeightedBellmanPoint, WeightedConfig, WeightedDp, WeightedError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Report};
use crate::{CliError, ExperimentConfig};

/// The weighted tables at `Q = 1` against the unweighted tables, through the reduction.
pub fn weighted_dp(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.weighted;
    let k = p.consistency_depth;
    let ucfg = p.consistency_dp;
    let wcfg = WeightedConfig {
        na: ucfg.nu,
        nc: ucfg.nv,
        split_w: 3,
        split_f: ucfg.split,
        split_big_f: ucfg.split,
        refine_rounds: 2,
        ..p.dp
    };
    let wdp = WeightedDp::run_values(k, 1.0, wcfg)?;
    let udp = UnweightedDp::run(k, ucfg)?;
    let tol = udp.interpolation_tolerance() + wdp.interpolation_residual(k, p.residual_samples)?;
    let table = wdp.level(k)?;
    let mut r = Report::new(
        "weighted-dp",
        cfg.seed,
        &["alpha", "gamma", "weighted", "unweighted", "gap"],
    );
    let mut worst: f64 = 0.0;
    for ia in 0..table.na - 1 {
        for ic in 0..table.nc {
            let [a, _, c] = table.node(ia, 0, ic);
            let u = udp.value(
                k,
                BellmanPoint {
                    big_f: 1.0,
                    f: c,
                    lambda: a,
                },
            )?;
            let gap = (table.at(ia, 0, ic) - u).abs();
            worst = worst.max(gap);
            r.row([a, c, table.at(ia, 0, ic), u, gap]);
        }
    }
    r.check(Check::at_most("q1_sup_gap", worst, tol));
    Ok(r)
}

/// A random interior point at `m = 1`.
fn random_point(rng: &mut ChaCha8Rng, q: f64) -> WeightedBellmanPoint {
    let w = rng.gen_range(1.0..=q);
    let f = rng.gen_range(-2.0..2.0);
    let big_f = f64::abs(f) + rng.gen_range(0.0..3.0);
    WeightedBellmanPoint {
        big_f,
        w,
        m: 1.0,
        f,
        lambda: rng.gen_range(0.05..5.0),
        q,
    }
}

/// Monotonicity in `m`, four-point concavity and the obstacle configuration.
pub fn weighted_verify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.weighted;
    let k = p.depth.max(1);
    let dp = WeightedDp::run(k, p.q, p.dp)?;
    let tol = dp.interpolation_residual(k, p.residual_samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut r = Report::new(
        "weighted-verify",
        cfg.seed,
        &["quantity", "value", "count", "detail"],
    );
    let nk = |x: &WeightedBellmanPoint| dp.value(k, x).unwrap_or(f64::NAN);
    let nk1 = |x: &WeightedBellmanPoint| dp.value(k - 1, x).unwrap_or(f64::NAN);

    let (mut worst, mut done, mut tries) = (f64::INFINITY, 0usize, 0usize);
    while done < p.samples && tries < 100 * p.samples {
        tries += 1;
        let x = random_point(&mut rng, p.q);
        let m2 = rng.gen_range(1.0..=x.w);
        let moved = WeightedBellmanPoint { m: m2, ..x };
        if moved.validate().is_err() {
            continue;
        }
        worst = worst.min(nk(&x) - nk(&moved));
        done += 1;
    }
    r.row([
        "monotone_in_m_min".to_string(),
        worst.to_string(),
        done.to_string(),
        format!("k={k}"),
    ]);
    r.check(Check::at_least("monotone_in_m_min", worst, -tol));
    r.check(Check::at_least(
        "monotone_in_m_patterns",
        done as f64,
        p.samples as f64,
    ));

    let (mut worst, mut done, mut tries) = (f64::INFINITY, 0usize, 0usize);
    while done < p.samples && tries < 100 * p.samples {
        tries += 1;
        let x = random_point(&mut rng, p.q);
        let d_big_f = rng.gen_range(-0.5..0.5) * x.big_f;
        let room = (x.w - x.m).min(x.q * x.m - x.w);
        let dw = rng.gen_range(-1.0..=1.0) * room;
        let dl = rng.gen_range(-0.5..0.5);
        match four_point_stencil(&x, d_big_f, dw, dl) {
            Ok(pts) => {
                worst = worst.min(nk(&x) - 0.25 * pts.iter().map(nk1).sum::<f64>());
                done += 1;
            }
            Err(WeightedError::Pattern(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    r.row([
        "four_point_concavity_min".to_string(),
        worst.to_string(),
        done.to_string(),
        format!("k={k}"),
    ]);
    r.row([
        "interpolation_residual".to_string(),
        tol.to_string(),
        p.residual_samples.to_string(),
        String::new(),
    ]);
    r.check(Check::at_least("four_point_concavity_min", worst, -tol));
    r.check(Check::at_least(
        "four_point_patterns",
        done as f64,
        p.samples as f64,
    ));

    for &q in &p.obstacle_qs {
        let o = verify_weighted_obstacle(q)?;
        r.row([
            format!("obstacle_ratio_q{q}"),
            o.ratio.to_string(),
            "1".into(),
            format!(
                "level_set_weight={} mean_weight={} a1={}",
                o.level_set_weight, o.mean_weight, o.a1
            ),
        ]);
        r.check(Check::at_least(
            format!("obstacle_ratio_q{q}"),
            o.ratio,
            p.obstacle_ratio,
        ));
    }
    Ok(r)
}

pub fn quadform(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.quadform;
    let dp = WeightedDp::run_values(p.depth, p.q, p.dp)?;
    let grid = dp
        .grid(p.depth, Box3 { lo: p.lo, hi: p.hi }, p.resolution)?
        .box_smoothed();
    let (sweep, samples) = quadratic_form_sweep(&grid, p.stride, p.tol)?;
    let mut r = Report::new(
        "quadform",
        cfg.seed,
        &["alpha", "beta", "gamma", "k", "l", "n", "status"],
    );
    for s in &samples {
        let status = match s.status {
            FormStatus::Holds => "holds",
            FormStatus::Fails => "fails",
            FormStatus::Inconclusive => "inconclusive",
        };
        r.row([
            s.point.alpha.to_string(),
            s.point.beta.to_string(),
            s.point.gamma.to_string(),
            s.k.to_string(),
            s.l.to_string(),
            s.n.to_string(),
            status.to_string(),
        ]);
    }
    r.check(Check::at_least(
        "conclusive_samples",
        sweep.conclusive as f64,
        1.0,
    ));
    r.check(Check::at_least(
        "holds_fraction",
        sweep.fraction(),
        p.required_fraction,
    ));
    Ok(r)
}

pub fn blowup(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.blowup;
    let mut r = Report::new(
        "blowup",
        cfg.seed,
        &["q", "k", "ratio", "node_ratio", "measure", "a1"],
    );
    let mut ratios = Vec::new();
    for &q in &p.qs {
        let b = empirical_weak_norm_ratio(q, p.depth, p.dp)?;
        r.row([
            q,
            p.depth as f64,
            b.ratio,
            b.node_ratio,
            b.witness.measure,
            b.witness.a1,
        ]);
        r.check(Check::at_most(
            format!("witness_a1_q{q}"),
            b.witness.a1,
            q * (1.0 + 1e-9),
        ));
        ratios.push(b.ratio);
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let min_step = ratios
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    r.check(Check::at_least(
        "ratio_min_increment",
        min_step,
        f64::MIN_POSITIVE,
    ));
    r.check(Check::holds("ratio_strictly_increasing", increasing));
    if let Ok(fit) = fit_log_growth(&p.qs, &ratios) {
        r.row([
            f64::NAN,
            f64::NAN,
            fit.exponent,
            fit.half_width,
            fit.points as f64,
            f64::NAN,
        ]);
    }
    Ok(r)
}

pub fn bookkeeping(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.bookkeeping;
    let qs = powers_of_two(p.max_exp);
    let mut r = Report::new(
        "bookkeeping",
        cfg.seed,
        &["kind", "p", "q", "q_hat", "alpha0", "gamma0", "lhs"],
    );
    for &e in &p.ps {
        let rep = bookkeeping_witness(e, &qs, p.constants)?;
        for row in &rep.rows {
            r.row([
                "row".to_string(),
                e.to_string(),
                row.q.to_string(),
                row.q_hat.to_string(),
                row.alpha0.to_string(),
                row.gamma0.to_string(),
                row.lhs.to_string(),
            ]);
        }
        let status = match rep.status {
            BookkeepingStatus::Contradiction { .. } => "contradiction",
            BookkeepingStatus::NoContradiction => "no_contradiction",
            BookkeepingStatus::Inconclusive => "inconclusive",
        };
        let threshold = rep.threshold().map_or(String::new(), |t| t.to_string());
        r.row([
            "threshold".to_string(),
            e.to_string(),
            threshold,
            String::new(),
            String::new(),
            String::new(),
            status.into(),
        ]);
        if e < p.critical_exponent {
            let found = rep.threshold().is_some();
            r.check(Check::holds(format!("p{e}_finite_threshold"), found));
        } else if e > p.critical_exponent {
            let none = rep.status == BookkeepingStatus::NoContradiction;
            r.check(Check::holds(format!("p{e}_no_contradiction"), none));
        }
    }
    Ok(r)
}
