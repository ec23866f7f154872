use bellman_unweighted::{
    biconcavity_defect, check_main_inequality, closed_form_b, m_from_b, BellmanError, BellmanPoint,
    BiPlane, Box3, MainPattern, Split, UnweightedDp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use crate::report::{Check, Report};
use crate::{CliError, ExperimentConfig};

fn pt([big_f, f, lambda]: [f64; 3]) -> BellmanPoint {
    BellmanPoint { big_f, f, lambda }
}

fn fmt_point(p: Option<BellmanPoint>) -> String {
    p.map_or_else(String::new, |p| format!("{} {} {}", p.big_f, p.f, p.lambda))
}

/// A point with `|f| ≤ F` and `F ∈ (0, 3]`.
fn random_base(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let big_f = rng.gen_range(1e-3..3.0);
    (big_f, rng.gen_range(-big_f..=big_f))
}

fn random_split(
    rng: &mut ChaCha8Rng,
    pattern: MainPattern,
) -> (BellmanPoint, BellmanPoint, BellmanPoint) {
    let (big_f, f) = random_base(rng);
    let p = BellmanPoint {
        big_f,
        f,
        lambda: rng.gen_range(-1.0..6.0),
    };
    let dp = rng.gen_range(-1.0..=1.0) * (big_f - f);
    let dq = rng.gen_range(-1.0..=1.0) * (big_f + f);
    let (plus, minus) = Split::pattern(0.5 * (dp + dq), 0.5 * (dq - dp), pattern).children(p);
    (p, plus, minus)
}

/// Closed-form range, obstacle and main-inequality sweeps, plus bi-concavity.
pub fn closed_form_checks(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), CliError> {
    let u = &cfg.unweighted;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (mut lo, mut hi, mut worst_range) = (f64::INFINITY, f64::NEG_INFINITY, None);
    for _ in 0..u.samples {
        let (big_f, f) = random_base(&mut rng);
        let p = BellmanPoint {
            big_f,
            f,
            lambda: big_f + rng.gen_range(1e-9..6.0),
        };
        let v = closed_form_b(p)?;
        if v < lo || v > hi {
            worst_range = Some(p);
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    report.row([
        "closed_form_min",
        &lo.to_string(),
        &u.samples.to_string(),
        &fmt_point(worst_range),
    ]);
    report.row([
        "closed_form_max",
        &hi.to_string(),
        &u.samples.to_string(),
        "",
    ]);
    report.check(Check::at_least("closed_form_min", lo, 0.0));
    report.check(Check::at_most("closed_form_max", hi, 1.0));

    let mut below = 0usize;
    let mut worst_obstacle = None;
    for _ in 0..u.obstacle_samples {
        let (big_f, f) = random_base(&mut rng);
        let p = BellmanPoint {
            big_f,
            f,
            lambda: rng.gen_range(-2.0..big_f),
        };
        if closed_form_b(p)? != 1.0 {
            below += 1;
            worst_obstacle = Some(p);
        }
    }
    report.row([
        "obstacle_not_one",
        &below.to_string(),
        &u.obstacle_samples.to_string(),
        &fmt_point(worst_obstacle),
    ]);
    report.check(Check::at_most("obstacle_points_not_one", below as f64, 0.0));

    for (name, pattern) in [
        ("main_inequality_mi1", MainPattern::Mi1),
        ("main_inequality_mi2", MainPattern::Mi2),
    ] {
        let (mut worst, mut at, mut done) = (f64::INFINITY, None, 0usize);
        while done < u.samples {
            let (p, plus, minus) = random_split(&mut rng, pattern);
            if plus.validate().is_err() || minus.validate().is_err() {
                continue;
            }
            let d = check_main_inequality(closed_form_b, p, plus, minus)?;
            if d < worst {
                worst = d;
                at = Some(p);
            }
            done += 1;
        }
        report.row([name, &worst.to_string(), &done.to_string(), &fmt_point(at)]);
        report.check(Check::at_least(format!("{name}_min"), worst, -u.main_tol));
    }

    let m = m_from_b(closed_form_b);
    let h = u.biconcavity_step;
    let (mut worst, mut at, mut done) = (f64::NEG_INFINITY, None, 0usize);
    while done < u.biconcavity_samples {
        let big_f = rng.gen_range(0.05..3.0);
        let y1 = rng.gen_range(-1.0..4.0);
        let y2 = y1 + rng.gen_range(-big_f..big_f);
        let plane = if rng.gen::<bool>() {
            BiPlane::FY1 {
                d_big_f: rng.gen_range(-1.0..1.0),
                dy: 1.0,
            }
        } else {
            BiPlane::FY2 {
                d_big_f: rng.gen_range(-1.0..1.0),
                dy: 1.0,
            }
        };
        match biconcavity_defect(&m, (big_f, y1, y2), plane, h) {
            Ok(d) => {
                if d > worst {
                    worst = d;
                    at = Some(BellmanPoint {
                        big_f,
                        f: y1 - y2,
                        lambda: y1 + y2,
                    });
                }
                done += 1;
            }
            Err(BellmanError::StencilExit) | Err(BellmanError::OutsideDomain(..)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    report.row([
        "biconcavity_max",
        &worst.to_string(),
        &done.to_string(),
        &fmt_point(at),
    ]);
    report.check(Check::at_most("biconcavity_defect_max", worst, u.main_tol));
    report.check(Check::at_most(
        "closed_form_seconds",
        start.elapsed().as_secs_f64(),
        u.closed_form_seconds,
    ));
    Ok(())
}

/// `N_k` at the obstacle point increases strictly over the configured depths toward 1.
pub fn obstacle_dp_checks(
    cfg: &ExperimentConfig,
    dp: &UnweightedDp,
    report: &mut Report,
) -> Result<(), CliError> {
    let u = &cfg.unweighted;
    let p = pt(u.obstacle_point);
    let vals: Vec<f64> = (u.obstacle_from_depth..=u.depth)
        .map(|k| dp.value(k, p))
        .collect::<Result<_, _>>()?;
    for (k, v) in (u.obstacle_from_depth..).zip(&vals) {
        report.row([
            "obstacle_nk".to_string(),
            v.to_string(),
            k.to_string(),
            fmt_point(Some(p)),
        ]);
    }
    let strict = vals.windows(2).all(|w| w[1] > w[0]) && vals.iter().all(|v| *v <= 1.0);
    report.check(Check::holds("obstacle_nk_strictly_increasing", strict));
    let last = *vals
        .last()
        .ok_or_else(|| CliError::Config("empty depth range".into()))?;
    report.check(Check::at_least(
        "obstacle_nk_final",
        last,
        u.obstacle_target,
    ));
    report.row([
        "obstacle_gap_to_one",
        &(1.0 - last).to_string(),
        &u.depth.to_string(),
        "",
    ]);
    Ok(())
}

/// Monotone convergence at the symmetric point and `N_k ≤ B + tol` on the full grid.
pub fn convergence_checks(
    cfg: &ExperimentConfig,
    dp: &UnweightedDp,
    seconds: f64,
    report: &mut Report,
) -> Result<(), CliError> {
    let u = &cfg.unweighted;
    let p = pt(u.symmetric_point);
    let tol = dp.interpolation_tolerance();
    let vals: Vec<f64> = (0..=u.depth)
        .map(|k| dp.value(k, p))
        .collect::<Result<_, _>>()?;
    for (k, v) in vals.iter().enumerate() {
        report.row([
            "symmetric_nk".to_string(),
            v.to_string(),
            k.to_string(),
            fmt_point(Some(p)),
        ]);
    }
    let monotone = vals.windows(2).all(|w| w[1] >= w[0]);
    report.check(Check::holds("symmetric_nk_nondecreasing", monotone));
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.check(Check::at_most(
        "symmetric_nk_max",
        top,
        u.symmetric_bound + tol,
    ));
    report.check(Check::at_least(
        "symmetric_nk_final",
        vals[u.depth],
        u.symmetric_floor,
    ));

    let n = u.grid_resolution;
    let grid = dp.grid(u.depth, Box3::unweighted_default(), [n, n, n])?;
    let mut excess = f64::NEG_INFINITY;
    let mut at = None;
    let [na, nb, nc] = grid.shape();
    for i in 0..na {
        for j in 0..nb {
            for k in 0..nc {
                let [big_f, f, lambda] = grid.node(i, j, k);
                let q = BellmanPoint {
                    big_f,
                    f: f.clamp(-big_f, big_f),
                    lambda,
                };
                let e = grid.at(i, j, k) - closed_form_b(q)?;
                if e > excess {
                    excess = e;
                    at = Some(q);
                }
            }
        }
    }
    report.row([
        "grid_excess_over_closed_form",
        &excess.to_string(),
        &(na * nb * nc).to_string(),
        &fmt_point(at),
    ]);
    report.row(["interpolation_tolerance", &tol.to_string(), "", ""]);
    report.check(Check::at_most("grid_excess_over_closed_form", excess, tol));
    report.check(Check::at_least(
        "grid_nodes",
        (na * nb * nc) as f64,
        (65 * 65 * 65) as f64,
    ));
    report.check(Check::at_most("dp_seconds", seconds, u.dp_seconds));
    let mut body = Vec::new();
    grid.write_csv(&mut body)
        .map_err(|e| CliError::Io(e.to_string()))?;
    report.files.push((
        "grid.csv".into(),
        String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?,
    ));
    Ok(())
}

pub const COLUMNS: [&str; 4] = ["quantity", "value", "count_or_depth", "point"];

pub fn run_dp(cfg: &ExperimentConfig) -> Result<(UnweightedDp, f64), CliError> {
    let start = Instant::now();
    let dp = UnweightedDp::run(cfg.unweighted.depth, cfg.unweighted.dp)?;
    Ok((dp, start.elapsed().as_secs_f64()))
}

pub fn unweighted_verify(cfg: &ExperimentConfig, dp: &UnweightedDp) -> Result<Report, CliError> {
    let mut r = Report::new("unweighted-verify", cfg.seed, &COLUMNS);
    closed_form_checks(cfg, &mut r)?;
    obstacle_dp_checks(cfg, dp, &mut r)?;
    Ok(r)
}

pub fn unweighted_dp(
    cfg: &ExperimentConfig,
    dp: &UnweightedDp,
    seconds: f64,
) -> Result<Report, CliError> {
    let mut r = Report::new("unweighted-dp", cfg.seed, &COLUMNS);
    convergence_checks(cfg, dp, seconds, &mut r)?;
    Ok(r)
}
