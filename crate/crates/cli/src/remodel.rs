use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use remodeling::{
    build_extremal_quadruple, hilbert_remodel_decomposition, lemma83_sweep,
    periodic_hilbert_by_kernel, periodic_hilbert_transform, remodel as remodel_quadruple,
    unit_sqcos, unit_sqsin, xi_report, ProliferationSchedule, XiDistribution,
};
use std::time::Instant;

use crate::report::{Check, Report};
use crate::{CliError, ExperimentConfig};

pub fn remodel(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.remodel;
    let quad = build_extremal_quadruple(p.q, p.generations, p.dp)?;
    let qr = quad.verify()?;
    let mut r = Report::new("remodel", cfg.seed, &["quantity", "schedule", "value"]);
    let put = |r: &mut Report, name: &str, sched: &str, v: f64| {
        r.row([name.to_string(), sched.to_string(), v.to_string()]);
    };
    put(&mut r, "a1", "", qr.a1);
    put(&mut r, "payoff", "", qr.payoff);
    put(&mut r, "domination_slack", "", qr.domination_slack);
    put(&mut r, "link_defect", "", qr.link_defect);
    put(&mut r, "doubling", "", qr.doubling);
    r.check(Check::at_most("quadruple_a1", qr.a1, p.q * (1.0 + 1e-9)));

    let sched = ProliferationSchedule::new(p.schedule.clone())?;
    let shifted = sched.shifted(p.shift)?;
    let name = |s: &ProliferationSchedule| format!("{:?}", s.exponents());
    let base = remodel_quadruple(&quad, &sched)?;
    let moved = remodel_quadruple(&quad, &shifted)?;
    let (d0, d1) = (base.distribution_report(), moved.distribution_report());
    for (s, d) in [(&sched, d0), (&shifted, d1)] {
        put(&mut r, "rho_lebesgue", &name(s), d.rho_lebesgue);
        put(&mut r, "rho_weighted", &name(s), d.rho_weighted);
        put(&mut r, "weight_lebesgue", &name(s), d.weight_lebesgue);
        put(&mut r, "payoff_remodeled", &name(s), d.payoff_remodeled);
    }
    let dist0 = d0.rho_weighted.max(d0.rho_lebesgue).max(d0.weight_lebesgue);
    let dist1 = d1.rho_weighted.max(d1.rho_lebesgue).max(d1.weight_lebesgue);
    r.check(Check::at_most("cdf_distance", dist0, p.cdf_max));
    r.check(Check::at_most(
        "shifted_distance_ratio",
        dist1 / dist0,
        p.shift_ratio_max,
    ));

    let red = base.red_set_identity()?;
    put(
        &mut r,
        "red_mismatches",
        &name(&sched),
        red.mismatches as f64,
    );
    put(&mut r, "red_lebesgue", &name(&sched), red.red_lebesgue);
    put(
        &mut r,
        "level_set_lebesgue",
        &name(&sched),
        red.level_set_lebesgue,
    );
    r.check(Check::holds("red_set_identity", red.holds));
    for s in [&base, &moved] {
        let d = s.w_doubling();
        put(&mut r, "w_doubling", &name(&s.schedule), d.constant);
        r.check(Check::at_most(
            format!("w_doubling_{}", name(&s.schedule)),
            d.constant,
            p.doubling_max,
        ));
    }

    let m = 1usize << p.grid_bits;
    for e in &p.decomposition_schedules {
        let s = ProliferationSchedule::new(e.clone())?;
        let d =
            hilbert_remodel_decomposition(&remodel_quadruple(&quad, &s)?, m)?.report(p.delta)?;
        put(&mut r, "theta_measure", &name(&s), d.theta_measure);
        put(&mut r, "theta_sup", &name(&s), d.theta_sup);
        put(&mut r, "main_sum_weight", &name(&s), d.main_sum_weight);
        put(&mut r, "payoff_bound", &name(&s), d.payoff_bound);
        r.check(Check::holds(
            format!("payoff_carried_{}", name(&s)),
            d.payoff_holds,
        ));
    }
    Ok(r)
}

pub fn hilbert_xi(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.hilbert;
    let m = 1usize << p.grid_bits;
    let x = xi_report(m, p.margin, p.skew_pairs, cfg.seed)?;
    let mut r = Report::new(
        "hilbert-xi",
        cfg.seed,
        &["j", "x", "hilbert_sqsin", "sqcos", "xi"],
    );
    let h = periodic_hilbert_transform(&unit_sqsin(m))?;
    let c = unit_sqcos(m);
    let step = (m / 1024).max(1);
    for j in (0..m).step_by(step) {
        let x = (j as f64 + 0.5) / m as f64;
        r.row([j as f64, x, h.values[j], c[j], h.values[j] * c[j]]);
    }
    r.check(Check::at_least(
        "sign_agreement",
        x.sign_agreement,
        p.sign_fraction,
    ));
    r.check(Check::at_most(
        "zero_offset_cells",
        x.zero_offset_cells,
        p.zero_cells,
    ));
    r.check(Check::at_most("skew_defect", x.skew_defect, p.skew_tol));

    let n = 1usize << p.kernel_bits;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (a, b) = (
        periodic_hilbert_transform(&f)?,
        periodic_hilbert_by_kernel(&f)?,
    );
    let gap = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    r.check(Check::at_most("fft_vs_kernel", gap, p.kernel_tol));
    Ok(r)
}

pub fn lemma83(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &cfg.lemma83;
    let start = Instant::now();
    let dist = XiDistribution::tabulate(1usize << p.table_bits)?;
    let calibrated = dist.calibrate_delta();
    let mut r = Report::new(
        "lemma83",
        cfg.seed,
        &["seed", "samples", "m", "a", "estimate", "lower", "upper"],
    );
    for &m in &p.ms {
        let thetas = vec![1.0 / (m as f64).sqrt(); m];
        for e in lemma83_sweep(&dist, &thetas, &p.shifts, p.delta, p.samples, cfg.seed)? {
            r.row(
                e.csv_line()
                    .split(',')
                    .map(str::to_string)
                    .collect::<Vec<_>>(),
            );
            r.check(Check::at_least(
                format!("m{}_a{}", e.m, e.a),
                e.lower(),
                p.delta,
            ));
        }
    }
    r.check(Check::at_most("delta_vs_calibrated", p.delta, calibrated));
    r.check(Check::at_most(
        "seconds",
        start.elapsed().as_secs_f64(),
        p.seconds,
    ));
    Ok(r)
}
