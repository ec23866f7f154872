use crate::square::{sqc_step, sqs_step, sqsm_step, steps};
use crate::{CellAddress, ExtremalQuadruple, ProliferationSchedule, RemodelError, Result};
use dyadic_core::MartingaleKind;
use serde::{Deserialize, Serialize};

/// `W, Φ, φ, ρ` built from a quadruple and a schedule, evaluated pointwise.
#[derive(Debug, Clone)]
pub struct RemodeledFunctions {
    pub quadruple: ExtremalQuadruple,
    pub schedule: ProliferationSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemodeledValues {
    pub w: f64,
    pub big_phi: f64,
    pub phi: f64,
    pub rho: f64,
}

/// One class of finest supervisees: the supervisor chain and the generations at which
/// the `sqsm` term of `W` vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ClassState {
    chain: u64,
    zeroed: u32,
    lebesgue: f64,
    w: f64,
    w_model: f64,
    rho: f64,
}

/// Exact comparison of the remodeled distributions with those of the martingales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    /// Sup-distance of the CDFs of `g` and `ρ` under Lebesgue measure.
    pub rho_lebesgue: f64,
    /// Sup-distance of the CDFs of `g` under `w dx` and `ρ` under `W dx`, both normalized.
    pub rho_weighted: f64,
    /// Sup-distance of the CDFs of `w` and `W` under Lebesgue measure.
    pub weight_lebesgue: f64,
    pub payoff_model: f64,
    pub payoff_remodeled: f64,
    pub min_w: f64,
}

/// The set identity `{ρ ≥ g} = ∪ red intervals`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedSetReport {
    /// Finest supervisor indices (base-4 chains) whose cell lies in `{g ≥ level}`.
    pub red_chains: Vec<u64>,
    pub classes: u64,
    /// Steps on which the residue rule of the square waves and of the supervisor map
    /// was verified.
    pub residue_checks: u64,
    /// Finest supervisees visited one by one (0 when the schedule is too fine).
    pub cells_enumerated: u64,
    pub mismatches: u64,
    pub red_lebesgue: f64,
    pub level_set_lebesgue: f64,
    pub holds: bool,
}

/// Largest ratio of `W`-averages over adjacent equal-length lattice intervals and over
/// parent/child pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingMeasurement {
    pub constant: f64,
    pub generation: usize,
}

const ENUMERATION_LIMIT: u64 = 1 << 22;

pub fn remodel(
    quadruple: &ExtremalQuadruple,
    schedule: &ProliferationSchedule,
) -> Result<RemodeledFunctions> {
    if schedule.generations() != quadruple.generations as usize {
        return Err(RemodelError::Schedule(format!(
            "{} exponents for {} generations",
            schedule.generations(),
            quadruple.generations
        )));
    }
    Ok(RemodeledFunctions {
        quadruple: quadruple.clone(),
        schedule: schedule.clone(),
    })
}

fn zeroed_share(n: u32) -> f64 {
    8.0 / steps(n) as f64
}

/// Sup-distance between two discrete CDFs given as `(value, mass)` lists.
fn cdf_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (ta, tb) = (
        a.iter().map(|x| x.1).sum::<f64>(),
        b.iter().map(|x| x.1).sum::<f64>(),
    );
    let mut all: Vec<(f64, f64, f64)> = a.iter().map(|&(v, m)| (v, m / ta, 0.0)).collect();
    all.extend(b.iter().map(|&(v, m)| (v, 0.0, m / tb)));
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut ca, mut cb, mut worst) = (0.0, 0.0, 0.0f64);
    let mut i = 0;
    while i < all.len() {
        let v = all[i].0;
        while i < all.len() && (all[i].0 - v).abs() <= 1e-12 * (1.0 + v.abs()) {
            ca += all[i].1;
            cb += all[i].2;
            i += 1;
        }
        worst = worst.max((ca - cb).abs());
    }
    worst
}

impl RemodeledFunctions {
    pub fn eval_cell(&self, addr: &CellAddress) -> Result<RemodeledValues> {
        self.schedule.validate(addr)?;
        let q = &self.quadruple;
        let mut v = RemodeledValues {
            w: q.w.constant,
            big_phi: q.big_f.constant,
            phi: q.f.constant,
            rho: 0.0,
        };
        let mut sup = 0usize;
        for (j, (&n, &i)) in self.schedule.exponents().iter().zip(&addr.0).enumerate() {
            let [c, d, a, b] = q.coefficients(j, sup);
            v.w += c * sqsm_step(n, i);
            v.big_phi += d * sqs_step(i);
            v.phi += a * sqs_step(i);
            v.rho += b * sqc_step(i);
            sup = 4 * sup + (i % 4) as usize;
        }
        Ok(v)
    }

    pub fn eval(&self, x: f64) -> Result<RemodeledValues> {
        self.eval_cell(&self.schedule.locate(x)?)
    }

    /// All chain/zeroing classes of finest supervisees with their Lebesgue mass.
    fn classes(&self) -> Vec<ClassState> {
        let q = &self.quadruple;
        let h = |k: u64| MartingaleKind::H.quarter_value(k as usize);
        let g = |k: u64| MartingaleKind::G.quarter_value(k as usize);
        let mut states = vec![ClassState {
            chain: 0,
            zeroed: 0,
            lebesgue: 1.0,
            w: q.w.constant,
            w_model: q.w.constant,
            rho: 0.0,
        }];
        for (j, &n) in self.schedule.exponents().iter().enumerate() {
            let z = zeroed_share(n);
            let mut next = Vec::with_capacity(states.len() * 8);
            for s in &states {
                let [c, _, _, b] = q.coefficients(j, s.chain as usize);
                for k in 0..4u64 {
                    let base = ClassState {
                        chain: 4 * s.chain + k,
                        w_model: s.w_model + c * h(k),
                        rho: s.rho + b * g(k),
                        ..*s
                    };
                    next.push(ClassState {
                        lebesgue: s.lebesgue * 0.25 * (1.0 - z),
                        w: s.w + c * h(k),
                        ..base
                    });
                    next.push(ClassState {
                        lebesgue: s.lebesgue * 0.25 * z,
                        zeroed: s.zeroed | 1 << j,
                        ..base
                    });
                }
            }
            states = next;
        }
        states
    }

    /// Compares `ρ` with `g` and `W` with `w` through their exact distributions.
    pub fn distribution_report(&self) -> DistributionReport {
        let q = &self.quadruple;
        let classes = self.classes();
        let (gv, wv) = (q.g.cell_values(), q.w.cell_values());
        let n = gv.len() as f64;
        let g_leb: Vec<(f64, f64)> = gv.iter().map(|&v| (v, 1.0 / n)).collect();
        let g_w: Vec<(f64, f64)> = gv.iter().zip(&wv).map(|(&v, &w)| (v, w / n)).collect();
        let w_leb: Vec<(f64, f64)> = wv.iter().map(|&v| (v, 1.0 / n)).collect();
        let rho_leb: Vec<(f64, f64)> = classes.iter().map(|s| (s.rho, s.lebesgue)).collect();
        let rho_w: Vec<(f64, f64)> = classes.iter().map(|s| (s.rho, s.lebesgue * s.w)).collect();
        let big_w_leb: Vec<(f64, f64)> = classes.iter().map(|s| (s.w, s.lebesgue)).collect();
        let hit: f64 = classes
            .iter()
            .filter(|s| s.rho >= q.level)
            .map(|s| s.lebesgue * s.w)
            .sum();
        let total_phi = q.big_f.constant;
        DistributionReport {
            rho_lebesgue: cdf_distance(&g_leb, &rho_leb),
            rho_weighted: cdf_distance(&g_w, &rho_w),
            weight_lebesgue: cdf_distance(&w_leb, &big_w_leb),
            payoff_model: q.payoff(),
            payoff_remodeled: if total_phi > 0.0 {
                q.level * hit / total_phi
            } else {
                0.0
            },
            min_w: classes.iter().map(|s| s.w).fold(f64::INFINITY, f64::min),
        }
    }

    /// Checks `{ρ ≥ level}` against the red supervisees as sets.
    ///
    /// Red supervisees are those whose finest supervisor lies in `{g ≥ level}`. Every
    /// step of every generation is checked to carry the `G` value and the supervisor
    /// quarter of its residue mod 4, so `ρ` is constant on each supervisor class; each
    /// class is then evaluated at a representative. Small schedules are also enumerated
    /// cell by cell.
    pub fn red_set_identity(&self) -> Result<RedSetReport> {
        let q = &self.quadruple;
        let gv = q.g.cell_values();
        let red_chains: Vec<u64> = (0..gv.len() as u64)
            .filter(|&i| gv[i as usize] >= q.level)
            .collect();
        let is_red = |chain: u64| red_chains.binary_search(&chain).is_ok();
        let exps = self.schedule.exponents();
        let mut residue_checks = 0u64;
        let mut mismatches = 0u64;
        for &n in exps {
            for i in 0..steps(n) {
                let addr = CellAddress(vec![i]);
                let sup = ProliferationSchedule::new(vec![n])?.supervisor(&addr, 1);
                let g = MartingaleKind::G.quarter_value((i % 4) as usize);
                if sup.index != i % 4 || sqc_step(i) != g {
                    mismatches += 1;
                }
                residue_checks += 1;
            }
        }
        let depth = exps.len();
        let classes = 1u64 << (2 * depth);
        let chain_of = |addr: &CellAddress| self.schedule.supervisor(addr, depth).index;
        for chain in 0..classes {
            let digits: Vec<u64> = (0..depth)
                .map(|j| (chain >> (2 * (depth - 1 - j))) & 3)
                .collect();
            let addr = CellAddress(digits.iter().map(|d| 4 + d).collect());
            debug_assert_eq!(chain_of(&addr), chain);
            let rho = self.eval_cell(&addr)?.rho;
            if (rho >= q.level) != is_red(chain) {
                mismatches += 1;
            }
        }
        let total_digits = self.schedule.total_digits();
        let mut cells_enumerated = 0u64;
        if 2 * total_digits <= ENUMERATION_LIMIT.trailing_zeros() {
            let mut addr = CellAddress(vec![0; depth]);
            loop {
                let rho = self.eval_cell(&addr)?.rho;
                if (rho >= q.level) != is_red(chain_of(&addr)) {
                    mismatches += 1;
                }
                cells_enumerated += 1;
                let mut j = depth;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    addr.0[j] += 1;
                    if addr.0[j] < steps(exps[j]) {
                        break;
                    }
                    addr.0[j] = 0;
                    if j == 0 {
                        j = usize::MAX;
                        break;
                    }
                }
                if j == usize::MAX {
                    break;
                }
            }
        }
        let level_set_lebesgue =
            gv.iter().filter(|&&v| v >= q.level).count() as f64 / gv.len() as f64;
        Ok(RedSetReport {
            red_lebesgue: red_chains.len() as f64 / classes as f64,
            red_chains,
            classes,
            residue_checks,
            cells_enumerated,
            mismatches,
            level_set_lebesgue,
            holds: mismatches == 0,
        })
    }

    /// Doubling of `W` on the lattice of supervisee steps.
    ///
    /// Inside a supervisee with level `b` and coefficient `c`, every block of whole periods
    /// averages to `b`; steps carry `b + c H(i mod 4)`, or `b` on the trimmed edges. Edge
    /// steps of neighbouring supervisees therefore average to the supervisees' own
    /// levels, so neighbours across supervisee boundaries reduce to the previous
    /// generation.
    pub fn w_doubling(&self) -> DoublingMeasurement {
        let q = &self.quadruple;
        let h = |k: usize| MartingaleKind::H.quarter_value(k);
        let ratio = |x: f64, y: f64| {
            if x > 0.0 && y > 0.0 {
                (x / y).max(y / x)
            } else {
                f64::INFINITY
            }
        };
        let mut best = DoublingMeasurement {
            constant: 1.0,
            generation: 0,
        };
        let mut prefixes = vec![(0usize, q.w.constant)];
        for j in 0..self.schedule.generations() {
            let mut next = Vec::with_capacity(prefixes.len() * 8);
            for &(chain, b) in &prefixes {
                let c = q.coefficients(j, chain)[0];
                let v: Vec<f64> = (0..4).map(|k| b + c * h(k)).collect();
                let mut pairs = vec![(b, v[0]), (v[3], b)];
                for k in 0..4 {
                    pairs.push((v[k], v[(k + 1) % 4]));
                    pairs.push((b, v[k]));
                }
                for (x, y) in pairs {
                    let r = ratio(x, y);
                    if r > best.constant {
                        best = DoublingMeasurement {
                            constant: r,
                            generation: j,
                        };
                    }
                }
                for k in 0..4 {
                    next.push((4 * chain + k, v[k]));
                    next.push((4 * chain + k, b));
                }
            }
            prefixes = next;
        }
        best
    }
}
