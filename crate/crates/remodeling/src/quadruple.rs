use crate::{RemodelError, Result};
use bellman_weighted::{
    best_ratio_nodes, WeightedBellmanPoint, WeightedClass, WeightedConfig, WeightedDp,
};
use dyadic_core::{FourAdicMartingale, MartingaleKind};
use serde::{Deserialize, Serialize};

/// `H`-martingales `F, f, w` and a `G`-martingale `g` (constant 0) with `b_I = -a_I`,
/// whose level set `{g ≥ level}` carries a large share of `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalQuadruple {
    pub big_f: FourAdicMartingale,
    pub f: FourAdicMartingale,
    pub w: FourAdicMartingale,
    pub g: FourAdicMartingale,
    pub q: f64,
    /// The threshold `g` of the level set.
    pub level: f64,
    pub generations: u32,
    /// Bellman point the martingales were replayed from.
    pub point: WeightedBellmanPoint,
    /// Depth of the recursion used for the replay.
    pub dp_depth: usize,
}

/// Measured slack of each property; a report exists only when all five hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleReport {
    /// `min_I (⟨F⟩_I - ⟨|f|⟩_I min_I w)`.
    pub domination_slack: f64,
    /// `max_I ⟨w⟩_I / min_I w`.
    pub a1: f64,
    /// `max_I |b_I + a_I|`.
    pub link_defect: f64,
    pub payoff: f64,
    /// Largest ratio of `w`-averages over four-adic neighbours.
    pub doubling: f64,
}

/// Averages of the finest cell values over every four-adic generation, coarsest first.
fn pyramid(cells: &[f64], reduce: impl Fn(&[f64]) -> f64) -> Vec<Vec<f64>> {
    let mut out = vec![cells.to_vec()];
    while out.last().unwrap().len() > 1 {
        let next = out.last().unwrap().chunks(4).map(&reduce).collect();
        out.push(next);
    }
    out.reverse();
    out
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn min(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

fn padded(m: &FourAdicMartingale, generations: u32) -> Result<FourAdicMartingale> {
    let mut levels = m.levels().to_vec();
    while (levels.len() as u32) < generations {
        levels.push(vec![0.0; 1usize << (2 * levels.len())]);
    }
    Ok(FourAdicMartingale::from_levels(m.kind, m.constant, levels)?)
}

impl ExtremalQuadruple {
    /// `level ∫_{g ≥ level} w / ∫ F`.
    pub fn payoff(&self) -> f64 {
        let total = mean(&self.big_f.cell_values());
        if total <= 0.0 {
            return 0.0;
        }
        self.level * self.level_set_weight() / total
    }

    /// `∫_{g ≥ level} w`.
    pub fn level_set_weight(&self) -> f64 {
        let (g, w) = (self.g.cell_values(), self.w.cell_values());
        g.iter()
            .zip(&w)
            .filter(|(gv, _)| **gv >= self.level)
            .map(|(_, wv)| wv)
            .sum::<f64>()
            / g.len() as f64
    }

    /// The sign-flipped `G`-martingale `level - g`, whose coefficients equal those of `f`
    /// and whose set `{≤ 0}` is `{g ≥ level}`.
    pub fn sign_flipped(&self) -> Result<FourAdicMartingale> {
        let levels = self
            .g
            .levels()
            .iter()
            .map(|r| r.iter().map(|c| -c).collect())
            .collect();
        Ok(FourAdicMartingale::from_levels(
            MartingaleKind::G,
            self.level - self.g.constant,
            levels,
        )?)
    }

    /// `∫_{level - g ≤ 0} w`, equal to [`Self::level_set_weight`].
    pub fn flipped_level_set_weight(&self) -> Result<f64> {
        let (g, w) = (self.sign_flipped()?.cell_values(), self.w.cell_values());
        Ok(g.iter()
            .zip(&w)
            .filter(|(gv, _)| **gv <= 0.0)
            .map(|(_, wv)| wv)
            .sum::<f64>()
            / g.len() as f64)
    }

    /// Checks the five properties over the whole four-adic tree.
    pub fn verify(&self) -> Result<QuadrupleReport> {
        let fail = |check: &'static str, detail: String| {
            Err(RemodelError::PropertyViolated { check, detail })
        };
        let kinds = [
            (&self.big_f, MartingaleKind::H),
            (&self.f, MartingaleKind::H),
            (&self.w, MartingaleKind::H),
        ];
        if kinds
            .iter()
            .any(|(m, k)| m.kind != *k || m.generations() != self.generations)
            || self.g.kind != MartingaleKind::G
            || self.g.generations() != self.generations
        {
            return fail(
                "structure",
                "martingale kinds or generation counts differ".into(),
            );
        }
        let (bf, f, w) = (
            self.big_f.cell_values(),
            self.f.cell_values(),
            self.w.cell_values(),
        );
        if min(&w) <= 0.0 || min(&bf) < -1e-12 {
            return fail("positivity", "w must be positive and F nonnegative".into());
        }
        let abs_f: Vec<f64> = f.iter().map(|x| x.abs()).collect();
        let (pf, pa, pw, pm) = (
            pyramid(&bf, mean),
            pyramid(&abs_f, mean),
            pyramid(&w, mean),
            pyramid(&w, min),
        );
        let mut slack = f64::INFINITY;
        let mut a1: f64 = 1.0;
        for n in 0..pf.len() {
            for i in 0..pf[n].len() {
                let s = pf[n][i] - pa[n][i] * pm[n][i];
                if s < -1e-9 * (1.0 + pf[n][i]) {
                    return fail(
                        "domination",
                        format!("generation {n}, interval {i}: slack {s}"),
                    );
                }
                slack = slack.min(s);
                a1 = a1.max(pw[n][i] / pm[n][i]);
            }
        }
        if a1 > self.q * (1.0 + 1e-9) {
            return fail("a1", format!("A1 constant {a1} above Q = {}", self.q));
        }
        let mut link: f64 = 0.0;
        for (ra, rb) in self.f.levels().iter().zip(self.g.levels()) {
            for (a, b) in ra.iter().zip(rb) {
                link = link.max((a + b).abs());
            }
        }
        if link != 0.0 {
            return fail("coefficient link", format!("max |b_I + a_I| = {link}"));
        }
        let payoff = self.payoff();
        if !(payoff > 0.0) {
            return fail("payoff", "the level set carries no weight".into());
        }
        let doubling = self.doubling_constant();
        if doubling > 4.0 * (1.0 + 1e-9) {
            return fail("doubling", format!("neighbour ratio {doubling} above 4"));
        }
        Ok(QuadrupleReport {
            domination_slack: slack,
            a1,
            link_defect: link,
            payoff,
            doubling,
        })
    }

    /// Largest `⟨w⟩_Î / ⟨w⟩_I` over parent/child pairs (both orders) and siblings.
    pub fn doubling_constant(&self) -> f64 {
        let pw = pyramid(&self.w.cell_values(), mean);
        let mut worst: f64 = 1.0;
        for n in 1..pw.len() {
            for (i, &v) in pw[n].iter().enumerate() {
                let p = pw[n - 1][i / 4];
                worst = worst.max(p / v).max(v / p);
                for &s in &pw[n][4 * (i / 4)..4 * (i / 4) + 4] {
                    worst = worst.max(s / v);
                }
            }
        }
        worst
    }

    /// Appends zero generations up to `generations`.
    pub fn padded_to(&self, generations: u32) -> Result<Self> {
        if generations < self.generations {
            return Err(RemodelError::Input(format!(
                "cannot shrink {} generations to {generations}",
                self.generations
            )));
        }
        Ok(Self {
            big_f: padded(&self.big_f, generations)?,
            f: padded(&self.f, generations)?,
            w: padded(&self.w, generations)?,
            g: padded(&self.g, generations)?,
            generations,
            ..self.clone()
        })
    }

    /// Coefficient `c_I` of `w`, `d_I` of `F`, `a_I` of `f`, `b_I` of `g` at generation `n`.
    pub fn coefficients(&self, n: usize, index: usize) -> [f64; 4] {
        let at = |m: &FourAdicMartingale| m.levels().get(n).map_or(0.0, |r| r[index]);
        [at(&self.w), at(&self.big_f), at(&self.f), at(&self.g)]
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "q": self.q,
            "level": self.level,
            "generations": self.generations,
            "dpDepth": self.dp_depth,
            "point": self.point,
            "F": serde_json::from_str::<serde_json::Value>(&self.big_f.to_json()).expect("valid json"),
            "f": serde_json::from_str::<serde_json::Value>(&self.f.to_json()).expect("valid json"),
            "w": serde_json::from_str::<serde_json::Value>(&self.w.to_json()).expect("valid json"),
            "g": serde_json::from_str::<serde_json::Value>(&self.g.to_json()).expect("valid json"),
        });
        doc.to_string()
    }
}

/// Candidate table nodes replayed per depth.
const QUADRUPLE_CANDIDATES: usize = 8;

/// Replays the four-adic recursion at `Q` into a quadruple with exactly `generations`
/// generations, verifying all five properties.
///
/// Depths are tried from `generations` down; at each depth the best table nodes are
/// replayed and the replay with the largest payoff that closes within `generations`
/// is kept, then padded with zero generations.
pub fn build_extremal_quadruple(
    q: f64,
    generations: u32,
    config: WeightedConfig,
) -> Result<ExtremalQuadruple> {
    if !(q >= 1.0) {
        return Err(RemodelError::Input(format!("Q = {q} below 1")));
    }
    if generations == 0 {
        return Err(RemodelError::Input("need at least one generation".into()));
    }
    let cfg = config.with_class(WeightedClass::FourAdic);
    let dp = WeightedDp::run(generations as usize, q, cfg)?;
    let mut last_err = None;
    for depth in (1..=generations as usize).rev() {
        let mut best: Option<ExtremalQuadruple> = None;
        for (_, p) in best_ratio_nodes(&dp, depth, QUADRUPLE_CANDIDATES)? {
            let r = match dp.four_adic_replay(depth, &p) {
                Ok(r) => r,
                Err(e) => {
                    last_err = Some(e.into());
                    continue;
                }
            };
            if r.generations() > generations || r.generations() == 0 {
                continue;
            }
            let cand = ExtremalQuadruple {
                big_f: r.big_f,
                f: r.f,
                w: r.w,
                g: r.g,
                q,
                level: r.level,
                generations: 0,
                point: p,
                dp_depth: depth,
            };
            let cand = ExtremalQuadruple {
                generations: cand.w.generations(),
                ..cand
            }
            .padded_to(generations)?;
            if let Err(e) = cand.verify() {
                last_err = Some(e);
                continue;
            }
            if best.as_ref().is_none_or(|b| cand.payoff() > b.payoff()) {
                best = Some(cand);
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
    }
    Err(last_err.unwrap_or_else(|| {
        RemodelError::Input(format!("no replay closes within {generations} generations"))
    }))
}
