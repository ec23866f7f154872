use crate::{reduce, Result, WeightedBellmanPoint, WeightedError};
use bellman_unweighted::{Box3, GridMeta, ValueGrid3};
use dyadic_core::{
    martingale_transform, weighted_level_set_measure, DyadicStepFunction, FourAdicMartingale,
    MartingaleKind, TransformSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which transforms the supremum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightedClass {
    /// Dyadic, `eps = ±1`.
    Signs,
    /// Dyadic, `eps ∈ {-1, -1/2, 0, 1/2, 1}`.
    Contractive,
    /// Four-adic `H`-martingales for `F, w, f` and a `G`-martingale with coefficients
    /// `b_I = -a_I`; the level set is `{g ≥ λ}`.
    FourAdic,
}

impl WeightedClass {
    pub fn multipliers(self) -> &'static [f64] {
        match self {
            WeightedClass::Signs => &[-1.0, 1.0],
            WeightedClass::Contractive => &[-1.0, -0.5, 0.0, 0.5, 1.0],
            WeightedClass::FourAdic => &[],
        }
    }

    fn dyadic(self) -> bool {
        self != WeightedClass::FourAdic
    }
}

/// Resolution of the value tables and of the split search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedConfig {
    /// Nodes in `u = a / (2 + |a|)`, `a = λ m / F`.
    pub na: usize,
    /// Nodes in `ln β / ln Q`.
    pub nb: usize,
    /// Nodes in `c = f m / F ∈ [-1, 1]`.
    pub nc: usize,
    pub split_w: usize,
    pub split_f: usize,
    pub split_big_f: usize,
    /// Local 3x3x3 refinements around the best split, each at half the spacing.
    pub refine_rounds: usize,
    pub class: WeightedClass,
    /// Four-adic tables cover `a ≥ -a_floor`.
    pub a_floor: f64,
}

impl Default for WeightedConfig {
    fn default() -> Self {
        Self {
            na: 65,
            nb: 9,
            nc: 33,
            split_w: 5,
            split_f: 9,
            split_big_f: 9,
            refine_rounds: 2,
            class: WeightedClass::Signs,
            a_floor: 4.0,
        }
    }
}

impl WeightedConfig {
    pub fn coarse() -> Self {
        Self {
            na: 33,
            nb: 5,
            nc: 17,
            split_w: 3,
            split_f: 7,
            split_big_f: 7,
            refine_rounds: 1,
            ..Self::default()
        }
    }

    pub fn with_class(self, class: WeightedClass) -> Self {
        Self { class, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.na < 3 || self.nc < 3 || self.nb < 2 {
            return Err(WeightedError::Config(
                "tables need at least 3 nodes in a and c, 2 in beta".into(),
            ));
        }
        if [self.split_w, self.split_f, self.split_big_f]
            .iter()
            .any(|&s| s < 2)
        {
            return Err(WeightedError::Config(
                "split grids need at least 2 points".into(),
            ));
        }
        if !(self.a_floor > 0.0) {
            return Err(WeightedError::Config("a_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Depth-0 value in normalized coordinates `(a, β, c) = (λ m / F, w / m, f m / F)`, per
/// unit of `m`.
///
/// Dyadic: the supremum over two-valued `w` and `φ` on the halves. The level set is the
/// heavy half, of weight at most `2β - 1`, and `|(φ, h)|` can reach
/// `(1 + |c| (β - 1)) / β` when the light half has weight 1.
/// Four-adic: a constant cell, admissible when `F ≥ |f| w`.
pub fn n0_reduced(class: WeightedClass, a: f64, beta: f64, c: f64) -> f64 {
    if class.dyadic() {
        if a < 0.0 {
            beta
        } else if a < (1.0 + c.abs() * (beta - 1.0)) / beta {
            beta - 0.5
        } else {
            0.0
        }
    } else if a <= 0.0 && c.abs() * beta <= 1.0 + 1e-12 {
        beta
    } else {
        0.0
    }
}

/// How a [`WeightedTable`] is read between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightedInterp {
    Trilinear,
    /// Next node up in `a`, bilinear in `(β, c)`.
    UpperNode,
}

/// `T(a, β, c)` with `𝔹(F, w, m, f, λ) = m T(λ m / F, w / m, f m / F)` at fixed `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTable {
    pub q: f64,
    pub na: usize,
    pub nb: usize,
    pub nc: usize,
    pub u_lo: f64,
    pub class: WeightedClass,
    pub interp: WeightedInterp,
    /// Index `(ia * nb + ib) * nc + ic`; the slice `u = 1` (`a = ∞`) is 0.
    pub values: Vec<f64>,
}

fn u_of_a(a: f64) -> f64 {
    a / (2.0 + a.abs())
}

fn a_of_u(u: f64) -> f64 {
    if u >= 1.0 {
        f64::INFINITY
    } else {
        2.0 * u / (1.0 - u.abs())
    }
}

impl WeightedTable {
    fn from_fn(
        q: f64,
        cfg: &WeightedConfig,
        interp: WeightedInterp,
        f: impl Fn(f64, f64, f64) -> f64 + Sync,
    ) -> Self {
        let u_lo = if cfg.class.dyadic() {
            0.0
        } else {
            u_of_a(-cfg.a_floor)
        };
        let nb = if q > 1.0 { cfg.nb } else { 1 };
        let mut t = Self {
            q,
            na: cfg.na,
            nb,
            nc: cfg.nc,
            u_lo,
            class: cfg.class,
            interp,
            values: vec![],
        };
        let (na, nc) = (t.na, t.nc);
        t.values = (0..na * nb * nc)
            .into_par_iter()
            .map(|idx| {
                let (ia, r) = (idx / (nb * nc), idx % (nb * nc));
                if ia == na - 1 {
                    return 0.0;
                }
                let [a, beta, c] = t.node(ia, r / nc, r % nc);
                f(a, beta, c)
            })
            .collect();
        t
    }

    /// `(a, β, c)` of a node.
    pub fn node(&self, ia: usize, ib: usize, ic: usize) -> [f64; 3] {
        let u = self.u_lo + (1.0 - self.u_lo) * ia as f64 / (self.na - 1) as f64;
        let beta = if self.nb == 1 {
            1.0
        } else {
            self.q.powf(ib as f64 / (self.nb - 1) as f64)
        };
        let c = -1.0 + 2.0 * ic as f64 / (self.nc - 1) as f64;
        [a_of_u(u), beta, c]
    }

    pub fn at(&self, ia: usize, ib: usize, ic: usize) -> f64 {
        self.values[(ia * self.nb + ib) * self.nc + ic]
    }

    /// `T(a, β, c)`; `β` and `c` are clamped to the table.
    pub fn eval_reduced(&self, a: f64, beta: f64, c: f64) -> f64 {
        if self.class.dyadic() && a < 0.0 {
            return beta;
        }
        let u = u_of_a(a).max(self.u_lo);
        let y = (u - self.u_lo) / (1.0 - self.u_lo) * (self.na - 1) as f64;
        if y >= (self.na - 1) as f64 {
            return 0.0;
        }
        let (ib, tb) = if self.nb == 1 {
            (0, 0.0)
        } else {
            let t = (beta.ln() / self.q.ln()).clamp(0.0, 1.0) * (self.nb - 1) as f64;
            let i = (t as usize).min(self.nb - 2);
            (i, t - i as f64)
        };
        let x = (c.clamp(-1.0, 1.0) + 1.0) * 0.5 * (self.nc - 1) as f64;
        let ic = (x as usize).min(self.nc - 2);
        let tc = x - ic as f64;
        let plane = |ia: usize| {
            let b0 = (ia * self.nb + ib) * self.nc + ic;
            let v0 = self.values[b0] + tc * (self.values[b0 + 1] - self.values[b0]);
            if self.nb == 1 {
                return v0;
            }
            let b1 = b0 + self.nc;
            let v1 = self.values[b1] + tc * (self.values[b1 + 1] - self.values[b1]);
            v0 + tb * (v1 - v0)
        };
        match self.interp {
            WeightedInterp::UpperNode => {
                plane(((y - 1e-9).ceil().max(0.0) as usize).min(self.na - 1))
            }
            WeightedInterp::Trilinear => {
                let ia = (y as usize).min(self.na - 2);
                let ta = y - ia as f64;
                let p0 = plane(ia);
                p0 + ta * (plane(ia + 1) - p0)
            }
        }
    }

    /// `m T(λ m / F, w / m, f m / F)`.
    #[inline]
    pub fn eval(&self, big_f: f64, w: f64, m: f64, f: f64, lambda: f64) -> f64 {
        if big_f <= 1e-14 * m {
            let hit = if self.class.dyadic() {
                lambda < 0.0
            } else {
                lambda <= 0.0
            };
            return if hit { w } else { 0.0 };
        }
        m * self.eval_reduced(lambda * m / big_f, w / m, f * m / big_f)
    }

    pub fn eval_point(&self, p: &WeightedBellmanPoint) -> f64 {
        self.eval(p.big_f, p.w, p.m, p.f, p.lambda)
    }
}

/// A split of a node into its children, in the node's own units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSplit {
    pub dw: f64,
    pub df: f64,
    pub d_big_f: f64,
    /// `m` of the heavy child; the light child keeps the parent's `m`.
    pub m_plus: f64,
    /// Multiplier on the parent interval; unused by the four-adic class.
    pub eps: f64,
}

impl WeightedSplit {
    pub fn trivial(m: f64) -> Self {
        Self {
            dw: 0.0,
            df: 0.0,
            d_big_f: 0.0,
            m_plus: m,
            eps: 0.0,
        }
    }

    /// `(right, left)` children of a dyadic split; the right child sees the level
    /// `λ - eps df`.
    pub fn children(
        &self,
        p: &WeightedBellmanPoint,
    ) -> (WeightedBellmanPoint, WeightedBellmanPoint) {
        let plus = WeightedBellmanPoint {
            big_f: p.big_f + self.d_big_f,
            w: p.w + self.dw,
            m: self.m_plus,
            f: p.f + self.df,
            lambda: p.lambda - self.eps * self.df,
            q: p.q,
        };
        let minus = WeightedBellmanPoint {
            big_f: p.big_f - self.d_big_f,
            w: p.w - self.dw,
            m: p.m,
            f: p.f - self.df,
            lambda: p.lambda + self.eps * self.df,
            q: p.q,
        };
        (plus, minus)
    }

    /// Quarter children of a four-adic split, left to right. The `G` pattern shifts the
    /// level by `±df` inside each half.
    pub fn quarters(&self, p: &WeightedBellmanPoint) -> [WeightedBellmanPoint; 4] {
        let left = WeightedBellmanPoint {
            big_f: p.big_f - self.d_big_f,
            w: p.w - self.dw,
            f: p.f - self.df,
            ..*p
        };
        let right = WeightedBellmanPoint {
            big_f: p.big_f + self.d_big_f,
            w: p.w + self.dw,
            m: self.m_plus,
            f: p.f + self.df,
            ..*p
        };
        let at = |q: WeightedBellmanPoint, s: f64| WeightedBellmanPoint {
            lambda: p.lambda + s * self.df,
            ..q
        };
        [
            at(left, 1.0),
            at(left, -1.0),
            at(right, -1.0),
            at(right, 1.0),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedChoice {
    pub split: WeightedSplit,
    pub value: f64,
}

fn linspace01(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// `{df : m_plus |c + df| + |c - df| ≤ 2}`, an interval containing `-c`.
fn df_interval(c: f64, m_plus: f64) -> (f64, f64) {
    let g = |d: f64| m_plus * (c + d).abs() + (c - d).abs();
    let (k0, k1) = (c.min(-c), c.max(-c));
    // Walks the linear pieces of the convex function `g` away from `-c`.
    let edge = |dir: f64| {
        let mut x = -c;
        for knot in [k0, k1] {
            if (knot - x) * dir > 0.0 {
                if g(knot) > 2.0 {
                    let slope = (g(knot) - g(x)) / (knot - x);
                    return x + (2.0 - g(x)) / slope;
                }
                x = knot;
            }
        }
        x + dir * (2.0 - g(x)) / (m_plus + 1.0)
    };
    (edge(-1.0), edge(1.0))
}

struct Search<'a> {
    prev: &'a WeightedTable,
    cfg: &'a WeightedConfig,
    q: f64,
    sw: Vec<f64>,
    sf: Vec<f64>,
    sbf: Vec<f64>,
}

impl Search<'_> {
    /// Split in normalized units `F = m = 1` from the unit coordinates `s ∈ [0, 1]^3`.
    fn split_at(&self, beta: f64, c: f64, s: [f64; 3], eps: f64) -> WeightedSplit {
        let mut dw_max = (beta - 1.0).max(0.0);
        if !self.cfg.class.dyadic() {
            dw_max = dw_max.min(0.6 * beta);
        }
        let dw = s[0] * dw_max;
        let m_plus = ((beta + dw) / self.q).max(1.0);
        let (lo, hi) = df_interval(c, m_plus);
        let df = lo + s[1] * (hi - lo);
        let f_lo = m_plus * (c + df).abs() - 1.0;
        let f_hi = 1.0 - (c - df).abs();
        let d_big_f = f_lo + s[2] * (f_hi - f_lo).max(0.0);
        WeightedSplit {
            dw,
            df,
            d_big_f,
            m_plus,
            eps,
        }
    }

    fn score(&self, a: f64, beta: f64, c: f64, sp: &WeightedSplit) -> f64 {
        let t = self.prev;
        let (fp, fm) = (1.0 + sp.d_big_f, 1.0 - sp.d_big_f);
        let (wp, wm) = (beta + sp.dw, beta - sp.dw);
        let (cp, cm) = (c + sp.df, c - sp.df);
        if self.cfg.class.dyadic() {
            0.5 * (t.eval(fp, wp, sp.m_plus, cp, a - sp.eps * sp.df)
                + t.eval(fm, wm, 1.0, cm, a + sp.eps * sp.df))
        } else {
            0.25 * (t.eval(fp, wp, sp.m_plus, cp, a - sp.df)
                + t.eval(fp, wp, sp.m_plus, cp, a + sp.df)
                + t.eval(fm, wm, 1.0, cm, a - sp.df)
                + t.eval(fm, wm, 1.0, cm, a + sp.df))
        }
    }

    /// Best split at the normalized point `(1, β, 1, c, a)`.
    fn run(&self, a: f64, beta: f64, c: f64) -> WeightedChoice {
        let trivial = WeightedSplit::trivial(1.0);
        let mut best = WeightedChoice {
            split: trivial,
            value: self.prev.eval(1.0, beta, 1.0, c, a),
        };
        if self.cfg.class.dyadic() && a < 0.0 {
            return best;
        }
        let eps_list: &[f64] = if self.cfg.class.dyadic() {
            self.cfg.class.multipliers()
        } else {
            &[0.0]
        };
        let mut best_s = [0.0; 3];
        for &eps in eps_list {
            for &s0 in &self.sw {
                for &s1 in &self.sf {
                    for &s2 in &self.sbf {
                        let sp = self.split_at(beta, c, [s0, s1, s2], eps);
                        let v = self.score(a, beta, c, &sp);
                        if v > best.value {
                            best = WeightedChoice {
                                split: sp,
                                value: v,
                            };
                            best_s = [s0, s1, s2];
                        }
                    }
                }
            }
        }
        let mut h = [self.sw.len(), self.sf.len(), self.sbf.len()].map(|n| 1.0 / (n - 1) as f64);
        for _ in 0..self.cfg.refine_rounds {
            h = h.map(|x| 0.5 * x);
            let centre = best_s;
            let eps = best.split.eps;
            for d0 in -1..=1 {
                for d1 in -1..=1 {
                    for d2 in -1..=1 {
                        let s = [
                            (centre[0] + d0 as f64 * h[0]).clamp(0.0, 1.0),
                            (centre[1] + d1 as f64 * h[1]).clamp(0.0, 1.0),
                            (centre[2] + d2 as f64 * h[2]).clamp(0.0, 1.0),
                        ];
                        let sp = self.split_at(beta, c, s, eps);
                        let v = self.score(a, beta, c, &sp);
                        if v > best.value {
                            best = WeightedChoice {
                                split: sp,
                                value: v,
                            };
                            best_s = s;
                        }
                    }
                }
            }
        }
        best
    }
}

/// Finite-depth weighted Bellman functions `N_0, ..., N_k` at a fixed `Q`.
#[derive(Debug, Clone)]
pub struct WeightedDp {
    pub q: f64,
    pub config: WeightedConfig,
    levels: Vec<WeightedTable>,
    lower: Option<Vec<WeightedTable>>,
}

impl WeightedDp {
    /// Value tables and the upper-node tables used for witness replay.
    pub fn run(k: usize, q: f64, config: WeightedConfig) -> Result<Self> {
        Self::build(k, q, config, true)
    }

    /// Value tables only.
    pub fn run_values(k: usize, q: f64, config: WeightedConfig) -> Result<Self> {
        Self::build(k, q, config, false)
    }

    fn build(k: usize, q: f64, config: WeightedConfig, with_lower: bool) -> Result<Self> {
        config.validate()?;
        if !(q >= 1.0) || !q.is_finite() {
            return Err(WeightedError::Config(format!(
                "Q = {q} must be finite and at least 1"
            )));
        }
        let tables = |interp| {
            let mut levels = vec![WeightedTable::from_fn(q, &config, interp, |a, b, c| {
                n0_reduced(config.class, a, b, c)
            })];
            for _ in 0..k {
                let prev = levels.last().unwrap();
                let search = Self::searcher(prev, &config, q);
                let next =
                    WeightedTable::from_fn(q, &config, interp, |a, b, c| search.run(a, b, c).value);
                levels.push(next);
            }
            levels
        };
        let levels = tables(WeightedInterp::Trilinear);
        let lower = with_lower.then(|| tables(WeightedInterp::UpperNode));
        Ok(Self {
            q,
            config,
            levels,
            lower,
        })
    }

    fn searcher<'a>(prev: &'a WeightedTable, cfg: &'a WeightedConfig, q: f64) -> Search<'a> {
        let sw = if q > 1.0 {
            linspace01(cfg.split_w)
        } else {
            vec![0.0]
        };
        Search {
            prev,
            cfg,
            q,
            sw,
            sf: linspace01(cfg.split_f),
            sbf: linspace01(cfg.split_big_f),
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> Result<&WeightedTable> {
        self.levels.get(k).ok_or_else(|| {
            WeightedError::Config(format!("level {k} not computed (depth {})", self.depth()))
        })
    }

    pub fn lower_level(&self, k: usize) -> Result<&WeightedTable> {
        self.level(k)?;
        let lower = self
            .lower
            .as_ref()
            .ok_or_else(|| WeightedError::Config("run without witness tables".into()))?;
        Ok(&lower[k])
    }

    fn check_q(&self, p: &WeightedBellmanPoint) -> Result<()> {
        p.validate()?;
        if (p.q - self.q).abs() > 1e-12 * self.q {
            return Err(WeightedError::Config(format!(
                "point carries Q = {}, tables Q = {}",
                p.q, self.q
            )));
        }
        Ok(())
    }

    /// `N_k(p)`.
    pub fn value(&self, k: usize, p: &WeightedBellmanPoint) -> Result<f64> {
        self.check_q(p)?;
        Ok(self.level(k)?.eval_point(p))
    }

    /// `N_k(α, β, γ) = N_k(α, β, 1, γ, 1)`.
    pub fn reduced_value(&self, k: usize, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
        Ok(self.level(k)?.eval(alpha, beta, 1.0, gamma, 1.0))
    }

    /// The maximizing split of the recursion producing `N_k` at `p`, `k ≥ 1`.
    pub fn best_split(&self, k: usize, p: &WeightedBellmanPoint) -> Result<WeightedChoice> {
        self.best_split_in(&self.levels, k, p)
    }

    fn best_split_in(
        &self,
        tables: &[WeightedTable],
        k: usize,
        p: &WeightedBellmanPoint,
    ) -> Result<WeightedChoice> {
        self.check_q(p)?;
        if k == 0 {
            return Err(WeightedError::Config("level 0 has no split".into()));
        }
        self.level(k)?;
        if p.big_f <= 1e-14 * p.m {
            return Ok(WeightedChoice {
                split: WeightedSplit::trivial(p.m),
                value: tables[k].eval_point(p),
            });
        }
        let search = Self::searcher(&tables[k - 1], &self.config, self.q);
        let (s, m) = (p.big_f, p.m);
        let choice = search.run(p.lambda * m / s, p.w / m, p.f * m / s);
        let sp = choice.split;
        let split = WeightedSplit {
            dw: sp.dw * m,
            df: sp.df * s / m,
            d_big_f: sp.d_big_f * s,
            m_plus: sp.m_plus * m,
            eps: sp.eps,
        };
        Ok(WeightedChoice {
            split,
            value: choice.value * m,
        })
    }

    /// Largest gap between `N_k` read off the table and the recursion evaluated directly,
    /// over `samples` cell centres spread through the table.
    pub fn interpolation_residual(&self, k: usize, samples: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let table = self.level(k)?;
        let search = Self::searcher(&self.levels[k - 1], &self.config, self.q);
        let cells = (table.na - 2) * table.nb.max(2).saturating_sub(1).max(1) * (table.nc - 1);
        let stride = (cells / samples.max(1)).max(1);
        let nbc = table.nb.max(2) - 1;
        Ok((0..cells)
            .step_by(stride)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|idx| {
                let (ia, r) = (idx / (nbc * (table.nc - 1)), idx % (nbc * (table.nc - 1)));
                let (ib, ic) = (r / (table.nc - 1), r % (table.nc - 1));
                let lo = table.node(ia, ib, ic);
                let hi = table.node(ia + 1, (ib + 1).min(table.nb - 1), ic + 1);
                let a = a_of_u(0.5 * (u_of_a(lo[0]) + u_of_a(hi[0])));
                let beta = (lo[1] * hi[1]).sqrt();
                let c = 0.5 * (lo[2] + hi[2]);
                (table.eval_reduced(a, beta, c) - search.run(a, beta, c).value).abs()
            })
            .reduce(|| 0.0, f64::max))
    }

    /// `N_k` on a box in `(α, β, γ)`; `γ` is clamped to `[-α, α]` and `β` to `[1, Q]`.
    pub fn grid(&self, k: usize, bounds: Box3, res: [usize; 3]) -> Result<ValueGrid3> {
        validate_reduced_box(&bounds, res, self.q)?;
        let table = self.level(k)?;
        let axes = [0, 1, 2].map(|i| ValueGrid3::uniform_axis(bounds.lo[i], bounds.hi[i], res[i]));
        let meta = GridMeta {
            q: Some(self.q),
            k: k as i64,
            bounds: Some(bounds),
            resolution: res,
            smoothing: "none".into(),
            coordinates: ["alpha".into(), "beta".into(), "gamma".into()],
        };
        let q = self.q;
        Ok(ValueGrid3::from_fn(axes, meta, |[al, be, ga]| {
            table.eval(al, be.clamp(1.0, q), 1.0, ga.clamp(-al, al), 1.0)
        })?)
    }

    /// Replays maximizing splits from `p` into explicit `φ`, `w` and multipliers.
    ///
    /// Splits come from the upper-node tables, computed at the level `λ + margin`;
    /// leaves are decided at that shifted level, so the replayed level set is robust.
    pub fn witness(&self, k: usize, p: &WeightedBellmanPoint) -> Result<WeightedWitness> {
        self.check_q(p)?;
        if !self.config.class.dyadic() {
            return Err(WeightedError::Config(
                "use four_adic_replay for the four-adic class".into(),
            ));
        }
        let lower = self
            .lower
            .as_ref()
            .ok_or_else(|| WeightedError::Config("run without witness tables".into()))?;
        self.level(k)?;
        let margin = WITNESS_MARGIN * (1.0 + p.lambda.abs());
        let mut eps: Vec<Vec<f64>> = (0..=k).map(|d| vec![0.0; 1 << d]).collect();
        let mut frontier = vec![WeightedBellmanPoint {
            lambda: p.lambda + margin,
            ..*p
        }];
        for d in 0..k {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (i, q) in frontier.iter().enumerate() {
                let choice = self.best_split_in(lower, k - d, q)?;
                eps[d][i] = choice.split.eps;
                let (plus, minus) = choice.split.children(q);
                next.push(project(minus));
                next.push(project(plus));
            }
            frontier = next;
        }
        let cells = frontier.len() * 2;
        let (mut phi, mut w) = (vec![0.0; cells], vec![0.0; cells]);
        for (i, q) in frontier.iter().enumerate() {
            let (heavy, light) = if q.w - q.m > 1e-12 * q.w {
                (2.0 * q.w - q.m, q.m)
            } else {
                (q.w, q.w)
            };
            w[2 * i] = light;
            w[2 * i + 1] = heavy;
            let t = if q.w > 0.0 {
                (q.big_f + q.f.abs() * (q.w - q.m)) / q.w
            } else {
                0.0
            };
            let d = if q.f > 0.0 { -t } else { t };
            phi[2 * i] = q.f - d;
            phi[2 * i + 1] = q.f + d;
            eps[k][i] = if q.lambda >= 0.0 && q.lambda < t {
                d.signum()
            } else {
                0.0
            };
        }
        let phi = DyadicStepFunction::new(k as u32 + 1, phi)?;
        let w = DyadicStepFunction::new(k as u32 + 1, w)?;
        let spec = TransformSpec::from_levels(eps)?;
        let tphi = martingale_transform(&phi, &spec)?;
        let measure = weighted_level_set_measure(&tphi, p.lambda, &w)?;
        let big_f_actual = phi.zip_with(&w, |a, b| a.abs() * b)?.mean();
        let a1 = weights::a1_constant(&w)?;
        Ok(WeightedWitness {
            point: *p,
            k,
            value: self.levels[k].eval_point(p),
            lower: lower[k].eval_point(p),
            measure,
            big_f_actual,
            a1,
            phi,
            w,
            spec,
        })
    }

    /// Replays a four-adic table into `H`-martingales `F, f, w` and a `G`-martingale `g`
    /// with `b_I = -a_I`, whose level set `{g ≥ λ}` realizes the table value at `p`.
    ///
    /// After `k` generations, cells with `F < |f| w` are closed by pushing `F` and `f` into
    /// the light half while `w` drops towards its lower bound at ratio at most 4 per step.
    pub fn four_adic_replay(&self, k: usize, p: &WeightedBellmanPoint) -> Result<FourAdicReplay> {
        self.check_q(p)?;
        if self.config.class.dyadic() {
            return Err(WeightedError::Config(
                "four-adic replay needs the four-adic class".into(),
            ));
        }
        if !(p.lambda > 0.0) {
            return Err(WeightedError::Config("the level must be positive".into()));
        }
        let lower = self
            .lower
            .as_ref()
            .ok_or_else(|| WeightedError::Config("run without witness tables".into()))?;
        self.level(k)?;
        let margin = WITNESS_MARGIN * (1.0 + p.lambda.abs());
        let mut rows: Vec<[Vec<f64>; 4]> = Vec::new();
        let mut frontier: Vec<Option<WeightedBellmanPoint>> = vec![Some(WeightedBellmanPoint {
            lambda: p.lambda + margin,
            ..*p
        })];
        let mut gen = 0usize;
        while frontier.iter().any(Option::is_some) {
            if gen > k + 64 {
                return Err(WeightedError::Config("closing did not terminate".into()));
            }
            let n = frontier.len();
            let mut row = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            let mut next = Vec::with_capacity(4 * n);
            for (i, node) in frontier.iter().enumerate() {
                let Some(s) = node else {
                    next.extend([None; 4]);
                    continue;
                };
                let split = if gen < k {
                    Some(self.best_split_in(lower, k - gen, s)?.split)
                } else {
                    closing_split(s)
                };
                let Some(sp) = split else {
                    next.extend([None; 4]);
                    continue;
                };
                row[0][i] = sp.d_big_f;
                row[1][i] = sp.df;
                row[2][i] = sp.dw;
                row[3][i] = -sp.df;
                for child in sp.quarters(s) {
                    next.push(Some(project(child)));
                }
            }
            rows.push(row);
            frontier = next;
            gen += 1;
        }
        while rows
            .last()
            .is_some_and(|r| r.iter().all(|v| v.iter().all(|&x| x == 0.0)))
        {
            rows.pop();
        }
        let take = |j: usize| rows.iter().map(|r| r[j].clone()).collect::<Vec<_>>();
        Ok(FourAdicReplay {
            point: *p,
            k,
            value: self.levels[k].eval_point(p),
            lower: lower[k].eval_point(p),
            big_f: FourAdicMartingale::from_levels(MartingaleKind::H, p.big_f, take(0))?,
            f: FourAdicMartingale::from_levels(MartingaleKind::H, p.f, take(1))?,
            w: FourAdicMartingale::from_levels(MartingaleKind::H, p.w, take(2))?,
            g: FourAdicMartingale::from_levels(MartingaleKind::G, 0.0, take(3))?,
            level: p.lambda,
        })
    }
}

/// Closing step for a four-adic cell, or `None` when the cell can stay constant.
///
/// `F` and `f` move to the light half, whose weight drops by at most a factor 0.4 towards `m`; the
/// light half keeps weight at least `F / |f|`, after which it needs no further closing.
fn closing_split(s: &WeightedBellmanPoint) -> Option<WeightedSplit> {
    if s.big_f >= s.f.abs() * s.w * (1.0 - 1e-12) {
        return None;
    }
    let light = (0.4 * s.w).max(s.m).max(s.big_f / s.f.abs()).min(s.w);
    let dw = s.w - light;
    Some(WeightedSplit {
        dw,
        df: -s.f,
        d_big_f: -s.big_f,
        m_plus: s.m.max((s.w + dw) / s.q),
        eps: 0.0,
    })
}

pub(crate) fn validate_reduced_box(bounds: &Box3, res: [usize; 3], q: f64) -> Result<()> {
    if res.iter().any(|&r| r < 2) {
        return Err(WeightedError::Grid(
            "resolution must be at least 2 per axis".into(),
        ));
    }
    for i in 0..3 {
        if !(bounds.hi[i] > bounds.lo[i]) {
            return Err(WeightedError::Grid("empty box".into()));
        }
    }
    if !(bounds.lo[0] > 0.0) {
        return Err(WeightedError::Grid("alpha must stay positive".into()));
    }
    if bounds.lo[1] < 1.0 - 1e-12 || bounds.hi[1] > q + 1e-12 {
        return Err(WeightedError::Grid(format!(
            "beta range must lie in [1, {q}]"
        )));
    }
    Ok(())
}

const WITNESS_MARGIN: f64 = 1e-9;

fn project(q: WeightedBellmanPoint) -> WeightedBellmanPoint {
    let big_f = q.big_f.max(0.0);
    let m = q.m.min(q.w).max(q.w / q.q);
    let cap = big_f / m;
    WeightedBellmanPoint {
        big_f,
        m,
        f: q.f.clamp(-cap, cap),
        ..q
    }
}

/// An explicit weighted extremizer candidate and its replayed level set.
#[derive(Debug, Clone)]
pub struct WeightedWitness {
    pub point: WeightedBellmanPoint,
    pub k: usize,
    pub phi: DyadicStepFunction,
    pub w: DyadicStepFunction,
    pub spec: TransformSpec,
    /// `N_k(point)`.
    pub value: f64,
    /// The upper-node estimate the splits were chosen with.
    pub lower: f64,
    /// `w{T φ > λ}` by direct simulation.
    pub measure: f64,
    /// `⟨|φ| w⟩` of the replayed pair.
    pub big_f_actual: f64,
    /// Exact dyadic A1 constant of the replayed weight.
    pub a1: f64,
}

impl WeightedWitness {
    /// `λ w{T φ > λ} / (‖φ‖_{L¹(w)} [w]_{A1})`.
    pub fn ratio(&self) -> f64 {
        if self.big_f_actual <= 0.0 {
            return 0.0;
        }
        self.point.lambda * self.measure / (self.big_f_actual * self.a1)
    }
}

/// Four-adic martingales replayed from a four-adic table.
#[derive(Debug, Clone)]
pub struct FourAdicReplay {
    pub point: WeightedBellmanPoint,
    pub k: usize,
    pub value: f64,
    pub lower: f64,
    pub big_f: FourAdicMartingale,
    pub f: FourAdicMartingale,
    pub w: FourAdicMartingale,
    pub g: FourAdicMartingale,
    /// The threshold of the level set `{g ≥ level}`.
    pub level: f64,
}

impl FourAdicReplay {
    pub fn generations(&self) -> u32 {
        self.w.generations()
    }

    /// `level · ∫_{g ≥ level} w / ∫ F`.
    pub fn payoff(&self) -> f64 {
        let (g, w, big_f) = (
            self.g.cell_values(),
            self.w.cell_values(),
            self.big_f.cell_values(),
        );
        let hit: f64 = g
            .iter()
            .zip(&w)
            .filter(|(gv, _)| **gv >= self.level)
            .map(|(_, wv)| wv)
            .sum();
        let total: f64 = big_f.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        self.level * hit / total
    }

    /// `∫_{g ≥ level} w` on the unit interval.
    pub fn level_set_weight(&self) -> f64 {
        let (g, w) = (self.g.cell_values(), self.w.cell_values());
        let n = g.len() as f64;
        g.iter()
            .zip(&w)
            .filter(|(gv, _)| **gv >= self.level)
            .map(|(_, wv)| wv)
            .sum::<f64>()
            / n
    }
}

/// Runs the weighted recursion to depth `k` at `Q` and samples `N_k` on a box in
/// `(α, β, γ)`.
pub fn brute_force_weighted_nk(
    k: usize,
    q: f64,
    bounds: Box3,
    res: [usize; 3],
    config: WeightedConfig,
) -> Result<ValueGrid3> {
    validate_reduced_box(&bounds, res, q)?;
    WeightedDp::run_values(k, q, config)?.grid(k, bounds, res)
}

/// The `n` table nodes with the largest `λ 𝔹 / (F Q)` on the final upper-node table,
/// best first.
pub fn best_ratio_nodes(
    dp: &WeightedDp,
    k: usize,
    n: usize,
) -> Result<Vec<(f64, WeightedBellmanPoint)>> {
    let t = dp.lower_level(k)?;
    let mut all = Vec::new();
    for ia in 0..t.na - 1 {
        for ib in 0..t.nb {
            for ic in 0..t.nc {
                let [a, beta, c] = t.node(ia, ib, ic);
                if a > 0.0 {
                    all.push((a * t.at(ia, ib, ic) / dp.q, reduce_node(dp.q, [a, beta, c])));
                }
            }
        }
    }
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    all.truncate(n.max(1));
    Ok(all)
}

/// The point `(F, w, m, f, λ) = (1, β, 1, c, a)`.
fn reduce_node(q: f64, [a, beta, c]: [f64; 3]) -> WeightedBellmanPoint {
    let p = WeightedBellmanPoint {
        big_f: 1.0,
        w: beta,
        m: 1.0,
        f: c,
        lambda: a,
        q,
    };
    debug_assert!(a <= 0.0 || reduce(p).is_ok());
    p
}
