use crate::grid::{Box3, GridMeta, ValueGrid3};
use crate::{closed_form_b, n0_exact, BellmanError, BellmanPoint, Result, Split};
use dyadic_core::{
    martingale_transform, weighted_level_set_measure, DyadicStepFunction, TransformSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Admissible multipliers of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformClass {
    /// `eps = ±1`.
    Signs,
    /// `eps ∈ {-1, -1/2, 0, 1/2, 1}`.
    Contractive,
}

impl TransformClass {
    pub fn multipliers(self) -> &'static [f64] {
        match self {
            TransformClass::Signs => &[-1.0, 1.0],
            TransformClass::Contractive => &[-1.0, -0.5, 0.0, 0.5, 1.0],
        }
    }
}

/// Resolution of the value tables and of the split search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Nodes in `v = f / F ∈ [-1, 1]`.
    pub nv: usize,
    /// Nodes in `u = mu / (2 + mu) ∈ [0, 1]`, `mu = lambda / F`.
    pub nu: usize,
    /// Split grid per axis (odd, so the trivial split is included).
    pub split: usize,
    /// Local 5x5 refinements around the best split, each at half the spacing.
    pub refine_rounds: usize,
    pub class: TransformClass,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            nv: 129,
            nu: 257,
            split: 33,
            refine_rounds: 3,
            class: TransformClass::Signs,
        }
    }
}

impl DpConfig {
    /// A cheap configuration for smoke tests.
    pub fn coarse() -> Self {
        Self {
            nv: 33,
            nu: 65,
            split: 17,
            refine_rounds: 2,
            class: TransformClass::Signs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nv < 3 || self.nu < 3 {
            return Err(BellmanError::Config(
                "tables need at least 3 nodes per axis".into(),
            ));
        }
        if self.split < 3 || self.split.is_multiple_of(2) {
            return Err(BellmanError::Config(
                "split grid must be odd and at least 3".into(),
            ));
        }
        Ok(())
    }
}

/// How a [`RayTable`] is read between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interp {
    /// Bilinear in `(v, u)`.
    Bilinear,
    /// Linear in `v`, value of the next node up in `u`. Finite-depth values are
    /// nonincreasing in the level, so this reads from below.
    UpperNode,
}

/// A function of `(F, f, lambda)` that is invariant under `(F, f, lambda) -> t (F, f, lambda)`,
/// tabulated on the ray coordinates `(v, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayTable {
    pub nv: usize,
    pub nu: usize,
    pub interp: Interp,
    /// Row-major in `v`; the column `u = 1` (`lambda = ∞`) is 0.
    pub values: Vec<f64>,
}

fn u_of_mu(mu: f64) -> f64 {
    mu / (2.0 + mu)
}

fn mu_of_u(u: f64) -> f64 {
    if u >= 1.0 {
        f64::INFINITY
    } else {
        2.0 * u / (1.0 - u)
    }
}

impl RayTable {
    pub fn from_fn(
        nv: usize,
        nu: usize,
        interp: Interp,
        f: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Self {
        let values = (0..nv * nu)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / nu, idx % nu);
                if j == nu - 1 {
                    0.0
                } else {
                    f(Self::v_node(nv, i), mu_of_u(Self::u_node(nu, j)))
                }
            })
            .collect();
        Self {
            nv,
            nu,
            interp,
            values,
        }
    }

    fn v_node(nv: usize, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / (nv - 1) as f64
    }

    fn u_node(nu: usize, j: usize) -> f64 {
        j as f64 / (nu - 1) as f64
    }

    /// `(v, mu)` of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (Self::v_node(self.nv, i), mu_of_u(Self::u_node(self.nu, j)))
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nu + j]
    }

    /// Levels below 0 give 1 and `F = 0` gives 0 otherwise.
    #[inline]
    pub fn eval(&self, big_f: f64, f: f64, lambda: f64) -> f64 {
        if lambda < 0.0 {
            return 1.0;
        }
        if big_f <= 1e-14 {
            return 0.0;
        }
        let v = (f / big_f).clamp(-1.0, 1.0);
        let u = u_of_mu(lambda / big_f);
        let x = (v + 1.0) * 0.5 * (self.nv - 1) as f64;
        let y = u * (self.nu - 1) as f64;
        let i = (x as usize).min(self.nv - 2);
        let tx = x - i as f64;
        if self.interp == Interp::UpperNode {
            let j = ((y - 1e-9).ceil().max(0.0) as usize).min(self.nu - 1);
            let r0 = i * self.nu + j;
            return self.values[r0] + tx * (self.values[r0 + self.nu] - self.values[r0]);
        }
        let j = (y as usize).min(self.nu - 2);
        let ty = y - j as f64;
        let r0 = i * self.nu + j;
        let r1 = r0 + self.nu;
        let a = self.values[r0] + ty * (self.values[r0 + 1] - self.values[r0]);
        let b = self.values[r1] + ty * (self.values[r1 + 1] - self.values[r1]);
        a + tx * (b - a)
    }

    pub fn eval_point(&self, p: BellmanPoint) -> f64 {
        self.eval(p.big_f, p.f, p.lambda)
    }
}

/// Best split found at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub split: Split,
    pub value: f64,
}

struct SearchGrid {
    s: Vec<f64>,
    step: f64,
}

/// `(alpha, beta)` from the normalized displacements of `F - f` and `F + f`.
#[inline]
fn displacement(p: BellmanPoint, s1: f64, s2: f64) -> (f64, f64) {
    let dp = s1 * (p.big_f - p.f).max(0.0);
    let dq = s2 * (p.big_f + p.f).max(0.0);
    (0.5 * (dp + dq), 0.5 * (dq - dp))
}

fn search(prev: &RayTable, grid: &SearchGrid, cfg: &DpConfig, p: BellmanPoint) -> SplitChoice {
    let trivial = Split {
        alpha: 0.0,
        beta: 0.0,
        eps: 0.0,
    };
    if p.lambda < 0.0 || p.big_f <= 1e-14 {
        return SplitChoice {
            split: trivial,
            value: prev.eval_point(p),
        };
    }
    let score = |s1: f64, s2: f64, eps: f64| {
        let (alpha, beta) = displacement(p, s1, s2);
        let v = 0.5
            * (prev.eval(p.big_f + alpha, p.f + beta, p.lambda - eps * beta)
                + prev.eval(p.big_f - alpha, p.f - beta, p.lambda + eps * beta));
        (v, alpha, beta)
    };
    let mut best = (prev.eval_point(p), 0.0, 0.0, 0.0);
    let mut best_s = (0.0, 0.0);
    for &eps in cfg.class.multipliers() {
        for &s1 in &grid.s {
            for &s2 in &grid.s {
                let (v, a, b) = score(s1, s2, eps);
                if v > best.0 {
                    best = (v, a, b, eps);
                    best_s = (s1, s2);
                }
            }
        }
    }
    let mut h = grid.step;
    for _ in 0..cfg.refine_rounds {
        h *= 0.5;
        let (c1, c2) = best_s;
        let eps = best.3;
        for d1 in -2..=2 {
            for d2 in -2..=2 {
                let s1 = (c1 + d1 as f64 * h).clamp(-1.0, 1.0);
                let s2 = (c2 + d2 as f64 * h).clamp(-1.0, 1.0);
                let (v, a, b) = score(s1, s2, eps);
                if v > best.0 {
                    best = (v, a, b, eps);
                    best_s = (s1, s2);
                }
            }
        }
    }
    SplitChoice {
        split: Split {
            alpha: best.1,
            beta: best.2,
            eps: best.3,
        },
        value: best.0,
    }
}

/// Finite-depth Bellman functions `N_0, ..., N_k`.
#[derive(Debug, Clone)]
pub struct UnweightedDp {
    pub config: DpConfig,
    levels: Vec<RayTable>,
    lower: Vec<RayTable>,
    grid: Vec<f64>,
    step: f64,
}

impl UnweightedDp {
    pub fn run(k: usize, config: DpConfig) -> Result<Self> {
        config.validate()?;
        let n = config.split;
        let s: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect();
        let sg = SearchGrid {
            s,
            step: 2.0 / (n - 1) as f64,
        };
        let tables = |interp| {
            let mut levels = vec![RayTable::from_fn(config.nv, config.nu, interp, |v, mu| {
                n0_exact(BellmanPoint {
                    big_f: 1.0,
                    f: v,
                    lambda: mu,
                })
            })];
            for _ in 0..k {
                let prev = levels.last().unwrap();
                let next = RayTable::from_fn(config.nv, config.nu, interp, |v, mu| {
                    search(
                        prev,
                        &sg,
                        &config,
                        BellmanPoint {
                            big_f: 1.0,
                            f: v,
                            lambda: mu,
                        },
                    )
                    .value
                });
                levels.push(next);
            }
            levels
        };
        let levels = tables(Interp::Bilinear);
        let lower = tables(Interp::UpperNode);
        Ok(Self {
            config,
            levels,
            lower,
            grid: sg.s,
            step: sg.step,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> Result<&RayTable> {
        self.levels.get(k).ok_or_else(|| {
            BellmanError::Config(format!("level {k} not computed (depth {})", self.depth()))
        })
    }

    /// The upper-node tables that drive [`UnweightedDp::witness`].
    pub fn lower_level(&self, k: usize) -> Result<&RayTable> {
        self.level(k)?;
        Ok(&self.lower[k])
    }

    /// `N_k(p)`.
    pub fn value(&self, k: usize, p: BellmanPoint) -> Result<f64> {
        p.validate()?;
        Ok(self.level(k)?.eval_point(p))
    }

    /// The maximizing split of the recursion producing `N_k` at `p`, `k >= 1`.
    pub fn best_split(&self, k: usize, p: BellmanPoint) -> Result<SplitChoice> {
        self.best_split_in(&self.levels, k, p)
    }

    fn best_split_in(&self, tables: &[RayTable], k: usize, p: BellmanPoint) -> Result<SplitChoice> {
        p.validate()?;
        if k == 0 {
            return Err(BellmanError::Config("level 0 has no split".into()));
        }
        self.level(k)?;
        let prev = &tables[k - 1];
        let sg = SearchGrid {
            s: self.grid.clone(),
            step: self.step,
        };
        Ok(search(prev, &sg, &self.config, p))
    }

    /// `N_k` sampled on a box; nodes with `|f| > F` are projected onto `|f| = F`.
    pub fn grid(&self, k: usize, bounds: Box3, res: [usize; 3]) -> Result<ValueGrid3> {
        if res.iter().any(|&r| r < 2) {
            return Err(BellmanError::Grid(
                "resolution must be at least 2 per axis".into(),
            ));
        }
        let table = self.level(k)?;
        let axes = [0, 1, 2].map(|i| ValueGrid3::uniform_axis(bounds.lo[i], bounds.hi[i], res[i]));
        let meta = GridMeta {
            q: None,
            k: k as i64,
            bounds: Some(bounds),
            resolution: res,
            smoothing: "none".into(),
            coordinates: ["F".into(), "f".into(), "lambda".into()],
        };
        ValueGrid3::from_fn(axes, meta, |[big_f, f, lambda]| {
            table.eval(big_f, f.clamp(-big_f, big_f), lambda)
        })
    }

    /// Largest gap between the closed form and its interpolant on the table, sampled at
    /// cell centres and edge midpoints.
    pub fn interpolation_tolerance(&self) -> f64 {
        let (nv, nu) = (self.config.nv, self.config.nu);
        let b = |v: f64, mu: f64| {
            closed_form_b(BellmanPoint {
                big_f: 1.0,
                f: v,
                lambda: mu,
            })
            .unwrap_or(0.0)
        };
        let table = RayTable::from_fn(nv, nu, Interp::Bilinear, b);
        (0..2 * nv - 1)
            .into_par_iter()
            .map(|a| {
                let v = -1.0 + a as f64 / (nv - 1) as f64;
                let mut worst: f64 = 0.0;
                for c in 0..2 * nu - 2 {
                    let mu = mu_of_u(c as f64 / (2 * (nu - 1)) as f64);
                    worst = worst.max((table.eval(1.0, v, mu) - b(v, mu)).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Replay slack for [`UnweightedDp::witness`]: one cell of the `v` axis.
    pub fn witness_tolerance(&self) -> f64 {
        2.0 / (self.config.nv - 1) as f64
    }

    /// Replays maximizing splits from `p` into an explicit `phi` and multipliers.
    ///
    /// Splits are taken from the upper-node tables, which do not smear the jumps of
    /// `N_k` in the level. Extremal splits put children on the edge `lambda = F` of the
    /// strict level set, so they are computed for the level `lambda + margin` and the
    /// leaves are decided at their true level.
    pub fn witness(&self, k: usize, p: BellmanPoint) -> Result<Witness> {
        p.validate()?;
        self.level(k)?;
        let margin = WITNESS_MARGIN * (1.0 + p.lambda.abs());
        let cells = 1usize << (k + 1);
        let mut values = vec![0.0; cells];
        let mut eps: Vec<Vec<f64>> = (0..=k).map(|d| vec![0.0; 1 << d]).collect();
        let mut frontier = vec![BellmanPoint {
            lambda: p.lambda + margin,
            ..p
        }];
        for d in 0..k {
            let level = k - d;
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (i, &q) in frontier.iter().enumerate() {
                let choice = self.best_split_in(&self.lower, level, q)?;
                eps[d][i] = choice.split.eps;
                let (plus, minus) = choice.split.children(q);
                next.push(project(minus));
                next.push(project(plus));
            }
            frontier = next;
        }
        for (i, q) in frontier.iter().enumerate() {
            values[2 * i] = q.f - q.big_f;
            values[2 * i + 1] = q.f + q.big_f;
            let level = q.lambda - margin;
            eps[k][i] = if level >= 0.0 && level < q.big_f {
                1.0
            } else {
                0.0
            };
        }
        let phi = DyadicStepFunction::new(k as u32 + 1, values)?;
        let spec = TransformSpec::from_levels(eps)?;
        let measure = level_measure(&phi, &spec, p.lambda)?;
        Ok(Witness {
            point: p,
            k,
            phi,
            spec,
            value: self.level(k)?.eval_point(p),
            lower: self.lower[k].eval_point(p),
            measure,
        })
    }
}

const WITNESS_MARGIN: f64 = 1e-9;

fn project(q: BellmanPoint) -> BellmanPoint {
    let big_f = q.big_f.max(0.0);
    BellmanPoint {
        big_f,
        f: q.f.clamp(-big_f, big_f),
        lambda: q.lambda,
    }
}

/// `|{T phi > lambda}|` on the unit interval.
pub fn level_measure(phi: &DyadicStepFunction, spec: &TransformSpec, lambda: f64) -> Result<f64> {
    let t = martingale_transform(phi, spec)?;
    let one = DyadicStepFunction::constant(t.depth(), 1.0)?;
    Ok(weighted_level_set_measure(&t, lambda, &one)?)
}

/// An explicit extremizer candidate and its replayed level-set measure.
#[derive(Debug, Clone)]
pub struct Witness {
    pub point: BellmanPoint,
    pub k: usize,
    pub phi: DyadicStepFunction,
    pub spec: TransformSpec,
    /// `N_k(point)`.
    pub value: f64,
    /// The upper-node estimate the splits were chosen with.
    pub lower: f64,
    /// `|{T phi > lambda}|` by direct simulation.
    pub measure: f64,
}

/// Runs the recursion to depth `k` and samples `N_k` on `bounds`.
pub fn brute_force_nk(
    k: usize,
    bounds: Box3,
    res: [usize; 3],
    config: DpConfig,
) -> Result<ValueGrid3> {
    for i in 0..3 {
        if !(bounds.hi[i] > bounds.lo[i]) {
            return Err(BellmanError::Grid("empty box".into()));
        }
    }
    if bounds.lo[0] < 0.0 {
        return Err(BellmanError::Grid("box leaves F >= 0".into()));
    }
    UnweightedDp::run(k, config)?.grid(k, bounds, res)
}
