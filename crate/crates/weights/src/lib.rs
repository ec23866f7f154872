//! Dyadic A1 weights.
//!
//! `a1_constant` is the exact maximum of `<w>_J / min_J w` over every dyadic
//! `J` down to the storage depth. Doubling reports compare averages on
//! tree neighbours: parent and child (both orders) and siblings.

use dyadic_core::{DyadicError, DyadicInterval, DyadicStepFunction};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight value {0} is not strictly positive")]
    NonPositive(f64),
    #[error("arity must be 2 or 4, got {0}")]
    BadArity(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cached A1 constant {cached} disagrees with recomputed {computed}")]
    CacheMismatch { cached: f64, computed: f64 },
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, WeightError>;

fn check_positive(w: &DyadicStepFunction) -> Result<()> {
    match w.values().iter().find(|&&v| v <= 0.0 || !v.is_finite()) {
        Some(&v) => Err(WeightError::NonPositive(v)),
        None => Ok(()),
    }
}

/// Exact dyadic A1 constant together with an interval attaining it.
pub fn a1_constant_with_witness(w: &DyadicStepFunction) -> Result<(f64, DyadicInterval)> {
    check_positive(w)?;
    let avg = w.average_pyramid();
    let min = w.min_pyramid();
    let mut best = (f64::NEG_INFINITY, DyadicInterval::root());
    for (d, (a_row, m_row)) in avg.iter().zip(&min).enumerate() {
        for (i, (a, m)) in a_row.iter().zip(m_row).enumerate() {
            let r = a / m;
            if r > best.0 {
                best = (
                    r,
                    DyadicInterval {
                        depth: d as u32,
                        index: i as u64,
                    },
                );
            }
        }
    }
    Ok(best)
}

pub fn a1_constant(w: &DyadicStepFunction) -> Result<f64> {
    a1_constant_with_witness(w).map(|(q, _)| q)
}

/// A node of the lattice used by a doubling report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeNode {
    pub arity: u32,
    pub generation: u32,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub constant: f64,
    /// `(I, I_hat)` with `<w>_{I_hat} / <w>_I = constant`.
    pub worst_pair: (LatticeNode, LatticeNode),
}

/// Averages of `w` on every lattice node down to the storage resolution.
fn lattice_averages(w: &DyadicStepFunction, arity: u32) -> Vec<Vec<f64>> {
    let pyr = w.average_pyramid();
    match arity {
        2 => pyr,
        _ => {
            let gens = w.depth().div_ceil(2);
            (0..=gens)
                .map(|n| {
                    let d = 2 * n;
                    if d <= w.depth() {
                        pyr[d as usize].clone()
                    } else {
                        pyr[w.depth() as usize]
                            .iter()
                            .flat_map(|&v| std::iter::repeat_n(v, 2))
                            .collect()
                    }
                })
                .collect()
        }
    }
}

pub fn doubling_report(w: &DyadicStepFunction, arity: u32) -> Result<DoublingReport> {
    if arity != 2 && arity != 4 {
        return Err(WeightError::BadArity(arity));
    }
    check_positive(w)?;
    let avg = lattice_averages(w, arity);
    let a = arity as usize;
    let node = |g: usize, i: usize| LatticeNode {
        arity,
        generation: g as u32,
        index: i as u64,
    };
    let mut best = DoublingReport {
        constant: 1.0,
        worst_pair: (node(0, 0), node(0, 0)),
    };
    let mut consider = |r: f64, p: (LatticeNode, LatticeNode)| {
        if r > best.constant {
            best = DoublingReport {
                constant: r,
                worst_pair: p,
            };
        }
    };
    for g in 1..avg.len() {
        for (i, &v) in avg[g].iter().enumerate() {
            let p = i / a;
            let pv = avg[g - 1][p];
            consider(pv / v, (node(g, i), node(g - 1, p)));
            consider(v / pv, (node(g - 1, p), node(g, i)));
            for j in (p * a)..(p * a + a) {
                if j != i {
                    consider(avg[g][j] / v, (node(g, i), node(g, j)));
                }
            }
        }
    }
    Ok(best)
}

/// A strictly positive step function with its A1 constant, recomputed on every load.
#[derive(Debug, Clone, PartialEq)]
pub struct A1Weight {
    w: DyadicStepFunction,
    a1: f64,
}

#[derive(Serialize, Deserialize)]
struct WeightDoc {
    depth: u32,
    values: Vec<f64>,
    #[serde(rename = "a1Constant")]
    a1_constant: f64,
}

impl A1Weight {
    pub fn new(w: DyadicStepFunction) -> Result<Self> {
        let a1 = a1_constant(&w)?;
        Ok(Self { w, a1 })
    }

    pub fn weight(&self) -> &DyadicStepFunction {
        &self.w
    }

    pub fn a1_constant(&self) -> f64 {
        self.a1
    }

    pub fn to_json(&self) -> String {
        let doc = WeightDoc {
            depth: self.w.depth(),
            values: self.w.values().to_vec(),
            a1_constant: self.a1,
        };
        serde_json::to_string(&doc).expect("weight serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: WeightDoc =
            serde_json::from_str(s).map_err(|e| WeightError::Format(e.to_string()))?;
        let me = Self::new(DyadicStepFunction::new(doc.depth, doc.values)?)?;
        if (me.a1 - doc.a1_constant).abs() > 1e-9 * me.a1 {
            return Err(WeightError::CacheMismatch {
                cached: doc.a1_constant,
                computed: me.a1,
            });
        }
        Ok(me)
    }
}

/// `1` on the outer quarters `I_{--}`, `I_{++}` and `Q` on the middle quarters.
pub fn build_obstacle_weight(q: f64, depth: u32) -> Result<A1Weight> {
    if !(q >= 1.0) || depth < 2 {
        return Err(WeightError::InvalidParameter(format!(
            "Q = {q}, depth = {depth}"
        )));
    }
    let quarters = DyadicStepFunction::new(2, vec![1.0, q, q, 1.0])?;
    A1Weight::new(quarters.refine(depth)?)
}

/// `2Q - 1` on `[0, 1/2)` and `1` on `[1/2, 1)`.
pub fn two_valued_extremal_weight(q: f64) -> Result<A1Weight> {
    if !(q >= 1.0) {
        return Err(WeightError::InvalidParameter(format!("Q = {q}")));
    }
    A1Weight::new(DyadicStepFunction::new(1, vec![2.0 * q - 1.0, 1.0])?)
}

/// Multiplicative cascade: each child gets the factor `1 +/- d` of its parent with
/// `d` uniform in `[0, delta]`. Returns the weight and the certified bound
/// `((1 + delta) / (1 - delta))^depth` on its A1 constant.
pub fn random_cascade_weight<R: Rng>(
    rng: &mut R,
    depth: u32,
    delta: f64,
) -> Result<(A1Weight, f64)> {
    if !(0.0..1.0).contains(&delta) {
        return Err(WeightError::InvalidParameter(format!("delta = {delta}")));
    }
    let mut cur = vec![1.0f64];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for &v in &cur {
            let d = rng.gen_range(0.0..=delta);
            let s = if rng.gen_bool(0.5) { d } else { -d };
            next.push(v * (1.0 - s));
            next.push(v * (1.0 + s));
        }
        cur = next;
    }
    let bound = ((1.0 + delta) / (1.0 - delta)).powi(depth as i32);
    Ok((A1Weight::new(DyadicStepFunction::new(depth, cur)?)?, bound))
}
