use crate::{reduce, ReducedPoint, Result, WeightedBellmanPoint, WeightedError};
use dyadic_core::{
    martingale_transform, weighted_level_set_measure_with, DyadicStepFunction, LevelSet,
    TransformSpec,
};
use serde::{Deserialize, Serialize};

/// Simulation of the two-quarter configuration: `φ = -a` on `[0, 1/4)`, `b` on
/// `[3/4, 1)`, `w = 1` there and `Q` on the middle quarters,
/// `ψ = (φ, h_{I-}) h_{I-} - (φ, h_{I+}) h_{I+}` and `λ = (a + b) / 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedObstacleReport {
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// `w{ψ ≥ λ}` on the unit interval.
    pub level_set_weight: f64,
    /// `⟨w⟩`.
    pub mean_weight: f64,
    /// `w{ψ ≥ λ} / ⟨w⟩`.
    pub ratio: f64,
    /// `ψ` on `[1/2, 3/4)`.
    pub psi_on_plus_minus: f64,
    pub a1: f64,
    /// Reduced coordinates of the data `(⟨|φ| w⟩, ⟨w⟩, inf w, ⟨φ⟩, λ)`.
    pub reduced: ReducedPoint,
    /// `ratio ≥ 1/3`.
    pub pass: bool,
}

pub fn verify_weighted_obstacle(q: f64) -> Result<WeightedObstacleReport> {
    verify_weighted_obstacle_with(q, 0.9, 1.0)
}

pub fn verify_weighted_obstacle_with(q: f64, a: f64, b: f64) -> Result<WeightedObstacleReport> {
    if !(q >= 2.0) || !(0.0 < a && a < b) {
        return Err(WeightedError::Config(format!(
            "need Q >= 2 and 0 < a < b, got Q = {q}, a = {a}, b = {b}"
        )));
    }
    let phi = DyadicStepFunction::new(2, vec![-a, 0.0, 0.0, b])?;
    let w = weights::build_obstacle_weight(q, 2)?;
    let w = w.weight();
    let spec = TransformSpec::from_levels(vec![vec![0.0], vec![1.0, -1.0]])?;
    let psi = martingale_transform(&phi, &spec)?;
    let lambda = 0.25 * (a + b);
    let level_set_weight = weighted_level_set_measure_with(&psi, lambda, w, LevelSet::NonStrict)?;
    let mean_weight = w.mean();
    let big_f = phi.zip_with(w, |x, y| x.abs() * y)?.mean();
    let m = w.values().iter().copied().fold(f64::INFINITY, f64::min);
    let point = WeightedBellmanPoint::new(big_f, mean_weight, m, phi.mean(), lambda, q)?;
    let ratio = level_set_weight / mean_weight;
    Ok(WeightedObstacleReport {
        q,
        a,
        b,
        lambda,
        level_set_weight,
        mean_weight,
        ratio,
        psi_on_plus_minus: psi.values()[2],
        a1: weights::a1_constant(w)?,
        reduced: reduce(point)?,
        pass: ratio >= 1.0 / 3.0,
    })
}
