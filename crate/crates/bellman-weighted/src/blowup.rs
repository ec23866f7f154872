use crate::{best_ratio_nodes, Result, WeightedConfig, WeightedDp, WeightedError, WeightedWitness};
use dyadic_core::{martingale_transform, DyadicStepFunction, TransformSpec};
use serde::{Deserialize, Serialize};

/// `sup_λ λ w{T φ > λ} / (‖φ‖_{L¹(w)} [w]_{A1})`.
///
/// The supremum over `λ` is approached from below at each value `v` of `T φ`, where it
/// equals `v w{T φ ≥ v}`.
pub fn weak_norm_ratio(
    phi: &DyadicStepFunction,
    w: &DyadicStepFunction,
    spec: &TransformSpec,
) -> Result<f64> {
    let t = martingale_transform(phi, spec)?;
    let norm = phi.zip_with(w, |a, b| a.abs() * b)?.mean();
    if norm <= 0.0 {
        return Ok(0.0);
    }
    let a1 = weights::a1_constant(w)?;
    let mut cells: Vec<(f64, f64)> = t
        .values()
        .iter()
        .copied()
        .zip(w.values().iter().copied())
        .collect();
    cells.sort_by(|x, y| y.0.total_cmp(&x.0));
    let n = cells.len() as f64;
    let (mut acc, mut best) = (0.0, 0.0f64);
    let mut i = 0;
    while i < cells.len() {
        let v = cells[i].0;
        while i < cells.len() && cells[i].0 == v {
            acc += cells[i].1 / n;
            i += 1;
        }
        if v > 0.0 {
            best = best.max(v * acc);
        }
    }
    Ok(best / (norm * a1))
}

/// One run of the blow-up experiment.
#[derive(Debug, Clone)]
pub struct BlowupPoint {
    pub q: f64,
    pub k: usize,
    /// [`weak_norm_ratio`] of the best replayed witness.
    pub ratio: f64,
    /// `λ 𝔹 / (F Q)` at the table node that witness starts from.
    pub node_ratio: f64,
    pub witness: WeightedWitness,
}

/// Candidate nodes replayed per run.
pub const BLOWUP_CANDIDATES: usize = 8;

/// Replays the best table nodes of a depth-`k` dyadic DP at `Q` and keeps the witness
/// with the largest measured ratio.
pub fn empirical_weak_norm_ratio(q: f64, k: usize, config: WeightedConfig) -> Result<BlowupPoint> {
    if !(q >= 1.0) {
        return Err(WeightedError::Config(format!("Q = {q} below 1")));
    }
    let dp = WeightedDp::run(k, q, config)?;
    blowup_from_dp(&dp, k)
}

pub fn blowup_from_dp(dp: &WeightedDp, k: usize) -> Result<BlowupPoint> {
    let mut best: Option<BlowupPoint> = None;
    for (node_ratio, p) in best_ratio_nodes(dp, k, BLOWUP_CANDIDATES)? {
        let witness = dp.witness(k, &p)?;
        let ratio = weak_norm_ratio(&witness.phi, &witness.w, &witness.spec)?;
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(BlowupPoint {
                q: dp.q,
                k,
                ratio,
                node_ratio,
                witness,
            });
        }
    }
    best.ok_or_else(|| WeightedError::Config("no table node with a positive level".into()))
}

/// Least-squares slope of `ln ratio` against `ln ln Q` with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthFit {
    pub exponent: f64,
    pub half_width: f64,
    pub points: usize,
}

pub fn fit_log_growth(qs: &[f64], ratios: &[f64]) -> Result<LogGrowthFit> {
    let pts: Vec<(f64, f64)> = qs
        .iter()
        .zip(ratios)
        .filter(|(q, r)| **q > 1.0 && **r > 0.0)
        .map(|(q, r)| (q.ln().ln(), r.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(WeightedError::Config(
            "need at least 3 points with Q > 1".into(),
        ));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LogGrowthFit {
        exponent: slope,
        half_width: student_t95(n - 2) * se,
        points: n,
    })
}

/// Two-sided 95% quantile of Student's t.
fn student_t95(df: usize) -> f64 {
    const T: [f64; 10] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    ];
    T.get(df.wrapping_sub(1))
        .copied()
        .unwrap_or(1.96 + 2.5 / df as f64)
}

/// The unnamed absolute constants of the power counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookkeepingConstants {
    pub c: f64,
    pub tau: f64,
    pub big_c: f64,
}

impl Default for BookkeepingConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            tau: 1.0,
            big_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookkeepingRow {
    pub q: f64,
    pub q_hat: f64,
    pub alpha0: f64,
    pub gamma0: f64,
    pub lhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BookkeepingStatus {
    /// `LHS > 1` from `threshold` to the end of the list.
    Contradiction { threshold: f64 },
    /// `LHS ≤ 1` at the end of the list and decreasing there.
    NoContradiction,
    /// `LHS ≤ 1` at the end of the list but not decreasing, so a later crossing is not
    /// excluded.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookkeepingReport {
    pub p: f64,
    pub constants: BookkeepingConstants,
    pub rows: Vec<BookkeepingRow>,
    /// `d ln LHS / d ln ln Q` between the last two rows.
    pub final_slope: f64,
    pub status: BookkeepingStatus,
}

impl BookkeepingReport {
    pub fn threshold(&self) -> Option<f64> {
        match self.status {
            BookkeepingStatus::Contradiction { threshold } => Some(threshold),
            _ => None,
        }
    }
}

/// Slopes above this count as not decreasing.
const FLAT_SLOPE: f64 = -0.05;

/// `LHS(Q) = C α₀² (Q / Q̂)² (γ₀ / α₀) ln(1 + Q γ₀ / α₀)` with `Q̂ = Q ln^p Q`,
/// `α₀ = c Q / Q̂` and `γ₀ = τ (Q / Q̂) α₀`.
pub fn bookkeeping_witness(
    p: f64,
    qs: &[f64],
    k: BookkeepingConstants,
) -> Result<BookkeepingReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(WeightedError::Config(format!(
            "exponent p = {p} outside (0, 1)"
        )));
    }
    if qs.len() < 2 || qs.iter().any(|&q| !(q > 1.0)) || qs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(WeightedError::Config(
            "Q list must be increasing, above 1, with 2+ entries".into(),
        ));
    }
    if !(k.c > 0.0 && k.tau > 0.0 && k.big_c > 0.0) {
        return Err(WeightedError::Config("constants must be positive".into()));
    }
    let rows: Vec<BookkeepingRow> = qs
        .iter()
        .map(|&q| {
            let q_hat = q * q.ln().powf(p);
            let r = q / q_hat;
            let alpha0 = k.c * r;
            let gamma0 = k.tau * r * alpha0;
            let lhs = k.big_c
                * alpha0
                * alpha0
                * r
                * r
                * (gamma0 / alpha0)
                * (q * gamma0 / alpha0).ln_1p();
            BookkeepingRow {
                q,
                q_hat,
                alpha0,
                gamma0,
                lhs,
            }
        })
        .collect();
    let tail_start = rows.iter().rposition(|r| r.lhs <= 1.0).map_or(0, |i| i + 1);
    let (a, b) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let final_slope = (b.lhs.ln() - a.lhs.ln()) / (b.q.ln().ln() - a.q.ln().ln());
    let status = if tail_start < rows.len() {
        BookkeepingStatus::Contradiction {
            threshold: rows[tail_start].q,
        }
    } else if final_slope < FLAT_SLOPE {
        BookkeepingStatus::NoContradiction
    } else {
        BookkeepingStatus::Inconclusive
    };
    Ok(BookkeepingReport {
        p,
        constants: k,
        rows,
        final_slope,
        status,
    })
}

/// `2, 4, ..., 2^max_exp`.
pub fn powers_of_two(max_exp: u32) -> Vec<f64> {
    (1..=max_exp).map(|j| (j as f64).exp2()).collect()
}
