use crate::{RemodelError, Result};
use dyadic_core::MartingaleKind;
use serde::{Deserialize, Serialize};

/// Largest supported exponent per generation.
pub const MAX_EXPONENT: u32 = 12;

/// Square sine, square cosine and the edge-trimmed square sine on one supervisee,
/// sampled on its `4^(n+1)` steps.
///
/// `sqsin = H(4^n ·)` and `sqcos = G(4^n ·)` relative to the supervisee, so step `i`
/// carries the `H` (resp. `G`) value of quarter `i mod 4`. `sqsm` zeroes the first and
/// last 4 steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareWaves {
    pub n: u32,
    pub sqsin: Vec<f64>,
    pub sqcos: Vec<f64>,
    pub sqsm: Vec<f64>,
}

pub fn steps(n: u32) -> u64 {
    1u64 << (2 * (n + 1))
}

pub fn sqs_step(i: u64) -> f64 {
    MartingaleKind::H.quarter_value((i % 4) as usize)
}

pub fn sqc_step(i: u64) -> f64 {
    MartingaleKind::G.quarter_value((i % 4) as usize)
}

pub fn sqsm_step(n: u32, i: u64) -> f64 {
    if i < 4 || i >= steps(n) - 4 {
        0.0
    } else {
        sqs_step(i)
    }
}

pub fn sqsin_sqcos(n: u32) -> Result<SquareWaves> {
    if n == 0 || n > MAX_EXPONENT {
        return Err(RemodelError::Schedule(format!(
            "exponent {n} outside 1..={MAX_EXPONENT}"
        )));
    }
    let s = steps(n);
    Ok(SquareWaves {
        n,
        sqsin: (0..s).map(sqs_step).collect(),
        sqcos: (0..s).map(sqc_step).collect(),
        sqsm: (0..s).map(|i| sqsm_step(n, i)).collect(),
    })
}

impl SquareWaves {
    /// `(sqsin, sqcos, sqsm)` at relative position `t ∈ [0, 1)` of the supervisee.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..1.0).contains(&t) {
            return Err(RemodelError::Input(format!("position {t} outside [0, 1)")));
        }
        let i = ((t * self.sqsin.len() as f64) as usize).min(self.sqsin.len() - 1);
        Ok((self.sqsin[i], self.sqcos[i], self.sqsm[i]))
    }
}
