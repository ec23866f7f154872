//! The weighted weak-type Bellman function under dyadic A1 weights.
//!
//! `𝔹(F, w, m, f, λ)` is the supremum of `⟨w⟩`-normalized `w{T φ > λ}` over `φ`, `w`
//! with `⟨|φ| w⟩ = F`, `⟨w⟩ = w`, `inf w ≥ m`, `⟨φ⟩ = f` and `[w]_{A1} ≤ Q`. Both
//! homogeneities reduce it to `m B(F / (m λ), w / m, f / λ)`.

mod blowup;
mod dp;
mod inequality;
mod obstacle;
mod quadform;

pub use blowup::*;
pub use dp::*;
pub use inequality::*;
pub use obstacle::*;
pub use quadform::*;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightedError {
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("reduction needs lambda > 0 and m > 0")]
    NotReducible,
    #[error("displacement pattern violated: {0}")]
    Pattern(String),
    #[error("stencil leaves the grid")]
    StencilExit,
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dyadic(#[from] dyadic_core::DyadicError),
    #[error(transparent)]
    Weight(#[from] weights::WeightError),
    #[error(transparent)]
    Unweighted(#[from] bellman_unweighted::BellmanError),
}

pub type Result<T> = std::result::Result<T, WeightedError>;

/// Relative slack used for domain membership.
pub(crate) const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedBellmanPoint {
    /// `⟨|φ| w⟩`.
    pub big_f: f64,
    /// `⟨w⟩`.
    pub w: f64,
    /// Lower bound for `inf w`.
    pub m: f64,
    pub f: f64,
    pub lambda: f64,
    /// A1 bound in force.
    pub q: f64,
}

impl WeightedBellmanPoint {
    pub fn new(big_f: f64, w: f64, m: f64, f: f64, lambda: f64, q: f64) -> Result<Self> {
        let p = Self {
            big_f,
            w,
            m,
            f,
            lambda,
            q,
        };
        p.validate()?;
        Ok(p)
    }

    /// `F ≥ |f| m`, `0 < m ≤ w ≤ Q m`.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.big_f, self.w, self.m, self.f, self.lambda, self.q];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(WeightedError::OutsideDomain(format!(
                "non-finite coordinate in {self:?}"
            )));
        }
        let s = DOMAIN_SLACK * (1.0 + self.big_f.abs() + self.w.abs());
        if !(self.q >= 1.0) || !(self.m > 0.0) {
            return Err(WeightedError::OutsideDomain(format!(
                "need Q >= 1 and m > 0: {self:?}"
            )));
        }
        if self.big_f < self.f.abs() * self.m - s {
            return Err(WeightedError::OutsideDomain(format!("F < |f| m: {self:?}")));
        }
        if self.w < self.m - s || self.w > self.q * self.m + s {
            return Err(WeightedError::OutsideDomain(format!(
                "w outside [m, Q m]: {self:?}"
            )));
        }
        Ok(())
    }

    /// The same point with `(F, w, m)` multiplied by `s`.
    pub fn scale_weight(self, s: f64) -> Self {
        Self {
            big_f: s * self.big_f,
            w: s * self.w,
            m: s * self.m,
            ..self
        }
    }

    /// The same point with `(F, f, λ)` multiplied by `t`.
    pub fn scale_level(self, t: f64) -> Self {
        Self {
            big_f: t * self.big_f,
            f: t * self.f,
            lambda: t * self.lambda,
            ..self
        }
    }
}

/// `(α, β, γ) = (F / (m λ), w / m, f / λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ReducedPoint {
    /// `|γ| ≤ α`, `1 ≤ β ≤ Q`.
    pub fn in_domain(&self, q: f64) -> bool {
        let s = DOMAIN_SLACK * (1.0 + self.alpha.abs() + self.beta);
        self.gamma.abs() <= self.alpha + s && self.beta >= 1.0 - s && self.beta <= q + s
    }

    /// The representative with `m = 1` and `λ = 1`.
    pub fn to_point(self, q: f64) -> WeightedBellmanPoint {
        WeightedBellmanPoint {
            big_f: self.alpha,
            w: self.beta,
            m: 1.0,
            f: self.gamma,
            lambda: 1.0,
            q,
        }
    }
}

pub fn reduce(p: WeightedBellmanPoint) -> Result<ReducedPoint> {
    p.validate()?;
    if !(p.lambda > 0.0) {
        return Err(WeightedError::NotReducible);
    }
    Ok(ReducedPoint {
        alpha: p.big_f / (p.m * p.lambda),
        beta: p.w / p.m,
        gamma: p.f / p.lambda,
    })
}
