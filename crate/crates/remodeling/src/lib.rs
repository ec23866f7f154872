//! Extremal four-adic martingales and their remodeling into periodic functions.
//!
//! A quadruple `(F, f, w, g)` of four-adic martingales is extracted from the weighted
//! Bellman recursion. Proliferation copies each martingale difference into square waves
//! on supervised subintervals; the copies keep the distributions while the Hilbert
//! transform of the square sine is the square cosine times a nonnegative factor `ξ`.

mod decomposition;
mod hilbert;
mod lemma83;
mod quadruple;
mod remodel;
mod schedule;
mod square;

pub use decomposition::*;
pub use hilbert::*;
pub use lemma83::*;
pub use quadruple::*;
pub use remodel::*;
pub use schedule::*;
pub use square::*;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemodelError {
    #[error("property {check} violated: {detail}")]
    PropertyViolated { check: &'static str, detail: String },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("θ is not normalized: Σ θ_k E ξ = {0}")]
    Unnormalized(f64),
    #[error(transparent)]
    Dyadic(#[from] dyadic_core::DyadicError),
    #[error(transparent)]
    Weighted(#[from] bellman_weighted::WeightedError),
}

pub type Result<T> = std::result::Result<T, RemodelError>;
