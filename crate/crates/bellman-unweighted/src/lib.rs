//! The unweighted Bellman function for weak-type estimates of martingale transforms.
//!
//! `B(F, f, lambda)` is the supremum of `|{T phi > lambda}|` over `phi` with
//! `<|phi|> = F`, `<phi> = f` and transforms with multipliers of modulus at most 1.

mod closed;
mod dp;
mod grid;

pub use closed::*;
pub use dp::*;
pub use grid::*;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellmanError {
    #[error("point ({0}, {1}, {2}) outside the domain |f| <= F")]
    OutsideDomain(f64, f64, f64),
    #[error("degenerate point: lambda = |f| > F")]
    Degenerate,
    #[error("displacement pattern violated: {0}")]
    Pattern(String),
    #[error("stencil leaves the domain")]
    StencilExit,
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dyadic(#[from] dyadic_core::DyadicError),
}

pub type Result<T> = std::result::Result<T, BellmanError>;
