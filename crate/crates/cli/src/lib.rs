//! Experiment runner: each command writes `results.csv` and `summary.json` and reports
//! pass or fail per check.

mod config;
mod remodel;
mod report;
mod unweighted;
mod weighted;

pub use config::*;
pub use report::{Check, Report, SCHEMA};

use bellman_unweighted::BellmanError;
use bellman_weighted::WeightedError;
use remodeling::RemodelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Unweighted(#[from] BellmanError),
    #[error(transparent)]
    Weighted(#[from] WeightedError),
    #[error(transparent)]
    Remodel(#[from] RemodelError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    UnweightedVerify,
    UnweightedDp,
    WeightedDp,
    WeightedVerify,
    Quadform,
    Blowup,
    Bookkeeping,
    Remodel,
    HilbertXi,
    Lemma83,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::UnweightedVerify,
        Command::UnweightedDp,
        Command::WeightedDp,
        Command::WeightedVerify,
        Command::Quadform,
        Command::Blowup,
        Command::Bookkeeping,
        Command::Remodel,
        Command::HilbertXi,
        Command::Lemma83,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::UnweightedVerify => "unweighted-verify",
            Command::UnweightedDp => "unweighted-dp",
            Command::WeightedDp => "weighted-dp",
            Command::WeightedVerify => "weighted-verify",
            Command::Quadform => "quadform",
            Command::Blowup => "blowup",
            Command::Bookkeeping => "bookkeeping",
            Command::Remodel => "remodel",
            Command::HilbertXi => "hilbert-xi",
            Command::Lemma83 => "lemma83",
        }
    }
}

/// Closed-form checks and the depth-`k` obstacle values at one point.
pub fn unweighted_verify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let (dp, _) = unweighted::run_dp(cfg)?;
    unweighted::unweighted_verify(cfg, &dp)
}

/// Convergence of the unweighted recursion and the sampled grid.
pub fn unweighted_dp(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let (dp, secs) = unweighted::run_dp(cfg)?;
    unweighted::unweighted_dp(cfg, &dp, secs)
}

/// Both unweighted reports from a single run of the recursion.
pub fn unweighted_both(cfg: &ExperimentConfig) -> Result<(Report, Report), CliError> {
    let (dp, secs) = unweighted::run_dp(cfg)?;
    Ok((
        unweighted::unweighted_verify(cfg, &dp)?,
        unweighted::unweighted_dp(cfg, &dp, secs)?,
    ))
}

pub use remodel::{hilbert_xi, lemma83, remodel};
pub use weighted::{blowup, bookkeeping, quadform, weighted_dp, weighted_verify};

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match command {
        Command::UnweightedVerify => unweighted_verify(cfg),
        Command::UnweightedDp => unweighted_dp(cfg),
        Command::WeightedDp => weighted_dp(cfg),
        Command::WeightedVerify => weighted_verify(cfg),
        Command::Quadform => quadform(cfg),
        Command::Blowup => blowup(cfg),
        Command::Bookkeeping => bookkeeping(cfg),
        Command::Remodel => remodel(cfg),
        Command::HilbertXi => hilbert_xi(cfg),
        Command::Lemma83 => lemma83(cfg),
    }
}
