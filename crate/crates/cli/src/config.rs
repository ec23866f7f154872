use bellman_unweighted::DpConfig;
use bellman_weighted::{BookkeepingConstants, WeightedConfig};
use remodeling::FROZEN_DELTA;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::CliError;

/// All parameters of every command. Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub unweighted: UnweightedParams,
    pub weighted: WeightedParams,
    pub quadform: QuadformParams,
    pub blowup: BlowupParams,
    pub bookkeeping: BookkeepingParams,
    pub remodel: RemodelParams,
    pub hilbert: HilbertParams,
    pub lemma83: Lemma83Params,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            workers: None,
            unweighted: Default::default(),
            weighted: Default::default(),
            quadform: Default::default(),
            blowup: Default::default(),
            bookkeeping: Default::default(),
            remodel: Default::default(),
            hilbert: Default::default(),
            lemma83: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnweightedParams {
    pub depth: usize,
    pub dp: DpConfig,
    /// Random points per closed-form sweep and per main-inequality pattern.
    pub samples: usize,
    pub obstacle_samples: usize,
    pub biconcavity_samples: usize,
    pub biconcavity_step: f64,
    pub main_tol: f64,
    pub closed_form_seconds: f64,
    pub obstacle_point: [f64; 3],
    pub obstacle_from_depth: usize,
    pub obstacle_target: f64,
    pub symmetric_point: [f64; 3],
    pub symmetric_bound: f64,
    pub symmetric_floor: f64,
    pub grid_resolution: usize,
    pub dp_seconds: f64,
}

impl Default for UnweightedParams {
    fn default() -> Self {
        Self {
            depth: 8,
            dp: DpConfig::default(),
            samples: 100_000,
            obstacle_samples: 10_000,
            biconcavity_samples: 10_000,
            biconcavity_step: 1e-3,
            main_tol: 1e-9,
            closed_form_seconds: 10.0,
            obstacle_point: [1.2, 1.2, 1.0],
            obstacle_from_depth: 2,
            obstacle_target: 0.9,
            symmetric_point: [1.0, 0.0, 2.0],
            symmetric_bound: 0.75,
            symmetric_floor: 0.6,
            grid_resolution: 65,
            dp_seconds: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedParams {
    pub q: f64,
    pub depth: usize,
    pub dp: WeightedConfig,
    /// Random patterns per structural check.
    pub samples: usize,
    pub residual_samples: usize,
    pub consistency_depth: usize,
    pub consistency_dp: DpConfig,
    pub obstacle_qs: Vec<f64>,
    pub obstacle_ratio: f64,
}

impl Default for WeightedParams {
    fn default() -> Self {
        Self {
            q: 4.0,
            depth: 6,
            dp: WeightedConfig::default(),
            samples: 10_000,
            residual_samples: 400,
            consistency_depth: 8,
            consistency_dp: DpConfig::coarse(),
            obstacle_qs: vec![4.0, 16.0, 64.0],
            obstacle_ratio: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadformParams {
    pub q: f64,
    pub depth: usize,
    pub dp: WeightedConfig,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub resolution: [usize; 3],
    pub stride: usize,
    pub tol: f64,
    pub required_fraction: f64,
}

impl Default for QuadformParams {
    fn default() -> Self {
        Self {
            q: 8.0,
            depth: 6,
            dp: WeightedConfig::default(),
            lo: [0.2, 1.0, 0.0],
            hi: [4.0, 8.0, 2.0],
            resolution: [39, 29, 41],
            stride: 1,
            tol: 1e-2,
            required_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupParams {
    pub qs: Vec<f64>,
    pub depth: usize,
    pub dp: WeightedConfig,
}

impl Default for BlowupParams {
    fn default() -> Self {
        Self {
            qs: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            depth: 6,
            dp: WeightedConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BookkeepingParams {
    pub ps: Vec<f64>,
    pub max_exp: u32,
    /// Exponents below this are expected to produce a contradiction, those above not.
    pub critical_exponent: f64,
    pub constants: BookkeepingConstants,
}

impl Default for BookkeepingParams {
    fn default() -> Self {
        Self {
            ps: vec![0.1, 0.5],
            max_exp: 60,
            critical_exponent: 0.2,
            constants: BookkeepingConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemodelParams {
    pub q: f64,
    pub generations: u32,
    pub dp: WeightedConfig,
    pub schedule: Vec<u32>,
    pub shift: u32,
    pub cdf_max: f64,
    /// Largest accepted ratio of the distances after and before the shift.
    pub shift_ratio_max: f64,
    pub doubling_max: f64,
    pub decomposition_schedules: Vec<Vec<u32>>,
    pub grid_bits: u32,
    pub delta: f64,
}

impl Default for RemodelParams {
    fn default() -> Self {
        Self {
            q: 8.0,
            generations: 3,
            dp: WeightedConfig::coarse(),
            schedule: vec![3, 5, 7],
            shift: 2,
            cdf_max: 0.05,
            shift_ratio_max: 0.75,
            doubling_max: 8.0,
            decomposition_schedules: vec![vec![1, 2, 3], vec![1, 2, 4]],
            grid_bits: 22,
            delta: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HilbertParams {
    pub grid_bits: u32,
    pub margin: usize,
    pub sign_fraction: f64,
    pub zero_cells: f64,
    pub skew_tol: f64,
    pub skew_pairs: usize,
    pub kernel_bits: u32,
    pub kernel_tol: f64,
}

impl Default for HilbertParams {
    fn default() -> Self {
        Self {
            grid_bits: 16,
            margin: 4,
            sign_fraction: 0.99,
            zero_cells: 1.0,
            skew_tol: 1e-8,
            skew_pairs: 4,
            kernel_bits: 10,
            kernel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma83Params {
    pub ms: Vec<usize>,
    pub shifts: Vec<f64>,
    pub samples: u64,
    pub delta: f64,
    pub table_bits: u32,
    pub seconds: f64,
}

impl Default for Lemma83Params {
    fn default() -> Self {
        Self {
            ms: vec![16, 64, 256],
            shifts: vec![-2.0, 0.0, 2.0],
            samples: 1_000_000,
            delta: FROZEN_DELTA,
            table_bits: 20,
            seconds: 120.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Every tolerance and threshold is positive and every list is usable.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("unweighted.main_tol", self.unweighted.main_tol),
            (
                "unweighted.biconcavity_step",
                self.unweighted.biconcavity_step,
            ),
            (
                "unweighted.closed_form_seconds",
                self.unweighted.closed_form_seconds,
            ),
            (
                "unweighted.obstacle_target",
                self.unweighted.obstacle_target,
            ),
            (
                "unweighted.symmetric_bound",
                self.unweighted.symmetric_bound,
            ),
            (
                "unweighted.symmetric_floor",
                self.unweighted.symmetric_floor,
            ),
            ("unweighted.dp_seconds", self.unweighted.dp_seconds),
            ("weighted.q", self.weighted.q),
            ("weighted.obstacle_ratio", self.weighted.obstacle_ratio),
            ("quadform.q", self.quadform.q),
            ("quadform.tol", self.quadform.tol),
            (
                "quadform.required_fraction",
                self.quadform.required_fraction,
            ),
            (
                "bookkeeping.critical_exponent",
                self.bookkeeping.critical_exponent,
            ),
            ("remodel.q", self.remodel.q),
            ("remodel.cdf_max", self.remodel.cdf_max),
            ("remodel.shift_ratio_max", self.remodel.shift_ratio_max),
            ("remodel.doubling_max", self.remodel.doubling_max),
            ("remodel.delta", self.remodel.delta),
            ("hilbert.sign_fraction", self.hilbert.sign_fraction),
            ("hilbert.zero_cells", self.hilbert.zero_cells),
            ("hilbert.skew_tol", self.hilbert.skew_tol),
            ("hilbert.kernel_tol", self.hilbert.kernel_tol),
            ("lemma83.delta", self.lemma83.delta),
            ("lemma83.seconds", self.lemma83.seconds),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} = {v} must be positive")));
            }
        }
        let lists = [
            ("weighted.obstacle_qs", self.weighted.obstacle_qs.is_empty()),
            ("blowup.qs", self.blowup.qs.len() < 2),
            ("bookkeeping.ps", self.bookkeeping.ps.is_empty()),
            ("lemma83.ms", self.lemma83.ms.is_empty()),
            ("lemma83.shifts", self.lemma83.shifts.is_empty()),
        ];
        for (name, bad) in lists {
            if bad {
                return Err(CliError::Config(format!("{name} is too short")));
            }
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}
