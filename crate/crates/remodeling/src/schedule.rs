use crate::square::{steps, MAX_EXPONENT};
use crate::{RemodelError, Result};
use dyadic_core::FourAdicInterval;
use serde::{Deserialize, Serialize};

/// Subdivision exponents `n_1 < n_2 < ...`, one per martingale generation.
///
/// The supervisee of generation `j` is cut into `4^(n_j + 1)` steps; step `i` becomes a
/// supervisee of generation `j + 1`, supervised by quarter `i mod 4` of the current
/// supervisor. The map is evaluated on demand and never materialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProliferationSchedule {
    exponents: Vec<u32>,
}

/// Step index inside the supervisee of each generation; a point's address down to the
/// finest supervisees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellAddress(pub Vec<u64>);

impl ProliferationSchedule {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(RemodelError::Schedule("no generations".into()));
        }
        if let Some(&n) = exponents.iter().find(|&&n| n == 0 || n > MAX_EXPONENT) {
            return Err(RemodelError::Schedule(format!(
                "exponent {n} outside 1..={MAX_EXPONENT}"
            )));
        }
        if exponents.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RemodelError::Schedule(format!(
                "exponents {exponents:?} not strictly increasing"
            )));
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn generations(&self) -> usize {
        self.exponents.len()
    }

    /// Every exponent shifted by `k`.
    pub fn shifted(&self, k: u32) -> Result<Self> {
        Self::new(self.exponents.iter().map(|n| n + k).collect())
    }

    /// Base-4 digits needed to address a finest supervisee.
    pub fn total_digits(&self) -> u32 {
        self.exponents.iter().map(|n| n + 1).sum()
    }

    /// Address of the finest supervisee containing `x ∈ [0, 1)`.
    pub fn locate(&self, x: f64) -> Result<CellAddress> {
        if !(0.0..1.0).contains(&x) {
            return Err(RemodelError::Input(format!("point {x} outside [0, 1)")));
        }
        if 2 * self.total_digits() > 52 {
            return Err(RemodelError::Input(
                "schedule too fine for a floating-point position".into(),
            ));
        }
        let mut t = x;
        let mut out = Vec::with_capacity(self.exponents.len());
        for &n in &self.exponents {
            let s = steps(n) as f64;
            let i = ((t * s) as u64).min(steps(n) - 1);
            out.push(i);
            t = t * s - i as f64;
        }
        Ok(CellAddress(out))
    }

    /// Left endpoint of the finest supervisee at `addr`.
    pub fn start(&self, addr: &CellAddress) -> f64 {
        let (mut x, mut len) = (0.0, 1.0);
        for (&n, &i) in self.exponents.iter().zip(&addr.0) {
            len /= steps(n) as f64;
            x += i as f64 * len;
        }
        x
    }

    /// Supervisor of the generation-`j` supervisee reached through `addr[..j]`.
    pub fn supervisor(&self, addr: &CellAddress, j: usize) -> FourAdicInterval {
        addr.0[..j]
            .iter()
            .fold(FourAdicInterval { depth: 0, index: 0 }, |i, s| {
                i.child(s % 4)
            })
    }

    pub fn validate(&self, addr: &CellAddress) -> Result<()> {
        if addr.0.len() != self.exponents.len() {
            return Err(RemodelError::Input(
                "address length differs from the schedule".into(),
            ));
        }
        for (&n, &i) in self.exponents.iter().zip(&addr.0) {
            if i >= steps(n) {
                return Err(RemodelError::Input(format!(
                    "step {i} beyond {} steps",
                    steps(n)
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Self =
            serde_json::from_str(s).map_err(|e| RemodelError::Schedule(e.to_string()))?;
        Self::new(raw.exponents)
    }
}
