use crate::interval::MAX_DEPTH;
use crate::{DyadicError, DyadicInterval, Result};
use serde::{Deserialize, Serialize};

/// A function on `[0, 1)` constant on every cell of depth `depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepDoc", into = "StepDoc")]
pub struct DyadicStepFunction {
    depth: u32,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    depth: u32,
    values: Vec<f64>,
}

impl TryFrom<StepDoc> for DyadicStepFunction {
    type Error = DyadicError;
    fn try_from(d: StepDoc) -> Result<Self> {
        Self::new(d.depth, d.values)
    }
}

impl From<DyadicStepFunction> for StepDoc {
    fn from(f: DyadicStepFunction) -> Self {
        StepDoc {
            depth: f.depth,
            values: f.values,
        }
    }
}

impl DyadicStepFunction {
    pub fn new(depth: u32, values: Vec<f64>) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(DyadicError::DepthTooLarge(depth));
        }
        let expected = 1usize << depth;
        if values.len() != expected {
            return Err(DyadicError::LengthMismatch {
                depth,
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DyadicError::NonFinite);
        }
        Ok(Self { depth, values })
    }

    pub fn constant(depth: u32, c: f64) -> Result<Self> {
        Self::new(depth, vec![c; 1usize << depth.min(MAX_DEPTH + 1)])
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(depth: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = 1usize << depth.min(MAX_DEPTH + 1);
        let h = 1.0 / n as f64;
        Self::new(depth, (0..n).map(|i| f((i as f64 + 0.5) * h)).collect())
    }

    /// Indicator of a dyadic interval, stored at `depth >= interval.depth`.
    pub fn indicator(interval: DyadicInterval, depth: u32) -> Result<Self> {
        let depth = depth.max(interval.depth);
        let mut v = vec![0.0; 1usize << depth.min(MAX_DEPTH + 1)];
        for x in &mut v[interval.cell_range(depth)] {
            *x = 1.0;
        }
        Self::new(depth, v)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at(&self, x: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(DyadicError::PointOutOfRange(x));
        }
        let i = ((x * self.values.len() as f64) as usize).min(self.values.len() - 1);
        Ok(self.values[i])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Average over `I`; intervals finer than the storage depth see the cell value.
    pub fn average(&self, i: DyadicInterval) -> f64 {
        if i.depth >= self.depth {
            return self.values[(i.index >> (i.depth - self.depth)) as usize];
        }
        let r = i.cell_range(self.depth);
        let n = r.len() as f64;
        self.values[r].iter().sum::<f64>() / n
    }

    pub fn min_on(&self, i: DyadicInterval) -> f64 {
        if i.depth >= self.depth {
            return self.values[(i.index >> (i.depth - self.depth)) as usize];
        }
        self.values[i.cell_range(self.depth)]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Averages on every cell of depth `d <= self.depth`, by pairwise means.
    pub fn averages_at(&self, d: u32) -> Vec<f64> {
        let mut cur = self.values.clone();
        for _ in d..self.depth {
            cur = cur.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        }
        cur
    }

    /// Averages at all depths `0..=self.depth`, index `[d][i]`.
    pub fn average_pyramid(&self) -> Vec<Vec<f64>> {
        let mut levels = vec![self.values.clone()];
        for _ in 0..self.depth {
            let prev = levels.last().unwrap();
            let next = prev.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
            levels.push(next);
        }
        levels.reverse();
        levels
    }

    /// Minima at all depths `0..=self.depth`, index `[d][i]`.
    pub fn min_pyramid(&self) -> Vec<Vec<f64>> {
        let mut levels = vec![self.values.clone()];
        for _ in 0..self.depth {
            let prev = levels.last().unwrap();
            let next = prev.chunks_exact(2).map(|p| p[0].min(p[1])).collect();
            levels.push(next);
        }
        levels.reverse();
        levels
    }

    /// Same function stored at a finer depth.
    pub fn refine(&self, depth: u32) -> Result<Self> {
        if depth < self.depth {
            return Err(DyadicError::DepthMismatch(depth, self.depth));
        }
        let k = 1usize << (depth - self.depth);
        let v = self
            .values
            .iter()
            .flat_map(|&x| std::iter::repeat_n(x, k))
            .collect();
        Self::new(depth, v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.depth, self.values.iter().map(|&x| f(x)).collect())
    }

    /// Pointwise combination at the finer of the two depths.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let d = self.depth.max(other.depth);
        let a = self.refine(d)?;
        let b = other.refine(d)?;
        Self::new(
            d,
            a.values
                .iter()
                .zip(&b.values)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        )
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>() / self.values.len() as f64
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|x| x.abs()).sum::<f64>() / self.values.len() as f64
    }

    /// `<f g>` over `[0, 1)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        let p = self.zip_with(other, |a, b| a * b)?;
        Ok(p.mean())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step function serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| DyadicError::Format(e.to_string()))
    }
}
