use crate::{DyadicError, DyadicStepFunction, Result};
use serde::{Deserialize, Serialize};

/// `[index * 4^-depth, (index + 1) * 4^-depth)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FourAdicInterval {
    pub depth: u32,
    pub index: u64,
}

impl FourAdicInterval {
    pub fn new(depth: u32, index: u64) -> Result<Self> {
        if depth > 31 {
            return Err(DyadicError::DepthTooLarge(depth));
        }
        if index >= 1u64 << (2 * depth) {
            return Err(DyadicError::IndexOutOfRange { depth, index });
        }
        Ok(Self { depth, index })
    }

    pub fn child(&self, q: u64) -> Self {
        Self {
            depth: self.depth + 1,
            index: 4 * self.index + q,
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            depth: self.depth - 1,
            index: self.index / 4,
        })
    }

    pub fn len(&self) -> f64 {
        (-2.0 * self.depth as f64).exp2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MartingaleKind {
    H,
    G,
}

impl MartingaleKind {
    /// Value of the pattern on quarter `q` of its interval.
    pub fn quarter_value(self, q: usize) -> f64 {
        match self {
            MartingaleKind::H => [-1.0, -1.0, 1.0, 1.0][q],
            MartingaleKind::G => [1.0, -1.0, -1.0, 1.0][q],
        }
    }
}

/// `constant + sum_{n <= N} sum_{|I| = 4^-n} c_I P_I` with `P` either `H` or `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourAdicMartingale {
    pub kind: MartingaleKind,
    pub constant: f64,
    coeffs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct MartingaleDoc {
    kind: MartingaleKind,
    constant: f64,
    #[serde(rename = "maxGeneration")]
    max_generation: i64,
    coeffs: Vec<(u32, u64, f64)>,
}

impl FourAdicMartingale {
    /// Zero coefficients for generations `0..generations`.
    pub fn new(kind: MartingaleKind, constant: f64, generations: u32) -> Self {
        let coeffs = (0..generations)
            .map(|n| vec![0.0; 1usize << (2 * n)])
            .collect();
        Self {
            kind,
            constant,
            coeffs,
        }
    }

    pub fn from_levels(kind: MartingaleKind, constant: f64, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        for (n, row) in coeffs.iter().enumerate() {
            let expected = 1usize << (2 * n);
            if row.len() != expected {
                return Err(DyadicError::LengthMismatch {
                    depth: n as u32,
                    expected,
                    got: row.len(),
                });
            }
        }
        Ok(Self {
            kind,
            constant,
            coeffs,
        })
    }

    /// Number of generations carrying coefficients (`N + 1`).
    pub fn generations(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn coeff(&self, i: FourAdicInterval) -> f64 {
        self.coeffs
            .get(i.depth as usize)
            .map_or(0.0, |r| r[i.index as usize])
    }

    pub fn set_coeff(&mut self, i: FourAdicInterval, v: f64) -> Result<()> {
        let gens = self.coeffs.len() as u32;
        let row = self
            .coeffs
            .get_mut(i.depth as usize)
            .ok_or(DyadicError::DepthMismatch(i.depth, gens))?;
        row[i.index as usize] = v;
        Ok(())
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(DyadicError::PointOutOfRange(x));
        }
        let mut v = self.constant;
        let mut idx = 0usize;
        let mut y = x;
        for row in &self.coeffs {
            let q = ((y * 4.0) as usize).min(3);
            v += row[idx] * self.kind.quarter_value(q);
            idx = 4 * idx + q;
            y = y * 4.0 - q as f64;
        }
        Ok(v)
    }

    /// Values on the `4^generations` finest cells, left to right.
    pub fn cell_values(&self) -> Vec<f64> {
        let mut cur = vec![self.constant];
        for row in &self.coeffs {
            let mut next = Vec::with_capacity(cur.len() * 4);
            for (v, c) in cur.iter().zip(row) {
                for q in 0..4 {
                    next.push(v + c * self.kind.quarter_value(q));
                }
            }
            cur = next;
        }
        cur
    }

    /// Dense dyadic representation at depth `2 * generations`.
    pub fn to_step_function(&self) -> Result<DyadicStepFunction> {
        DyadicStepFunction::new(2 * self.generations(), self.cell_values())
    }

    pub fn to_json(&self) -> String {
        let mut coeffs = Vec::new();
        for (n, row) in self.coeffs.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    coeffs.push((n as u32, i as u64, c));
                }
            }
        }
        let doc = MartingaleDoc {
            kind: self.kind,
            constant: self.constant,
            max_generation: self.coeffs.len() as i64 - 1,
            coeffs,
        };
        serde_json::to_string(&doc).expect("martingale serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MartingaleDoc =
            serde_json::from_str(s).map_err(|e| DyadicError::Format(e.to_string()))?;
        let gens = (doc.max_generation + 1).max(0) as u32;
        let mut m = Self::new(doc.kind, doc.constant, gens);
        for (d, i, v) in doc.coeffs {
            let iv = FourAdicInterval::new(d, i)?;
            m.set_coeff(iv, v)?;
        }
        Ok(m)
    }
}
