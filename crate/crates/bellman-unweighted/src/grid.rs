use crate::{BellmanError, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Box3 {
    /// `F in [0, 3]`, `f in [-3, 3]`, `lambda in [0.1, 4]`.
    pub fn unweighted_default() -> Self {
        Self {
            lo: [0.0, -3.0, 0.1],
            hi: [3.0, 3.0, 4.0],
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] - 1e-12 && p[i] <= self.hi[i] + 1e-12)
    }
}

/// Provenance stored alongside a grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    pub k: i64,
    #[serde(rename = "box")]
    pub bounds: Option<Box3>,
    pub resolution: [usize; 3],
    pub smoothing: String,
    #[serde(default)]
    pub coordinates: [String; 3],
}

/// Values on a rectilinear grid, row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid3 {
    pub axes: [Vec<f64>; 3],
    pub values: Vec<f64>,
    #[serde(default)]
    pub metadata: GridMeta,
}

fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if n == 1 {
        return (0, 0.0);
    }
    let x = x.clamp(axis[0], axis[n - 1]);
    let i = match axis.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => (i - 1).min(n - 2),
    };
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

impl ValueGrid3 {
    pub fn new(axes: [Vec<f64>; 3], values: Vec<f64>, metadata: GridMeta) -> Result<Self> {
        for a in &axes {
            if a.is_empty() || a.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(BellmanError::Grid(
                    "axes must be non-empty and strictly increasing".into(),
                ));
            }
        }
        let n = axes.iter().map(Vec::len).product::<usize>();
        if values.len() != n {
            return Err(BellmanError::Grid(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            axes,
            values,
            metadata,
        })
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(
        axes: [Vec<f64>; 3],
        metadata: GridMeta,
        f: impl Fn([f64; 3]) -> f64 + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let (n1, n2) = (axes[1].len(), axes[2].len());
        let values = (0..axes[0].len() * n1 * n2)
            .into_par_iter()
            .map(|idx| {
                let (i, r) = (idx / (n1 * n2), idx % (n1 * n2));
                f([axes[0][i], axes[1][r / n2], axes[2][r % n2]])
            })
            .collect();
        Self::new(axes, values, metadata)
    }

    pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let s = self.shape();
        (i * s[1] + j) * s[2] + k
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.axes[0][i], self.axes[1][j], self.axes[2][k]]
    }

    pub fn bounds(&self) -> Box3 {
        Box3 {
            lo: [self.axes[0][0], self.axes[1][0], self.axes[2][0]],
            hi: [
                *self.axes[0].last().unwrap(),
                *self.axes[1].last().unwrap(),
                *self.axes[2].last().unwrap(),
            ],
        }
    }

    /// Multilinear interpolation; arguments are clamped to the grid box.
    pub fn interpolate(&self, p: [f64; 3]) -> f64 {
        let (i, tx) = locate(&self.axes[0], p[0]);
        let (j, ty) = locate(&self.axes[1], p[1]);
        let (k, tz) = locate(&self.axes[2], p[2]);
        let s = self.shape();
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
            if wx == 0.0 || i + di >= s[0] {
                continue;
            }
            for (dj, wy) in [(0, 1.0 - ty), (1, ty)] {
                if wy == 0.0 || j + dj >= s[1] {
                    continue;
                }
                for (dk, wz) in [(0, 1.0 - tz), (1, tz)] {
                    if wz == 0.0 || k + dk >= s[2] {
                        continue;
                    }
                    acc += wx * wy * wz * self.at(i + di, j + dj, k + dk);
                }
            }
        }
        acc
    }

    /// Box average over the `3^3` neighbourhood, truncated at the boundary.
    pub fn box_smoothed(&self) -> Self {
        let s = self.shape();
        let mut out = self.clone();
        for i in 0..s[0] {
            for j in 0..s[1] {
                for k in 0..s[2] {
                    let (mut sum, mut cnt) = (0.0, 0.0);
                    for a in i.saturating_sub(1)..=(i + 1).min(s[0] - 1) {
                        for b in j.saturating_sub(1)..=(j + 1).min(s[1] - 1) {
                            for c in k.saturating_sub(1)..=(k + 1).min(s[2] - 1) {
                                sum += self.at(a, b, c);
                                cnt += 1.0;
                            }
                        }
                    }
                    let idx = out.index(i, j, k);
                    out.values[idx] = sum / cnt;
                }
            }
        }
        out.metadata.smoothing = "box3".into();
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.axes != other.axes {
            return Err(BellmanError::Grid("grids have different axes".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s).map_err(|e| BellmanError::Grid(e.to_string()))?;
        Self::new(g.axes, g.values, g.metadata)
    }

    /// One row per node: `x0,x1,x2,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let names = &self.metadata.coordinates;
        let name = |i: usize| {
            if names[i].is_empty() {
                format!("x{i}")
            } else {
                names[i].clone()
            }
        };
        writeln!(w, "{},{},{},value", name(0), name(1), name(2))?;
        let s = self.shape();
        for i in 0..s[0] {
            for j in 0..s[1] {
                for k in 0..s[2] {
                    let n = self.node(i, j, k);
                    writeln!(w, "{},{},{},{}", n[0], n[1], n[2], self.at(i, j, k))?;
                }
            }
        }
        Ok(())
    }
}
