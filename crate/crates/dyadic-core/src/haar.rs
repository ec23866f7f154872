use crate::{DyadicInterval, DyadicStepFunction, Result};

/// Mean plus the pairings `(f, h_J)` for every `J` of depth `< depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSystem {
    pub mean: f64,
    depth: u32,
    coeffs: Vec<Vec<f64>>,
}

impl HaarSystem {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `(f, h_I)`; zero for intervals at or below the storage depth.
    pub fn coefficient(&self, i: DyadicInterval) -> f64 {
        self.coeffs
            .get(i.depth as usize)
            .map_or(0.0, |row| row[i.index as usize])
    }

    pub fn coefficients_at(&self, depth: u32) -> &[f64] {
        &self.coeffs[depth as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicInterval, f64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(d, row)| {
            row.iter().enumerate().map(move |(i, &c)| {
                (
                    DyadicInterval {
                        depth: d as u32,
                        index: i as u64,
                    },
                    c,
                )
            })
        })
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c * c).sum()
    }

    /// `mean + sum_J (f, h_J) h_J` at the storage depth.
    pub fn reconstruct(&self) -> Result<DyadicStepFunction> {
        let mut cur = vec![self.mean];
        for (d, row) in self.coeffs.iter().enumerate() {
            let scale = (d as f64 / 2.0).exp2();
            let mut next = Vec::with_capacity(cur.len() * 2);
            for (v, c) in cur.iter().zip(row) {
                let jump = c * scale;
                next.push(v - jump);
                next.push(v + jump);
            }
            cur = next;
        }
        DyadicStepFunction::new(self.depth, cur)
    }
}

pub fn haar_decompose(f: &DyadicStepFunction) -> HaarSystem {
    let pyr = f.average_pyramid();
    let depth = f.depth();
    let coeffs = (0..depth as usize)
        .map(|d| {
            let sqrt_len = (-(d as f64) / 2.0).exp2();
            pyr[d + 1]
                .chunks_exact(2)
                .map(|p| sqrt_len * 0.5 * (p[1] - p[0]))
                .collect()
        })
        .collect();
    HaarSystem {
        mean: pyr[0][0],
        depth,
        coeffs,
    }
}
