use crate::{DyadicError, DyadicInterval, DyadicStepFunction, Result};

/// Multipliers `eps_J` in `[-1, 1]` for all `J` of depth `< depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    depth: u32,
    eps: Vec<Vec<f64>>,
}

impl TransformSpec {
    pub fn constant(depth: u32, e: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&e) {
            return Err(DyadicError::MultiplierOutOfRange {
                depth: 0,
                index: 0,
                value: e,
            });
        }
        Ok(Self {
            depth,
            eps: (0..depth).map(|d| vec![e; 1usize << d]).collect(),
        })
    }

    pub fn zeros(depth: u32) -> Self {
        Self {
            depth,
            eps: (0..depth).map(|d| vec![0.0; 1usize << d]).collect(),
        }
    }

    pub fn from_levels(eps: Vec<Vec<f64>>) -> Result<Self> {
        for (d, row) in eps.iter().enumerate() {
            if row.len() != 1usize << d {
                return Err(DyadicError::LengthMismatch {
                    depth: d as u32,
                    expected: 1usize << d,
                    got: row.len(),
                });
            }
            for (i, &e) in row.iter().enumerate() {
                if !(-1.0..=1.0).contains(&e) {
                    return Err(DyadicError::MultiplierOutOfRange {
                        depth: d as u32,
                        index: i as u64,
                        value: e,
                    });
                }
            }
        }
        Ok(Self {
            depth: eps.len() as u32,
            eps,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn get(&self, i: DyadicInterval) -> f64 {
        self.eps
            .get(i.depth as usize)
            .map_or(0.0, |row| row[i.index as usize])
    }

    pub fn set(&mut self, i: DyadicInterval, e: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&e) {
            return Err(DyadicError::MultiplierOutOfRange {
                depth: i.depth,
                index: i.index,
                value: e,
            });
        }
        if i.depth >= self.depth {
            return Err(DyadicError::DepthMismatch(i.depth, self.depth));
        }
        self.eps[i.depth as usize][i.index as usize] = e;
        Ok(())
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.eps
    }
}

/// `T f = sum_J eps_J (f, h_J) h_J`, at the depth of `f`; the mean is dropped.
pub fn martingale_transform(
    f: &DyadicStepFunction,
    spec: &TransformSpec,
) -> Result<DyadicStepFunction> {
    if spec.depth() < f.depth() {
        return Err(DyadicError::DepthMismatch(spec.depth(), f.depth()));
    }
    let pyr = f.average_pyramid();
    let mut acc = vec![0.0];
    for d in 0..f.depth() as usize {
        let mut next = Vec::with_capacity(acc.len() * 2);
        for (i, (&a, p)) in acc.iter().zip(pyr[d + 1].chunks_exact(2)).enumerate() {
            let half = 0.5 * (p[1] - p[0]) * spec.eps[d][i];
            next.push(a - half);
            next.push(a + half);
        }
        acc = next;
    }
    DyadicStepFunction::new(f.depth(), acc)
}
