use crate::{DyadicError, Result};
use serde::{Deserialize, Serialize};

/// Depth limit for dense storage; `2^MAX_DEPTH` cells.
pub const MAX_DEPTH: u32 = 30;

/// The interval `[index * 2^-depth, (index + 1) * 2^-depth)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub depth: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn new(depth: u32, index: u64) -> Result<Self> {
        if depth > 62 {
            return Err(DyadicError::DepthTooLarge(depth));
        }
        if index >= 1u64 << depth {
            return Err(DyadicError::IndexOutOfRange { depth, index });
        }
        Ok(Self { depth, index })
    }

    pub fn root() -> Self {
        Self { depth: 0, index: 0 }
    }

    /// Left child, `I_-`.
    pub fn left(&self) -> Self {
        Self {
            depth: self.depth + 1,
            index: 2 * self.index,
        }
    }

    /// Right child, `I_+`.
    pub fn right(&self) -> Self {
        Self {
            depth: self.depth + 1,
            index: 2 * self.index + 1,
        }
    }

    pub fn children(&self) -> [Self; 2] {
        [self.left(), self.right()]
    }

    pub fn parent(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            depth: self.depth - 1,
            index: self.index / 2,
        })
    }

    pub fn sibling(&self) -> Option<Self> {
        (self.depth > 0).then_some(Self {
            depth: self.depth,
            index: self.index ^ 1,
        })
    }

    pub fn is_right(&self) -> bool {
        self.index & 1 == 1
    }

    pub fn len(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn start(&self) -> f64 {
        self.index as f64 * self.len()
    }

    pub fn end(&self) -> f64 {
        (self.index + 1) as f64 * self.len()
    }

    pub fn contains(&self, other: &Self) -> bool {
        other.depth >= self.depth && (other.index >> (other.depth - self.depth)) == self.index
    }

    /// Cells of depth `depth >= self.depth` inside this interval, as an index range.
    pub fn cell_range(&self, depth: u32) -> std::ops::Range<usize> {
        debug_assert!(depth >= self.depth);
        let shift = depth - self.depth;
        let lo = (self.index << shift) as usize;
        lo..lo + (1usize << shift)
    }

    /// All intervals of depth `<= max_depth`, coarse to fine.
    pub fn all_up_to(max_depth: u32) -> impl Iterator<Item = Self> {
        (0..=max_depth).flat_map(|d| (0..1u64 << d).map(move |i| Self { depth: d, index: i }))
    }
}
