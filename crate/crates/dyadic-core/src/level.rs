use crate::{DyadicError, DyadicStepFunction, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelSet {
    /// `{g > lambda}`
    #[default]
    Strict,
    /// `{g >= lambda}`
    NonStrict,
}

impl LevelSet {
    pub fn contains(self, g: f64, lambda: f64) -> bool {
        match self {
            LevelSet::Strict => g > lambda,
            LevelSet::NonStrict => g >= lambda,
        }
    }
}

/// `int_{g > lambda} w` over `[0, 1)`.
pub fn weighted_level_set_measure(
    g: &DyadicStepFunction,
    lambda: f64,
    w: &DyadicStepFunction,
) -> Result<f64> {
    weighted_level_set_measure_with(g, lambda, w, LevelSet::Strict)
}

pub fn weighted_level_set_measure_with(
    g: &DyadicStepFunction,
    lambda: f64,
    w: &DyadicStepFunction,
    mode: LevelSet,
) -> Result<f64> {
    if g.depth() != w.depth() {
        return Err(DyadicError::DepthMismatch(g.depth(), w.depth()));
    }
    if let Some(&neg) = w.values().iter().find(|&&x| x < 0.0) {
        return Err(DyadicError::NegativeWeight(neg));
    }
    let n = g.values().len() as f64;
    let s: f64 = g
        .values()
        .iter()
        .zip(w.values())
        .filter(|(&gv, _)| mode.contains(gv, lambda))
        .map(|(_, &wv)| wv)
        .sum();
    Ok(s / n)
}
