use crate::{RemodelError, Result, XiTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid used to tabulate the law of `ξ`.
pub const XI_TABLE_SIZE: usize = 1 << 20;

/// Anti-concentration constant, calibrated on the tabulated law of `ξ` and rounded down.
pub const FROZEN_DELTA: f64 = 0.3;

/// Split between the two cases of the argument: `Σθ² < C0` is case 1.
pub const C0: f64 = 0.125;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

const CHUNK: usize = 1 << 15;

/// The law of `ξ(U)`, `U` uniform on `[0, 1)`, as an equally weighted table.
#[derive(Debug, Clone, PartialEq)]
pub struct XiDistribution {
    values: Vec<f64>,
    sorted: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl XiDistribution {
    pub fn tabulate(m: usize) -> Result<Self> {
        Ok(Self::from_table(XiTable::compute(m)?))
    }

    pub fn from_table(t: XiTable) -> Self {
        let (mean, variance) = (t.mean(), t.variance());
        let mut sorted = t.values.clone();
        sorted.sort_by(f64::total_cmp);
        Self {
            values: t.values,
            sorted,
            mean,
            variance,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ξ` on table cell `i`.
    pub fn at_index(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.values[rng.gen_range(0..self.values.len())]
    }

    /// Largest mass of a closed window of length `width`.
    pub fn max_window(&self, width: f64) -> f64 {
        let s = &self.sorted;
        let (mut hi, mut best) = (0usize, 0usize);
        for lo in 0..s.len() {
            hi = hi.max(lo);
            while hi < s.len() && s[hi] <= s[lo] + width {
                hi += 1;
            }
            best = best.max(hi - lo);
        }
        best as f64 / s.len() as f64
    }

    /// Largest `δ` with `1 - max_window(2δ) ≥ δ`, so that `P{|ξ + a| ≥ δ} ≥ δ` for all `a`.
    pub fn calibrate_delta(&self) -> f64 {
        let ok = |d: f64| 1.0 - self.max_window(2.0 * d) >= d;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Monte-Carlo estimate of `P{|Σ θ_k ξ_k + a| ≥ δ (Σ θ_k²)^{1/2}}` with a 99% Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma83Estimate {
    pub m: usize,
    pub a: f64,
    pub delta: f64,
    pub seed: u64,
    pub samples: u64,
    pub estimate: f64,
    pub half_width: f64,
}

impl Lemma83Estimate {
    pub fn lower(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn pass(&self) -> bool {
        self.lower() >= self.delta
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6}",
            self.seed,
            self.samples,
            self.m,
            self.a,
            self.estimate,
            self.lower(),
            self.estimate + self.half_width
        )
    }
}

fn check_thetas(thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() || thetas.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(RemodelError::Input(
            "θ must be a non-empty list of positive reals".into(),
        ));
    }
    Ok(())
}

/// Runs one sample stream for several shifts at once.
pub fn lemma83_sweep(
    dist: &XiDistribution,
    thetas: &[f64],
    shifts: &[f64],
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<Lemma83Estimate>> {
    check_thetas(thetas)?;
    if samples == 0 {
        return Err(RemodelError::Input("zero samples".into()));
    }
    let scale = thetas.iter().map(|t| t * t).sum::<f64>().sqrt();
    let cut = delta * scale;
    let chunks = samples.div_ceil(CHUNK as u64);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = (samples - c * CHUNK as u64).min(CHUNK as u64);
            let mut hits = vec![0u64; shifts.len()];
            for _ in 0..n {
                let s: f64 = thetas.iter().map(|t| t * dist.sample(&mut rng)).sum();
                for (h, a) in hits.iter_mut().zip(shifts) {
                    *h += u64::from((s + a).abs() >= cut);
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; shifts.len()],
            |x, y| x.iter().zip(&y).map(|(a, b)| a + b).collect(),
        );
    Ok(shifts
        .iter()
        .zip(counts)
        .map(|(&a, hits)| {
            let p = hits as f64 / samples as f64;
            Lemma83Estimate {
                m: thetas.len(),
                a,
                delta,
                seed,
                samples,
                estimate: p,
                half_width: Z99 * (p * (1.0 - p) / samples as f64).sqrt(),
            }
        })
        .collect())
}

pub fn lemma83_monte_carlo(
    dist: &XiDistribution,
    thetas: &[f64],
    a: f64,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<Lemma83Estimate> {
    Ok(lemma83_sweep(dist, thetas, &[a], delta, samples, seed)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseSplit {
    Small,
    Large,
}

impl CaseSplit {
    pub fn classify(sum_sq: f64) -> Self {
        if sum_sq < C0 {
            CaseSplit::Small
        } else {
            CaseSplit::Large
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSplitReport {
    pub case: CaseSplit,
    pub sum_sq: f64,
    /// `P{Σ θ_k ξ_k ≥ 1/2}` for independent copies (small case).
    pub independent: Option<f64>,
    /// The same for `ξ(4^{8k} y)`, `y` uniform (small case).
    pub remodeled: Option<f64>,
    /// Chebyshev lower bound `1 - 4 Var(Σ θ_k ξ_k)` for the independent sum.
    pub chebyshev: Option<f64>,
    pub large: Option<Lemma83Estimate>,
    pub pass: bool,
}

/// Base-4 digits between consecutive remodeled copies.
const DIGIT_GAP: usize = 8;

/// Routes normalized `θ` (`Σ θ_k E ξ = 1`) to the bound used for its case and checks it.
pub fn case_split_check(
    dist: &XiDistribution,
    thetas: &[f64],
    samples: u64,
    seed: u64,
) -> Result<CaseSplitReport> {
    check_thetas(thetas)?;
    let norm: f64 = thetas.iter().sum::<f64>() * dist.mean;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(RemodelError::Unnormalized(norm));
    }
    let sum_sq: f64 = thetas.iter().map(|t| t * t).sum();
    let case = CaseSplit::classify(sum_sq);
    if case == CaseSplit::Large {
        let est = lemma83_monte_carlo(dist, thetas, 0.0, FROZEN_DELTA, samples, seed)?;
        return Ok(CaseSplitReport {
            case,
            sum_sq,
            independent: None,
            remodeled: None,
            chebyshev: None,
            large: Some(est),
            pass: est.pass(),
        });
    }
    if !dist.len().is_power_of_two() || dist.len() < 4 {
        return Err(RemodelError::Grid(
            "table size must be a power of four".into(),
        ));
    }
    let bits = dist.len().trailing_zeros() as usize;
    if !bits.is_multiple_of(2) {
        return Err(RemodelError::Grid(
            "table size must be a power of four".into(),
        ));
    }
    let window = bits / 2;
    let digits = DIGIT_GAP * (thetas.len() - 1) + window;
    let chunks = samples.div_ceil(CHUNK as u64);
    let (ind, rem) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = (samples - c * CHUNK as u64).min(CHUNK as u64);
            let mut y = vec![0usize; digits];
            let (mut ind, mut rem) = (0u64, 0u64);
            for _ in 0..n {
                let s: f64 = thetas.iter().map(|t| t * dist.sample(&mut rng)).sum();
                ind += u64::from(s >= 0.5);
                y.iter_mut().for_each(|d| *d = rng.gen_range(0..4));
                let r: f64 = thetas
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let idx = y[DIGIT_GAP * k..DIGIT_GAP * k + window]
                            .iter()
                            .fold(0usize, |acc, d| 4 * acc + d);
                        t * dist.at_index(idx)
                    })
                    .sum();
                rem += u64::from(r > 0.5);
            }
            (ind, rem)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let independent = ind as f64 / samples as f64;
    let remodeled = rem as f64 / samples as f64;
    Ok(CaseSplitReport {
        case,
        sum_sq,
        independent: Some(independent),
        remodeled: Some(remodeled),
        chebyshev: Some(1.0 - 4.0 * sum_sq * dist.variance),
        large: None,
        pass: independent >= 0.5 && remodeled >= 0.25,
    })
}
