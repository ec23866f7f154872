use crate::{RemodelError, Result};
use dyadic_core::MartingaleKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Conjugate function on a uniform periodic grid, with the mean that was removed first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertOutput {
    pub values: Vec<f64>,
    pub removed_mean: f64,
}

fn check_grid(m: usize) -> Result<()> {
    if m < 4 || !m.is_power_of_two() {
        return Err(RemodelError::Grid(format!(
            "grid size {m} is not a power of two >= 4"
        )));
    }
    Ok(())
}

fn centered(f: &[f64]) -> (Vec<f64>, f64) {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    (f.iter().map(|x| x - mean).collect(), mean)
}

/// Discrete conjugate function: multiplier `-i sgn(k)`, zero at `k = 0` and `k = M/2`,
/// so `H cos = sin`. Computed with an FFT.
pub fn periodic_hilbert_transform(f: &[f64]) -> Result<HilbertOutput> {
    check_grid(f.len())?;
    let (g, removed_mean) = centered(f);
    let m = g.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = g.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z = if k == 0 || k == m / 2 {
            Complex::new(0.0, 0.0)
        } else if k < m / 2 {
            Complex::new(z.im, -z.re)
        } else {
            Complex::new(-z.im, z.re)
        };
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(HilbertOutput {
        values: buf.iter().map(|z| z.re * scale).collect(),
        removed_mean,
    })
}

/// The same operator by direct summation against its kernel `(2/M) cot(π n / M)` on odd
/// `n` (zero on even `n`).
pub fn periodic_hilbert_by_kernel(f: &[f64]) -> Result<HilbertOutput> {
    check_grid(f.len())?;
    let (g, removed_mean) = centered(f);
    let m = g.len();
    let kernel: Vec<f64> = (0..m)
        .map(|n| {
            if n % 2 == 1 {
                2.0 / m as f64 / (PI * n as f64 / m as f64).tan()
            } else {
                0.0
            }
        })
        .collect();
    let values = (0..m)
        .map(|j| (0..m).map(|n| kernel[n] * g[(j + m - n) % m]).sum())
        .collect();
    Ok(HilbertOutput {
        values,
        removed_mean,
    })
}

/// Unit-period square sine (`H` pattern) at the midpoints of `m` cells.
pub fn unit_sqsin(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| MartingaleKind::H.quarter_value(4 * j / m))
        .collect()
}

/// Unit-period square cosine (`G` pattern) at the midpoints of `m` cells.
pub fn unit_sqcos(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| MartingaleKind::G.quarter_value(4 * j / m))
        .collect()
}

/// `ξ = H(sqsin) sqcos` on `m` midpoints of the unit period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTable {
    pub values: Vec<f64>,
}

impl XiTable {
    pub fn compute(m: usize) -> Result<Self> {
        if !m.is_multiple_of(4) {
            return Err(RemodelError::Grid(format!(
                "grid size {m} not divisible by 4"
            )));
        }
        let h = periodic_hilbert_transform(&unit_sqsin(m))?;
        let values = h
            .values
            .iter()
            .zip(unit_sqcos(m))
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ξ` on the cell containing `t ∈ [0, 1)`.
    pub fn at(&self, t: f64) -> f64 {
        let m = self.values.len();
        self.values[((t * m as f64) as usize).min(m - 1)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / self.values.len() as f64
    }
}

/// `ξ` for the continuous transform: `(2/π) |ln |cot(π x)||`.
pub fn xi_analytic(x: f64) -> f64 {
    2.0 / PI * (1.0 / (PI * x).tan()).abs().ln().abs()
}

/// Sign pattern, zeros and skew symmetry of the discrete transform on `m` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiReport {
    pub m: usize,
    /// Points at least `margin` cells from `0, 1/2, 1`.
    pub eligible: usize,
    /// Share of eligible points with `sign H(sqsin) = sign sqcos` or `H(sqsin) = 0`.
    pub sign_agreement: f64,
    /// Zeros of `H(sqsin)` nearest to `1/4` and `3/4`.
    pub zeros: [f64; 2],
    /// `max |zero - target| / cell`.
    pub zero_offset_cells: f64,
    pub min_xi: f64,
    /// `|⟨Hf, g⟩ + ⟨f, Hg⟩|` over random mean-zero pairs.
    pub skew_defect: f64,
    /// Largest gap to [`xi_analytic`] away from the singular points.
    pub analytic_gap: f64,
}

fn zero_near(h: &[f64], target: f64) -> f64 {
    let m = h.len();
    let mid = |j: usize| (j as f64 + 0.5) / m as f64;
    let mut best = f64::NAN;
    for j in 0..m - 1 {
        let (a, b) = (h[j], h[j + 1]);
        if a == 0.0 || a * b < 0.0 {
            let x = if a == 0.0 {
                mid(j)
            } else {
                mid(j) + (a / (a - b)) / m as f64
            };
            if best.is_nan() || (x - target).abs() < (best - target).abs() {
                best = x;
            }
        }
    }
    best
}

pub fn xi_report(m: usize, margin: usize, pairs: usize, seed: u64) -> Result<XiReport> {
    check_grid(m)?;
    if !m.is_multiple_of(4) || margin == 0 {
        return Err(RemodelError::Grid(
            "need 4 | M and a positive margin".into(),
        ));
    }
    let h = periodic_hilbert_transform(&unit_sqsin(m))?.values;
    let c = unit_sqcos(m);
    let cell = 1.0 / m as f64;
    let far = |j: usize| {
        let x = (j as f64 + 0.5) * cell;
        [0.0, 0.5, 1.0]
            .iter()
            .all(|s| (x - s).abs() >= margin as f64 * cell)
    };
    let (mut eligible, mut agree) = (0usize, 0usize);
    let (mut min_xi, mut gap) = (f64::INFINITY, 0.0f64);
    for j in 0..m {
        let xi = h[j] * c[j];
        min_xi = min_xi.min(xi);
        if far(j) {
            eligible += 1;
            if h[j] == 0.0 || h[j].signum() == c[j].signum() {
                agree += 1;
            }
            gap = gap.max((xi - xi_analytic((j as f64 + 0.5) * cell)).abs());
        }
    }
    let zeros = [zero_near(&h, 0.25), zero_near(&h, 0.75)];
    let zero_offset_cells = ((zeros[0] - 0.25).abs()).max((zeros[1] - 0.75).abs()) / cell;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skew: f64 = 0.0;
    for _ in 0..pairs {
        let f: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (f, _) = centered(&f);
        let (g, _) = centered(&g);
        let hf = periodic_hilbert_transform(&f)?.values;
        let hg = periodic_hilbert_transform(&g)?.values;
        let dot =
            |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / m as f64;
        skew = skew.max((dot(&hf, &g) + dot(&f, &hg)).abs());
    }
    Ok(XiReport {
        m,
        eligible,
        sign_agreement: agree as f64 / eligible as f64,
        zeros,
        zero_offset_cells,
        min_xi,
        skew_defect: skew,
        analytic_gap: gap,
    })
}
