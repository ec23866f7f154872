use crate::{ReducedPoint, Result, WeightedError};
use bellman_unweighted::ValueGrid3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormStatus {
    /// `K > tol` and `N ≥ L² / (4K) - tol`.
    Holds,
    /// `K < -tol`, or `K > tol` and `N < L² / (4K) - tol`.
    Fails,
    /// `|K| ≤ tol`.
    Inconclusive,
}

/// Finite-difference estimates of the coefficients of `ξ² K + ξ η L + η² N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormSample {
    pub k: f64,
    pub l: f64,
    pub n: f64,
    /// `-α² B_αα - 2 α β B_αβ - β² B_ββ`.
    pub psi: f64,
    pub b_gamma: f64,
    pub point: ReducedPoint,
    pub steps: [f64; 3],
    pub status: FormStatus,
}

/// Central differences of the trilinear interpolant of `grid` (axes `α, β, γ`).
pub fn quadratic_form_sample(
    grid: &ValueGrid3,
    point: ReducedPoint,
    steps: [f64; 3],
    tol: f64,
) -> Result<QuadraticFormSample> {
    let bx = grid.bounds();
    let x = [point.alpha, point.beta, point.gamma];
    for i in 0..3 {
        if !(steps[i] > 0.0) {
            return Err(WeightedError::Config("steps must be positive".into()));
        }
        if x[i] - steps[i] < bx.lo[i] - 1e-12 || x[i] + steps[i] > bx.hi[i] + 1e-12 {
            return Err(WeightedError::StencilExit);
        }
    }
    let [ha, hb, hg] = steps;
    let b = |da: f64, db: f64, dg: f64| {
        grid.interpolate([x[0] + da * ha, x[1] + db * hb, x[2] + dg * hg])
    };
    let b0 = b(0.0, 0.0, 0.0);
    let b_a = (b(1.0, 0.0, 0.0) - b(-1.0, 0.0, 0.0)) / (2.0 * ha);
    let b_aa = (b(1.0, 0.0, 0.0) - 2.0 * b0 + b(-1.0, 0.0, 0.0)) / (ha * ha);
    let b_bb = (b(0.0, 1.0, 0.0) - 2.0 * b0 + b(0.0, -1.0, 0.0)) / (hb * hb);
    let b_ab = (b(1.0, 1.0, 0.0) - b(1.0, -1.0, 0.0) - b(-1.0, 1.0, 0.0) + b(-1.0, -1.0, 0.0))
        / (4.0 * ha * hb);
    let b_g = (b(0.0, 0.0, 1.0) - b(0.0, 0.0, -1.0)) / (2.0 * hg);
    let b_gg = (b(0.0, 0.0, 1.0) - 2.0 * b0 + b(0.0, 0.0, -1.0)) / (hg * hg);
    let (al, be, ga) = (x[0], x[1], x[2]);
    let psi = -al * al * b_aa - 2.0 * al * be * b_ab - be * be * b_bb;
    let a2ba_a = 2.0 * al * b_a + al * al * b_aa;
    let k = psi + (-al * al * b_aa - be * be * b_bb) * ga;
    let l = -psi + a2ba_a - be * be * b_bb;
    let n = -(1.0 + 3.0 * ga + ga * ga) * b_gg - 2.0 * ga * b_g - a2ba_a - al * al * b_aa * ga;
    let status = if k < -tol {
        FormStatus::Fails
    } else if k <= tol {
        FormStatus::Inconclusive
    } else if n >= l * l / (4.0 * k) - tol {
        FormStatus::Holds
    } else {
        FormStatus::Fails
    };
    Ok(QuadraticFormSample {
        k,
        l,
        n,
        psi,
        b_gamma: b_g,
        point,
        steps,
        status,
    })
}

/// Counts over a sweep of [`quadratic_form_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormSweep {
    pub samples: usize,
    pub conclusive: usize,
    pub holds: usize,
    pub tol: f64,
}

impl FormSweep {
    /// Share of conclusive samples on which the form is nonnegative.
    pub fn fraction(&self) -> f64 {
        if self.conclusive == 0 {
            return 0.0;
        }
        self.holds as f64 / self.conclusive as f64
    }
}

/// Samples every interior node of `grid` whose stencil, at `stride` grid spacings, stays
/// in `0 ≤ γ`, `γ + h_γ ≤ α - h_α`.
pub fn quadratic_form_sweep(
    grid: &ValueGrid3,
    stride: usize,
    tol: f64,
) -> Result<(FormSweep, Vec<QuadraticFormSample>)> {
    let [na, nb, ng] = grid.shape();
    let s = stride.max(1);
    if na < 2 * s + 1 || nb < 2 * s + 1 || ng < 2 * s + 1 {
        return Err(WeightedError::Grid("grid too small for the stencil".into()));
    }
    let h = [0, 1, 2].map(|i| s as f64 * (grid.axes[i][1] - grid.axes[i][0]));
    let mut out = Vec::new();
    for i in s..na - s {
        for j in s..nb - s {
            for l in s..ng - s {
                let [al, be, ga] = grid.node(i, j, l);
                if ga < -1e-12 || ga + h[2] > al - h[0] + 1e-12 {
                    continue;
                }
                let p = ReducedPoint {
                    alpha: al,
                    beta: be,
                    gamma: ga,
                };
                out.push(quadratic_form_sample(grid, p, h, tol)?);
            }
        }
    }
    let conclusive = out
        .iter()
        .filter(|s| s.status != FormStatus::Inconclusive)
        .count();
    let holds = out.iter().filter(|s| s.status == FormStatus::Holds).count();
    Ok((
        FormSweep {
            samples: out.len(),
            conclusive,
            holds,
            tol,
        },
        out,
    ))
}
