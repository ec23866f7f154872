use crate::square::{sqc_step, steps};
use crate::{
    periodic_hilbert_transform, CellAddress, RemodelError, RemodeledFunctions, Result, XiTable,
};
use serde::{Deserialize, Serialize};

/// `Hφ` split as `-mainSum + Θ` on a uniform grid, with `mainSum = Σ b_I ξ_J sqc_J`.
///
/// With `b = -a`, the transform of each copy `a_I sqs_J` is `a_I ξ_J sqc_J = -b_I ξ_J sqc_J`,
/// so `Θ = Hφ + mainSum` is what remains from the truncation of the copies at the
/// supervisee endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertDecomposition {
    pub m: usize,
    pub phi: Vec<f64>,
    pub w: Vec<f64>,
    pub main_sum: Vec<f64>,
    pub theta: Vec<f64>,
    pub removed_mean: f64,
    pub level: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub m: usize,
    pub delta: f64,
    /// Lebesgue measure of `{|Θ| > δ}`.
    pub theta_measure: f64,
    pub theta_sup: f64,
    /// `W`-measure of `{mainSum ≥ δ·level/4}`.
    pub main_sum_weight: f64,
    /// `(δ/4)·payoff·∫|φ|W / level`.
    pub payoff_bound: f64,
    pub payoff_holds: bool,
}

pub fn hilbert_remodel_decomposition(
    r: &RemodeledFunctions,
    m: usize,
) -> Result<HilbertDecomposition> {
    let exps = r.schedule.exponents();
    let cells: u64 = exps.iter().map(|&n| steps(n)).product();
    if !m.is_power_of_two() || (m as u64) < cells || cells > 1 << 26 {
        return Err(RemodelError::Grid(format!(
            "grid {m} cannot resolve {cells} finest supervisees"
        )));
    }
    let refine = m / cells as usize;
    // Grid points per step of each generation.
    let mut step_len = vec![0usize; exps.len()];
    let mut len = m;
    for (j, &n) in exps.iter().enumerate() {
        len /= steps(n) as usize;
        step_len[j] = len;
    }
    let tables = step_len
        .iter()
        .map(|&s| XiTable::compute(4 * s))
        .collect::<Result<Vec<_>>>()?;
    let q = &r.quadruple;
    let (mut phi, mut w, mut main_sum) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut addr = CellAddress(vec![0; exps.len()]);
    for cell in 0..cells as usize {
        let mut rest = cell * refine;
        for (j, &s) in step_len.iter().enumerate() {
            addr.0[j] = (rest / s) as u64;
            rest %= s;
        }
        let v = r.eval_cell(&addr)?;
        for p in cell * refine..(cell + 1) * refine {
            phi[p] = v.phi;
            w[p] = v.w;
            let mut sup = 0usize;
            for (j, &s) in step_len.iter().enumerate() {
                let i = addr.0[j];
                let b = q.coefficients(j, sup)[3];
                if b != 0.0 {
                    let phase = (i as usize % 4) * s + p % s;
                    main_sum[p] += b * tables[j].values[phase] * sqc_step(i);
                }
                sup = 4 * sup + (i % 4) as usize;
            }
        }
    }
    let h = periodic_hilbert_transform(&phi)?;
    let theta = h.values.iter().zip(&main_sum).map(|(x, y)| x + y).collect();
    Ok(HilbertDecomposition {
        m,
        phi,
        w,
        main_sum,
        theta,
        removed_mean: h.removed_mean,
        level: q.level,
        payoff: q.payoff(),
    })
}

impl HilbertDecomposition {
    pub fn report(&self, delta: f64) -> Result<DecompositionReport> {
        if !(delta > 0.0) {
            return Err(RemodelError::Input(format!("δ = {delta} must be positive")));
        }
        let m = self.m as f64;
        let over = self.theta.iter().filter(|t| t.abs() > delta).count() as f64 / m;
        let theta_sup = self.theta.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let cut = delta * self.level / 4.0;
        let main_sum_weight = self
            .main_sum
            .iter()
            .zip(&self.w)
            .filter(|(s, _)| **s >= cut)
            .map(|(_, w)| w)
            .sum::<f64>()
            / m;
        let phi_w = self
            .phi
            .iter()
            .zip(&self.w)
            .map(|(p, w)| p.abs() * w)
            .sum::<f64>()
            / m;
        let payoff_bound = if self.level > 0.0 {
            delta / 4.0 * self.payoff * phi_w / self.level
        } else {
            0.0
        };
        Ok(DecompositionReport {
            m: self.m,
            delta,
            theta_measure: over,
            theta_sup,
            main_sum_weight,
            payoff_bound,
            payoff_holds: main_sum_weight >= payoff_bound,
        })
    }
}
