#![allow(dead_code)]

use bellman_weighted::{WeightedBellmanPoint, WeightedConfig};
use dyadic_core::{FourAdicMartingale, MartingaleKind};
use remodeling::*;
use std::sync::OnceLock;

pub fn q8() -> &'static ExtremalQuadruple {
    static Q: OnceLock<ExtremalQuadruple> = OnceLock::new();
    Q.get_or_init(|| build_extremal_quadruple(8.0, 3, WeightedConfig::coarse()).unwrap())
}

pub fn xi_distribution() -> &'static XiDistribution {
    static D: OnceLock<XiDistribution> = OnceLock::new();
    D.get_or_init(|| XiDistribution::tabulate(XI_TABLE_SIZE).unwrap())
}

/// Quadruple with `f` coefficients `a`, `g = -f`, constant weight and `F ≡ 2`.
pub fn synthetic(a: Vec<Vec<f64>>, w: f64) -> ExtremalQuadruple {
    let gens = a.len() as u32;
    let zeros: Vec<Vec<f64>> = a.iter().map(|r| vec![0.0; r.len()]).collect();
    let neg: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    ExtremalQuadruple {
        big_f: FourAdicMartingale::from_levels(MartingaleKind::H, 2.0, zeros.clone()).unwrap(),
        f: FourAdicMartingale::from_levels(MartingaleKind::H, 0.0, a).unwrap(),
        w: FourAdicMartingale::from_levels(MartingaleKind::H, w, zeros).unwrap(),
        g: FourAdicMartingale::from_levels(MartingaleKind::G, 0.0, neg).unwrap(),
        q: 1.0,
        level: 1.0,
        generations: gens,
        point: WeightedBellmanPoint::new(2.0, w, w, 0.0, 1.0, 1.0).unwrap(),
        dp_depth: 0,
    }
}

pub fn zero_levels(gens: usize) -> Vec<Vec<f64>> {
    (0..gens).map(|j| vec![0.0; 1 << (2 * j)]).collect()
}
