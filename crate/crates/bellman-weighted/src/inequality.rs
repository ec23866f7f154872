use crate::{Result, WeightedBellmanPoint, WeightedError};
use serde::{Deserialize, Serialize};

/// How the level moves against the mean of `φ` between a point and its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightedPattern {
    /// `λ± = λ ± β` for `f± = f ± β` (multiplier `-1` on the parent interval).
    Mi11,
    /// `λ± = λ ∓ β` (multiplier `+1`).
    Mi21,
    /// `λ` and `m` fixed (multiplier `0`).
    Flat,
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

fn validate_pattern(
    p: &WeightedBellmanPoint,
    plus: &WeightedBellmanPoint,
    minus: &WeightedBellmanPoint,
    pattern: WeightedPattern,
) -> Result<()> {
    for x in [p, plus, minus] {
        x.validate()?;
    }
    let bad = |what: &str| Err(WeightedError::Pattern(what.to_string()));
    if p.q != plus.q || p.q != minus.q {
        return bad("points carry different Q");
    }
    let scale = p.big_f.abs() + p.w.abs() + p.f.abs() + p.lambda.abs();
    let mid = |a: f64, b: f64| 0.5 * (a + b);
    if !close(p.big_f, mid(plus.big_f, minus.big_f), scale)
        || !close(p.w, mid(plus.w, minus.w), scale)
        || !close(p.f, mid(plus.f, minus.f), scale)
    {
        return bad("F, w, f are not midpoints");
    }
    let df = plus.f - p.f;
    let (dl_plus, dl_minus) = (plus.lambda - p.lambda, minus.lambda - p.lambda);
    match pattern {
        WeightedPattern::Mi11 | WeightedPattern::Mi21 => {
            let s = if pattern == WeightedPattern::Mi11 {
                1.0
            } else {
                -1.0
            };
            if !close(dl_plus, s * df, scale) || !close(dl_minus, -s * df, scale) {
                return bad("level displacement does not match the mean displacement");
            }
            if !close(p.m, plus.m.min(minus.m), p.m) {
                return bad("m is not min(m+, m-)");
            }
        }
        WeightedPattern::Flat => {
            if !close(dl_plus, 0.0, scale) || !close(dl_minus, 0.0, scale) {
                return bad("level moved in the flat pattern");
            }
            if !close(p.m, plus.m, p.m) || !close(p.m, minus.m, p.m) {
                return bad("m moved in the flat pattern");
            }
        }
    }
    Ok(())
}

/// `𝔹(P) - (𝔹(P+) + 𝔹(P-)) / 2` after checking the displacement pattern.
pub fn check_weighted_main_inequality(
    b: impl Fn(&WeightedBellmanPoint) -> f64,
    p: &WeightedBellmanPoint,
    plus: &WeightedBellmanPoint,
    minus: &WeightedBellmanPoint,
    pattern: WeightedPattern,
) -> Result<f64> {
    validate_pattern(p, plus, minus, pattern)?;
    Ok(b(p) - 0.5 * (b(plus) + b(minus)))
}

/// The four points of the fixed-`m` consequence of both main inequalities:
/// `(F ∓ dF, w ∓ dw, m, f ± dλ, λ ∓ dλ)` in every sign combination of the `f` shift.
pub fn four_point_stencil(
    p: &WeightedBellmanPoint,
    d_big_f: f64,
    dw: f64,
    dl: f64,
) -> Result<[WeightedBellmanPoint; 4]> {
    p.validate()?;
    let mk = |s: f64, t: f64| WeightedBellmanPoint {
        big_f: p.big_f + s * d_big_f,
        w: p.w + s * dw,
        f: p.f + t * dl,
        lambda: p.lambda + s * dl,
        ..*p
    };
    let pts = [mk(-1.0, -1.0), mk(-1.0, 1.0), mk(1.0, -1.0), mk(1.0, 1.0)];
    for x in &pts {
        x.validate()
            .map_err(|e| WeightedError::Pattern(format!("stencil point leaves the domain: {e}")))?;
    }
    Ok(pts)
}

/// `𝔹(P) - ¼ Σ 𝔹` over [`four_point_stencil`].
pub fn check_four_point_concavity(
    b: impl Fn(&WeightedBellmanPoint) -> f64,
    p: &WeightedBellmanPoint,
    d_big_f: f64,
    dw: f64,
    dl: f64,
) -> Result<f64> {
    let pts = four_point_stencil(p, d_big_f, dw, dl)?;
    Ok(b(p) - 0.25 * pts.iter().map(&b).sum::<f64>())
}

/// Whether `𝔹(…, m, …) ≥ 𝔹(…, m', …) - tol` for `m' ≥ m`.
pub fn check_monotone_in_m(
    b: impl Fn(&WeightedBellmanPoint) -> f64,
    p: &WeightedBellmanPoint,
    m_prime: f64,
    tol: f64,
) -> Result<bool> {
    if m_prime < p.m {
        return Err(WeightedError::Pattern(format!(
            "m' = {m_prime} below m = {}",
            p.m
        )));
    }
    let moved = WeightedBellmanPoint { m: m_prime, ..*p };
    p.validate()?;
    moved.validate()?;
    Ok(b(p) >= b(&moved) - tol)
}
