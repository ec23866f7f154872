use crate::{BellmanError, Result};

/// `(F, f, lambda)` with `|f| <= F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanPoint {
    pub big_f: f64,
    pub f: f64,
    pub lambda: f64,
}

const DOMAIN_SLACK: f64 = 1e-12;

impl BellmanPoint {
    pub fn new(big_f: f64, f: f64, lambda: f64) -> Result<Self> {
        let p = Self { big_f, f, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.big_f.is_finite()
            && self.f.is_finite()
            && !self.lambda.is_nan()
            && self.f.abs() <= self.big_f + DOMAIN_SLACK * (1.0 + self.big_f);
        if ok {
            Ok(())
        } else {
            Err(BellmanError::OutsideDomain(self.big_f, self.f, self.lambda))
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            big_f: t * self.big_f,
            f: t * self.f,
            lambda: t * self.lambda,
        }
    }
}

/// `1` if `lambda <= F`, otherwise `1 - (lambda - F)^2 / (lambda^2 - f^2)`.
/// Negative levels return 1.
pub fn closed_form_b(p: BellmanPoint) -> Result<f64> {
    p.validate()?;
    let BellmanPoint { big_f, f, lambda } = p;
    if lambda <= big_f {
        return Ok(1.0);
    }
    let den = lambda * lambda - f * f;
    if den <= 0.0 {
        return Err(BellmanError::Degenerate);
    }
    Ok((1.0 - (lambda - big_f).powi(2) / den).clamp(0.0, 1.0))
}

/// Which sign pattern the level follows in a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MainPattern {
    /// `P_± = (F ± a, f ± b, lambda ± b)`
    Mi1,
    /// `P_± = (F ± a, f ± b, lambda ∓ b)`
    Mi2,
}

/// Split displacements around a centre `(F, f, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub alpha: f64,
    pub beta: f64,
    /// Level shift `P_±.lambda = lambda ∓ eps * beta`.
    pub eps: f64,
}

impl Split {
    pub fn children(&self, p: BellmanPoint) -> (BellmanPoint, BellmanPoint) {
        let plus = BellmanPoint {
            big_f: p.big_f + self.alpha,
            f: p.f + self.beta,
            lambda: p.lambda - self.eps * self.beta,
        };
        let minus = BellmanPoint {
            big_f: p.big_f - self.alpha,
            f: p.f - self.beta,
            lambda: p.lambda + self.eps * self.beta,
        };
        (plus, minus)
    }

    pub fn pattern(alpha: f64, beta: f64, pattern: MainPattern) -> Self {
        let eps = match pattern {
            MainPattern::Mi1 => -1.0,
            MainPattern::Mi2 => 1.0,
        };
        Self { alpha, beta, eps }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

/// Recovers the pattern of `(P, P+, P-)`; the degenerate `beta = 0` split matches both.
pub fn detect_pattern(
    p: BellmanPoint,
    plus: BellmanPoint,
    minus: BellmanPoint,
) -> Result<Vec<MainPattern>> {
    for q in [p, plus, minus] {
        q.validate()?;
    }
    let alpha = 0.5 * (plus.big_f - minus.big_f);
    let beta = 0.5 * (plus.f - minus.f);
    if !close(p.big_f, 0.5 * (plus.big_f + minus.big_f)) || !close(p.f, 0.5 * (plus.f + minus.f)) {
        return Err(BellmanError::Pattern(
            "P is not the midpoint in (F, f)".into(),
        ));
    }
    let mut found = Vec::new();
    for pat in [MainPattern::Mi1, MainPattern::Mi2] {
        let (ep, em) = Split::pattern(alpha, beta, pat).children(p);
        if close(ep.lambda, plus.lambda) && close(em.lambda, minus.lambda) {
            found.push(pat);
        }
    }
    if found.is_empty() {
        return Err(BellmanError::Pattern(
            "levels follow neither lambda ± beta nor lambda ∓ beta".into(),
        ));
    }
    Ok(found)
}

/// `B(P) - (B(P+) + B(P-)) / 2` after checking the displacement pattern.
pub fn check_main_inequality<B>(
    b: B,
    p: BellmanPoint,
    plus: BellmanPoint,
    minus: BellmanPoint,
) -> Result<f64>
where
    B: Fn(BellmanPoint) -> Result<f64>,
{
    detect_pattern(p, plus, minus)?;
    Ok(b(p)? - 0.5 * (b(plus)? + b(minus)?))
}

/// `M(F, y1, y2) = B(F, y1 - y2, y1 + y2)`.
pub fn m_from_b<B>(b: B) -> impl Fn(f64, f64, f64) -> Result<f64>
where
    B: Fn(BellmanPoint) -> Result<f64>,
{
    move |big_f, y1, y2| {
        b(BellmanPoint {
            big_f,
            f: y1 - y2,
            lambda: y1 + y2,
        })
    }
}

/// The plane of a bi-concavity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiPlane {
    /// Direction `(dF, dy1, 0)`.
    FY1 { d_big_f: f64, dy: f64 },
    /// Direction `(dF, 0, dy2)`.
    FY2 { d_big_f: f64, dy: f64 },
}

impl BiPlane {
    fn vector(self) -> (f64, f64, f64) {
        match self {
            BiPlane::FY1 { d_big_f, dy } => (d_big_f, dy, 0.0),
            BiPlane::FY2 { d_big_f, dy } => (d_big_f, 0.0, dy),
        }
    }
}

/// `M(p + h d) + M(p - h d) - 2 M(p)`; at most 0 for a bi-concave `M`.
/// Stencils leaving `{|y1 - y2| <= F}` are rejected.
pub fn biconcavity_defect<M>(m: M, point: (f64, f64, f64), plane: BiPlane, h: f64) -> Result<f64>
where
    M: Fn(f64, f64, f64) -> Result<f64>,
{
    let (a, b, c) = plane.vector();
    let at = |s: f64| {
        let q = (
            point.0 + s * h * a,
            point.1 + s * h * b,
            point.2 + s * h * c,
        );
        if (q.1 - q.2).abs() > q.0 + DOMAIN_SLACK {
            return Err(BellmanError::StencilExit);
        }
        m(q.0, q.1, q.2)
    };
    Ok(at(1.0)? + at(-1.0)? - 2.0 * at(0.0)?)
}

/// Outcome of an obstacle sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleReport {
    pub samples: usize,
    /// `sup (1 - value)` over the samples.
    pub max_deficiency: f64,
    pub worst: Option<BellmanPoint>,
}

/// Evaluates `b` on points with `lambda < F`, where the Bellman function equals 1.
pub fn verify_obstacle<B>(b: B, samples: &[BellmanPoint]) -> Result<ObstacleReport>
where
    B: Fn(BellmanPoint) -> Result<f64>,
{
    let mut rep = ObstacleReport {
        samples: samples.len(),
        max_deficiency: f64::NEG_INFINITY,
        worst: None,
    };
    for &p in samples {
        p.validate()?;
        if !(p.lambda < p.big_f) {
            return Err(BellmanError::Pattern(format!(
                "obstacle sample has lambda >= F: {p:?}"
            )));
        }
        let d = 1.0 - b(p)?;
        if d > rep.max_deficiency {
            rep.max_deficiency = d;
            rep.worst = Some(p);
        }
    }
    Ok(rep)
}

/// Depth-0 value: one Haar term `eps (phi, h) h` with `|beta| <= F`.
pub fn n0_exact(p: BellmanPoint) -> f64 {
    if p.lambda < 0.0 {
        1.0
    } else if p.lambda < p.big_f {
        0.5
    } else {
        0.0
    }
}
