//! Sign of `det S₁` on the working domain.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symexpr::factor::{is_manifest_positive, squarefree};
use crate::symexpr::gcd::gcd;
use crate::symexpr::sample::{point_values, Sampler};
use crate::symexpr::{AtomKind, Expr, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    Positive,
    Negative,
    Degenerate,
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// The expression normalizes to zero.
    Exact,
    /// Factor signs settled with at least one assumption.
    Assumptions,
    /// Factor signs settled from manifest positivity alone.
    Factorization,
    /// Consistent sign at random admissible points.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignVerdict {
    pub class: SignClass,
    pub tier: Tier,
    /// Sample points (coordinate and parameter values) consulted.
    pub samples: Vec<Vec<(String, f64)>>,
}

/// Sign of a squarefree polynomial factor, if it can be read off.
fn factor_sign(f: &Poly, assumptions: &[Poly], used: &mut bool, depth: usize) -> Option<i32> {
    if let Some(c) = f.constant_value() {
        return Some(c.signum());
    }
    if is_manifest_positive(f) {
        return Some(1);
    }
    if is_manifest_positive(&f.neg()) {
        return Some(-1);
    }
    if depth == 0 {
        return None;
    }
    for a in assumptions {
        let g = gcd(f, a);
        if g.is_constant() {
            continue;
        }
        let Some(rest) = f.div_exact(&g) else { continue };
        // g = a / (a/g); when g is all of a, it carries the assumed sign
        let sg = if a.div_exact(&g).and_then(|h| h.constant_value()).is_some() {
            *used = true;
            let k = a.div_exact(&g).unwrap().constant_value().unwrap();
            Some(k.signum())
        } else {
            factor_sign(&g, assumptions, used, depth - 1)
        };
        if let (Some(s), Some(r)) = (sg, factor_sign(&rest, assumptions, used, depth - 1)) {
            return Some(s * r);
        }
    }
    None
}

/// Positive polynomials usable as assumptions: numerators of assumptions whose
/// denominators are manifestly positive, oriented to be positive.
fn assumption_polys(e: &Expr) -> Vec<Poly> {
    let mut out = Vec::new();
    for a in e.ctx().assumptions() {
        let d = a.den();
        if is_manifest_positive(d) || d.constant_value().map(|c| !c.is_negative()).unwrap_or(false) {
            out.push(a.num().clone());
        } else if is_manifest_positive(&d.neg()) {
            out.push(a.num().neg());
        }
    }
    out
}

fn sign_by_factors(e: &Expr) -> Option<(i32, bool)> {
    let ctx = e.ctx();
    let roots = ctx.atoms().iter().enumerate().any(|(i, a)| a.kind == AtomKind::Root && e.depends_on(i));
    if roots {
        return None;
    }
    let assumptions = assumption_polys(e);
    let mut used = false;
    let mut sign = 1;
    for p in [e.num(), e.den()] {
        let f = squarefree(p);
        sign *= f.unit.signum();
        for (g, k) in &f.factors {
            if k % 2 == 0 {
                continue;
            }
            sign *= factor_sign(g, &assumptions, &mut used, 3)?;
        }
    }
    Some((sign, used))
}

/// Classifies the sign of `det`: assumptions, then factorization, then
/// `samples` random admissible points drawn from `seed`.
pub fn classify_sign(det: &Expr, seed: u64, samples: usize) -> Result<SignVerdict> {
    if det.is_zero() {
        return Ok(SignVerdict { class: SignClass::Degenerate, tier: Tier::Exact, samples: Vec::new() });
    }
    if let Some((s, used)) = sign_by_factors(det) {
        let class = if s > 0 { SignClass::Positive } else { SignClass::Negative };
        let tier = if used { Tier::Assumptions } else { Tier::Factorization };
        return Ok(SignVerdict { class, tier, samples: Vec::new() });
    }
    let ctx = det.ctx();
    let mut sampler = Sampler::new(ctx, seed).guard(det);
    let (mut pos, mut neg) = (0usize, 0usize);
    let mut pts = Vec::new();
    for ev in sampler.points(samples.max(1))? {
        let v = ev.eval(det)?;
        if v > 0.0 {
            pos += 1;
        } else if v < 0.0 {
            neg += 1;
        }
        pts.push(point_values(ctx, &ev));
    }
    let class = match (pos > 0, neg > 0) {
        (true, false) => SignClass::Positive,
        (false, true) => SignClass::Negative,
        (true, true) => SignClass::Indefinite,
        (false, false) => return Err(Error::NoSamplePoint),
    };
    Ok(SignVerdict { class, tier: Tier::Sampled, samples: pts })
}
