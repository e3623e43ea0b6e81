//! Euler-Lagrange obstructions for rank-1 Bäcklund transformations and the
//! taxonomy of special ones. Values are those of a 1-refined lifting.

use crate::error::{Error, Result};
use crate::symexpr::Expr;

/// Invariant values on a 1-refined lifting together with the pencil data.
#[derive(Clone, Debug)]
pub struct LiftingData {
    pub v: [Expr; 4],
    pub w: [Expr; 4],
    pub mu: Expr,
    pub epsilon: i32,
    pub s2: Option<Expr>,
    pub t4: Option<Expr>,
}

impl LiftingData {
    /// Validates `μ ≥ 1` (a constant), `ε = ±1` and `εμ² ≠ 1`.
    pub fn new(v: [Expr; 4], w: [Expr; 4], mu: Expr, epsilon: i32, s2: Option<Expr>, t4: Option<Expr>) -> Result<LiftingData> {
        let Some((n, d)) = mu.as_rational() else {
            return Err(Error::Input("μ must be a constant".into()));
        };
        if n.sub(&d).is_negative() {
            return Err(Error::Forbidden("μ < 1".into()));
        }
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Forbidden(format!("ε = {epsilon}")));
        }
        if epsilon == 1 && mu.is_one() {
            return Err(Error::Forbidden("εμ² = 1".into()));
        }
        Ok(LiftingData { v, w, mu, epsilon, s2, t4 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialType {
    I,
    IIa,
    IIb,
    III,
}

impl SpecialType {
    pub fn name(self) -> &'static str {
        match self {
            SpecialType::I => "I",
            SpecialType::IIa => "IIa",
            SpecialType::IIb => "IIb",
            SpecialType::III => "III",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Special(SpecialType),
    NotSpecial,
    Inconsistent,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Special(t) => t.name(),
            Verdict::NotSpecial => "not-special",
            Verdict::Inconsistent => "inconsistent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub phi: [Expr; 4],
    /// `ε = −1, W₁ = −V₁, W₂ = V₂, W₄ = V₄`, evaluated when `μ = 1`.
    pub special_relations: Option<bool>,
    /// `V₃ + W₃ + 2s₂t₄ = 0`, evaluated when `s₂, t₄` are given.
    pub torsion_relation: Option<bool>,
    pub verdict: Verdict,
    pub annotations: Vec<String>,
}

const LIFTING_NOTE: &str = "conclusions hold for values taken on a 1-refined lifting";

/// Evaluates `Φ₁..Φ₄` and, for special transformations, the type.
pub fn el_obstructions(l: &LiftingData) -> ObstructionReport {
    let ctx = l.mu.ctx();
    let [v1, v2, v3, v4] = &l.v;
    let [w1, w2, w3, w4] = &l.w;
    let m4 = l.mu.pow(4);
    let eps = Expr::int(ctx, l.epsilon as i64);
    let phi = [&(&eps * w1) - &(&m4 * v1), w2 - &(&m4 * v2), &(&m4 * w4) - v4, &(&m4 * w2) - v2];
    let torsion_relation = match (&l.s2, &l.t4) {
        (Some(s), Some(t)) => Some((&(v3 + w3) + &(s * t).scale(2)).is_zero()),
        _ => None,
    };
    let mut annotations = vec![LIFTING_NOTE.to_string()];
    let special = l.mu.is_one();
    let special_relations = special.then(|| l.epsilon == -1 && (w1 + v1).is_zero() && w2 == v2 && w4 == v4);
    let verdict = if phi.iter().any(|p| !p.is_zero()) {
        annotations.push("some Φ does not vanish, so no rank-1 transformation relates these Euler-Lagrange systems".into());
        Verdict::Inconsistent
    } else if l.epsilon == 1 {
        annotations.push("ε = 1 forces V₂ = W₂ = 0: the two systems are both degenerate or both nondegenerate".into());
        Verdict::NotSpecial
    } else if !special {
        Verdict::NotSpecial
    } else if special_relations != Some(true) || torsion_relation == Some(false) {
        annotations.push("the special relations fail".into());
        Verdict::Inconsistent
    } else {
        if torsion_relation.is_none() {
            annotations.push("V₃ + W₃ + 2s₂t₄ = 0 not checked (s₂, t₄ not given)".into());
        }
        let t = if !v2.is_zero() {
            annotations.push("type III: the two systems are not both degenerate".into());
            SpecialType::III
        } else if !(v1 * v4).is_zero() {
            annotations.push("type I: det S₁ = V₁V₄ = −W₁W₄ ≠ 0, one system is positive and the other negative".into());
            SpecialType::I
        } else if v1.is_zero() && v4.is_zero() {
            annotations.push("type IIa: each system is contact equivalent to z_xy = F(x, y, z, z_x, z_y)".into());
            SpecialType::IIa
        } else {
            annotations.push("type IIb: each system has a characteristic system with a rank-1 integrable subsystem".into());
            SpecialType::IIb
        };
        Verdict::Special(t)
    };
    ObstructionReport { phi, special_relations, torsion_relation, verdict, annotations }
}
