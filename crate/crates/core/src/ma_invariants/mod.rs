//! Hyperbolic Monge-Ampère systems: E-normalization, a 1-adapted coframe,
//! the relative invariants `S₁`, `S₂` and the Euler-Lagrange type.

pub mod coframe;
pub mod gauge;
pub mod sign;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{reduce_mod, Basis, Form};
use crate::symexpr::factor::sqrt_split;
use crate::symexpr::{Context, Expr};
pub use coframe::AdaptedCoframe;
pub use gauge::{gauge_transform, sigma_tensors, GaugeElement, SigmaTensors};
pub use sign::{classify_sign, SignClass, SignVerdict, Tier};

pub const CHART: [&str; 5] = ["x", "y", "z", "p", "q"];

/// `A(z_xx z_yy − z_xy²) + B z_xx + 2C z_xy + D z_yy + E = 0` on the chart `(x,y,z,p,q)`.
#[derive(Clone, Debug)]
pub struct MongeAmpereSystem {
    pub chart: Basis,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub e: Expr,
}

/// Contact transformation applied by `normalize_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `E ≠ 0`: coefficients divided by `E`.
    Scaled,
    /// Transformation 1, 2 or 3 followed by scaling.
    Contact(u8),
    /// `A = B = D = E = 0`, `C ≠ 0`: the wave equation `z_xy = 0`.
    Wave,
}

/// System with `E = 1` and the factor `E` divided out.
#[derive(Clone, Debug)]
pub struct NormalizedSystem {
    pub system: MongeAmpereSystem,
    pub tag: Normalization,
    pub scale: Expr,
}

impl MongeAmpereSystem {
    /// The context must contain the coordinates `x, y, z, p, q`.
    pub fn new(ctx: &Context, coeffs: [Expr; 5]) -> Result<MongeAmpereSystem> {
        let chart = Basis::chart(ctx, &CHART)?;
        MongeAmpereSystem::on_chart(&chart, coeffs)
    }

    pub fn on_chart(chart: &Basis, coeffs: [Expr; 5]) -> Result<MongeAmpereSystem> {
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::Input("all coefficients vanish".into()));
        }
        let [a, b, c, d, e] = coeffs;
        Ok(MongeAmpereSystem { chart: chart.clone(), a, b, c, d, e })
    }

    /// `z_xy = F`: `C = 1/2`, `E = −F`.
    pub fn from_rhs(ctx: &Context, f: &Expr) -> Result<MongeAmpereSystem> {
        let z = Expr::zero(ctx);
        MongeAmpereSystem::new(ctx, [z.clone(), z.clone(), Expr::rational(ctx, 1, 2), z, f.neg()])
    }

    pub fn ctx(&self) -> &Context {
        self.chart.ctx()
    }

    pub fn coeffs(&self) -> [Expr; 5] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone(), self.e.clone()]
    }

    fn var(&self, i: usize) -> Expr {
        Expr::atom(self.ctx(), self.chart.coords().expect("chart")[i])
    }

    /// Contact form `dz − p dx − q dy`.
    pub fn theta(&self) -> Form {
        let b = &self.chart;
        let ctx = self.ctx();
        Form::one_form(b, vec![self.var(3).neg(), self.var(4).neg(), Expr::one(ctx), Expr::zero(ctx), Expr::zero(ctx)])
    }

    /// `Ω = A dp∧dq + B dp∧dy + C(dx∧dp − dy∧dq) + D dx∧dq + E dx∧dy`.
    pub fn omega_form(&self) -> Form {
        let items = vec![
            (vec![3, 4], self.a.clone()),
            (vec![3, 1], self.b.clone()),
            (vec![0, 3], self.c.clone()),
            (vec![1, 4], self.c.neg()),
            (vec![0, 4], self.d.clone()),
            (vec![0, 1], self.e.clone()),
        ];
        Form::from_terms(&self.chart, 2, items).expect("valid indices")
    }

    /// Reads `A..E` back from a 2-form `Ω + k dθ` (any `k`), reduced modulo `θ`.
    pub fn from_two_form(chart: &Basis, w: &Form, theta: &Form) -> Result<MongeAmpereSystem> {
        let r = reduce_mod(w, std::slice::from_ref(theta))?;
        let c1 = r.coeff_of(&[0, 3]);
        let c2 = r.coeff_of(&[1, 4]);
        let c = (&c1 - &c2).div(&Expr::int(chart.ctx(), 2))?;
        MongeAmpereSystem::on_chart(chart, [r.coeff_of(&[3, 4]), r.coeff_of(&[3, 1]), c, r.coeff_of(&[0, 4]), r.coeff_of(&[0, 1])])
    }

    /// `AE − BD + C²`.
    pub fn discriminant(&self) -> Expr {
        &(&(&self.a * &self.e) - &(&self.b * &self.d)) + &self.c.pow(2)
    }

    /// Pulls the system back along one of the three contact transformations,
    /// given as old coordinates in terms of new ones.
    pub fn contact_transform(&self, which: u8) -> Result<MongeAmpereSystem> {
        let [x, y, z, p, q] = [0, 1, 2, 3, 4].map(|i| self.var(i));
        let coords = self.chart.coords().expect("chart").to_vec();
        let images = match which {
            1 => [p.neg(), q.neg(), &(&z - &(&p * &x)) - &(&q * &y), x.clone(), y.clone()],
            2 => [p.neg(), y.clone(), &z - &(&x * &p), x.clone(), q.clone()],
            3 => [x.clone(), q.neg(), &z - &(&y * &q), p.clone(), y.clone()],
            _ => return Err(Error::Input(format!("no contact transformation {which}"))),
        };
        let map: Vec<(usize, Expr)> = coords.into_iter().zip(images).collect();
        let w = self.omega_form().pullback(&self.chart, &map)?;
        MongeAmpereSystem::from_two_form(&self.chart, &w, &self.theta())
    }

    /// Makes `E = 1`, applying the first contact transformation that yields
    /// `E ≠ 0` when needed.
    pub fn normalize_e(&self) -> Result<NormalizedSystem> {
        let (sys, tag) = if !self.e.is_zero() {
            (self.clone(), Normalization::Scaled)
        } else if self.a.is_zero() && self.b.is_zero() && self.d.is_zero() {
            if self.c.is_zero() {
                return Err(Error::Input("all coefficients vanish".into()));
            }
            return Ok(NormalizedSystem { system: self.clone(), tag: Normalization::Wave, scale: Expr::one(self.ctx()) });
        } else {
            let mut found = None;
            for k in 1..=3u8 {
                let t = self.contact_transform(k)?;
                if !t.e.is_zero() {
                    found = Some((t, Normalization::Contact(k)));
                    break;
                }
            }
            found.ok_or_else(|| Error::NotHyperbolic("no contact transformation gives E ≠ 0".into()))?
        };
        let e = sys.e.clone();
        let ctx = self.ctx();
        let coeffs = [sys.a.div(&e)?, sys.b.div(&e)?, sys.c.div(&e)?, sys.d.div(&e)?, Expr::one(ctx)];
        Ok(NormalizedSystem { system: MongeAmpereSystem::on_chart(&self.chart, coeffs)?, tag, scale: e })
    }
}

fn fresh_root_name(ctx: &Context) -> String {
    let mut name = "m".to_string();
    let mut k = 1;
    while ctx.lookup(&name).is_some() {
        name = format!("m{k}");
        k += 1;
    }
    name
}

/// `μ = sqrt(AE − BD + C²)/E` for the un-normalized coefficients, with at most
/// one root atom `m`.
fn discriminant_root(ns: &NormalizedSystem, seed: u64, samples: usize) -> Result<Expr> {
    let ctx = ns.system.ctx();
    let disc = &ns.system.discriminant() * &ns.scale.pow(2);
    if disc.is_zero() {
        return Err(Error::NotHyperbolic("AE − BD + C² vanishes identically".into()));
    }
    let v = classify_sign(&disc, seed, samples)?;
    if matches!(v.class, SignClass::Negative) {
        return Err(Error::NotHyperbolic("AE − BD + C² is negative".into()));
    }
    let (s, t) = sqrt_split(&disc).ok_or_else(|| Error::NotHyperbolic("AE − BD + C² is negative".into()))?;
    let root = if t.is_one() {
        s
    } else {
        let te = Expr::from_poly(ctx, t);
        let existing = ctx.atoms().iter().position(|a| a.square.as_ref() == Some(te.num()));
        let k = match existing {
            Some(k) => k,
            None => ctx.add_root(&fresh_root_name(ctx), &te)?,
        };
        &s * &Expr::atom(ctx, k)
    };
    root.div(&ns.scale)
}

/// The coframe `η` from the E-normalized coefficients, corrected to `ω`.
pub fn adapted_coframe(ns: &NormalizedSystem, seed: u64, samples: usize) -> Result<AdaptedCoframe> {
    let sys = &ns.system;
    let ctx = sys.ctx();
    let chart = &sys.chart;
    let zero = Expr::zero(ctx);
    let one = Expr::one(ctx);
    let p = sys.var(3);
    let q = sys.var(4);
    if ns.tag == Normalization::Wave {
        let e = |i: usize| {
            let mut v = vec![zero.clone(); 5];
            v[i] = one.clone();
            v
        };
        let theta = sys.theta().components();
        return AdaptedCoframe::from_rows(chart, vec![theta, e(0), e(3), e(1), e(4)], None);
    }
    let mu = discriminant_root(ns, seed, samples)?;
    let (b, c, d) = (&sys.b, &sys.c, &sys.d);
    let two_mu = mu.scale(2);
    let rows = vec![
        vec![(&two_mu * &p).neg(), (&two_mu * &q).neg(), two_mu.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), one.clone(), zero.clone(), c + &mu, d.clone()],
        vec![one.neg(), zero.clone(), zero.clone(), b.neg(), &mu - c],
        vec![zero.clone(), one.clone(), zero.clone(), c - &mu, d.clone()],
        vec![one.clone(), zero.clone(), zero.clone(), b.clone(), &mu + c],
    ];
    AdaptedCoframe::from_rows(chart, rows, Some(mu))
}

/// Verdict on the Euler-Lagrange type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElType {
    Positive,
    Negative,
    Degenerate,
    Indefinite,
    NotEl,
}

#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub s1: [Expr; 4],
    pub s2: [Expr; 4],
    pub det_s1: Expr,
    pub is_euler_lagrange: bool,
    pub is_wave: bool,
    pub el_type: ElType,
    pub evidence: Option<SignVerdict>,
    pub normalization: Option<Normalization>,
}

impl InvariantReport {
    /// Invariants of an adapted coframe; the sign of `det S₁` is classified
    /// only for Euler-Lagrange systems.
    pub fn from_coframe(cf: &AdaptedCoframe, seed: u64, samples: usize) -> Result<InvariantReport> {
        let v = cf.v();
        let s1 = [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()];
        let s2 = [v[4].clone(), v[5].clone(), v[6].clone(), v[7].clone()];
        let det_s1 = &(&s1[0] * &s1[3]) - &(&s1[1] * &s1[2]);
        let is_el = s2.iter().all(|x| x.is_zero());
        let is_wave = is_el && s1.iter().all(|x| x.is_zero());
        let (el_type, evidence) = if is_el {
            let sv = classify_sign(&det_s1, seed, samples)?;
            let t = match sv.class {
                SignClass::Positive => ElType::Positive,
                SignClass::Negative => ElType::Negative,
                SignClass::Degenerate => ElType::Degenerate,
                SignClass::Indefinite => ElType::Indefinite,
            };
            (t, Some(sv))
        } else {
            (ElType::NotEl, None)
        };
        Ok(InvariantReport { s1, s2, det_s1, is_euler_lagrange: is_el, is_wave, el_type, evidence, normalization: None })
    }
}

/// Full pipeline: E-normalization, adapted coframe, invariants.
pub fn invariants(sys: &MongeAmpereSystem, seed: u64, samples: usize) -> Result<(AdaptedCoframe, InvariantReport)> {
    let ns = sys.normalize_e()?;
    let cf = adapted_coframe(&ns, seed, samples)?;
    let mut rep = InvariantReport::from_coframe(&cf, seed, samples)?;
    rep.normalization = Some(ns.tag);
    Ok((cf, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k_minus1() -> MongeAmpereSystem {
        let ctx = Context::with_coords(&CHART);
        let p = ctx.var("p").unwrap();
        let q = ctx.var("q").unwrap();
        let g = &(&Expr::one(&ctx) + &p.pow(2)) + &q.pow(2);
        let z = Expr::zero(&ctx);
        MongeAmpereSystem::new(&ctx, [Expr::one(&ctx), z.clone(), z.clone(), z, g.pow(2)]).unwrap()
    }

    #[test]
    fn k_minus_one_invariants() {
        let sys = k_minus1();
        let ctx = sys.ctx().clone();
        let (cf, rep) = invariants(&sys, 0, 32).unwrap();
        let p = ctx.var("p").unwrap();
        let q = ctx.var("q").unwrap();
        let g = &(&Expr::one(&ctx) + &p.pow(2)) + &q.pow(2);
        assert_eq!(cf.mu.clone().unwrap(), g.inv().unwrap());
        assert!(cf.adaptation_residual().unwrap().is_zero());
        assert!(rep.is_euler_lagrange);
        // frozen from an independent computation
        let r = |n, d| Expr::rational(&ctx, n, d);
        assert_eq!(rep.s1[0], (&p * &q) * r(-1, 4));
        assert_eq!(rep.s1[1], (&p.pow(2) + &Expr::one(&ctx)) * r(-1, 4));
        assert_eq!(rep.s1[2], (&q.pow(2) + &Expr::one(&ctx)) * r(-1, 4));
        assert_eq!(rep.s1[3], (&p * &q) * r(-1, 4));
        assert_eq!(rep.det_s1, g * r(-1, 16));
        assert_eq!(rep.el_type, ElType::Negative);
    }

    #[test]
    fn contact_transforms_move_coefficients() {
        let ctx = Context::with_coords(&CHART);
        let z = Expr::zero(&ctx);
        let x = ctx.var("x").unwrap();
        // B z_xx = 0 with B = x has E = 0; transformation 2 gives E′ = B∘map
        let sys = MongeAmpereSystem::new(&ctx, [z.clone(), x.clone(), z.clone(), z.clone(), z.clone()]).unwrap();
        let ns = sys.normalize_e().unwrap();
        assert_eq!(ns.tag, Normalization::Contact(2));
        assert_eq!(ns.scale, ctx.var("p").unwrap().neg());
        let sys = MongeAmpereSystem::new(&ctx, [Expr::one(&ctx), z.clone(), z.clone(), z.clone(), z.clone()]).unwrap();
        let ns = sys.normalize_e().unwrap();
        assert_eq!(ns.tag, Normalization::Contact(1));
        assert_eq!(ns.scale, Expr::one(&ctx));
        let empty = MongeAmpereSystem::new(&ctx, [z.clone(), z.clone(), Expr::one(&ctx), z.clone(), z.clone()]).unwrap();
        assert_eq!(empty.normalize_e().unwrap().tag, Normalization::Wave);
    }

    #[test]
    fn degenerate_discriminant_is_rejected() {
        let ctx = Context::with_coords(&CHART);
        let z = Expr::zero(&ctx);
        let one = Expr::one(&ctx);
        // B = D = 1, A = C = 0, E = 1: AE − BD + C² = −1
        let sys = MongeAmpereSystem::new(&ctx, [z.clone(), one.clone(), z.clone(), one.clone(), one.clone()]).unwrap();
        assert!(matches!(invariants(&sys, 0, 32), Err(Error::NotHyperbolic(_))));
        let sys = MongeAmpereSystem::new(&ctx, [one.clone(), one.clone(), z.clone(), one.clone(), one.clone()]).unwrap();
        assert!(matches!(invariants(&sys, 0, 32), Err(Error::NotHyperbolic(_))));
    }
}
