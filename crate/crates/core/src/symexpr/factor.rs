//! Squarefree factorization and square-root extraction.

use super::context::Context;
use super::expr::Expr;
use super::gcd::gcd;
use super::int::Int;
use super::poly::{Mono, Poly, MAX_VARS};

/// `p = unit * prod f^e` with every `f` primitive, nonconstant, positive leading
/// coefficient and squarefree; distinct entries are pairwise coprime.
#[derive(Clone, Debug, PartialEq)]
pub struct Factored {
    pub unit: Int,
    pub factors: Vec<(Poly, u32)>,
}

impl Factored {
    pub fn expand(&self) -> Poly {
        let mut p = Poly::constant(self.unit.clone());
        for (f, e) in &self.factors {
            p = p.mul(&f.pow(*e));
        }
        p
    }
}

/// Content of `p` with respect to `v`: gcd of its coefficients in `v`.
pub fn content_in(p: &Poly, v: usize) -> Poly {
    let mut cs: Vec<Poly> = p.coeffs_in(v).into_values().collect();
    cs.sort_by_key(|c| c.len());
    let mut g = cs[0].primitive().1;
    for c in &cs[1..] {
        if g.is_constant() {
            return Poly::one();
        }
        g = gcd(&g, c);
    }
    g
}

/// Yun's algorithm for a polynomial primitive with respect to `v`.
pub fn yun(f: &Poly, v: usize) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    let fp = f.derivative(v);
    let a0 = gcd(f, &fp);
    let mut b = f.div_exact(&a0).expect("gcd divides");
    let mut c = fp.div_exact(&a0).expect("gcd divides");
    let mut d = c.sub(&b.derivative(v));
    let mut i = 1u32;
    while b.degree(v) > 0 {
        let a = gcd(&b, &d);
        if a.degree(v) > 0 {
            out.push((a.primitive().1, i));
        }
        b = b.div_exact(&a).expect("gcd divides");
        c = d.div_exact(&a).expect("gcd divides");
        d = c.sub(&b.derivative(v));
        i += 1;
    }
    out
}

pub fn squarefree(p: &Poly) -> Factored {
    assert!(!p.is_zero(), "factoring zero");
    let mut factors = Vec::new();
    let m = p.mono_content();
    for i in 0..MAX_VARS {
        if m.0[i] > 0 {
            factors.push((Poly::var(i), m.0[i] as u32));
        }
    }
    let rest = p.div_exact(&Poly::term(m, Int::ONE)).unwrap().primitive().1;
    split(&rest, &mut factors);
    let mut prod = Poly::one();
    for (f, e) in &factors {
        prod = prod.mul(&f.pow(*e));
    }
    let unit = p.div_exact(&prod).and_then(|q| q.constant_value()).expect("factorization reproduces input");
    Factored { unit, factors }
}

fn split(q: &Poly, out: &mut Vec<(Poly, u32)>) {
    if q.is_constant() {
        return;
    }
    let v = q.var_mask().trailing_zeros() as usize;
    let cont = content_in(q, v);
    let pv = if cont.is_constant() { q.clone() } else { q.div_exact(&cont).unwrap() };
    out.extend(yun(&pv, v));
    split(&cont, out);
}

fn integer_square_split(c: &Int) -> (Int, Int) {
    // c = s^2 * t with t free of small square factors
    if let Some(r) = c.sqrt_exact() {
        return (r, Int::ONE);
    }
    let mut s = Int::ONE;
    let mut t = c.clone();
    let mut k = 2i64;
    while k < 2000 {
        let kk = Int::from(k * k);
        while let Some(q) = t.div_exact(&kk) {
            t = q;
            s = s.mul(&Int::from(k));
        }
        k += 1;
    }
    (s, t)
}

/// Writes `sqrt(e)` as `s * sqrt(t)` with `t` a polynomial free of square factors.
///
/// Returns `None` when the constant part of `t` is negative.
pub fn sqrt_split(e: &Expr) -> Option<(Expr, Poly)> {
    let ctx: &Context = e.ctx();
    if e.is_zero() {
        return Some((Expr::zero(ctx), Poly::one()));
    }
    let nd = e.num().mul(e.den());
    let f = squarefree(&nd);
    if f.unit.is_negative() {
        return None;
    }
    let (cs, ct) = integer_square_split(&f.unit);
    let mut s = Poly::constant(cs);
    let mut t = Poly::constant(ct);
    for (g, k) in &f.factors {
        if k / 2 > 0 {
            s = s.mul(&g.pow(k / 2));
        }
        if k % 2 == 1 {
            t = t.mul(g);
        }
    }
    let s = Expr::from_poly(ctx, s).div(&e.den_expr()).ok()?;
    Some((s, t))
}

/// Every term has even exponents and a positive coefficient.
pub fn is_manifest_nonnegative(p: &Poly) -> bool {
    !p.is_zero() && p.terms().iter().all(|(m, c)| !c.is_negative() && m.0.iter().all(|e| e % 2 == 0))
}

/// Manifestly nonnegative with a positive constant term.
pub fn is_manifest_positive(p: &Poly) -> bool {
    is_manifest_nonnegative(p) && p.terms().last().map(|(m, _)| *m == Mono::ONE).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_recovers_multiplicities() {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let f = x.add(&y.mul(&y)).add(&Poly::one());
        let g = x.mul(&y).sub(&Poly::int(2));
        let p = f.pow(3).mul(&g.pow(2)).mul(&y.pow(2)).scale(&Int::from(-12));
        let fac = squarefree(&p);
        assert_eq!(fac.expand(), p);
        assert_eq!(fac.unit, Int::from(-12));
        assert!(fac.factors.contains(&(f, 3)));
        assert!(fac.factors.contains(&(g, 2)));
        assert!(fac.factors.contains(&(y, 2)));
    }

    #[test]
    fn sqrt_of_square_over_square() {
        let ctx = Context::with_coords(&["p", "q"]);
        let p = ctx.var("p").unwrap();
        let q = ctx.var("q").unwrap();
        let one = Expr::one(&ctx);
        let e = (&one + &p.pow(2)).pow(2).scale(8).div(&q.pow(4)).unwrap();
        let (s, t) = sqrt_split(&e).unwrap();
        assert_eq!(t, Poly::int(2));
        assert_eq!(s, (&one + &p.pow(2)).scale(2).div(&q.pow(2)).unwrap());
    }
}
