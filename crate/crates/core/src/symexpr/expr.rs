//! Canonical rational expressions.

use std::fmt;

use super::context::{AtomKind, Context};
use super::gcd::gcd;
use super::int::Int;
use super::poly::{Mono, Poly, MAX_VARS};
use crate::error::{Error, Result};

/// `num / den` with integer-coefficient polynomials over the atoms of a context.
///
/// Invariants: `den` is nonzero with positive leading coefficient, the
/// fraction is reduced (no common polynomial factor, joint integer content 1),
/// atoms with a square rewrite occur to degree at most one in `num` and not
/// at all in `den`.
#[derive(Clone)]
pub struct Expr {
    ctx: Context,
    num: Poly,
    den: Poly,
}

impl PartialEq for Expr {
    fn eq(&self, o: &Expr) -> bool {
        self.num == o.num && self.den == o.den
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn bits(mask: u32) -> impl DoubleEndedIterator<Item = usize> {
    (0..MAX_VARS).filter(move |i| mask & (1 << i) != 0)
}

/// Rewrites `r^e` for every atom `r` with a square relation, highest atom first.
fn reduce_relations(p: &Poly, squares: &[Option<Poly>], rel: u32) -> Poly {
    let mut p = p.clone();
    for r in bits(rel).rev() {
        if p.degree(r) < 2 {
            continue;
        }
        let sq = squares[r].as_ref().unwrap();
        let groups = p.coeffs_in(r);
        let maxe = *groups.keys().last().unwrap();
        let mut pows = vec![Poly::one()];
        for k in 1..=(maxe / 2) {
            let next = pows[k as usize - 1].mul(sq);
            pows.push(next);
        }
        let mut acc = Poly::zero();
        for (e, c) in groups {
            let mut t = c.mul(&pows[(e / 2) as usize]);
            if e % 2 == 1 {
                t = t.mul_term(&Mono::var(r, 1), &Int::ONE);
            }
            acc = acc.add(&t);
        }
        p = acc;
    }
    p
}

impl Expr {
    pub(crate) fn from_raw_parts(ctx: &Context, num: Poly, den: Poly) -> Expr {
        Expr { ctx: ctx.clone(), num, den }
    }

    pub fn zero(ctx: &Context) -> Expr {
        Expr::from_raw_parts(ctx, Poly::zero(), Poly::one())
    }

    pub fn one(ctx: &Context) -> Expr {
        Expr::from_raw_parts(ctx, Poly::one(), Poly::one())
    }

    pub fn int(ctx: &Context, v: i64) -> Expr {
        Expr::from_raw_parts(ctx, Poly::int(v), Poly::one())
    }

    pub fn constant(ctx: &Context, v: Int) -> Expr {
        Expr::from_raw_parts(ctx, Poly::constant(v), Poly::one())
    }

    /// `n / d`; panics if `d` is zero.
    pub fn rational(ctx: &Context, n: i64, d: i64) -> Expr {
        Expr::from_polys(ctx, Poly::int(n), Poly::int(d)).expect("nonzero denominator")
    }

    pub fn atom(ctx: &Context, i: usize) -> Expr {
        Expr::from_raw_parts(ctx, Poly::var(i), Poly::one())
    }

    /// Polynomial expression, with square relations applied.
    pub fn from_poly(ctx: &Context, p: Poly) -> Expr {
        let rel = ctx.relation_mask();
        let p = if p.var_mask() & rel != 0 { reduce_relations(&p, &ctx.squares(), rel) } else { p };
        Expr::from_raw_parts(ctx, p, Poly::one())
    }

    /// Canonical form of `num / den`.
    pub fn from_polys(ctx: &Context, num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero(ctx));
        }
        let rel = ctx.relation_mask();
        let (mut num, mut den) = (num, den);
        if (num.var_mask() | den.var_mask()) & rel != 0 {
            let sq = ctx.squares();
            num = reduce_relations(&num, &sq, rel);
            den = reduce_relations(&den, &sq, rel);
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            while den.var_mask() & rel != 0 {
                let r = 31 - (den.var_mask() & rel).leading_zeros() as usize;
                let cs = den.coeffs_in(r);
                let a = cs.get(&0).cloned().unwrap_or_else(Poly::zero);
                let b = cs.get(&1).cloned().unwrap_or_else(Poly::zero);
                let conj = a.sub(&b.mul_term(&Mono::var(r, 1), &Int::ONE));
                num = reduce_relations(&num.mul(&conj), &sq, rel);
                den = reduce_relations(&a.mul(&a).sub(&b.mul(&b).mul(sq[r].as_ref().unwrap())), &sq, rel);
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
            }
            if num.is_zero() {
                return Ok(Expr::zero(ctx));
            }
        }
        Ok(Expr::finish(ctx, num, den))
    }

    /// Cancels the polynomial gcd, then fixes content and sign.
    fn finish(ctx: &Context, num: Poly, den: Poly) -> Expr {
        if den.is_constant() {
            return Expr::fix_content(ctx, num, den);
        }
        let g = gcd(&num, &den);
        if g.is_one() {
            Expr::fix_content(ctx, num, den)
        } else {
            Expr::fix_content(ctx, num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        }
    }

    fn fix_content(ctx: &Context, num: Poly, den: Poly) -> Expr {
        if num.is_zero() {
            return Expr::zero(ctx);
        }
        let mut c = den.content().gcd(&num.content());
        if den.lc().is_negative() {
            c = -&c;
        }
        if c.is_one() {
            return Expr::from_raw_parts(ctx, num, den);
        }
        let cp = Poly::constant(c);
        Expr::from_raw_parts(ctx, num.div_exact(&cp).unwrap(), den.div_exact(&cp).unwrap())
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// `(numerator, positive denominator)` when the expression is a number.
    pub fn as_rational(&self) -> Option<(Int, Int)> {
        if self.num.is_constant() && self.den.is_constant() {
            Some((self.num.constant_value().unwrap(), self.den.constant_value().unwrap()))
        } else {
            None
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self.as_rational()? {
            (Int::Small(n), d) if d.is_one() => Some(n),
            _ => None,
        }
    }

    pub fn var_mask(&self) -> u32 {
        self.num.var_mask() | self.den.var_mask()
    }

    pub fn depends_on(&self, atom: usize) -> bool {
        self.var_mask() & (1 << atom) != 0
    }

    pub fn neg(&self) -> Expr {
        Expr::from_raw_parts(&self.ctx, self.num.neg(), self.den.clone())
    }

    pub fn add(&self, o: &Expr) -> Expr {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Expr::from_raw_parts(&self.ctx, self.num.add(&o.num), Poly::one());
        }
        if self.den == o.den {
            let num = self.num.add(&o.num);
            if num.is_zero() {
                return Expr::zero(&self.ctx);
            }
            return Expr::finish(&self.ctx, num, self.den.clone());
        }
        let g = if self.den.is_constant() || o.den.is_constant() { Poly::one() } else { gcd(&self.den, &o.den) };
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = o.den.div_exact(&g).unwrap();
        let num = self.num.mul(&d1).add(&o.num.mul(&b1));
        if num.is_zero() {
            return Expr::zero(&self.ctx);
        }
        let den = b1.mul(&o.den);
        if g.is_one() {
            return Expr::fix_content(&self.ctx, num, den);
        }
        let g2 = gcd(&num, &g);
        if g2.is_one() {
            Expr::fix_content(&self.ctx, num, den)
        } else {
            Expr::fix_content(&self.ctx, num.div_exact(&g2).unwrap(), den.div_exact(&g2).unwrap())
        }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero(&self.ctx);
        }
        if o.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return o.clone();
        }
        let rel = self.ctx.relation_mask();
        if (self.num.var_mask() & rel != 0) && (o.num.var_mask() & rel != 0) {
            let num = reduce_relations(&self.num.mul(&o.num), &self.ctx.squares(), rel);
            if num.is_zero() {
                return Expr::zero(&self.ctx);
            }
            return Expr::finish(&self.ctx, num, self.den.mul(&o.den));
        }
        let g1 = if o.den.is_constant() { Poly::one() } else { gcd(&self.num, &o.den) };
        let g2 = if self.den.is_constant() { Poly::one() } else { gcd(&o.num, &self.den) };
        let a = if g1.is_one() { self.num.clone() } else { self.num.div_exact(&g1).unwrap() };
        let d = if g1.is_one() { o.den.clone() } else { o.den.div_exact(&g1).unwrap() };
        let c = if g2.is_one() { o.num.clone() } else { o.num.div_exact(&g2).unwrap() };
        let b = if g2.is_one() { self.den.clone() } else { self.den.div_exact(&g2).unwrap() };
        Expr::fix_content(&self.ctx, a.mul(&c), b.mul(&d))
    }

    pub fn scale(&self, k: i64) -> Expr {
        self.mul(&Expr::int(&self.ctx, k))
    }

    pub fn inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.num.var_mask() & self.ctx.relation_mask() != 0 {
            return Expr::from_polys(&self.ctx, self.den.clone(), self.num.clone());
        }
        Ok(Expr::fix_content(&self.ctx, self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Expr) -> Result<Expr> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u32) -> Expr {
        if e == 0 {
            return Expr::one(&self.ctx);
        }
        if self.num.var_mask() & self.ctx.relation_mask() == 0 {
            return Expr::from_raw_parts(&self.ctx, self.num.pow(e), self.den.pow(e));
        }
        let mut r = Expr::one(&self.ctx);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn powi(&self, e: i32) -> Result<Expr> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// Derivative of atom `k` with respect to atom `v`.
    pub fn atom_derivative(ctx: &Context, k: usize, v: usize) -> Result<Expr> {
        let info = ctx.atom(k);
        match &info.kind {
            AtomKind::Coordinate | AtomKind::Parameter => Ok(if k == v { Expr::one(ctx) } else { Expr::zero(ctx) }),
            AtomKind::Function { arg, .. } => {
                if k == v {
                    return Ok(Expr::one(ctx));
                }
                let a = Expr::from_raw_parts(ctx, arg.0.clone(), arg.1.clone());
                let da = a.diff(v)?;
                if da.is_zero() {
                    return Ok(Expr::zero(ctx));
                }
                let d = info.deriv.as_ref().ok_or_else(|| Error::MissingDerivative(info.name.clone()))?;
                Ok(Expr::from_raw_parts(ctx, d.0.clone(), d.1.clone()).mul(&da))
            }
            AtomKind::Root => {
                if k == v {
                    return Ok(Expr::one(ctx));
                }
                let sq = Expr::from_raw_parts(ctx, info.square.clone().unwrap(), Poly::one());
                let ds = sq.diff(v)?;
                if ds.is_zero() {
                    return Ok(Expr::zero(ctx));
                }
                ds.mul(&Expr::atom(ctx, k)).div(&sq.scale(2))
            }
        }
    }

    /// Partial derivative with respect to atom `v`, following declared chains.
    pub fn diff(&self, v: usize) -> Result<Expr> {
        let mask = self.var_mask();
        if mask == 0 {
            return Ok(Expr::zero(&self.ctx));
        }
        let mut datoms = Vec::new();
        for k in bits(mask) {
            let d = Expr::atom_derivative(&self.ctx, k, v)?;
            if !d.is_zero() {
                datoms.push((k, d));
            }
        }
        if datoms.is_empty() {
            return Ok(Expr::zero(&self.ctx));
        }
        let ctx = &self.ctx;
        if datoms.iter().all(|(_, d)| d.den.is_one()) {
            let rel = ctx.relation_mask();
            let sq = ctx.squares();
            let total = |p: &Poly| -> Poly {
                let mut acc = Poly::zero();
                for (k, d) in &datoms {
                    let pk = p.derivative(*k);
                    if !pk.is_zero() {
                        acc = acc.add(&pk.mul(&d.num));
                    }
                }
                if acc.var_mask() & rel != 0 {
                    reduce_relations(&acc, &sq, rel)
                } else {
                    acc
                }
            };
            let dn = total(&self.num);
            if self.den.is_one() {
                return Ok(Expr::from_raw_parts(ctx, dn, Poly::one()));
            }
            let dd = total(&self.den);
            if dd.is_zero() {
                return Ok(Expr::from_raw_parts(ctx, dn, self.den.clone()).reduced());
            }
            let g = gcd(&self.den, &dd);
            let den_g = self.den.div_exact(&g).unwrap();
            let dd_g = dd.div_exact(&g).unwrap();
            let n = dn.mul(&den_g).sub(&self.num.mul(&dd_g));
            let n = if n.var_mask() & rel != 0 { reduce_relations(&n, &sq, rel) } else { n };
            if n.is_zero() {
                return Ok(Expr::zero(ctx));
            }
            return Ok(Expr::finish(ctx, n, self.den.mul(&den_g)));
        }
        let total = |p: &Poly| -> Expr {
            let mut acc = Expr::zero(ctx);
            for (k, d) in &datoms {
                let pk = p.derivative(*k);
                if !pk.is_zero() {
                    acc = acc.add(&Expr::from_poly(ctx, pk).mul(d));
                }
            }
            acc
        };
        let dn = total(&self.num);
        if self.den.is_one() {
            return Ok(dn);
        }
        let dd = total(&self.den);
        let den = Expr::from_raw_parts(ctx, self.den.clone(), Poly::one());
        let num = Expr::from_raw_parts(ctx, self.num.clone(), Poly::one());
        dn.mul(&den).sub(&num.mul(&dd)).div(&den.pow(2))
    }

    fn reduced(self) -> Expr {
        if self.num.is_zero() {
            return Expr::zero(&self.ctx);
        }
        Expr::finish(&self.ctx, self.num, self.den)
    }

    /// Simultaneous substitution of atoms by expressions.
    ///
    /// Function and root atoms whose definitions involve a substituted atom
    /// must be substituted themselves.
    pub fn subs(&self, map: &[(usize, Expr)]) -> Result<Expr> {
        let mask = self.var_mask();
        let mut values: Vec<Option<&Expr>> = vec![None; MAX_VARS];
        let mut smask = 0u32;
        for (k, e) in map {
            if mask & (1 << k) != 0 {
                values[*k] = Some(e);
                smask |= 1 << k;
            }
        }
        if smask == 0 {
            return Ok(self.clone());
        }
        let all_subst: u32 = map.iter().fold(0, |m, (k, _)| m | (1 << k));
        for k in bits(mask & !smask) {
            let info = self.ctx.atom(k);
            let dep = match &info.kind {
                AtomKind::Function { arg, .. } => arg.0.var_mask() | arg.1.var_mask(),
                AtomKind::Root => info.square.as_ref().map(|s| s.var_mask()).unwrap_or(0),
                _ => 0,
            };
            if dep & all_subst != 0 {
                return Err(Error::Unsupported(format!("substitution into the definition of `{}`", info.name)));
            }
        }
        let n = subs_poly(&self.ctx, &self.num, &values, smask)?;
        let d = subs_poly(&self.ctx, &self.den, &values, smask)?;
        n.div(&d)
    }

    pub fn subs_atom(&self, k: usize, e: &Expr) -> Result<Expr> {
        self.subs(&[(k, e.clone())])
    }

    /// Expressions obtained by mapping over the terms of the numerator.
    pub fn num_expr(&self) -> Expr {
        Expr::from_raw_parts(&self.ctx, self.num.clone(), Poly::one())
    }

    pub fn den_expr(&self) -> Expr {
        Expr::from_raw_parts(&self.ctx, self.den.clone(), Poly::one())
    }
}

/// Substitutes into a polynomial over a common denominator.
fn subs_poly(ctx: &Context, p: &Poly, values: &[Option<&Expr>], smask: u32) -> Result<Expr> {
    if p.var_mask() & smask == 0 {
        return Ok(Expr::from_raw_parts(ctx, p.clone(), Poly::one()));
    }
    let atoms: Vec<usize> = bits(smask & p.var_mask()).collect();
    let maxe: Vec<u16> = atoms.iter().map(|&k| p.degree(k)).collect();
    let mut npow: Vec<Vec<Poly>> = Vec::new();
    let mut dpow: Vec<Vec<Poly>> = Vec::new();
    for (i, &k) in atoms.iter().enumerate() {
        let v = values[k].unwrap();
        let mut np = vec![Poly::one()];
        let mut dp = vec![Poly::one()];
        for e in 1..=maxe[i] as usize {
            np.push(np[e - 1].mul(&v.num));
            dp.push(dp[e - 1].mul(&v.den));
        }
        npow.push(np);
        dpow.push(dp);
    }
    // group terms by their exponents in the substituted atoms
    let mut groups: std::collections::BTreeMap<Vec<u16>, Vec<(Mono, Int)>> = Default::default();
    for (m, c) in p.terms() {
        let key: Vec<u16> = atoms.iter().map(|&k| m.0[k]).collect();
        let mut rest = *m;
        for &k in &atoms {
            rest.0[k] = 0;
        }
        groups.entry(key).or_default().push((rest, c.clone()));
    }
    let mut acc = Poly::zero();
    for (key, terms) in groups {
        let mut t = Poly::from_terms(terms);
        for (i, &e) in key.iter().enumerate() {
            let e = e as usize;
            if e > 0 {
                t = t.mul(&npow[i][e]);
            }
            let de = maxe[i] as usize - e;
            if de > 0 {
                t = t.mul(&dpow[i][de]);
            }
        }
        acc = acc.add(&t);
    }
    let mut den = Poly::one();
    for (i, m) in maxe.iter().enumerate() {
        den = den.mul(&dpow[i][*m as usize]);
    }
    Expr::from_polys(ctx, acc, den)
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        Expr::add(self, o)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        Expr::sub(self, o)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        Expr::mul(self, o)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::add(&self, &o)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::sub(&self, &o)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::mul(&self, &o)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Context, Expr, Expr) {
        let ctx = Context::with_coords(&["p", "q"]);
        let p = ctx.var("p").unwrap();
        let q = ctx.var("q").unwrap();
        (ctx, p, q)
    }

    #[test]
    fn polynomial_identity_cancels() {
        let (_, p, q) = setup();
        let s = (&p + &q).pow(2);
        let r = &(&(&s - &p.pow(2)) - &(&p * &q).scale(2)) - &q.pow(2);
        assert!(r.is_zero());
    }

    #[test]
    fn fraction_reduces() {
        let (_, p, q) = setup();
        let r = (&p.pow(2) - &q.pow(2)).div(&(&p - &q)).unwrap();
        assert_eq!(r, &p + &q);
    }

    #[test]
    fn root_relation_rewrites() {
        let (ctx, p, _) = setup();
        let one = Expr::one(&ctx);
        let m = ctx.add_root("m", &(&one + &p.pow(2))).map(|i| Expr::atom(&ctx, i)).unwrap();
        assert!((&m.pow(2) - &(&one + &p.pow(2))).is_zero());
        let dm = m.diff(ctx.lookup("p").unwrap()).unwrap();
        assert_eq!(dm, p.div(&m).unwrap());
        // denominators are rationalized
        assert!(!dm.den().contains_var(ctx.lookup("m").unwrap()));
    }

    #[test]
    fn chain_rule_through_function() {
        let ctx = Context::with_coords(&["x", "z"]);
        let z = ctx.var("z").unwrap();
        let f = Expr::atom(&ctx, ctx.function("f", &z).unwrap());
        let fp_i = ctx.function("fp", &z).unwrap();
        ctx.set_derivative(ctx.lookup("f(z)").unwrap(), &Expr::atom(&ctx, fp_i)).unwrap();
        let zi = ctx.lookup("z").unwrap();
        let d = f.pow(2).diff(zi).unwrap();
        assert_eq!(d, (&f * &Expr::atom(&ctx, fp_i)).scale(2));
        assert!(f.diff(ctx.lookup("x").unwrap()).unwrap().is_zero());
        assert!(matches!(Expr::atom(&ctx, fp_i).diff(zi), Err(Error::MissingDerivative(_))));
    }

    #[test]
    fn simultaneous_substitution_swaps() {
        let (ctx, p, q) = setup();
        let e = (&p - &q.scale(2)).div(&(&p + &Expr::one(&ctx))).unwrap();
        let s = e.subs(&[(0, q.clone()), (1, p.clone())]).unwrap();
        assert_eq!(s, (&q - &p.scale(2)).div(&(&q + &Expr::one(&ctx))).unwrap());
    }
}
