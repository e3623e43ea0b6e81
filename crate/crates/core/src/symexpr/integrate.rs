//! Antiderivatives of rational functions in one atom.
//!
//! Hermite reduction over the field of the remaining atoms, then a
//! logarithmic part for linear and quadratic denominators (or numerators
//! proportional to the derivative). Logarithms and arctangents become new
//! function atoms with declared derivatives.

use super::context::Context;
use super::expr::Expr;
use super::factor::{content_in, sqrt_split, yun};
use super::gcd::gcd;
use super::poly::Poly;
use crate::error::{Error, Result};

/// Dense polynomial in the integration atom with coefficients in the other atoms.
#[derive(Clone, Debug)]
struct Up(Vec<Expr>);

impl Up {
    fn trim(mut self) -> Up {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
        self
    }

    fn from_poly(ctx: &Context, p: &Poly, v: usize) -> Up {
        let cs = p.coeffs_in(v);
        let deg = cs.keys().last().cloned().unwrap_or(0) as usize;
        let mut out = vec![Expr::zero(ctx); deg + 1];
        for (e, c) in cs {
            out[e as usize] = Expr::from_poly(ctx, c);
        }
        Up(out).trim()
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lc(&self) -> &Expr {
        self.0.last().unwrap()
    }

    fn zero() -> Up {
        Up(Vec::new())
    }

    fn add(&self, o: &Up) -> Up {
        let n = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            match (self.0.get(i), o.0.get(i)) {
                (Some(a), Some(b)) => out.push(a + b),
                (Some(a), None) => out.push(a.clone()),
                (None, Some(b)) => out.push(b.clone()),
                (None, None) => unreachable!(),
            }
        }
        Up(out).trim()
    }

    fn neg(&self) -> Up {
        Up(self.0.iter().map(|c| c.neg()).collect())
    }

    fn sub(&self, o: &Up) -> Up {
        self.add(&o.neg())
    }

    fn scale(&self, c: &Expr) -> Up {
        Up(self.0.iter().map(|a| a * c).collect()).trim()
    }

    fn mul(&self, o: &Up) -> Up {
        if self.is_zero() || o.is_zero() {
            return Up::zero();
        }
        let ctx = self.0[0].ctx().clone();
        let mut out = vec![Expr::zero(&ctx); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Up(out).trim()
    }

    fn divrem(&self, d: &Up) -> Result<(Up, Up)> {
        let mut r = self.clone();
        if r.0.len() < d.0.len() {
            return Ok((Up::zero(), r));
        }
        let ctx = d.0[0].ctx().clone();
        let inv = d.lc().inv()?;
        let mut q = vec![Expr::zero(&ctx); r.0.len() - d.0.len() + 1];
        while !r.is_zero() && r.0.len() >= d.0.len() {
            let shift = r.0.len() - d.0.len();
            let c = r.lc() * &inv;
            for (i, dc) in d.0.iter().enumerate() {
                r.0[shift + i] = &r.0[shift + i] - &(&c * dc);
            }
            q[shift] = c;
            r.0.pop();
            r = r.trim();
        }
        Ok((Up(q).trim(), r))
    }

    fn derivative(&self) -> Up {
        Up(self.0.iter().enumerate().skip(1).map(|(i, c)| c.scale(i as i64)).collect()).trim()
    }

    fn to_expr(&self, ctx: &Context, v: usize) -> Expr {
        let x = Expr::atom(ctx, v);
        let mut acc = Expr::zero(ctx);
        for c in self.0.iter().rev() {
            acc = &(&acc * &x) + c;
        }
        acc
    }

    /// `(s, t)` with `s a + t b = 1`, or `None` if `a` and `b` are not coprime.
    fn bezout(a: &Up, b: &Up) -> Result<Option<(Up, Up)>> {
        let ctx = a.0[0].ctx().clone();
        let one = Up(vec![Expr::one(&ctx)]);
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (one.clone(), Up::zero());
        let (mut t0, mut t1) = (Up::zero(), one);
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1)?;
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.deg() > 0 {
            return Ok(None);
        }
        let inv = r0.0[0].inv()?;
        Ok(Some((s0.scale(&inv), t0.scale(&inv))))
    }
}

fn integrate_polynomial(ctx: &Context, q: &Up, v: usize) -> Expr {
    let x = Expr::atom(ctx, v);
    let mut acc = Expr::zero(ctx);
    for (i, c) in q.0.iter().enumerate() {
        if !c.is_zero() {
            let k = (i + 1) as i64;
            acc = &acc + &(c * &x.pow(k as u32)).div(&Expr::int(ctx, k)).unwrap();
        }
    }
    acc
}

pub(crate) fn log_atom(ctx: &Context, arg: &Expr) -> Result<Expr> {
    let k = ctx.function("log", arg)?;
    ctx.set_derivative(k, &arg.inv()?)?;
    Ok(Expr::atom(ctx, k))
}

fn atan_atom(ctx: &Context, arg: &Expr) -> Result<Expr> {
    let k = ctx.function("atan", arg)?;
    let d = (&Expr::one(ctx) + &arg.pow(2)).inv()?;
    ctx.set_derivative(k, &d)?;
    Ok(Expr::atom(ctx, k))
}

/// `log` of the part of `f` that depends on `v`, normalized to a primitive polynomial.
fn log_of(ctx: &Context, f: &Up, v: usize) -> Result<Expr> {
    let e = f.to_expr(ctx, v);
    let num = e.num();
    let prim = num.div_exact(&content_in(num, v)).unwrap().primitive().1;
    log_atom(ctx, &Expr::from_poly(ctx, prim))
}

struct Integrator<'a> {
    ctx: &'a Context,
    v: usize,
}

impl Integrator<'_> {
    /// Integral of `num / f^j` with `f` squarefree.
    fn general(&self, num: &Up, f: &Up, j: usize) -> Result<Expr> {
        // f-adic expansion num = sum c_i f^i
        let mut acc = Expr::zero(self.ctx);
        let mut rest = num.clone();
        let mut i = 0usize;
        while !rest.is_zero() {
            let (q, r) = rest.divrem(f)?;
            if !r.is_zero() {
                if i >= j {
                    let poly = r.mul(&pow_up(f, i - j));
                    acc = &acc + &integrate_polynomial(self.ctx, &poly, self.v);
                } else {
                    acc = &acc + &self.power(&r, f, j - i)?;
                }
            }
            rest = q;
            i += 1;
        }
        Ok(acc)
    }

    /// Integral of `c / f^j` with `deg c < deg f`.
    fn power(&self, c: &Up, f: &Up, j: usize) -> Result<Expr> {
        let ctx = self.ctx;
        if c.is_zero() {
            return Ok(Expr::zero(ctx));
        }
        let fp = f.derivative();
        if j >= 2 {
            let (_, t) = Up::bezout(f, &fp)?.ok_or_else(|| Error::NotIntegrable("denominator factor is not squarefree".into()))?;
            // c = S f + T f'
            let big_t = c.mul(&t).divrem(f)?.1;
            let big_s = c.sub(&big_t.mul(&fp)).divrem(f)?.0;
            let k = Expr::int(ctx, (j - 1) as i64);
            let fe = f.to_expr(ctx, self.v);
            let rational = big_t.to_expr(ctx, self.v).neg().div(&(&k * &fe.pow((j - 1) as u32)))?;
            let next = big_s.add(&big_t.derivative().scale(&k.inv()?));
            return Ok(&rational + &self.general(&next, f, j - 1)?);
        }
        let x = Expr::atom(ctx, self.v);
        if f.deg() == 1 {
            let coef = c.0[0].div(f.lc())?;
            return Ok(&coef * &log_of(ctx, f, self.v)?);
        }
        if c.deg() + 1 == f.deg() {
            let k = c.lc().div(fp.lc())?;
            if c.sub(&fp.scale(&k)).is_zero() {
                return Ok(&k * &log_of(ctx, f, self.v)?);
            }
        }
        if f.deg() == 2 {
            let (f0, f1, f2) = (&f.0[0], &f.0[1], &f.0[2]);
            let a = c.0.get(1).cloned().unwrap_or_else(|| Expr::zero(ctx));
            let b = c.0[0].clone();
            let c1 = a.div(&f2.scale(2))?;
            let r = &b - &(&c1 * f1);
            let mut acc = if c1.is_zero() { Expr::zero(ctx) } else { &c1 * &log_of(ctx, f, self.v)? };
            if r.is_zero() {
                return Ok(acc);
            }
            let delta = &(f2 * f0).scale(4) - &f1.pow(2);
            let lin = &(f2 * &x).scale(2) + f1;
            if let Some((s, t)) = sqrt_split(&delta) {
                if t.is_one() {
                    let arg = lin.div(&s)?;
                    acc = &acc + &(&r.scale(2).div(&s)? * &atan_atom(ctx, &arg)?);
                    return Ok(acc);
                }
            }
            if let Some((s, t)) = sqrt_split(&delta.neg()) {
                if t.is_one() {
                    // 1/f = (1/s) (2 f2/(lin - s) - 2 f2/(lin + s))
                    let lo = Up::from_poly(ctx, (&lin - &s).num(), self.v).scale(&(&lin - &s).den_expr().inv()?);
                    let hi = Up::from_poly(ctx, (&lin + &s).num(), self.v).scale(&(&lin + &s).den_expr().inv()?);
                    let coef = r.div(&s)?;
                    acc = &acc + &(&coef * &(&log_of(ctx, &lo, self.v)? - &log_of(ctx, &hi, self.v)?));
                    return Ok(acc);
                }
            }
        }
        if let Some(e) = self.rational_residues(c, f)? {
            return Ok(e);
        }
        Err(Error::NotIntegrable(format!("no rule for a degree {} denominator factor", f.deg())))
    }

    /// Log part of `c / f` when some residues are small rationals `t`:
    /// each `g = gcd(f, c − t f')` contributes `t log g`, and the rest is
    /// integrated over `f / g`. Candidates are screened on an integer
    /// specialization of the other atoms before the exact gcd.
    fn rational_residues(&self, c: &Up, f: &Up) -> Result<Option<Expr>> {
        let ctx = self.ctx;
        let v = self.v;
        let fe = f.to_expr(ctx, v);
        let ce = c.to_expr(ctx, v);
        let fpe = f.derivative().to_expr(ctx, v);
        let spec: Vec<(usize, Expr)> = (0..ctx.len())
            .filter(|&k| k != v && (fe.depends_on(k) || ce.depends_on(k)))
            .enumerate()
            .map(|(i, k)| (k, Expr::int(ctx, [3, 7, 11, 5, 13, 2, 17, 19, 23, 29][i % 10] + i as i64)))
            .collect();
        let (Ok(fs), Ok(cs), Ok(fps)) = (fe.subs(&spec), ce.subs(&spec), fpe.subs(&spec)) else {
            return Ok(None);
        };
        if fs.num().degree(v) as usize != f.deg() {
            return Ok(None);
        }
        for d in 1..=4i64 {
            for k in 1..=(12 * d) {
                if num_integer::gcd(k, d) != 1 {
                    continue;
                }
                for t in [Expr::rational(ctx, k, d), Expr::rational(ctx, -k, d)] {
                    let hs = &cs - &(&t * &fps);
                    if gcd(fs.num(), hs.num()).degree(v) == 0 {
                        continue;
                    }
                    let h = &ce - &(&t * &fpe);
                    let g = gcd(fe.num(), h.num());
                    if g.degree(v) == 0 {
                        continue;
                    }
                    let gu = Up::from_poly(ctx, &g, v);
                    let (f2, rem) = f.divrem(&gu)?;
                    if !rem.is_zero() {
                        continue;
                    }
                    // c/f − t g'/g = (c − t g' f2) / (g f2)
                    let (c2, rem) = c.sub(&gu.derivative().mul(&f2).scale(&t)).divrem(&gu)?;
                    if !rem.is_zero() {
                        continue;
                    }
                    let here = &t * &log_of(ctx, &gu, v)?;
                    if f2.deg() == 0 {
                        return Ok(c2.is_zero().then_some(here));
                    }
                    let rest = self.power(&c2.divrem(&f2)?.1, &f2, 1)?;
                    let poly = c2.divrem(&f2)?.0;
                    return Ok(Some(&(&here + &rest) + &integrate_polynomial(ctx, &poly, v)));
                }
            }
        }
        Ok(None)
    }
}

fn pow_up(f: &Up, k: usize) -> Up {
    let ctx = f.0[0].ctx().clone();
    let mut r = Up(vec![Expr::one(&ctx)]);
    for _ in 0..k {
        r = r.mul(f);
    }
    r
}

/// Splits squarefree factors further using gcds with hint polynomials.
fn refine(mut factors: Vec<(Poly, u32)>, hints: &[Poly], v: usize) -> Vec<(Poly, u32)> {
    for h in hints {
        if !h.contains_var(v) {
            continue;
        }
        let mut next = Vec::new();
        for (f, k) in factors {
            let g = gcd(&f, h);
            if g.degree(v) > 0 && g.degree(v) < f.degree(v) {
                next.push((f.div_exact(&g).unwrap().primitive().1, k));
                next.push((g, k));
            } else {
                next.push((f, k));
            }
        }
        factors = next;
    }
    factors
}

/// Antiderivative of `e` with respect to atom `v`, verified by differentiation.
///
/// Positivity assumptions of the context serve as hints for splitting
/// denominators into coprime factors.
pub fn antiderivative(e: &Expr, v: usize) -> Result<Expr> {
    let ctx = e.ctx();
    if e.is_zero() {
        return Ok(Expr::zero(ctx));
    }
    let x = Expr::atom(ctx, v);
    for k in 0..ctx.len() {
        if k != v && e.depends_on(k) && !Expr::atom_derivative(ctx, k, v).map(|d| d.is_zero()).unwrap_or(false) {
            return Err(Error::NotIntegrable(format!("integrand involves `{}`", ctx.name(k))));
        }
    }
    if !e.depends_on(v) {
        return Ok(e * &x);
    }
    let num = Up::from_poly(ctx, e.num(), v);
    let result = if !e.den().contains_var(v) {
        integrate_polynomial(ctx, &num.scale(&e.den_expr().inv()?), v)
    } else {
        let den = e.den();
        let cont = content_in(den, v);
        let dp = den.div_exact(&cont).unwrap();
        let num = num.scale(&Expr::from_poly(ctx, cont).inv()?);
        let mut hints = Vec::new();
        for a in ctx.assumptions() {
            hints.push(a.num().clone());
            hints.push(a.den().clone());
        }
        let factors = refine(yun(&dp, v), &hints, v);
        let mut dprod = Poly::one();
        for (f, k) in &factors {
            dprod = dprod.mul(&f.pow(*k));
        }
        let scale = dp.div_exact(&dprod).and_then(|q| q.constant_value()).expect("factors reproduce the denominator");
        let num = num.scale(&Expr::constant(ctx, scale).inv()?);
        let dup = Up::from_poly(ctx, &dprod, v);
        let (q, r) = num.divrem(&dup)?;
        let mut acc = integrate_polynomial(ctx, &q, v);
        let it = Integrator { ctx, v };
        for (i, (f, k)) in factors.iter().enumerate() {
            let fu = Up::from_poly(ctx, f, v);
            let pi = pow_up(&fu, *k as usize);
            let mut other = Up(vec![Expr::one(ctx)]);
            for (j, (g, kg)) in factors.iter().enumerate() {
                if j != i {
                    other = other.mul(&pow_up(&Up::from_poly(ctx, g, v), *kg as usize));
                }
            }
            let bi = if factors.len() == 1 {
                r.clone()
            } else {
                let (s, _) = Up::bezout(&other, &pi)?.ok_or_else(|| Error::NotIntegrable("denominator factors are not coprime".into()))?;
                r.mul(&s).divrem(&pi)?.1
            };
            acc = &acc + &it.general(&bi, &fu, *k as usize)?;
        }
        acc
    };
    let check = &result.diff(v)? - e;
    if !check.is_zero() {
        return Err(Error::NotIntegrable("antiderivative failed verification".into()));
    }
    Ok(result)
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
    fn polynomial_rule() {
        let (_, p, _) = setup();
        assert_eq!(antiderivative(&p.scale(2), 0).unwrap(), p.pow(2));
    }

    #[test]
    fn logarithmic_rule() {
        let (ctx, p, q) = setup();
        let g = &(&Expr::one(&ctx) + &p.pow(2)) + &q.pow(2);
        let f = antiderivative(&p.div(&g).unwrap(), 0).unwrap();
        assert_eq!(f.to_string(), "log(p^2 + q^2 + 1) / 2");
    }

    #[test]
    fn arctangent_and_power_rules() {
        let (ctx, p, _) = setup();
        let one = Expr::one(&ctx);
        let e = (&one + &p.pow(2)).inv().unwrap();
        let f = antiderivative(&e, 0).unwrap();
        assert_eq!(f.to_string(), "atan(p)");
        let e2 = p.div(&(&one + &p.pow(2)).pow(2)).unwrap();
        assert!(antiderivative(&e2, 0).is_ok());
    }

    #[test]
    fn opaque_integrand_is_not_integrable() {
        let ctx = Context::with_coords(&["z"]);
        let z = ctx.var("z").unwrap();
        let f = Expr::atom(&ctx, ctx.function("f", &z).unwrap());
        assert!(matches!(antiderivative(&f, 0), Err(Error::NotIntegrable(_))));
    }
}
