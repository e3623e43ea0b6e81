//! Antiderivatives involving one square-root atom.
//!
//! An integrand `A + B m` with `m² = t` is split into its rational part `A`
//! and the part `B m`, whose antiderivative is sought as `s m` with `s`
//! rational: `2t s' + t' s = 2t B`. The denominator of `s` lowers every pole
//! order of `B` by one and the numerator is found by undetermined coefficients.

use super::linalg::Matrix;
use crate::error::{Error, Result};
use crate::symexpr::factor::yun;
use crate::symexpr::{antiderivative, AtomKind, Expr, Poly};

/// Antiderivative in atom `v`, allowing one root atom that depends on `v`.
pub fn integrate(e: &Expr, v: usize) -> Result<Expr> {
    match antiderivative(e, v) {
        Err(Error::NotIntegrable(msg)) => match root_split(e, v)? {
            Some((k, a, b)) => {
                let ra = antiderivative(&a, v)?;
                let s = root_times(&b, k, v)?;
                let out = &ra + &(&s * &Expr::atom(e.ctx(), k));
                if &out.diff(v)? - e != Expr::zero(e.ctx()) {
                    return Err(Error::NotIntegrable("algebraic antiderivative failed verification".into()));
                }
                Ok(out)
            }
            None => Err(Error::NotIntegrable(msg)),
        },
        other => other,
    }
}

/// `(k, A, B)` with `e = A + B m_k` for the single root atom `m_k` that varies with `v`.
fn root_split(e: &Expr, v: usize) -> Result<Option<(usize, Expr, Expr)>> {
    let ctx = e.ctx();
    let roots: Vec<usize> = (0..ctx.len())
        .filter(|&k| ctx.atom(k).kind == AtomKind::Root && e.depends_on(k))
        .filter(|&k| !Expr::atom_derivative(ctx, k, v).map(|d| d.is_zero()).unwrap_or(false))
        .collect();
    let [k] = roots[..] else { return Ok(None) };
    let m = Expr::atom(ctx, k);
    let flipped = e.subs_atom(k, &m.neg())?;
    let half = Expr::rational(ctx, 1, 2);
    let a = &(e + &flipped) * &half;
    let b = (&(e - &flipped) * &half).div(&m)?;
    if a.depends_on(k) || b.depends_on(k) {
        return Ok(None);
    }
    Ok(Some((k, a, b)))
}

/// Rational `s` with `(s m)' = B m` where `m² = t`.
fn root_times(b: &Expr, k: usize, v: usize) -> Result<Expr> {
    let ctx = b.ctx();
    if b.is_zero() {
        return Ok(Expr::zero(ctx));
    }
    let t = Expr::from_poly(ctx, ctx.atom(k).square.clone().expect("root atoms carry a square"));
    let tv = t.diff(v)?;
    let mut dpoly = Poly::one();
    for (h, e) in yun(b.den(), v) {
        if e > 1 {
            dpoly = dpoly.mul(&h.pow(e - 1));
        }
    }
    let d = Expr::from_poly(ctx, dpoly.clone());
    let deg = |p: &Poly| p.degree(v) as i64;
    // cancellation at infinity can lower deg s below deg B + 1, so allow deg t of slack
    let bound = ((deg(b.num()) - deg(b.den()) + 1).max(0) + deg(&dpoly) + deg(t.num())) as usize;
    let rhs = &t.scale(2) * b;
    let q = &(&d * &d) * &rhs.den_expr();
    let x = Expr::atom(ctx, v);
    let mut cols = Vec::new();
    for i in 0..=bound {
        let s = x.pow(i as u32).div(&d)?;
        let l = &(&t.scale(2) * &s.diff(v)?) + &(&tv * &s);
        cols.push(&l * &q);
    }
    cols.push(&rhs * &q);
    let mut coeffs: Vec<std::collections::BTreeMap<u16, Expr>> = Vec::new();
    let mut rows = 0u16;
    for c in &cols {
        if c.den().contains_var(v) {
            return Err(Error::NotIntegrable("ansatz denominator is too small".into()));
        }
        let den = c.den_expr();
        let mut m = std::collections::BTreeMap::new();
        for (e, p) in c.num().coeffs_in(v) {
            rows = rows.max(e + 1);
            m.insert(e, Expr::from_poly(ctx, p).div(&den)?);
        }
        coeffs.push(m);
    }
    let mut mat = Matrix::zeros(ctx, rows as usize, cols.len());
    for (j, m) in coeffs.iter().enumerate() {
        for (e, c) in m {
            mat.set(*e as usize, j, c.clone());
        }
    }
    let (r, piv) = mat.rref();
    let last = cols.len() - 1;
    if piv.contains(&last) {
        return Err(Error::NotIntegrable("no algebraic antiderivative of the ansatz form".into()));
    }
    let mut num = Expr::zero(ctx);
    for (row, &c) in piv.iter().enumerate() {
        num = &num + &(r.get(row, last) * &x.pow(c as u32));
    }
    num.div(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Context;

    #[test]
    fn root_integrands() {
        let ctx = Context::with_coords(&["p", "z"]);
        let p = ctx.var("p").unwrap();
        let z = ctx.var("z").unwrap();
        let t = &(&p.pow(2) * &z) + &Expr::one(&ctx);
        let k = ctx.add_root("m", &t).unwrap();
        let m = Expr::atom(&ctx, k);
        // d/dp (p m / t^2)
        let f = (&p * &m).div(&t.pow(2)).unwrap();
        let e = f.diff(0).unwrap();
        let g = integrate(&e, 0).unwrap();
        assert_eq!(g.diff(0).unwrap(), e);
        assert!((&g - &f).diff(0).unwrap().is_zero());
        // mixed rational and root parts
        let e2 = &e + &p.div(&t).unwrap();
        assert_eq!(integrate(&e2, 0).unwrap().diff(0).unwrap(), e2);
    }
}
