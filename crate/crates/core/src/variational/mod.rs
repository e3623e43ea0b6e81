//! Euler-Lagrange systems: the closed form `φ₀`, the integrating factor, the
//! Poincaré-Cartan form and a Lagrangian.

use crate::error::{Error, Result};
use crate::exterior::poincare::{poincare_primitive, potential};
use crate::exterior::{Basis, Form};
use crate::ma_invariants::coframe::AdaptedCoframe;
use crate::symexpr::factor::sqrt_split;
use crate::symexpr::{AtomKind, Expr};

/// Result of the variational pipeline, every form on the parent basis.
#[derive(Clone, Debug)]
pub struct Variational {
    pub phi0: Form,
    pub lambda: Expr,
    pub pi: Form,
    pub lagrangian: Form,
}

/// `ω¹∧ω² − ω³∧ω⁴` on the coframe basis.
fn split_area(b: &Basis) -> Result<Form> {
    b.element(1).wedge(&b.element(2))?.sub(&b.element(3).wedge(&b.element(4))?)
}

/// The 1-form `φ₀` with `dω⁰ ≡ −φ₀∧ω⁰ + ω¹∧ω² + ω³∧ω⁴` and `dφ₀ = 0`.
///
/// The `ω^k` parts are read off `dω⁰`; the `ω⁰` part is fixed by the
/// `ω¹∧ω²` component of `dφ₀`.
pub fn phi0(cf: &AdaptedCoframe) -> Result<Form> {
    let v = cf.v();
    if v[4..].iter().any(|x| !x.is_zero()) {
        return Err(Error::NotEulerLagrange);
    }
    let b = &cf.omega;
    let n = b.dim();
    let ctx = b.ctx();
    let mut beta = vec![Expr::zero(ctx); n];
    for (k, slot) in beta.iter_mut().enumerate().skip(1) {
        *slot = cf.t(0, 0, k);
    }
    let beta = Form::one_form(b, beta);
    let a = beta.d()?.coeff_of(&[1, 2]).neg();
    let phi = beta.add(&b.element(0).scale(&a))?;
    let w0 = b.element(0);
    let eq = b.d_element(0).add(&phi.wedge(&w0)?)?.sub(&b.element(1).wedge(&b.element(2))?)?.sub(&b.element(3).wedge(&b.element(4))?)?;
    if !eq.is_zero() {
        return Err(Error::NotEulerLagrange);
    }
    if !phi.d()?.is_zero() {
        return Err(Error::NotClosed("no closed choice of φ₀".into()));
    }
    phi.change_basis(&cf.parent)
}

/// `λ` with `dλ = 2λφ₀`, normalized to one at the primitive's base point.
///
/// The potential of `2φ₀` must be a rational combination of logarithms with
/// integer or half-integer weights; half-integer weights introduce a root atom.
pub fn integrating_factor(phi0: &Form) -> Result<Expr> {
    let ctx = phi0.basis().ctx().clone();
    if phi0.is_zero() {
        return Ok(Expr::one(&ctx));
    }
    let f = potential(&phi0.scale(&Expr::int(&ctx, 2)), None)?;
    let mut lambda = Expr::one(&ctx);
    let mut rest = f.clone();
    for k in 0..ctx.len() {
        if !f.depends_on(k) {
            continue;
        }
        let AtomKind::Function { fname, arg } = ctx.atom(k).kind else { continue };
        if fname != "log" {
            continue;
        }
        let c = f.diff(k)?;
        let Some((n, d)) = c.as_rational() else {
            return Err(Error::NotIntegrable("non-constant logarithmic weight".into()));
        };
        let g = Expr::from_polys(&ctx, arg.0, arg.1)?;
        let (n, d) = (n.to_f64() as i64, d.to_f64() as i64);
        let factor = match d {
            1 => g.powi(n as i32)?,
            2 => root_power(&g, n)?,
            _ => return Err(Error::NotIntegrable(format!("logarithmic weight {c}"))),
        };
        lambda = &lambda * &factor;
        rest = rest.subs_atom(k, &Expr::zero(&ctx))?;
    }
    if !rest.is_constant() {
        return Err(Error::NotIntegrable("integrating factor is not algebraic".into()));
    }
    let b = phi0.basis();
    let dl = Form::scalar(b, lambda.clone()).d()?;
    if dl != phi0.scale(&lambda.scale(2)) {
        return Err(Error::NotIntegrable("dλ = 2λφ₀ fails".into()));
    }
    Ok(lambda)
}

/// `g^{n/2}` for odd `n`: a rational power times a root atom.
fn root_power(g: &Expr, n: i64) -> Result<Expr> {
    let ctx = g.ctx();
    // g^{n/2} = g^{(n-1)/2} sqrt(g), and sqrt(num/den) = sqrt(num*den)/den
    let t = g.num_expr() * g.den_expr();
    if let Some((s, rest)) = sqrt_split(&t) {
        if rest.is_one() {
            return Ok(&g.powi(((n - 1) / 2) as i32)? * &s.div(&g.den_expr())?);
        }
    }
    let name = (0..).map(|i| format!("r{i}")).find(|s| ctx.lookup(s).is_none()).expect("fresh name");
    let r = ctx.add_root(&name, &t)?;
    let sq = Expr::atom(ctx, r).div(&g.den_expr())?;
    Ok(&g.powi(((n - 1) / 2) as i32)? * &sq)
}

/// `Π = λ ω⁰∧(ω¹∧ω² − ω³∧ω⁴)` on the parent basis, checked closed.
pub fn poincare_cartan(cf: &AdaptedCoframe, lambda: &Expr) -> Result<Form> {
    let b = &cf.omega;
    let pi = b.element(0).wedge(&split_area(b)?)?.scale(lambda).change_basis(&cf.parent)?;
    if !pi.d()?.is_zero() {
        return Err(Error::NotClosed("dΠ ≠ 0".into()));
    }
    Ok(pi)
}

/// A 2-form `Λ` with `dΛ = Π` on a chart.
pub fn lagrangian(pi: &Form) -> Result<Form> {
    let l = poincare_primitive(pi)?;
    if l.d()? != *pi {
        return Err(Error::NotIntegrable("dΛ ≠ Π".into()));
    }
    Ok(l)
}

/// Ratio `κ` with `dΛ = κΠ` for a supplied Lagrangian, if it is constant.
pub fn lagrangian_ratio(lambda_form: &Form, pi: &Form) -> Result<Option<Expr>> {
    let dl = lambda_form.d()?;
    let Some((m, c)) = pi.terms().iter().find(|(_, c)| !c.is_zero()) else {
        return Ok(dl.is_zero().then(|| Expr::one(pi.basis().ctx())));
    };
    let k = dl.coeff(*m).div(c)?;
    Ok((k.is_constant() && dl == pi.scale(&k)).then_some(k))
}

/// Runs the whole pipeline on an adapted coframe over a chart.
pub fn variational(cf: &AdaptedCoframe) -> Result<Variational> {
    let phi0 = phi0(cf)?;
    let lambda = integrating_factor(&phi0)?;
    let pi = poincare_cartan(cf, &lambda)?;
    let lagrangian = lagrangian(&pi)?;
    Ok(Variational { phi0, lambda, pi, lagrangian })
}
