//! Primitives of closed forms on a chart.
//!
//! Integration proceeds one coordinate at a time: the part of the form
//! containing `dx_i` is integrated in `x_i`, its derivative subtracted, and the
//! remainder (free of `dx_i` and, by closedness, of `x_i`) handled by the next
//! coordinate.

use super::{wedge_sign, Basis, Form};
use crate::error::{Error, Result};
use super::algebraic::integrate;
use crate::symexpr::{AtomKind, Expr};

fn chart_coords(b: &Basis) -> Result<Vec<usize>> {
    b.coords().map(|c| c.to_vec()).ok_or_else(|| Error::Input("primitives need a chart basis".into()))
}

/// Default base point: the origin, shifted by +1 along every coordinate of a
/// polynomial that vanishes there.
pub fn default_base(b: &Basis, singular: &[Expr]) -> Result<Vec<(usize, Expr)>> {
    let ctx = b.ctx();
    let coords = chart_coords(b)?;
    let mut vals: Vec<i64> = vec![0; coords.len()];
    for _ in 0..16 {
        let point: Vec<(usize, Expr)> = coords.iter().zip(&vals).map(|(c, v)| (*c, Expr::int(ctx, *v))).collect();
        let mut bad = None;
        for s in singular {
            match s.subs(&point) {
                Ok(v) if v.is_zero() => {
                    bad = Some(s.clone());
                    break;
                }
                _ => {}
            }
        }
        let Some(s) = bad else {
            return Ok(point);
        };
        for (i, c) in coords.iter().enumerate() {
            if s.depends_on(*c) {
                vals[i] += 1;
            }
        }
    }
    Err(Error::NoSamplePoint)
}

/// Function `F` with `dF = a` for a closed 1-form on a chart, normalized so
/// that its rational part vanishes and its log arguments equal one at `base`.
pub fn potential(a: &Form, base: Option<&[(usize, Expr)]>) -> Result<Expr> {
    let b = a.basis();
    let ctx = b.ctx();
    if a.degree() != 1 && !a.is_zero() {
        return Err(Error::Input("potential needs a 1-form".into()));
    }
    if !a.d()?.is_zero() {
        return Err(Error::NotClosed("form is not closed".into()));
    }
    let coords = chart_coords(b)?;
    let mut f = Expr::zero(ctx);
    for (i, &x) in coords.iter().enumerate() {
        let g = &a.coeff(1 << i) - &f.diff(x)?;
        if !g.is_zero() {
            f = &f + &integrate(&g, x)?;
        }
    }
    if Form::scalar(b, f.clone()).d()? != *a {
        return Err(Error::NotIntegrable("potential does not reproduce the form".into()));
    }
    let singular: Vec<Expr> = a.terms().values().map(|c| c.den_expr()).chain(log_args(&f).into_iter().map(|(_, g)| g)).collect();
    let owned;
    let base = match base {
        Some(p) => p,
        None => {
            owned = default_base(b, &singular)?;
            &owned
        }
    };
    normalize(&f, base)
}

fn log_args(f: &Expr) -> Vec<(usize, Expr)> {
    let ctx = f.ctx();
    let mut out = Vec::new();
    for k in 0..ctx.len() {
        if !f.depends_on(k) {
            continue;
        }
        if let AtomKind::Function { fname, arg } = ctx.atom(k).kind {
            if fname == "log" {
                if let Ok(g) = Expr::from_polys(ctx, arg.0, arg.1) {
                    out.push((k, g));
                }
            }
        }
    }
    out
}

/// Fixes the additive constant of a potential at `base`.
fn normalize(f: &Expr, base: &[(usize, Expr)]) -> Result<Expr> {
    let ctx = f.ctx();
    let mut out = f.clone();
    for (k, g) in log_args(f) {
        let c = f.diff(k)?;
        if !c.is_constant() {
            continue;
        }
        let Ok(g0) = g.subs(base) else { continue };
        if g0.is_zero() || !g0.is_constant() || g0.is_one() {
            continue;
        }
        let scaled = g.div(&g0)?;
        let kk = ctx.function("log", &scaled)?;
        ctx.set_derivative(kk, &scaled.inv()?)?;
        out = out.subs_atom(k, &Expr::atom(ctx, kk))?;
    }
    // the rational part is what remains with every transcendental atom set to zero
    let mut zero_atoms: Vec<(usize, Expr)> = base.to_vec();
    for k in 0..ctx.len() {
        if out.depends_on(k) && matches!(ctx.atom(k).kind, AtomKind::Function { .. }) {
            zero_atoms.push((k, Expr::zero(ctx)));
        }
    }
    if let Ok(r0) = out.subs(&zero_atoms) {
        if r0.is_constant() {
            out = &out - &r0;
        }
    }
    Ok(out)
}

fn primitive_in_order(a: &Form, order: &[usize], coords: &[usize]) -> Result<Form> {
    let b = a.basis();
    let mut rem = a.clone();
    let mut acc = Form::zero(b, a.degree() - 1);
    for &i in order {
        let x = coords[i];
        let bit = 1u32 << i;
        let mut items = Vec::new();
        for (m, c) in rem.terms() {
            if m & bit == 0 {
                continue;
            }
            let rest = m & !bit;
            // e^m = s e^i ∧ e^rest
            let s = wedge_sign(bit, rest);
            items.push((rest, integrate(c, x)?.scale(s)));
        }
        if items.is_empty() {
            continue;
        }
        let bi = Form::from_map(b, a.degree() - 1, items.into_iter().filter(|(_, c)| !c.is_zero()).collect());
        rem = rem.sub(&bi.d()?)?;
        acc = acc.add(&bi)?;
    }
    if !rem.is_zero() {
        return Err(Error::NotClosed("form is not closed".into()));
    }
    Ok(acc)
}

fn permutations(xs: &[usize]) -> Vec<Vec<usize>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Form `b` with `db = a` for a closed form of positive degree on a chart.
///
/// Several coordinate orders are tried when an integral has no closed form.
pub fn poincare_primitive(a: &Form) -> Result<Form> {
    let b = a.basis();
    if a.degree() == 0 {
        return Err(Error::Input("primitive of a 0-form".into()));
    }
    if a.degree() < b.dim() && !a.d()?.is_zero() {
        return Err(Error::NotClosed("form is not closed".into()));
    }
    let coords = chart_coords(b)?;
    let n = coords.len();
    let mut orders: Vec<Vec<usize>> = Vec::new();
    // coordinates absent from every coefficient first, then each order of the rest
    let (free, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| a.terms().values().all(|c| !c.depends_on(coords[i])));
    if rest.len() <= 4 {
        for perm in permutations(&rest) {
            orders.push(free.iter().cloned().chain(perm).collect());
        }
    }
    for r in 0..n {
        let fwd: Vec<usize> = (0..n).map(|i| (i + r) % n).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        orders.push(fwd);
        orders.push(rev);
    }
    let mut last = Error::NotIntegrable("no coordinate order worked".into());
    for ord in orders {
        match primitive_in_order(a, &ord, &coords) {
            Ok(p) => {
                if p.d()? == *a {
                    return Ok(p);
                }
            }
            Err(e @ Error::NotIntegrable(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}
