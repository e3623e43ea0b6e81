//! Deterministic text rendering.

use std::fmt::{self, Write};

use super::context::Context;
use super::expr::Expr;
use super::int::Int;
use super::poly::{Mono, Poly};

fn mono_str(m: &Mono, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}

/// Terms in descending graded-lexicographic order, atoms by registration order.
pub fn poly_to_string(p: &Poly, names: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<&(Mono, Int)> = p.terms().iter().collect();
    terms.sort_by(|a, b| b.0.cmp_grlex(&a.0));
    let mut out = String::new();
    for (k, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            write!(out, "{abs}").unwrap();
        } else if abs.is_one() {
            out.push_str(&mono_str(m, names));
        } else {
            write!(out, "{abs}*{}", mono_str(m, names)).unwrap();
        }
    }
    out
}

pub(crate) fn names(ctx: &Context) -> Vec<String> {
    ctx.atoms().into_iter().map(|a| a.name).collect()
}

pub fn expr_to_string(e: &Expr) -> String {
    let names = names(e.ctx());
    let num = poly_to_string(e.num(), &names);
    if e.den().is_one() {
        return num;
    }
    let den = poly_to_string(e.den(), &names);
    let num = if e.num().len() > 1 { format!("({num})") } else { num };
    let den = if e.den().len() > 1 || den.contains('*') { format!("({den})") } else { den };
    format!("{num} / {den}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr_to_string(self))
    }
}
