//! Floating point evaluation.

use std::collections::HashMap;
use std::sync::Arc;

use super::context::{AtomKind, Context};
use super::expr::Expr;
use super::poly::{Poly, MAX_VARS};
use crate::error::{Error, Result};

pub type FnImpl = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Numeric implementations for the elementary function names.
pub fn builtin_functions() -> HashMap<String, FnImpl> {
    let mut m: HashMap<String, FnImpl> = HashMap::new();
    m.insert("sin".into(), Arc::new(f64::sin));
    m.insert("cos".into(), Arc::new(f64::cos));
    m.insert("exp".into(), Arc::new(f64::exp));
    m.insert("log".into(), Arc::new(f64::ln));
    m.insert("atan".into(), Arc::new(f64::atan));
    m.insert("tan".into(), Arc::new(f64::tan));
    m.insert("sinh".into(), Arc::new(f64::sinh));
    m.insert("cosh".into(), Arc::new(f64::cosh));
    m
}

/// Values for coordinates and parameters plus implementations of opaque functions.
#[derive(Clone)]
pub struct Evaluator {
    ctx: Context,
    values: Vec<Option<f64>>,
    functions: HashMap<String, FnImpl>,
    root_signs: Vec<f64>,
}

impl Evaluator {
    pub fn new(ctx: &Context) -> Evaluator {
        Evaluator { ctx: ctx.clone(), values: vec![None; MAX_VARS], functions: builtin_functions(), root_signs: vec![1.0; MAX_VARS] }
    }

    pub fn set(&mut self, atom: usize, v: f64) -> &mut Self {
        self.values[atom] = Some(v);
        self
    }

    pub fn set_named(&mut self, name: &str, v: f64) -> Result<&mut Self> {
        let i = self.ctx.lookup(name).ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
        Ok(self.set(i, v))
    }

    pub fn function(&mut self, name: &str, f: FnImpl) -> &mut Self {
        self.functions.insert(name.to_string(), f);
        self
    }

    /// Selects the negative branch for a root atom.
    pub fn negate_root(&mut self, atom: usize) -> &mut Self {
        self.root_signs[atom] = -1.0;
        self
    }

    /// Values of every atom, resolving functions and roots in registration order.
    pub fn atom_values(&self) -> Result<Vec<f64>> {
        let atoms = self.ctx.atoms();
        let mut vals = vec![f64::NAN; MAX_VARS];
        for (i, a) in atoms.iter().enumerate() {
            if let Some(v) = self.values[i] {
                vals[i] = v;
                continue;
            }
            vals[i] = match &a.kind {
                AtomKind::Coordinate | AtomKind::Parameter => {
                    return Err(Error::Domain(format!("no value for `{}`", a.name)));
                }
                AtomKind::Function { fname, arg } => {
                    let x = eval_frac(&arg.0, &arg.1, &vals)?;
                    let f = self.functions.get(fname).ok_or_else(|| Error::Domain(format!("no implementation for `{fname}`")))?;
                    f(x)
                }
                AtomKind::Root => {
                    let s = a.square.as_ref().unwrap().eval_f64(&vals);
                    if s < 0.0 {
                        return Err(Error::Domain(format!("`{}` squares to {s}", a.name)));
                    }
                    self.root_signs[i] * s.sqrt()
                }
            };
        }
        Ok(vals)
    }

    pub fn eval(&self, e: &Expr) -> Result<f64> {
        let vals = self.atom_values()?;
        eval_frac(e.num(), e.den(), &vals)
    }
}

fn eval_frac(num: &Poly, den: &Poly, vals: &[f64]) -> Result<f64> {
    let d = den.eval_f64(vals);
    if !(d.abs() >= 1e-12) {
        return Err(Error::NearSingular(d));
    }
    let r = num.eval_f64(vals) / d;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Numeric("non-finite value".into()))
    }
}

impl Expr {
    /// Evaluates at a point given by atom names.
    pub fn eval_at(&self, point: &[(&str, f64)]) -> Result<f64> {
        let mut ev = Evaluator::new(self.ctx());
        for (n, v) in point {
            ev.set_named(n, *v)?;
        }
        ev.eval(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        let ctx = Context::with_coords(&["x", "y", "p", "q"]);
        let p = ctx.var("p").unwrap();
        let q = ctx.var("q").unwrap();
        let one = Expr::one(&ctx);
        let e = &(&one + &p.pow(2)) + &q.pow(2);
        assert_eq!(e.eval_at(&[("p", 1.0), ("q", 2.0), ("x", 0.0), ("y", 0.0)]).unwrap(), 6.0);
        let m = Expr::atom(&ctx, ctx.add_root("m", &(&one + &p.pow(2))).unwrap());
        assert_eq!(m.eval_at(&[("p", 0.0), ("q", 0.0), ("x", 0.0), ("y", 0.0)]).unwrap(), 1.0);
        let x = ctx.var("x").unwrap();
        let y = ctx.var("y").unwrap();
        let r = (&x + &y).inv().unwrap();
        let err = r.eval_at(&[("x", 1.0), ("y", -1.0), ("p", 0.0), ("q", 0.0)]);
        assert!(matches!(err, Err(Error::NearSingular(_))));
    }
}
