//! Abstract structure equations: involutivity, invariant loci, restriction
//! and invariants of adapted coframes on abstract frames.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{Basis, Form};
use crate::ma_invariants::{AdaptedCoframe, InvariantReport};
use crate::symexpr::gcd::gcd;
use crate::symexpr::Expr;

/// Outcome of `d² = 0` checks on an abstract basis.
#[derive(Clone, Debug)]
pub struct FrameCheckReport {
    /// `d(d e^i)` for every basis element, by element name.
    pub residuals: Vec<(String, Form)>,
    /// `d(d a)` for every aux scalar with a declared differential.
    pub aux_residuals: Vec<(String, Form)>,
    pub pass: bool,
    pub elapsed: Duration,
}

impl FrameCheckReport {
    /// Names of the checks with a nonzero residual.
    pub fn failures(&self) -> Vec<&str> {
        self.residuals.iter().chain(&self.aux_residuals).filter(|(_, f)| !f.is_zero()).map(|(n, _)| n.as_str()).collect()
    }
}

enum Check {
    Element(usize),
    Aux(Vec<Expr>),
}

/// Computes `d²` of every coframe element and every declared aux differential.
pub fn check_involutive(b: &Basis) -> Result<FrameCheckReport> {
    let start = Instant::now();
    let ctx = b.ctx();
    let mut checks: Vec<(String, Check)> = (0..b.dim()).map(|i| (b.names()[i].clone(), Check::Element(i))).collect();
    for (a, v) in b.differentials() {
        checks.push((ctx.name(*a), Check::Aux(v.clone())));
    }
    let results: Vec<Result<(String, bool, Form)>> = checks
        .into_par_iter()
        .map(|(name, c)| match c {
            Check::Element(i) => Ok((name, false, b.d_element(i).d()?)),
            Check::Aux(v) => Ok((name, true, Form::one_form(b, v).d()?)),
        })
        .collect();
    let mut residuals = Vec::new();
    let mut aux_residuals = Vec::new();
    for r in results {
        let (name, aux, f) = r?;
        if aux {
            aux_residuals.push((name, f));
        } else {
            residuals.push((name, f));
        }
    }
    let pass = residuals.iter().chain(&aux_residuals).all(|(_, f)| f.is_zero());
    Ok(FrameCheckReport { residuals, aux_residuals, pass, elapsed: start.elapsed() })
}

/// True when every coefficient of `d f` is divisible by `f`, so that the
/// locus `f = 0` is preserved by the frame.
pub fn check_invariant_locus(b: &Basis, f: &Expr) -> Result<bool> {
    if f.is_zero() {
        return Ok(true);
    }
    let df = Form::scalar(b, f.clone()).d()?;
    for c in df.terms().values() {
        let q = c.div(f)?;
        if !gcd(q.den(), f.num()).is_constant() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eliminates aux scalars by substitution after checking that each declared
/// differential agrees with `d` of its substitute on the restricted locus.
pub fn restrict_locus(b: &Basis, subs: &[(usize, Expr)]) -> Result<Basis> {
    let ctx = b.ctx();
    let subs: Vec<(usize, Expr)> = subs.iter().filter(|(a, e)| *e != Expr::atom(ctx, *a)).cloned().collect();
    if subs.is_empty() {
        return Ok(b.clone());
    }
    let apply = |e: &Expr| e.subs(&subs);
    for (a, e) in &subs {
        if e.depends_on(*a) {
            return Err(Error::InconsistentSubstitution(format!("`{}` appears in its own substitute", ctx.name(*a))));
        }
        let declared = b.differential_of(*a).ok_or_else(|| Error::InconsistentSubstitution(format!("`{}` has no declared differential", ctx.name(*a))))?;
        let de = Form::scalar(b, e.clone()).d()?.components();
        let mut residual = Vec::new();
        for (k, (x, y)) in de.iter().zip(declared).enumerate() {
            let r = &apply(x)? - &apply(y)?;
            if !r.is_zero() {
                residual.push(format!("{}: {r}", b.names()[k]));
            }
        }
        if !residual.is_empty() {
            return Err(Error::InconsistentSubstitution(format!("d{} mismatch: {}", ctx.name(*a), residual.join(", "))));
        }
    }
    let mut dforms = Vec::with_capacity(b.dim());
    for i in 0..b.dim() {
        let mut m = BTreeMap::new();
        for (mask, c) in b.d_element(i).terms() {
            let v = apply(c)?;
            if !v.is_zero() {
                m.insert(*mask, v);
            }
        }
        dforms.push(m);
    }
    let mut diffs = Vec::new();
    for (a, v) in b.differentials() {
        if subs.iter().any(|(s, _)| s == a) {
            continue;
        }
        diffs.push((*a, v.iter().map(apply).collect::<Result<Vec<_>>>()?));
    }
    Basis::frame(ctx, b.names().to_vec(), dforms, diffs)
}

/// Invariants `S₁, S₂` of five 1-forms on an abstract frame. The forms must
/// be 1-adapted: `dω⁰ ≡ ω¹∧ω² + ω³∧ω⁴` modulo `ω⁰` and the completing directions.
pub fn abstract_invariants(b: &Basis, rows: Vec<Vec<Expr>>, seed: u64, samples: usize) -> Result<(AdaptedCoframe, InvariantReport)> {
    let cf = AdaptedCoframe::from_rows(b, rows, None)?;
    let rep = InvariantReport::from_coframe(&cf, seed, samples)?;
    Ok((cf, rep))
}

/// True when `d a = 0` identically.
pub fn check_exact(a: &Form) -> Result<bool> {
    Ok(a.d()?.is_zero())
}

/// A single-entry perturbation of a structure table.
#[derive(Clone, Debug, PartialEq)]
pub struct Mutation {
    /// `d e^i` receives `delta` on `e^j∧e^k`.
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub delta: Expr,
}

/// The frame with one structure coefficient shifted.
pub fn mutate(b: &Basis, m: &Mutation) -> Result<Basis> {
    let ctx = b.ctx();
    let Some((s, mask)) = crate::exterior::mask_of(&[m.j, m.k]) else {
        return Err(Error::Input("mutation needs j ≠ k".into()));
    };
    let mut dforms: Vec<BTreeMap<u32, Expr>> = (0..b.dim()).map(|i| b.d_element(i).terms().clone()).collect();
    let slot = dforms[m.i].entry(mask).or_insert_with(|| Expr::zero(ctx));
    *slot = &*slot + &m.delta.scale(s as i64);
    dforms[m.i].retain(|_, c| !c.is_zero());
    Basis::frame(ctx, b.names().to_vec(), dforms, b.differentials().to_vec())
}
