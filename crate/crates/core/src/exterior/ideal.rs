//! Algebraic ideals generated by 1-forms.

use std::collections::BTreeSet;

use super::linalg::Matrix;
use super::{Basis, Form};
use crate::error::{Error, Result};
use crate::symexpr::Expr;

/// Pfaffian system given by independent 1-form generators.
#[derive(Clone, Debug)]
pub struct Pfaffian {
    pub gens: Vec<Form>,
}

impl Pfaffian {
    pub fn new(gens: Vec<Form>) -> Result<Pfaffian> {
        check_gens(&gens)?;
        Ok(Pfaffian { gens })
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }
}

fn gen_matrix(gens: &[Form]) -> Result<(Basis, Matrix)> {
    let b = gens.first().ok_or_else(|| Error::Input("empty generator list".into()))?.basis().clone();
    for g in gens {
        if *g.basis() != b {
            return Err(Error::BasisMismatch);
        }
        if g.degree() != 1 && !g.is_zero() {
            return Err(Error::Input("generators must be 1-forms".into()));
        }
    }
    Ok((b, Matrix::from_rows(gens.iter().map(|g| g.components()).collect())))
}

fn check_gens(gens: &[Form]) -> Result<()> {
    let (_, m) = gen_matrix(gens)?;
    if m.rank() < gens.len() {
        return Err(Error::DependentGenerators);
    }
    Ok(())
}

/// Row-reduces generator coefficients. Each row's pivot is its lowest-index
/// constant entry when one exists, else its lowest-index nonzero entry.
fn eliminate(m: &Matrix) -> Result<(Matrix, Vec<usize>)> {
    let mut m = m.clone();
    let mut piv = Vec::new();
    for r in 0..m.rows {
        let nz: Vec<usize> = (0..m.cols).filter(|&c| !m.get(r, c).is_zero()).collect();
        let c = match nz.iter().find(|&&c| m.get(r, c).is_constant()) {
            Some(&c) => c,
            None => *nz.first().ok_or(Error::DependentGenerators)?,
        };
        let inv = m.get(r, c).inv()?;
        for j in 0..m.cols {
            let v = m.get(r, j) * &inv;
            m.set(r, j, v);
        }
        for i in 0..m.rows {
            if i == r || m.get(i, c).is_zero() {
                continue;
            }
            let f = m.get(i, c).clone();
            for j in 0..m.cols {
                let v = m.get(i, j) - &(&f * m.get(r, j));
                m.set(i, j, v);
            }
        }
        piv.push(c);
    }
    Ok((m, piv))
}

/// Normal form of `a` modulo the ideal generated by `gens`: the pivot element
/// of every generator is eliminated in favour of the remaining elements.
pub fn reduce_mod(a: &Form, gens: &[Form]) -> Result<Form> {
    if gens.is_empty() {
        return Ok(a.clone());
    }
    let (b, m) = gen_matrix(gens)?;
    if *a.basis() != b {
        return Err(Error::BasisMismatch);
    }
    let (r, piv) = eliminate(&m)?;
    let n = b.dim();
    let ctx = b.ctx();
    let mut images: Vec<Vec<Expr>> = (0..n)
        .map(|j| {
            let mut v = vec![Expr::zero(ctx); n];
            v[j] = Expr::one(ctx);
            v
        })
        .collect();
    for (row, &pc) in piv.iter().enumerate() {
        let mut v = vec![Expr::zero(ctx); n];
        for (l, vl) in v.iter_mut().enumerate() {
            if !piv.contains(&l) {
                *vl = r.get(row, l).neg();
            }
        }
        images[pc] = v;
    }
    Ok(a.substitute_elements(&images))
}

/// First derived system: combinations `sum a_i g_i` whose derivative lies in the ideal.
pub fn derived_system(sys: &Pfaffian) -> Result<Pfaffian> {
    let gens = &sys.gens;
    let mut reduced = Vec::with_capacity(gens.len());
    let mut keys = BTreeSet::new();
    for g in gens {
        let w = reduce_mod(&g.d()?, gens)?;
        keys.extend(w.terms().keys().copied());
        reduced.push(w);
    }
    if keys.is_empty() {
        return Ok(sys.clone());
    }
    let rows: Vec<Vec<Expr>> = keys.iter().map(|k| reduced.iter().map(|w| w.coeff(*k)).collect()).collect();
    let ns = Matrix::from_rows(rows).nullspace();
    let mut out = Vec::new();
    for v in ns {
        let mut acc = Form::zero(gens[0].basis(), 1);
        for (a, g) in v.iter().zip(gens) {
            if !a.is_zero() {
                acc = acc.add(&g.scale(a))?;
            }
        }
        out.push(acc);
    }
    Ok(Pfaffian { gens: out })
}

/// Ranks of the derived flag until it stabilizes.
pub fn derived_flag(sys: &Pfaffian) -> Result<Vec<usize>> {
    let mut ranks = vec![sys.rank()];
    let mut cur = sys.clone();
    while cur.rank() > 0 {
        let next = derived_system(&cur)?;
        if next.rank() == cur.rank() {
            break;
        }
        ranks.push(next.rank());
        cur = next;
    }
    Ok(ranks)
}
