//! 1-adapted coframes over an arbitrary parent basis and the V-extraction.

use crate::error::{Error, Result};
use crate::exterior::linalg::Matrix;
use crate::exterior::{Basis, CoframeChange, Form};
use crate::symexpr::Expr;

/// Five 1-forms `ω⁰..ω⁴` on a parent basis, completed to a full basis when
/// the parent has more than five elements.
#[derive(Clone, Debug)]
pub struct AdaptedCoframe {
    pub parent: Basis,
    /// Basis whose first five elements are `ω⁰..ω⁴`.
    pub omega: Basis,
    /// Corrections `c¹..c⁴` applied to the input rows.
    pub c: [Expr; 4],
    /// Coefficient rows of `ω⁰..ω⁴` on the parent basis.
    pub rows: Vec<Vec<Expr>>,
    /// Root of the discriminant used to build the rows, if any.
    pub mu: Option<Expr>,
}

/// Appends unit rows until the matrix has full rank.
fn complete(rows: &[Vec<Expr>], n: usize) -> Result<Vec<Vec<Expr>>> {
    let ctx = rows[0][0].ctx().clone();
    let mut out = rows.to_vec();
    if Matrix::from_rows(out.clone()).rank() < out.len() {
        return Err(Error::SingularChange);
    }
    for k in 0..n {
        if out.len() == n {
            break;
        }
        let mut e = vec![Expr::zero(&ctx); n];
        e[k] = Expr::one(&ctx);
        let mut trial = out.clone();
        trial.push(e);
        if Matrix::from_rows(trial.clone()).rank() == trial.len() {
            out = trial;
        }
    }
    if out.len() != n {
        return Err(Error::SingularChange);
    }
    Ok(out)
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| if i < 5 { format!("w{i}") } else { format!("e{i}") }).collect()
}

/// `T^i_{jk}` of a basis: coefficient of `e^j∧e^k` in `d e^i` (antisymmetric).
pub fn torsion(b: &Basis, i: usize, j: usize, k: usize) -> Expr {
    b.d_element(i).coeff_of(&[j, k])
}

impl AdaptedCoframe {
    /// Builds the coframe from five rows on `parent`, applying the correction
    /// `ω^i = η^i − c^i η⁰` with `c = (T¹₃₄, T²₃₄, T³₁₂, T⁴₁₂)`, then checks
    /// `dω⁰ ≡ ω¹∧ω² + ω³∧ω⁴ mod ω⁰` on the span of `ω¹..ω⁴`.
    pub fn from_rows(parent: &Basis, eta: Vec<Vec<Expr>>, mu: Option<Expr>) -> Result<AdaptedCoframe> {
        let n = parent.dim();
        if eta.len() != 5 || eta.iter().any(|r| r.len() != n) || n < 5 {
            return Err(Error::Input("an adapted coframe needs five 1-forms".into()));
        }
        let full = complete(&eta, n)?;
        let b_eta = Basis::derived(parent, CoframeChange::new(Matrix::from_rows(full.clone()))?, names(n))?;
        let c = [torsion(&b_eta, 1, 3, 4), torsion(&b_eta, 2, 3, 4), torsion(&b_eta, 3, 1, 2), torsion(&b_eta, 4, 1, 2)];
        let mut rows = full;
        for i in 1..5 {
            if c[i - 1].is_zero() {
                continue;
            }
            let r: Vec<Expr> = (0..n).map(|k| &rows[i][k] - &(&c[i - 1] * &rows[0][k])).collect();
            rows[i] = r;
        }
        let omega = if c.iter().all(|x| x.is_zero()) {
            b_eta
        } else {
            Basis::derived(parent, CoframeChange::new(Matrix::from_rows(rows.clone()))?, names(n))?
        };
        rows.truncate(5);
        let cf = AdaptedCoframe { parent: parent.clone(), omega, c, rows, mu };
        cf.check_adapted()?;
        Ok(cf)
    }

    /// `ω^i` as a form on the parent basis.
    pub fn omega_form(&self, i: usize) -> Form {
        Form::one_form(&self.parent, self.rows[i].clone())
    }

    /// Structure function `T̃^i_{jk}` on the corrected coframe.
    pub fn t(&self, i: usize, j: usize, k: usize) -> Expr {
        torsion(&self.omega, i, j, k)
    }

    fn check_adapted(&self) -> Result<()> {
        for j in 1..5 {
            for k in (j + 1)..5 {
                let want = if (j, k) == (1, 2) || (j, k) == (3, 4) { 1 } else { 0 };
                let have = self.t(0, j, k);
                if have != Expr::int(have.ctx(), want) {
                    return Err(Error::NotAdapted(format!("dω⁰ has coefficient {have} on ω{j}∧ω{k}")));
                }
            }
        }
        Ok(())
    }

    /// `V₁..V₈` from the corrected structure functions.
    pub fn v(&self) -> [Expr; 8] {
        let t = |i, j, k| self.t(i, j, k);
        let half = |a: Expr| a.div(&Expr::int(a.ctx(), 2)).expect("nonzero");
        [
            half(&t(1, 0, 3) - &t(4, 0, 2)),
            half(&t(1, 0, 4) + &t(3, 0, 2)),
            half(&t(2, 0, 3) + &t(4, 0, 1)),
            half(&t(2, 0, 4) - &t(3, 0, 1)),
            half(&t(1, 0, 3) + &t(4, 0, 2)),
            half(&t(1, 0, 4) - &t(3, 0, 2)),
            half(&t(2, 0, 3) - &t(4, 0, 1)),
            half(&t(2, 0, 4) + &t(3, 0, 1)),
        ]
    }

    /// `dω⁰ − ω¹∧ω² − ω³∧ω⁴` reduced modulo `ω⁰`, on the coframe basis.
    pub fn adaptation_residual(&self) -> Result<Form> {
        let b = &self.omega;
        let w12 = b.element(1).wedge(&b.element(2))?;
        let w34 = b.element(3).wedge(&b.element(4))?;
        let r = b.d_element(0).sub(&w12)?.sub(&w34)?;
        crate::exterior::ideal::reduce_mod(&r, &[b.element(0)])
    }
}
