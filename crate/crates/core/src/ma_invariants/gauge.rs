//! The structure group action on adapted coframes and the invariant tensors.

use super::coframe::AdaptedCoframe;
use super::InvariantReport;
use crate::error::{Error, Result};
use crate::exterior::linalg::Matrix;
use crate::exterior::Form;
use crate::symexpr::{Context, Expr};

/// `diag(a; A; B)` with `a = det A = det B`, or the pair swap `J`.
#[derive(Clone, Debug)]
pub enum GaugeElement {
    Diag { a: Expr, am: [[Expr; 2]; 2], bm: [[Expr; 2]; 2] },
    J,
}

fn det2(m: &[[Expr; 2]; 2]) -> Expr {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

impl GaugeElement {
    pub fn diag(am: [[Expr; 2]; 2], bm: [[Expr; 2]; 2]) -> Result<GaugeElement> {
        let a = det2(&am);
        if a.is_zero() || det2(&bm) != a {
            return Err(Error::Input("gauge element needs a = det A = det B ≠ 0".into()));
        }
        Ok(GaugeElement::Diag { a, am, bm })
    }

    /// The 5×5 matrix.
    pub fn matrix(&self, ctx: &Context) -> Matrix {
        let mut m = Matrix::zeros(ctx, 5, 5);
        match self {
            GaugeElement::Diag { a, am, bm } => {
                m.set(0, 0, a.clone());
                for i in 0..2 {
                    for j in 0..2 {
                        m.set(1 + i, 1 + j, am[i][j].clone());
                        m.set(3 + i, 3 + j, bm[i][j].clone());
                    }
                }
            }
            GaugeElement::J => {
                m.set(0, 0, Expr::one(ctx));
                for i in 0..2 {
                    m.set(1 + i, 3 + i, Expr::one(ctx));
                    m.set(3 + i, 1 + i, Expr::one(ctx));
                }
            }
        }
        m
    }
}

fn mat2(s: &[Expr; 4]) -> [[Expr; 2]; 2] {
    [[s[0].clone(), s[1].clone()], [s[2].clone(), s[3].clone()]]
}

fn mul2(x: &[[Expr; 2]; 2], y: &[[Expr; 2]; 2]) -> [[Expr; 2]; 2] {
    let e = |i: usize, j: usize| &(&x[i][0] * &y[0][j]) + &(&x[i][1] * &y[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Predicted `(S₁, S₂)` after the gauge: `a A⁻¹ S B` for diagonal elements,
/// `(−V₄ V₂; V₃ −V₁)` and `(V₈ −V₆; −V₇ V₅)` for `J`.
pub fn transformed_invariants(g: &GaugeElement, s1: &[Expr; 4], s2: &[Expr; 4]) -> Result<([Expr; 4], [Expr; 4])> {
    match g {
        GaugeElement::Diag { am, bm, .. } => {
            // a A⁻¹ = adj(A) since a = det A
            let adj = [[am[1][1].clone(), am[0][1].neg()], [am[1][0].neg(), am[0][0].clone()]];
            let f = |s: &[Expr; 4]| {
                let m = mul2(&mul2(&adj, &mat2(s)), bm);
                [m[0][0].clone(), m[0][1].clone(), m[1][0].clone(), m[1][1].clone()]
            };
            Ok((f(s1), f(s2)))
        }
        GaugeElement::J => Ok((
            [s1[3].neg(), s1[1].clone(), s1[2].clone(), s1[0].neg()],
            [s2[3].clone(), s2[1].neg(), s2[2].neg(), s2[0].clone()],
        )),
    }
}

/// Right action `ω ↦ g⁻¹ω`; the result is re-checked for 1-adaptation.
pub fn gauge_transform(cf: &AdaptedCoframe, g: &GaugeElement) -> Result<AdaptedCoframe> {
    let ctx = cf.parent.ctx();
    let ginv = g.matrix(ctx).inverse()?;
    let rows = ginv.mul(&Matrix::from_rows(cf.rows.clone()));
    let rows: Vec<Vec<Expr>> = (0..5).map(|i| rows.row(i)).collect();
    let out = AdaptedCoframe::from_rows(&cf.parent, rows, cf.mu.clone())?;
    if out.c.iter().any(|c| !c.is_zero()) {
        return Err(Error::NotAdapted("gauge transform needed a correction".into()));
    }
    Ok(out)
}

/// `Σ₁` as coefficients of symmetric products `ω^i ω^j` and `Σ₂` as a 2-form
/// on the parent basis.
///
/// `sigma1` follows the printed pattern `V₃ω¹ω³ − V₁ω¹ω⁴ + V₄ω²ω³ − V₂ω²ω⁴`,
/// which is gauge invariant only for the transposed `S₁`. `sigma1_invariant`
/// uses the pattern of `Σ₂`, `V₃ω¹ω³ + V₄ω¹ω⁴ − V₁ω²ω³ − V₂ω²ω⁴`, which is
/// invariant under `S ↦ a A⁻¹ S B`.
#[derive(Clone, Debug)]
pub struct SigmaTensors {
    pub sigma1: Vec<((usize, usize), Expr)>,
    pub sigma1_invariant: Vec<((usize, usize), Expr)>,
    pub sigma2: Form,
}

/// A symmetric product table as a symmetric matrix on the parent basis.
pub fn symmetric_matrix(cf: &AdaptedCoframe, terms: &[((usize, usize), Expr)]) -> Matrix {
    let n = cf.parent.dim();
    let ctx = cf.parent.ctx();
    let mut m = Matrix::zeros(ctx, n, n);
    let half = Expr::rational(ctx, 1, 2);
    for ((i, j), c) in terms {
        for k in 0..n {
            for l in 0..n {
                let t = &(&cf.rows[*i][k] * &cf.rows[*j][l]) + &(&cf.rows[*j][k] * &cf.rows[*i][l]);
                if t.is_zero() {
                    continue;
                }
                let v = m.get(k, l) + &(&(c * &t) * &half);
                m.set(k, l, v);
            }
        }
    }
    m
}

/// `Σ₁ = V₃ω¹ω³ − V₁ω¹ω⁴ + V₄ω²ω³ − V₂ω²ω⁴` as printed, its invariant
/// variant, and `Σ₂ = V₇ω¹∧ω³ − V₅ω²∧ω³ + V₈ω¹∧ω⁴ − V₆ω²∧ω⁴`.
pub fn sigma_tensors(cf: &AdaptedCoframe, rep: &InvariantReport) -> Result<SigmaTensors> {
    let [v1, v2, v3, v4] = rep.s1.clone();
    let [v5, v6, v7, v8] = rep.s2.clone();
    let keep = |t: Vec<((usize, usize), Expr)>| t.into_iter().filter(|(_, c)| !c.is_zero()).collect::<Vec<_>>();
    let sigma1 = keep(vec![((1, 3), v3.clone()), ((1, 4), v1.neg()), ((2, 3), v4.clone()), ((2, 4), v2.neg())]);
    let sigma1_invariant = keep(vec![((1, 3), v3), ((1, 4), v4), ((2, 3), v1.neg()), ((2, 4), v2.neg())]);
    let w = |i: usize, j: usize| cf.omega_form(i).wedge(&cf.omega_form(j));
    let sigma2 = w(1, 3)?.scale(&v7).sub(&w(2, 3)?.scale(&v5))?.add(&w(1, 4)?.scale(&v8))?.sub(&w(2, 4)?.scale(&v6))?;
    Ok(SigmaTensors { sigma1, sigma1_invariant, sigma2 })
}
