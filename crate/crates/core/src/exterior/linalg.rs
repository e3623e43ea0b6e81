//! Dense matrices over expressions with fraction-free elimination.

use crate::error::{Error, Result};
use crate::symexpr::{Context, Expr};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    pub fn zeros(ctx: &Context, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Expr::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &Context, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, Expr::one(ctx));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Expr) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Expr> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let ctx = self.data[0].ctx().clone();
        let mut m = Matrix::zeros(&ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Expr::zero(&ctx);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc = &acc + &(a * o.get(k, j));
                    }
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let ctx = self.data[0].ctx().clone();
        let mut m = Matrix::zeros(&ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() }))
    }

    /// Bareiss forward elimination. Returns the pivot columns and the final
    /// leading principal minor (the determinant for full-rank square input).
    fn bareiss(&mut self, limit_cols: usize) -> (Vec<usize>, Expr) {
        let ctx = self.data[0].ctx().clone();
        let mut prev = Expr::one(&ctx);
        let mut pivots = Vec::new();
        let mut sign = 1i64;
        let mut r = 0usize;
        for c in 0..limit_cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
                sign = -sign;
            }
            let piv = self.get(r, c).clone();
            for i in (r + 1)..self.rows {
                let f = self.get(i, c).clone();
                for j in 0..self.cols {
                    let v = &(&piv * self.get(i, j)) - &(&f * self.get(r, j));
                    self.set(i, j, v.div(&prev).expect("previous pivot is nonzero"));
                }
            }
            prev = piv;
            pivots.push(c);
            r += 1;
        }
        (pivots, prev.scale(sign))
    }

    pub fn rank(&self) -> usize {
        if self.data.is_empty() {
            return 0;
        }
        let mut m = self.clone();
        let cols = m.cols;
        m.bareiss(cols).0.len()
    }

    pub fn det(&self) -> Expr {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.cols;
        let (piv, d) = m.bareiss(n);
        if piv.len() < n {
            Expr::zero(self.data[0].ctx())
        } else {
            d
        }
    }

    /// Inverse by fraction-free elimination of `[M | I]` and back substitution.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.data[0].ctx().clone();
        let mut aug = Matrix::zeros(&ctx, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Expr::one(&ctx));
        }
        let (piv, _) = aug.bareiss(n);
        if piv.len() < n {
            return Err(Error::SingularChange);
        }
        let mut inv = Matrix::zeros(&ctx, n, n);
        for col in 0..n {
            for i in (0..n).rev() {
                let mut acc = aug.get(i, n + col).clone();
                for k in (i + 1)..n {
                    let a = aug.get(i, k);
                    if !a.is_zero() {
                        acc = &acc - &(a * inv.get(k, col));
                    }
                }
                inv.set(i, col, acc.div(aug.get(i, i))?);
            }
        }
        Ok(inv)
    }

    /// Reduced row echelon form with lowest-index pivots; returns pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv().expect("nonzero pivot");
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
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Basis of the right nullspace over the fraction field.
    pub fn nullspace(&self) -> Vec<Vec<Expr>> {
        let ctx = self.data.first().map(|e| e.ctx().clone());
        let Some(ctx) = ctx else {
            return Vec::new();
        };
        let (r, piv) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !piv.contains(c)) {
            let mut v = vec![Expr::zero(&ctx); self.cols];
            v[free] = Expr::one(&ctx);
            for (row, &pc) in piv.iter().enumerate() {
                v[pc] = r.get(row, free).neg();
            }
            out.push(v);
        }
        out
    }
}
