//! Numeric Bäcklund step for sine-Gordon `u_xy = ½ sin 2u`:
//! `v_x = u_x − λ sin(u+v)`, `v_y = −u_y + λ⁻¹ sin(u−v)`, integrated by RK4.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};

type Field = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A seed solution with its first derivatives.
pub struct Seed {
    pub u: Field,
    pub ux: Field,
    pub uy: Field,
    /// True for the vacuum `u ≡ 0`.
    pub is_zero: bool,
}

impl Seed {
    pub fn zero() -> Seed {
        Seed { u: Box::new(|_, _| 0.0), ux: Box::new(|_, _| 0.0), uy: Box::new(|_, _| 0.0), is_zero: true }
    }

    /// The kink `2·atan(c·exp(−λx − y/λ))`.
    pub fn kink(lambda: f64, c: f64) -> Seed {
        let e = move |x: f64, y: f64| c * (-lambda * x - y / lambda).exp();
        // d/ds 2 atan(e) = 2 e' / (1 + e²) with e' = k e
        let d = move |k: f64| move |x: f64, y: f64| {
            let v = e(x, y);
            2.0 * k * v / (1.0 + v * v)
        };
        Seed { u: Box::new(move |x, y| 2.0 * e(x, y).atan()), ux: Box::new(d(-lambda)), uy: Box::new(d(-1.0 / lambda)), is_zero: false }
    }
}

/// Closed form of the transformed vacuum: `2·atan(C·exp(−λx − y/λ))` with `C = tan(v₀/2)`
/// at the origin of the grid.
pub fn vacuum_soliton(lambda: f64, v0: f64, x: f64, y: f64) -> f64 {
    2.0 * ((v0 / 2.0).tan() * (-lambda * x - y / lambda).exp()).atan()
}

#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }
}

#[derive(Clone, Debug)]
pub struct SolitonRun {
    pub grid: Grid,
    /// `v[i][j]` at `(x_i, y_j)`.
    pub v: Vec<Vec<f64>>,
    /// Max of `|v_xy − ½ sin 2v|` by fourth-order centered differences.
    pub pde_residual: f64,
    /// Max difference between the x-then-y and y-then-x integrations.
    pub compatibility: f64,
    /// Max difference from the closed form, for the vacuum seed.
    pub closed_form_error: Option<f64>,
    /// Max of `|u_xy − ½ sin 2u|` for the seed on the grid.
    pub seed_residual: f64,
    pub elapsed: Duration,
}

impl SolitonRun {
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "x,y,v")?;
        for (i, col) in self.v.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                writeln!(w, "{:.6},{:.6},{:.12e}", self.grid.x(i), self.grid.y(j), v)?;
            }
        }
        Ok(())
    }
}

fn rk4(f: impl Fn(f64, f64) -> f64, t0: f64, v0: f64, h: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut t, mut v) = (t0, v0);
    out.push(v);
    for _ in 1..n {
        let k1 = f(t, v);
        let k2 = f(t + h / 2.0, v + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, v + h / 2.0 * k2);
        let k4 = f(t + h, v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        out.push(v);
    }
    out
}

/// Integrates along `x` first, then up every column.
fn x_then_y(seed: &Seed, lambda: f64, v0: f64, g: &Grid) -> Vec<Vec<f64>> {
    let fx = |y: f64| move |x: f64, v: f64| (seed.ux)(x, y) - lambda * ((seed.u)(x, y) + v).sin();
    let row = rk4(fx(g.y0), g.x0, v0, g.hx, g.nx);
    (0..g.nx)
        .into_par_iter()
        .map(|i| {
            let x = g.x(i);
            rk4(|y, v| -(seed.uy)(x, y) + ((seed.u)(x, y) - v).sin() / lambda, g.y0, row[i], g.hy, g.ny)
        })
        .collect()
}

/// Integrates along `y` first, then along every row.
fn y_then_x(seed: &Seed, lambda: f64, v0: f64, g: &Grid) -> Vec<Vec<f64>> {
    let col = rk4(|y, v| -(seed.uy)(g.x0, y) + ((seed.u)(g.x0, y) - v).sin() / lambda, g.y0, v0, g.hy, g.ny);
    let rows: Vec<Vec<f64>> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let y = g.y(j);
            rk4(|x, v| (seed.ux)(x, y) - lambda * ((seed.u)(x, y) + v).sin(), g.x0, col[j], g.hx, g.nx)
        })
        .collect();
    (0..g.nx).map(|i| (0..g.ny).map(|j| rows[j][i]).collect()).collect()
}

const W: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// Max of `|f_xy − ½ sin 2f|` over interior points with a two-cell margin.
fn sg_residual(f: &[Vec<f64>], g: &Grid) -> f64 {
    if g.nx < 5 || g.ny < 5 {
        return 0.0;
    }
    (2..g.nx - 2)
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in 2..g.ny - 2 {
                let mut s = 0.0;
                for (a, wa) in W.iter().enumerate() {
                    for (b, wb) in W.iter().enumerate() {
                        s += wa * wb * f[i + a - 2][j + b - 2];
                    }
                }
                let fxy = s / (144.0 * g.hx * g.hy);
                m = m.max((fxy - 0.5 * (2.0 * f[i][j]).sin()).abs());
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// One Bäcklund step from `seed`, starting from `v₀` at the grid origin.
pub fn soliton_propagate(seed: &Seed, lambda: f64, v0: f64, grid: Grid, seed_tol: f64) -> Result<SolitonRun> {
    let start = Instant::now();
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Domain("λ must be a nonzero number".into()));
    }
    if grid.nx < 2 || grid.ny < 2 || grid.hx <= 0.0 || grid.hy <= 0.0 {
        return Err(Error::Input("the grid needs at least 2×2 points and positive steps".into()));
    }
    let u: Vec<Vec<f64>> = (0..grid.nx).map(|i| (0..grid.ny).map(|j| (seed.u)(grid.x(i), grid.y(j))).collect()).collect();
    let seed_residual = sg_residual(&u, &grid);
    if seed_residual > seed_tol {
        return Err(Error::Domain(format!("the seed misses u_xy = sin(2u)/2 by {seed_residual:e}")));
    }
    let v = x_then_y(seed, lambda, v0, &grid);
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite value in the integration".into()));
    }
    let compatibility = max_diff(&v, &y_then_x(seed, lambda, v0, &grid));
    let pde_residual = sg_residual(&v, &grid);
    let closed_form_error = seed.is_zero.then(|| {
        let exact: Vec<Vec<f64>> = (0..grid.nx).map(|i| (0..grid.ny).map(|j| vacuum_soliton(lambda, v0, grid.x(i) - grid.x0, grid.y(j) - grid.y0)).collect()).collect();
        max_diff(&v, &exact)
    });
    Ok(SolitonRun { grid, v, pde_residual, compatibility, closed_form_error, seed_residual, elapsed: start.elapsed() })
}
