//! Rank-1 Bäcklund transformations: the pencil invariants `μ, ε`, the
//! rank-1 conditions, Euler-Lagrange obstructions and a numeric soliton demo.

pub mod obstruction;
pub mod soliton;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exterior::{reduce_mod, Basis, Form, Matrix};
use crate::symexpr::eval::Evaluator;
use crate::symexpr::sample::Sampler;
use crate::symexpr::Expr;

pub use obstruction::{el_obstructions, LiftingData, ObstructionReport, SpecialType, Verdict};
pub use soliton::{soliton_propagate, Grid, Seed, SolitonRun};

/// A 6-dimensional `N` with the pulled-back contact forms and 2-forms of two
/// Monge-Ampère systems, optionally with the coordinate maps of both projections.
#[derive(Clone, Debug)]
pub struct BacklundCandidate {
    pub basis: Basis,
    pub theta: Form,
    pub theta_bar: Form,
    pub omega: Option<Form>,
    pub omega_bar: Option<Form>,
    /// Factor coordinates as functions on `N`, five per projection.
    pub projections: Option<[Vec<Expr>; 2]>,
}

impl BacklundCandidate {
    pub fn new(theta: Form, theta_bar: Form) -> Result<BacklundCandidate> {
        if theta.basis() != theta_bar.basis() {
            return Err(Error::BasisMismatch);
        }
        if theta.degree() != 1 || theta_bar.degree() != 1 {
            return Err(Error::Input("contact forms must be 1-forms".into()));
        }
        Ok(BacklundCandidate { basis: theta.basis().clone(), theta, theta_bar, omega: None, omega_bar: None, projections: None })
    }

    pub fn with_omegas(mut self, omega: Form, omega_bar: Form) -> Result<BacklundCandidate> {
        if *omega.basis() != self.basis || *omega_bar.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        self.omega = Some(omega);
        self.omega_bar = Some(omega_bar);
        Ok(self)
    }

    pub fn with_projections(mut self, p1: Vec<Expr>, p2: Vec<Expr>) -> Result<BacklundCandidate> {
        if p1.len() != 5 || p2.len() != 5 {
            return Err(Error::Input("each projection needs five coordinate functions".into()));
        }
        self.projections = Some([p1, p2]);
        Ok(self)
    }

    fn contact(&self) -> [Form; 2] {
        [self.theta.clone(), self.theta_bar.clone()]
    }

    /// Reduces a 2-form modulo `θ, θ̄`.
    fn reduce(&self, f: &Form) -> Result<Form> {
        reduce_mod(f, &self.contact())
    }
}

/// Rewrites function atoms by the given identities in every coefficient.
pub fn apply_identities(f: &Form, rules: &[(usize, Expr)]) -> Result<Form> {
    if rules.is_empty() {
        return Ok(f.clone());
    }
    f.map_coeffs(|c| c.subs(rules))
}

/// Numeric check of `lhs = rhs` at `n` sample points.
pub fn verify_identity(lhs: &Expr, rhs: &Expr, seed: u64, n: usize, tol: f64) -> Result<bool> {
    let mut s = Sampler::new(lhs.ctx(), seed).guards(&[lhs.clone(), rhs.clone()]);
    for ev in s.points(n)? {
        let (a, b) = (ev.eval(lhs)?, ev.eval(rhs)?);
        if (a - b).abs() > tol * (1.0 + a.abs().max(b.abs())) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pencil invariants of a candidate.
#[derive(Clone, Debug)]
pub struct MuEpsilon {
    pub epsilon: i32,
    /// `εμ⁴`, the root ratio of the pencil with modulus at least one.
    pub rho: f64,
    pub mu: f64,
    /// `εμ⁴` exactly, when it is rational.
    pub rho_exact: Option<Expr>,
    /// `r = ρ + 1/ρ = 4B²/(AC) − 2` from `(dθ̄ + λdθ)² = (C + 2λB + λ²A)·vol`.
    pub r: Expr,
    pub pencil: [Expr; 3],
}

fn two_form_rank(forms: &[&Form]) -> usize {
    let masks: BTreeSet<u32> = forms.iter().flat_map(|f| f.terms().keys().copied()).collect();
    if masks.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Expr>> = forms.iter().map(|f| masks.iter().map(|m| f.coeff(*m)).collect()).collect();
    Matrix::from_rows(rows).rank()
}

/// `(A, B, C)` with `a∧a = A vol`, `a∧b = B vol`, `b∧b = C vol` on the 4-dimensional quotient.
fn pencil(a: &Form, b: &Form) -> Result<[Expr; 3]> {
    let aa = a.wedge(a)?;
    let ab = a.wedge(b)?;
    let bb = b.wedge(b)?;
    let masks: BTreeSet<u32> = [&aa, &ab, &bb].iter().flat_map(|f| f.terms().keys().copied()).collect();
    if masks.len() > 1 {
        return Err(Error::DegeneratePencil("the quotient by θ, θ̄ is not 4-dimensional".into()));
    }
    let m = masks.into_iter().next().unwrap_or(0);
    Ok([aa.coeff(m), ab.coeff(m), bb.coeff(m)])
}

/// `μ ≥ 1` and `ε = ±1` from the roots of `(dθ̄ + λdθ)² ≡ 0 mod θ, θ̄`.
pub fn mu_epsilon(c: &BacklundCandidate) -> Result<MuEpsilon> {
    let ctx = c.basis.ctx().clone();
    if c.basis.dim() != 6 {
        return Err(Error::Input("a rank-1 candidate lives on a 6-dimensional basis".into()));
    }
    let gens = Matrix::from_rows(vec![c.theta.components(), c.theta_bar.components()]);
    if gens.rank() < 2 {
        return Err(Error::DegeneratePencil("θ and θ̄ are dependent".into()));
    }
    let a = c.reduce(&c.theta.d()?)?;
    let b = c.reduce(&c.theta_bar.d()?)?;
    if two_form_rank(&[&a, &b]) < 2 {
        return Err(Error::DegeneratePencil("dθ and dθ̄ are dependent modulo θ, θ̄".into()));
    }
    let [pa, pb, pc] = pencil(&a, &b)?;
    if pa.is_zero() || pc.is_zero() {
        return Err(Error::DegeneratePencil("a root of the pencil is at zero or infinity".into()));
    }
    let r = &(&(&pb * &pb).scale(4)).div(&(&pa * &pc))? - &Expr::int(&ctx, 2);
    let Some((rn, rd)) = r.as_rational() else {
        return Err(Error::Input(format!("the pencil ratio {r} is not constant")));
    };
    let rf = rn.to_f64() / rd.to_f64();
    let two = Expr::int(&ctx, 2);
    if r == two {
        return Err(Error::Forbidden("double root: εμ² = 1".into()));
    }
    if rf.abs() < 2.0 {
        return Err(Error::ComplexRoots);
    }
    let sign = if rf > 0.0 { 1 } else { -1 };
    // ρ = (r ± √(r² − 4))/2 with |ρ| ≥ 1
    let disc = &(&r * &r) - &Expr::int(&ctx, 4);
    let (dn, dd) = disc.as_rational().expect("constant");
    let rho_exact = match (dn.sqrt_exact(), dd.sqrt_exact()) {
        (Some(sn), Some(sd)) => {
            let s = Expr::constant(&ctx, sn).div(&Expr::constant(&ctx, sd))?;
            Some((&r + &s.scale(sign as i64)).div(&two)?)
        }
        _ => None,
    };
    let rho = match &rho_exact {
        Some(e) => {
            let (n, d) = e.as_rational().expect("constant");
            n.to_f64() / d.to_f64()
        }
        None => (rf + sign as f64 * (rf * rf - 4.0).sqrt()) / 2.0,
    };
    Ok(MuEpsilon { epsilon: sign, rho, mu: rho.abs().powf(0.25), rho_exact, r, pencil: [pa, pb, pc] })
}

/// Diagnostics of the two rank-1 conditions.
#[derive(Clone, Debug)]
pub struct Rank1Report {
    /// Generic ranks of `dπ₁`, `dπ₂` and of both stacked.
    pub jacobian_ranks: Option<[usize; 3]>,
    /// Sample points at which the numeric ranks are `5, 5, 6`.
    pub numeric_confirmations: usize,
    pub samples: usize,
    pub condition1: Option<bool>,
    /// Ranks modulo `θ, θ̄` of `{dθ, dθ̄}`, `{dθ, Ω}`, `{dθ̄, Ω̄}`, all four, and `{Ω, Ω̄}`.
    pub span_ranks: [usize; 5],
    pub condition2: bool,
    pub pass: bool,
}

fn jacobian(b: &Basis, fs: &[Expr]) -> Result<Vec<Vec<Expr>>> {
    fs.iter().map(|f| Ok(Form::scalar(b, f.clone()).d()?.components())).collect()
}

fn numeric_rank(m: &[Vec<f64>], tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() <= tol * scale {
            continue;
        }
        a.swap(rank, p);
        for i in 0..rows {
            if i != rank {
                let f = a[i][c] / a[rank][c];
                for j in c..cols {
                    a[i][j] -= f * a[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn eval_matrix(ev: &Evaluator, m: &[Vec<Expr>]) -> Result<Vec<Vec<f64>>> {
    m.iter().map(|r| r.iter().map(|e| ev.eval(e)).collect()).collect()
}

/// Checks the submersion and kernel conditions on the projections (symbolic
/// generic ranks confirmed at sample points) and the span condition
/// `[[dθ, dθ̄]] = [[dθ, Ω]] = [[dθ̄, Ω̄]]` modulo `θ, θ̄`.
///
/// The span condition is tested in its generator-independent form: each
/// system's pair spans the same plane as `dθ, dθ̄`. The literal rank of
/// `{Ω, Ω̄}` is reported, since it depends on the choice of `Ω` within its
/// system.
pub fn check_rank1(c: &BacklundCandidate, seed: u64, samples: usize, tol: f64) -> Result<Rank1Report> {
    let (mut jacobian_ranks, mut condition1, mut confirmations) = (None, None, 0);
    if let Some([p1, p2]) = &c.projections {
        let j1 = jacobian(&c.basis, p1)?;
        let j2 = jacobian(&c.basis, p2)?;
        let both: Vec<Vec<Expr>> = j1.iter().chain(&j2).cloned().collect();
        let ranks = [Matrix::from_rows(j1.clone()).rank(), Matrix::from_rows(j2.clone()).rank(), Matrix::from_rows(both.clone()).rank()];
        let ok = ranks == [5, 5, c.basis.dim()];
        let guards: Vec<Expr> = both.iter().flatten().cloned().collect();
        let mut s = Sampler::new(c.basis.ctx(), seed).guards(&guards);
        for ev in s.points(samples)? {
            let n = [numeric_rank(&eval_matrix(&ev, &j1)?, tol), numeric_rank(&eval_matrix(&ev, &j2)?, tol), numeric_rank(&eval_matrix(&ev, &both)?, tol)];
            if n == [5, 5, c.basis.dim()] {
                confirmations += 1;
            }
        }
        if ok && confirmations == 0 && samples > 0 {
            return Err(Error::Numeric("the rank-deficiency locus covers every sample point".into()));
        }
        jacobian_ranks = Some(ranks);
        condition1 = Some(ok);
    }
    let (Some(om), Some(omb)) = (&c.omega, &c.omega_bar) else {
        return Err(Error::Input("the span condition needs Ω and Ω̄".into()));
    };
    let a = c.reduce(&c.theta.d()?)?;
    let b = c.reduce(&c.theta_bar.d()?)?;
    let o = c.reduce(om)?;
    let ob = c.reduce(omb)?;
    let span_ranks = [two_form_rank(&[&a, &b]), two_form_rank(&[&a, &o]), two_form_rank(&[&b, &ob]), two_form_rank(&[&a, &b, &o, &ob]), two_form_rank(&[&o, &ob])];
    let condition2 = span_ranks[..4] == [2, 2, 2, 2];
    let pass = condition2 && condition1.unwrap_or(true);
    Ok(Rank1Report { jacobian_ranks, numeric_confirmations: confirmations, samples, condition1, span_ranks, condition2, pass })
}
