//! Seeded random sample points satisfying the context assumptions.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::context::{AtomKind, Context};
use super::eval::{builtin_functions, Evaluator};
use super::expr::Expr;
use crate::error::{Error, Result};

/// Draws admissible points: every assumption evaluates positive and every
/// guard expression evaluates without hitting a near-singular denominator.
pub struct Sampler {
    ctx: Context,
    rng: SplitMix64,
    guards: Vec<Expr>,
    pub lo: f64,
    pub hi: f64,
    pub max_attempts: usize,
}

impl Sampler {
    pub fn new(ctx: &Context, seed: u64) -> Sampler {
        Sampler { ctx: ctx.clone(), rng: SplitMix64::seed_from_u64(seed), guards: Vec::new(), lo: -2.0, hi: 2.0, max_attempts: 200 }
    }

    pub fn guard(mut self, e: &Expr) -> Sampler {
        self.guards.push(e.clone());
        self
    }

    pub fn guards(mut self, es: &[Expr]) -> Sampler {
        self.guards.extend(es.iter().cloned());
        self
    }

    fn draw(&mut self) -> Evaluator {
        let builtins = builtin_functions();
        let mut ev = Evaluator::new(&self.ctx);
        for (i, a) in self.ctx.atoms().iter().enumerate() {
            match &a.kind {
                AtomKind::Coordinate | AtomKind::Parameter => {
                    ev.set(i, self.rng.random_range(self.lo..self.hi));
                }
                AtomKind::Function { fname, .. } if !builtins.contains_key(fname) => {
                    // opaque functions are independent transcendentals
                    ev.set(i, self.rng.random_range(self.lo..self.hi));
                }
                _ => {}
            }
        }
        ev
    }

    fn admissible(&self, ev: &Evaluator) -> bool {
        if ev.atom_values().is_err() {
            return false;
        }
        for a in self.ctx.assumptions() {
            match ev.eval(&a) {
                Ok(v) if v > 0.0 => {}
                _ => return false,
            }
        }
        self.guards.iter().all(|g| ev.eval(g).is_ok())
    }

    /// Next admissible point, or `NoSamplePoint` after `max_attempts` draws.
    pub fn next_point(&mut self) -> Result<Evaluator> {
        for _ in 0..self.max_attempts {
            let ev = self.draw();
            if self.admissible(&ev) {
                return Ok(ev);
            }
        }
        Err(Error::NoSamplePoint)
    }

    pub fn points(&mut self, n: usize) -> Result<Vec<Evaluator>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// Coordinate and parameter values of a sample point, by name.
pub fn point_values(ctx: &Context, ev: &Evaluator) -> Vec<(String, f64)> {
    let vals = ev.atom_values().unwrap_or_default();
    ctx.atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a.kind, AtomKind::Coordinate | AtomKind::Parameter))
        .map(|(i, a)| (a.name.clone(), vals.get(i).copied().unwrap_or(f64::NAN)))
        .collect()
}

/// Numeric confirmation that a nonzero expression does not vanish: at least
/// one of `n` admissible points gives a value above `tol`.
pub fn confirm_nonzero(e: &Expr, seed: u64, n: usize, tol: f64) -> Result<bool> {
    let mut s = Sampler::new(e.ctx(), seed).guard(e);
    let mut hits = 0;
    for ev in s.points(n)? {
        if ev.eval(e)?.abs() > tol {
            hits += 1;
        }
    }
    Ok(hits > 0)
}
