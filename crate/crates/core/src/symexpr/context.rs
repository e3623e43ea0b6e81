//! Atom registry shared by every expression built over it.

use std::sync::{Arc, RwLock};

use super::expr::Expr;
use super::poly::{Poly, MAX_VARS};
use crate::error::{Error, Result};

/// Numerator and denominator of an expression, detached from its context.
pub type RawFrac = (Poly, Poly);

#[derive(Clone, Debug, PartialEq)]
pub enum AtomKind {
    Coordinate,
    Parameter,
    /// `fname(arg)`, an algebraically independent transcendental.
    Function { fname: String, arg: RawFrac },
    /// Square root of `square`.
    Root,
}

#[derive(Clone, Debug)]
pub struct AtomInfo {
    pub name: String,
    pub kind: AtomKind,
    /// Rewrite `atom^2 -> square`, a polynomial in earlier atoms.
    pub square: Option<Poly>,
    /// Derivative of the function with respect to its argument.
    pub deriv: Option<RawFrac>,
}

#[derive(Debug, Default)]
struct Inner {
    atoms: RwLock<Vec<AtomInfo>>,
    assumptions: RwLock<Vec<RawFrac>>,
}

/// Ordered set of atoms. Cheap to clone; clones share the registry.
#[derive(Clone, Debug, Default)]
pub struct Context(Arc<Inner>);

impl PartialEq for Context {
    fn eq(&self, o: &Context) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    /// Context with the given coordinates registered in order.
    pub fn with_coords(names: &[&str]) -> Context {
        let ctx = Context::new();
        for n in names {
            ctx.add_coordinate(n).expect("distinct coordinate names");
        }
        ctx
    }

    fn push(&self, info: AtomInfo) -> Result<usize> {
        let mut atoms = self.0.atoms.write().unwrap();
        if atoms.iter().any(|a| a.name == info.name) {
            return Err(Error::DuplicateAtom(info.name));
        }
        if atoms.len() >= MAX_VARS {
            return Err(Error::TooManyAtoms(MAX_VARS));
        }
        atoms.push(info);
        Ok(atoms.len() - 1)
    }

    pub fn add_coordinate(&self, name: &str) -> Result<usize> {
        self.push(AtomInfo { name: name.to_string(), kind: AtomKind::Coordinate, square: None, deriv: None })
    }

    pub fn add_parameter(&self, name: &str) -> Result<usize> {
        self.push(AtomInfo { name: name.to_string(), kind: AtomKind::Parameter, square: None, deriv: None })
    }

    /// Registers a square root atom `name` with `name^2 = square`.
    ///
    /// `square` must be a polynomial; it may only involve atoms registered earlier.
    pub fn add_root(&self, name: &str, square: &Expr) -> Result<usize> {
        if !square.den().is_one() {
            return Err(Error::Unsupported(format!("root `{name}` of a non-polynomial")));
        }
        if square.num().is_constant() {
            return Err(Error::Input(format!("root `{name}` of a constant")));
        }
        self.push(AtomInfo { name: name.to_string(), kind: AtomKind::Root, square: Some(square.num().clone()), deriv: None })
    }

    /// Returns the atom for `fname(arg)`, registering it on first use.
    pub fn function(&self, fname: &str, arg: &Expr) -> Result<usize> {
        let key = (arg.num().clone(), arg.den().clone());
        {
            let atoms = self.0.atoms.read().unwrap();
            for (i, a) in atoms.iter().enumerate() {
                if let AtomKind::Function { fname: f, arg: g } = &a.kind {
                    if f == fname && *g == key {
                        return Ok(i);
                    }
                }
            }
        }
        let name = format!("{fname}({arg})");
        self.push(AtomInfo { name, kind: AtomKind::Function { fname: fname.to_string(), arg: key }, square: None, deriv: None })
    }

    pub fn find_function(&self, fname: &str, arg: &Expr) -> Option<usize> {
        let key = (arg.num().clone(), arg.den().clone());
        let atoms = self.0.atoms.read().unwrap();
        atoms.iter().position(|a| matches!(&a.kind, AtomKind::Function { fname: f, arg: g } if f == fname && *g == key))
    }

    /// Declares `d atom / d arg`.
    pub fn set_derivative(&self, atom: usize, d: &Expr) -> Result<()> {
        let mut atoms = self.0.atoms.write().unwrap();
        let a = atoms.get_mut(atom).ok_or_else(|| Error::UnknownAtom(format!("#{atom}")))?;
        if !matches!(a.kind, AtomKind::Function { .. }) {
            return Err(Error::Input(format!("`{}` is not a function application", a.name)));
        }
        a.deriv = Some((d.num().clone(), d.den().clone()));
        Ok(())
    }

    /// Declares `atom^2 = square` for a function atom (e.g. a Pythagorean identity).
    pub fn set_square(&self, atom: usize, square: &Expr) -> Result<()> {
        if !square.den().is_one() {
            return Err(Error::Unsupported("square relation with a denominator".into()));
        }
        if square.num().var_mask() >> atom != 0 {
            return Err(Error::Input("square relation must use earlier atoms only".into()));
        }
        let mut atoms = self.0.atoms.write().unwrap();
        let a = atoms.get_mut(atom).ok_or_else(|| Error::UnknownAtom(format!("#{atom}")))?;
        a.square = Some(square.num().clone());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.atoms.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn atom(&self, i: usize) -> AtomInfo {
        self.0.atoms.read().unwrap()[i].clone()
    }

    pub fn atoms(&self) -> Vec<AtomInfo> {
        self.0.atoms.read().unwrap().clone()
    }

    pub fn name(&self, i: usize) -> String {
        self.0.atoms.read().unwrap()[i].name.clone()
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.0.atoms.read().unwrap().iter().position(|a| a.name == name)
    }

    pub fn coordinates(&self) -> Vec<usize> {
        let atoms = self.0.atoms.read().unwrap();
        (0..atoms.len()).filter(|&i| atoms[i].kind == AtomKind::Coordinate).collect()
    }

    pub fn is_coordinate(&self, i: usize) -> bool {
        self.0.atoms.read().unwrap().get(i).map(|a| a.kind == AtomKind::Coordinate).unwrap_or(false)
    }

    /// Atoms with a square rewrite, as a bit mask.
    pub fn relation_mask(&self) -> u32 {
        let atoms = self.0.atoms.read().unwrap();
        let mut m = 0u32;
        for (i, a) in atoms.iter().enumerate() {
            if a.square.is_some() {
                m |= 1 << i;
            }
        }
        m
    }

    pub(crate) fn squares(&self) -> Vec<Option<Poly>> {
        self.0.atoms.read().unwrap().iter().map(|a| a.square.clone()).collect()
    }

    pub fn add_assumption(&self, e: &Expr) {
        self.0.assumptions.write().unwrap().push((e.num().clone(), e.den().clone()));
    }

    /// Expressions asserted positive on the working domain.
    pub fn assumptions(&self) -> Vec<Expr> {
        let raw = self.0.assumptions.read().unwrap().clone();
        raw.into_iter().map(|(n, d)| Expr::from_raw_parts(self, n, d)).collect()
    }

    pub fn var(&self, name: &str) -> Result<Expr> {
        let i = self.lookup(name).ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
        Ok(Expr::atom(self, i))
    }
}
