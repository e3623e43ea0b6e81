//! Differential forms over a coordinate chart or an abstract coframe.
//!
//! A basis element set is indexed `0..n`; a monomial `e^{i1}∧…∧e^{ik}` with
//! increasing indices is stored as the bit mask of its indices.

pub mod algebraic;
pub mod ideal;
pub mod linalg;
pub mod poincare;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::symexpr::{AtomKind, Context, Expr};
pub use ideal::{derived_flag, derived_system, reduce_mod, Pfaffian};
pub use linalg::Matrix;
pub use poincare::{poincare_primitive, potential};

pub fn mask_of(idx: &[usize]) -> Option<(i32, u32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    // insertion sort counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    let mut m = 0u32;
    for &i in &v {
        if m & (1 << i) != 0 {
            return None;
        }
        m |= 1 << i;
    }
    Some((sign, m))
}

pub fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of `e^A ∧ e^B` relative to `e^{A∪B}` for disjoint masks.
fn wedge_sign(a: u32, b: u32) -> i64 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Invertible change `new = P old` with cached inverse.
#[derive(Clone, Debug)]
pub struct CoframeChange {
    pub p: Matrix,
    pub pinv: Matrix,
}

impl CoframeChange {
    pub fn new(p: Matrix) -> Result<CoframeChange> {
        if p.rows != p.cols {
            return Err(Error::SingularChange);
        }
        let pinv = p.inverse()?;
        Ok(CoframeChange { p, pinv })
    }
}

#[derive(Debug)]
pub enum BasisKind {
    /// Basis element `i` is `d coords[i]`.
    Chart { coords: Vec<usize> },
    /// Structure equations given directly.
    Frame,
    /// `new = P old` over a parent basis.
    Derived { parent: Basis, change: CoframeChange },
}

struct Inner {
    ctx: Context,
    names: Vec<String>,
    kind: BasisKind,
    /// `d e^i` as 2-form coefficients.
    dbasis: Vec<BTreeMap<u32, Expr>>,
    /// Declared differentials of base atoms, as coefficient vectors.
    diffs: Vec<(usize, Vec<Expr>)>,
    dcache: Mutex<HashMap<u32, BTreeMap<u32, Expr>>>,
}

impl fmt::Debug for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis({})", self.names.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct Basis(Arc<Inner>);

impl PartialEq for Basis {
    fn eq(&self, o: &Basis) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }
}

impl Basis {
    fn build(ctx: &Context, names: Vec<String>, kind: BasisKind, dbasis: Vec<BTreeMap<u32, Expr>>, diffs: Vec<(usize, Vec<Expr>)>) -> Basis {
        Basis(Arc::new(Inner { ctx: ctx.clone(), names, kind, dbasis, diffs, dcache: Mutex::new(HashMap::new()) }))
    }

    /// Coordinate chart on the named coordinate atoms.
    pub fn chart(ctx: &Context, coords: &[&str]) -> Result<Basis> {
        let mut idx = Vec::new();
        for c in coords {
            let i = ctx.lookup(c).ok_or_else(|| Error::UnknownAtom(c.to_string()))?;
            if !ctx.is_coordinate(i) {
                return Err(Error::Input(format!("`{c}` is not a coordinate")));
            }
            idx.push(i);
        }
        let n = idx.len();
        let diffs = idx
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let mut v = vec![Expr::zero(ctx); n];
                v[k] = Expr::one(ctx);
                (a, v)
            })
            .collect();
        let names = coords.iter().map(|c| format!("d{c}")).collect();
        Ok(Basis::build(ctx, names, BasisKind::Chart { coords: idx }, vec![BTreeMap::new(); n], diffs))
    }

    /// Abstract coframe with `d e^i = dforms[i]` and declared differentials of scalars.
    pub fn frame(ctx: &Context, names: Vec<String>, dforms: Vec<BTreeMap<u32, Expr>>, diffs: Vec<(usize, Vec<Expr>)>) -> Result<Basis> {
        let n = names.len();
        if n == 0 || dforms.len() != n || diffs.iter().any(|(_, v)| v.len() != n) {
            return Err(Error::Input("frame dimensions are inconsistent".into()));
        }
        for m in dforms.iter().flat_map(|d| d.keys()) {
            if m.count_ones() != 2 || (*m >> n) != 0 {
                return Err(Error::Input("structure equations must be 2-forms".into()));
            }
        }
        Ok(Basis::build(ctx, names, BasisKind::Frame, dforms, diffs))
    }

    /// Frame from structure functions: `d e^i = -1/2 C^i_{jk} e^j∧e^k`.
    pub fn from_structure(ctx: &Context, names: Vec<String>, c: &dyn Fn(usize, usize, usize) -> Expr, diffs: Vec<(usize, Vec<Expr>)>) -> Result<Basis> {
        let n = names.len();
        let mut dforms = Vec::new();
        for i in 0..n {
            let mut m = BTreeMap::new();
            for j in 0..n {
                for k in (j + 1)..n {
                    let v = c(i, j, k);
                    if !v.is_zero() {
                        m.insert((1 << j) | (1 << k), v.neg());
                    }
                }
            }
            dforms.push(m);
        }
        Basis::frame(ctx, names, dforms, diffs)
    }

    /// Basis `new = P old` over `parent`; structure equations are computed.
    pub fn derived(parent: &Basis, change: CoframeChange, names: Vec<String>) -> Result<Basis> {
        let n = parent.dim();
        let ctx = parent.ctx().clone();
        if change.p.rows != n || names.len() != n {
            return Err(Error::Input("coframe change has the wrong size".into()));
        }
        let mut dbasis = Vec::with_capacity(n);
        let to_new: Vec<Vec<Expr>> = (0..n).map(|j| change.pinv.row(j)).collect();
        for i in 0..n {
            let sigma = Form::one_form(parent, change.p.row(i));
            let ds = sigma.d()?;
            dbasis.push(transform_terms(&ds, &to_new));
        }
        let mut diffs = Vec::new();
        for (a, v) in &parent.0.diffs {
            // da = sum_k v_k old^k = sum_k v_k sum_l Pinv[k][l] new^l
            let mut w = vec![Expr::zero(&ctx); n];
            for (k, vk) in v.iter().enumerate() {
                if vk.is_zero() {
                    continue;
                }
                for (l, wl) in w.iter_mut().enumerate() {
                    let c = change.pinv.get(k, l);
                    if !c.is_zero() {
                        *wl = &*wl + &(vk * c);
                    }
                }
            }
            diffs.push((*a, w));
        }
        Ok(Basis::build(&ctx, names, BasisKind::Derived { parent: parent.clone(), change }, dbasis, diffs))
    }

    pub fn ctx(&self) -> &Context {
        &self.0.ctx
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn kind(&self) -> &BasisKind {
        &self.0.kind
    }

    pub fn is_chart(&self) -> bool {
        matches!(self.0.kind, BasisKind::Chart { .. })
    }

    /// Coordinate atoms of a chart basis.
    pub fn coords(&self) -> Option<&[usize]> {
        match &self.0.kind {
            BasisKind::Chart { coords } => Some(coords),
            _ => None,
        }
    }

    pub fn element(&self, i: usize) -> Form {
        Form::basis_element(self, i)
    }

    pub fn d_element(&self, i: usize) -> Form {
        Form { basis: self.clone(), deg: 2, terms: self.0.dbasis[i].clone() }
    }

    pub fn differentials(&self) -> &[(usize, Vec<Expr>)] {
        &self.0.diffs
    }

    pub fn differential_of(&self, atom: usize) -> Option<&Vec<Expr>> {
        self.0.diffs.iter().find(|(a, _)| *a == atom).map(|(_, v)| v)
    }

    /// Structure function `C^i_{jk}` with `d e^i = -1/2 C^i_{jk} e^j∧e^k`.
    pub fn structure(&self, i: usize, j: usize, k: usize) -> Expr {
        let ctx = self.ctx();
        if j == k {
            return Expr::zero(ctx);
        }
        let (lo, hi, s) = if j < k { (j, k, 1) } else { (k, j, -1) };
        let c = self.0.dbasis[i].get(&((1 << lo) | (1 << hi))).cloned().unwrap_or_else(|| Expr::zero(ctx));
        c.scale(-s)
    }

    /// `d` of the basis monomial with the given mask.
    fn d_monomial(&self, mask: u32) -> BTreeMap<u32, Expr> {
        if let Some(v) = self.0.dcache.lock().unwrap().get(&mask) {
            return v.clone();
        }
        // d(e^i ∧ rest) = de^i ∧ rest - e^i ∧ d(rest)
        let mut out: BTreeMap<u32, Expr> = BTreeMap::new();
        if mask != 0 {
            let i = mask.trailing_zeros();
            let first = 1u32 << i;
            let rest = mask & !first;
            for (m, c) in &self.0.dbasis[i as usize] {
                if m & rest == 0 {
                    let s = wedge_sign(*m, rest);
                    accumulate(&mut out, m | rest, &c.scale(s));
                }
            }
            for (m, c) in self.d_monomial(rest) {
                if m & first == 0 {
                    let s = wedge_sign(first, m);
                    accumulate(&mut out, m | first, &c.scale(-s));
                }
            }
        }
        self.0.dcache.lock().unwrap().insert(mask, out.clone());
        out
    }

    /// Atoms whose differential a scalar depends on, checking declarations.
    fn scalar_differential(&self, f: &Expr) -> Result<Vec<Expr>> {
        let ctx = self.ctx();
        let n = self.dim();
        let mut out = vec![Expr::zero(ctx); n];
        if f.is_constant() {
            return Ok(out);
        }
        // every coordinate atom f depends on (directly or through definitions) needs a differential
        let mut closure = f.var_mask();
        loop {
            let mut next = closure;
            for k in 0..ctx.len() {
                if closure & (1 << k) == 0 {
                    continue;
                }
                let info = ctx.atom(k);
                match &info.kind {
                    AtomKind::Function { arg, .. } => next |= arg.0.var_mask() | arg.1.var_mask(),
                    AtomKind::Root => next |= info.square.as_ref().map(|s| s.var_mask()).unwrap_or(0),
                    _ => {}
                }
                if let Some((d0, d1)) = &info.deriv {
                    next |= d0.var_mask() | d1.var_mask();
                }
            }
            if next == closure {
                break;
            }
            closure = next;
        }
        for k in 0..ctx.len() {
            if closure & (1 << k) != 0 && ctx.is_coordinate(k) && self.differential_of(k).is_none() {
                return Err(Error::MissingDerivative(ctx.name(k)));
            }
        }
        for (a, v) in &self.0.diffs {
            if closure & (1 << a) == 0 {
                continue;
            }
            let da = f.diff(*a)?;
            if da.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(v) {
                if !c.is_zero() {
                    *o = &*o + &(&da * c);
                }
            }
        }
        Ok(out)
    }
}

fn accumulate(m: &mut BTreeMap<u32, Expr>, key: u32, v: &Expr) {
    if v.is_zero() {
        return;
    }
    match m.get_mut(&key) {
        Some(e) => {
            let s = &*e + v;
            if s.is_zero() {
                m.remove(&key);
            } else {
                *e = s;
            }
        }
        None => {
            m.insert(key, v.clone());
        }
    }
}

/// Rewrites every term using images of basis elements given as coefficient vectors.
fn transform_terms(f: &Form, images: &[Vec<Expr>]) -> BTreeMap<u32, Expr> {
    let mut out: BTreeMap<u32, Expr> = BTreeMap::new();
    for (mask, c) in &f.terms {
        // expand the wedge of the images of each index
        let mut acc: BTreeMap<u32, Expr> = BTreeMap::new();
        acc.insert(0, c.clone());
        for i in indices(*mask) {
            let mut next: BTreeMap<u32, Expr> = BTreeMap::new();
            for (m, a) in &acc {
                for (l, b) in images[i].iter().enumerate() {
                    if b.is_zero() || m & (1 << l) != 0 {
                        continue;
                    }
                    let s = wedge_sign(*m, 1 << l);
                    accumulate(&mut next, m | (1 << l), &(a * b).scale(s));
                }
            }
            acc = next;
        }
        for (m, a) in acc {
            accumulate(&mut out, m, &a);
        }
    }
    out
}

/// Homogeneous differential form.
#[derive(Clone)]
pub struct Form {
    basis: Basis,
    deg: usize,
    terms: BTreeMap<u32, Expr>,
}

impl PartialEq for Form {
    fn eq(&self, o: &Form) -> bool {
        self.basis == o.basis && self.deg == o.deg && self.terms == o.terms
    }
}

impl Form {
    pub fn zero(b: &Basis, deg: usize) -> Form {
        Form { basis: b.clone(), deg, terms: BTreeMap::new() }
    }

    pub fn scalar(b: &Basis, f: Expr) -> Form {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(0, f);
        }
        Form { basis: b.clone(), deg: 0, terms }
    }

    pub fn basis_element(b: &Basis, i: usize) -> Form {
        let mut terms = BTreeMap::new();
        terms.insert(1u32 << i, Expr::one(b.ctx()));
        Form { basis: b.clone(), deg: 1, terms }
    }

    pub fn one_form(b: &Basis, coeffs: Vec<Expr>) -> Form {
        let mut terms = BTreeMap::new();
        for (i, c) in coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                terms.insert(1u32 << i, c);
            }
        }
        Form { basis: b.clone(), deg: 1, terms }
    }

    /// Form from (index tuple, coefficient) pairs; tuples need not be sorted.
    pub fn from_terms(b: &Basis, deg: usize, items: Vec<(Vec<usize>, Expr)>) -> Result<Form> {
        let mut terms = BTreeMap::new();
        for (idx, c) in items {
            if idx.len() != deg || idx.iter().any(|&i| i >= b.dim()) {
                return Err(Error::Input("index tuple does not match the degree".into()));
            }
            if let Some((s, m)) = mask_of(&idx) {
                accumulate(&mut terms, m, &c.scale(s as i64));
            }
        }
        Ok(Form { basis: b.clone(), deg, terms })
    }

    pub(crate) fn from_map(b: &Basis, deg: usize, terms: BTreeMap<u32, Expr>) -> Form {
        Form { basis: b.clone(), deg, terms }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn terms(&self) -> &BTreeMap<u32, Expr> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mask: u32) -> Expr {
        self.terms.get(&mask).cloned().unwrap_or_else(|| Expr::zero(self.basis.ctx()))
    }

    /// Coefficient of `e^{i1}∧…∧e^{ik}` (any order).
    pub fn coeff_of(&self, idx: &[usize]) -> Expr {
        match mask_of(idx) {
            Some((s, m)) => self.coeff(m).scale(s as i64),
            None => Expr::zero(self.basis.ctx()),
        }
    }

    /// Coefficient vector of a 1-form.
    pub fn components(&self) -> Vec<Expr> {
        (0..self.basis.dim()).map(|i| self.coeff(1 << i)).collect()
    }

    /// Scalar value of a 0-form.
    pub fn value(&self) -> Expr {
        self.coeff(0)
    }

    fn check(&self, o: &Form) -> Result<()> {
        if self.basis != o.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &Form) -> Result<Form> {
        self.check(o)?;
        if self.deg != o.deg && !self.is_zero() && !o.is_zero() {
            return Err(Error::Input("adding forms of different degree".into()));
        }
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            accumulate(&mut terms, *m, c);
        }
        let deg = if self.is_zero() { o.deg } else { self.deg };
        Ok(Form { basis: self.basis.clone(), deg, terms })
    }

    pub fn sub(&self, o: &Form) -> Result<Form> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Form {
        Form { basis: self.basis.clone(), deg: self.deg, terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn scale(&self, f: &Expr) -> Form {
        if f.is_zero() {
            return Form::zero(&self.basis, self.deg);
        }
        Form { basis: self.basis.clone(), deg: self.deg, terms: self.terms.iter().map(|(m, c)| (*m, c * f)).filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<Form> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c)?;
            if !v.is_zero() {
                terms.insert(*m, v);
            }
        }
        Ok(Form { basis: self.basis.clone(), deg: self.deg, terms })
    }

    pub fn wedge(&self, o: &Form) -> Result<Form> {
        self.check(o)?;
        let deg = self.deg + o.deg;
        if deg > self.basis.dim() {
            return Err(Error::DegreeOverflow(deg, self.basis.dim()));
        }
        let mut terms = BTreeMap::new();
        for (ma, a) in &self.terms {
            for (mb, b) in &o.terms {
                if ma & mb != 0 {
                    continue;
                }
                let s = wedge_sign(*ma, *mb);
                accumulate(&mut terms, ma | mb, &(a * b).scale(s));
            }
        }
        Ok(Form { basis: self.basis.clone(), deg, terms })
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<Form> {
        let n = self.basis.dim();
        if self.deg >= n {
            return Err(Error::DegreeOverflow(self.deg + 1, n));
        }
        let mut terms = BTreeMap::new();
        for (mask, c) in &self.terms {
            let dc = self.basis.scalar_differential(c)?;
            for (l, a) in dc.iter().enumerate() {
                if a.is_zero() || mask & (1 << l) != 0 {
                    continue;
                }
                let s = wedge_sign(1 << l, *mask);
                accumulate(&mut terms, mask | (1 << l), &a.scale(s));
            }
            if *mask != 0 {
                for (m, v) in self.basis.d_monomial(*mask) {
                    accumulate(&mut terms, m, &(c * &v));
                }
            }
        }
        Ok(Form { basis: self.basis.clone(), deg: self.deg + 1, terms })
    }

    /// Re-expresses the form on a basis derived from its own (or its parent).
    pub fn change_basis(&self, target: &Basis) -> Result<Form> {
        if *target == self.basis {
            return Ok(self.clone());
        }
        if let BasisKind::Derived { parent, change } = target.kind() {
            if *parent == self.basis {
                let images: Vec<Vec<Expr>> = (0..target.dim()).map(|j| change.pinv.row(j)).collect();
                return Ok(Form { basis: target.clone(), deg: self.deg, terms: transform_terms(self, &images) });
            }
        }
        if let BasisKind::Derived { parent, change } = self.basis.kind() {
            if parent == target {
                let images: Vec<Vec<Expr>> = (0..target.dim()).map(|j| change.p.row(j)).collect();
                return Ok(Form { basis: target.clone(), deg: self.deg, terms: transform_terms(self, &images) });
            }
            let up = self.change_basis(parent)?;
            return up.change_basis(target);
        }
        Err(Error::BasisMismatch)
    }

    /// Substitutes basis elements: `e^i -> images[i]` (coefficient vectors on the same basis).
    pub fn substitute_elements(&self, images: &[Vec<Expr>]) -> Form {
        Form { basis: self.basis.clone(), deg: self.deg, terms: transform_terms(self, images) }
    }

    /// Pullback along a map into a chart: `target` carries the source
    /// coordinates' expressions (`map[k]` for coordinate `k` of this form's chart).
    pub fn pullback(&self, target: &Basis, map: &[(usize, Expr)]) -> Result<Form> {
        let coords = self.basis.coords().ok_or_else(|| Error::Input("pullback needs a chart source".into()))?;
        let mut images = Vec::new();
        for &c in coords {
            let img = map.iter().find(|(a, _)| *a == c).map(|(_, e)| e.clone()).unwrap_or_else(|| Expr::atom(target.ctx(), c));
            images.push(Form::scalar(target, img).d()?.components());
        }
        let subs = self.map_coeffs(|c| c.subs(map))?;
        Ok(Form { basis: target.clone(), deg: self.deg, terms: transform_terms(&subs, &images) })
    }

    /// Moves the form onto another basis with identical element names (same chart reused).
    pub fn rebase(&self, target: &Basis) -> Result<Form> {
        if target.dim() != self.basis.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(Form { basis: target.clone(), deg: self.deg, terms: self.terms.clone() })
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut items: Vec<(Vec<usize>, &Expr)> = self.terms.iter().map(|(m, c)| (indices(*m), c)).collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        let names = self.basis.names();
        let parts: Vec<String> = items
            .into_iter()
            .map(|(idx, c)| {
                if idx.is_empty() {
                    return c.to_string();
                }
                let mono: Vec<&str> = idx.iter().map(|&i| names[i].as_str()).collect();
                format!("({}) {}", c, mono.join("^"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{}]({})", self.deg, self)
    }
}
