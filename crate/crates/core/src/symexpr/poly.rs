//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending lexicographic order of the exponent
//! vector, atom 0 being the most significant variable.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::int::Int;

/// Maximum number of atoms a single context may register.
pub const MAX_VARS: usize = 24;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(pub [u16; MAX_VARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; MAX_VARS]);

    pub fn var(i: usize, e: u16) -> Mono {
        let mut m = Mono::ONE;
        m.0[i] = e;
        m
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = self.0[i].checked_add(o.0[i]).expect("exponent overflow");
        }
        Mono(r)
    }

    pub fn divides(&self, o: &Mono) -> bool {
        (0..MAX_VARS).all(|i| self.0[i] <= o.0[i])
    }

    /// `o / self`, assuming `self` divides `o`.
    pub fn quotient_of(&self, o: &Mono) -> Mono {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = o.0[i] - self.0[i];
        }
        Mono(r)
    }

    pub fn meet(&self, o: &Mono) -> Mono {
        let mut r = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            r[i] = self.0[i].min(o.0[i]);
        }
        Mono(r)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn with(&self, i: usize, e: u16) -> Mono {
        let mut m = *self;
        m.0[i] = e;
        m
    }

    /// Graded lexicographic comparison (total degree first).
    pub fn cmp_grlex(&self, o: &Mono) -> Ordering {
        self.total().cmp(&o.total()).then_with(|| self.cmp(o))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, Int)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Int::ONE)
    }

    pub fn constant(c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Mono::ONE, c)] }
        }
    }

    pub fn int(c: i64) -> Poly {
        Poly::constant(Int::from(c))
    }

    pub fn var(i: usize) -> Poly {
        Poly { terms: vec![(Mono::var(i, 1), Int::ONE)] }
    }

    pub fn term(m: Mono, c: Int) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from unsorted terms, combining duplicates.
    pub fn from_terms(mut t: Vec<(Mono, Int)>) -> Poly {
        t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Mono, Int)> = Vec::with_capacity(t.len());
        for (m, c) in t {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 = last.1.add(&c);
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Mono, Int)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, Int)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Int> {
        if self.terms.is_empty() {
            Some(Int::ZERO)
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn lc(&self) -> &Int {
        &self.terms[0].1
    }

    pub fn lm(&self) -> &Mono {
        &self.terms[0].0
    }

    pub fn add(&self, o: &Poly) -> Poly {
        merge(&self.terms, &o.terms, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        merge(&self.terms, &o.terms, true)
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a.mul(c))).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &Int) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(a, b)| (a.mul(m), b.mul(c))).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let (small, large) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return large.mul_term(m, c);
        }
        let mut acc: Vec<(Mono, Int)> = Vec::with_capacity(self.len() * o.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                acc.push((ma.mul(mb), ca.mul(cb)));
            }
        }
        Poly::from_terms(acc)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self` over the integers.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.is_constant() {
            let c = d.lc();
            let mut out = Vec::with_capacity(self.len());
            for (m, a) in &self.terms {
                out.push((*m, a.div_exact(c)?));
            }
            return Some(Poly { terms: out });
        }
        if d.is_monomial() {
            let (dm, dc) = &d.terms[0];
            let mut out = Vec::with_capacity(self.len());
            for (m, a) in &self.terms {
                if !dm.divides(m) {
                    return None;
                }
                out.push((dm.quotient_of(m), a.div_exact(dc)?));
            }
            return Some(Poly { terms: out });
        }
        let (dm, dc) = (&d.terms[0].0, &d.terms[0].1);
        // quick degree rejection
        for i in 0..MAX_VARS {
            if dm.0[i] > 0 && self.degree(i) < d.degree(i) {
                return None;
            }
        }
        let mut rem: BTreeMap<Mono, Int> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Mono, Int)> = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            if !dm.divides(&m) {
                return None;
            }
            let qm = dm.quotient_of(&m);
            let qc = c.div_exact(dc)?;
            for (tm, tc) in d.terms.iter().skip(1) {
                let pm = tm.mul(&qm);
                let pc = tc.mul(&qc);
                match rem.entry(pm) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let v = e.get().sub(&pc);
                        if v.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = v;
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-&pc);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    pub fn degree(&self, v: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.0[v]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.total()).max().unwrap_or(0)
    }

    /// Bit mask of atoms occurring with positive exponent.
    pub fn var_mask(&self) -> u32 {
        let mut mask = 0u32;
        for (m, _) in &self.terms {
            for i in 0..MAX_VARS {
                if m.0[i] > 0 {
                    mask |= 1 << i;
                }
            }
        }
        mask
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.0[v] > 0)
    }

    /// Positive gcd of the integer coefficients (zero for the zero polynomial).
    pub fn content(&self) -> Int {
        let mut g = Int::ZERO;
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Componentwise minimum exponent over all terms.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Mono::ONE;
        };
        let mut m = *first;
        for (t, _) in it {
            m = m.meet(t);
        }
        m
    }

    /// Partial derivative with respect to atom `v`.
    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e > 0 {
                out.push((m.with(v, e - 1), c.mul(&Int::from(e as i64))));
            }
        }
        Poly::from_terms(out)
    }

    /// Coefficients with respect to atom `v`: map from exponent to coefficient polynomial.
    pub fn coeffs_in(&self, v: usize) -> BTreeMap<u16, Poly> {
        let mut groups: BTreeMap<u16, Vec<(Mono, Int)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups.entry(m.0[v]).or_default().push((m.with(v, 0), c.clone()));
        }
        groups.into_iter().map(|(e, t)| (e, Poly::from_terms(t))).collect()
    }

    /// Substitutes `v := -v`.
    pub fn flip_sign(&self, v: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, if m.0[v] % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// Substitutes atom `v` by a polynomial.
    pub fn substitute(&self, v: usize, value: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let groups = self.coeffs_in(v);
        let maxe = *groups.keys().last().unwrap_or(&0);
        let mut powers = vec![Poly::one()];
        for k in 1..=maxe {
            let next = powers[k as usize - 1].mul(value);
            powers.push(next);
        }
        let mut acc = Poly::zero();
        for (e, c) in groups {
            acc = acc.add(&c.mul(&powers[e as usize]));
        }
        acc
    }

    pub fn eval_f64(&self, vals: &[f64]) -> f64 {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= vals[i].powi(e as i32);
                }
            }
            s += t;
        }
        s
    }

    /// Leading coefficient is positive and the integer content is one.
    pub fn primitive(&self) -> (Int, Poly) {
        if self.is_zero() {
            return (Int::ZERO, Poly::zero());
        }
        let mut c = self.content();
        if self.lc().is_negative() {
            c = -&c;
        }
        if c.is_one() {
            return (c, self.clone());
        }
        (c.clone(), Poly { terms: self.terms.iter().map(|(m, a)| (*m, a.div_exact(&c).unwrap())).collect() })
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.terms.iter().map(|(_, c)| c.bits()).max().unwrap_or(0)
    }
}

fn merge(a: &[(Mono, Int)], b: &[(Mono, Int)], negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b { a[i].1.sub(&b[j].1) } else { a[i].1.add(&b[j].1) };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0, c));
    }
    Poly { terms: out }
}
