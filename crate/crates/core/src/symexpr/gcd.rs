//! Multivariate polynomial gcd over the integers.
//!
//! Cheap structural reductions are tried first (monomial content, variables
//! missing from one operand, a modular coprimality probe). The general case
//! uses a dense modular algorithm: gcds modulo word-sized primes computed by
//! recursive evaluation and Newton interpolation, combined by Chinese
//! remaindering and confirmed by trial division.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::int::Int;
use super::poly::{Mono, Poly, MAX_VARS};

type PP = Vec<(Mono, u64)>;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn invmod(a: u64, p: u64) -> u64 {
    debug_assert!(a != 0);
    powmod(a, p - 2, p)
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below 2^62, largest first.
pub(crate) fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut v = Vec::new();
        let mut n = (1u64 << 62) - 1;
        while v.len() < 400 {
            if is_prime_u64(n) {
                v.push(n);
            }
            n -= 2;
        }
        v
    })
}

// ---------- dense univariate arithmetic mod p ----------

fn trim(u: &mut Vec<u64>) {
    while let Some(&0) = u.last() {
        u.pop();
    }
}

fn uni_eval(u: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in u.iter().rev() {
        acc = addmod(mulmod(acc, x, p), c, p);
    }
    acc
}

fn uni_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv = invmod(b[db], p);
    while r.len() > db {
        let dr = r.len() - 1;
        let q = mulmod(r[dr], inv, p);
        if q != 0 {
            let shift = dr - db;
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = submod(r[shift + i], mulmod(q, bc, p), p);
            }
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn uni_monic(u: &[u64], p: u64) -> Vec<u64> {
    if u.is_empty() {
        return Vec::new();
    }
    let inv = invmod(*u.last().unwrap(), p);
    u.iter().map(|&c| mulmod(c, inv, p)).collect()
}

fn uni_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        if y.len() == 1 {
            return vec![1];
        }
        let r = uni_rem(&x, &y, p);
        x = y;
        y = r;
    }
    uni_monic(&x, p)
}

fn uni_div_exact(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    if r.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let inv = invmod(b[db], p);
    let mut q = vec![0u64; r.len() - db];
    while r.len() > db {
        let dr = r.len() - 1;
        let c = mulmod(r[dr], inv, p);
        let shift = dr - db;
        q[shift] = c;
        if c != 0 {
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = submod(r[shift + i], mulmod(c, bc, p), p);
            }
        }
        r.pop();
    }
    trim(&mut q);
    q
}

fn uni_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = addmod(r[i + j], mulmod(x, y, p), p);
        }
    }
    r
}

// ---------- sparse multivariate arithmetic mod p ----------

fn to_modp(a: &Poly, p: u64) -> PP {
    a.terms()
        .iter()
        .filter_map(|(m, c)| {
            let r = c.mod_u64(p);
            (r != 0).then_some((*m, r))
        })
        .collect()
}

fn pp_monic(a: &PP, p: u64) -> PP {
    if a.is_empty() {
        return Vec::new();
    }
    let inv = invmod(a[0].1, p);
    a.iter().map(|(m, c)| (*m, mulmod(*c, inv, p))).collect()
}

/// Exact division mod p; `None` when `d` does not divide `a`.
fn pp_div_exact(a: &PP, d: &PP, p: u64) -> Option<PP> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    let (dm, dc) = d[0];
    let inv = invmod(dc, p);
    let mut rem: BTreeMap<Mono, u64> = a.iter().cloned().collect();
    let mut quot = Vec::new();
    while let Some((m, c)) = rem.pop_last() {
        if !dm.divides(&m) {
            return None;
        }
        let qm = dm.quotient_of(&m);
        let qc = mulmod(c, inv, p);
        for (tm, tc) in d.iter().skip(1) {
            let pm = tm.mul(&qm);
            let pc = mulmod(*tc, qc, p);
            let e = rem.entry(pm).or_insert(0);
            *e = submod(*e, pc, p);
            if *e == 0 {
                rem.remove(&pm);
            }
        }
        quot.push((qm, qc));
    }
    Some(quot)
}

/// Groups terms by their monomial with `v` removed; values are dense in `v`.
fn group_by_rest(a: &PP, v: usize) -> BTreeMap<Mono, Vec<u64>> {
    let mut g: BTreeMap<Mono, Vec<u64>> = BTreeMap::new();
    for (m, c) in a {
        let e = m.0[v] as usize;
        let u = g.entry(m.with(v, 0)).or_default();
        if u.len() <= e {
            u.resize(e + 1, 0);
        }
        u[e] = *c;
    }
    g
}

fn groups_to_pp(g: &BTreeMap<Mono, Vec<u64>>, v: usize) -> PP {
    let mut t = Vec::new();
    for (rm, u) in g {
        for (k, &c) in u.iter().enumerate() {
            if c != 0 {
                t.push((rm.with(v, k as u16), c));
            }
        }
    }
    t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    t
}

fn eval_groups(g: &BTreeMap<Mono, Vec<u64>>, x: u64, p: u64) -> PP {
    let mut t: PP = Vec::with_capacity(g.len());
    for (rm, u) in g.iter().rev() {
        let c = uni_eval(u, x, p);
        if c != 0 {
            t.push((*rm, c));
        }
    }
    t
}

fn pp_to_uni(a: &PP, v: usize) -> Vec<u64> {
    let deg = a.iter().map(|(m, _)| m.0[v] as usize).max().unwrap_or(0);
    let mut u = vec![0u64; if a.is_empty() { 0 } else { deg + 1 }];
    for (m, c) in a {
        u[m.0[v] as usize] = *c;
    }
    u
}

fn uni_to_pp(u: &[u64], v: usize) -> PP {
    let mut t = Vec::new();
    for (k, &c) in u.iter().enumerate().rev() {
        if c != 0 {
            t.push((Mono::var(v, k as u16), c));
        }
    }
    t
}

/// Monic gcd (leading coefficient one in the full lexicographic order) over Z_p.
fn gcd_modp(a: &PP, b: &PP, vars: &[usize], p: u64) -> PP {
    if a.is_empty() {
        return pp_monic(b, p);
    }
    if b.is_empty() {
        return pp_monic(a, p);
    }
    if vars.is_empty() {
        return vec![(Mono::ONE, 1)];
    }
    if vars.len() == 1 {
        let v = vars[0];
        let g = uni_gcd(&pp_to_uni(a, v), &pp_to_uni(b, v), p);
        return uni_to_pp(&g, v);
    }
    let v = vars[0];
    let rest = &vars[1..];
    let mut ga = group_by_rest(a, v);
    let mut gb = group_by_rest(b, v);
    let content = |g: &BTreeMap<Mono, Vec<u64>>| {
        let mut c: Vec<u64> = Vec::new();
        for u in g.values() {
            c = if c.is_empty() { uni_monic(u, p) } else { uni_gcd(&c, u, p) };
            if c.len() == 1 {
                break;
            }
        }
        c
    };
    let ca = content(&ga);
    let cb = content(&gb);
    for u in ga.values_mut() {
        *u = uni_div_exact(u, &ca, p);
    }
    for u in gb.values_mut() {
        *u = uni_div_exact(u, &cb, p);
    }
    let c = uni_gcd(&ca, &cb, p);
    let lca = ga.values().next_back().unwrap().clone();
    let lcb = gb.values().next_back().unwrap().clone();
    let g = uni_gcd(&lca, &lcb, p);
    let deg_a = ga.values().map(|u| u.len() - 1).max().unwrap();
    let deg_b = gb.values().map(|u| u.len() - 1).max().unwrap();
    let bound = (g.len() - 1) + deg_a.min(deg_b);
    let a1 = groups_to_pp(&ga, v);
    let b1 = groups_to_pp(&gb, v);

    let mut beta = 0u64;
    let mut h: Option<BTreeMap<Mono, Vec<u64>>> = None;
    let mut cur_lm = Mono::ONE;
    let mut points: Vec<u64> = Vec::new();
    let mut newton: Vec<u64> = vec![1];
    loop {
        beta += 1;
        assert!(beta < p, "ran out of evaluation points");
        let gb_val = uni_eval(&g, beta, p);
        if gb_val == 0 || uni_eval(&lca, beta, p) == 0 || uni_eval(&lcb, beta, p) == 0 {
            continue;
        }
        let ab = eval_groups(&ga, beta, p);
        let bb = eval_groups(&gb, beta, p);
        let cb_img = gcd_modp(&ab, &bb, rest, p);
        let lm = cb_img[0].0;
        if lm.is_one() {
            return pp_monic(&uni_to_pp(&c, v), p);
        }
        let scaled: Vec<(Mono, u64)> = cb_img.iter().map(|(m, x)| (*m, mulmod(*x, gb_val, p))).collect();
        let reset = match &h {
            None => true,
            Some(_) => lm < cur_lm,
        };
        if !reset && lm > cur_lm {
            continue;
        }
        if reset {
            let mut nh = BTreeMap::new();
            for (m, x) in &scaled {
                nh.insert(*m, vec![*x]);
            }
            h = Some(nh);
            cur_lm = lm;
            points = vec![beta];
            newton = vec![p - beta % p, 1];
        } else {
            let hm = h.as_mut().unwrap();
            let mscale = invmod(uni_eval(&newton, beta, p), p);
            let mut keys: Vec<Mono> = hm.keys().cloned().collect();
            for (m, _) in &scaled {
                if !hm.contains_key(m) {
                    keys.push(*m);
                }
            }
            let img: BTreeMap<Mono, u64> = scaled.iter().cloned().collect();
            for k in keys {
                let cur = hm.get(&k).map(|u| uni_eval(u, beta, p)).unwrap_or(0);
                let target = img.get(&k).cloned().unwrap_or(0);
                let delta = mulmod(submod(target, cur, p), mscale, p);
                if delta == 0 {
                    continue;
                }
                let add: Vec<u64> = newton.iter().map(|&x| mulmod(x, delta, p)).collect();
                let u = hm.entry(k).or_default();
                if u.len() < add.len() {
                    u.resize(add.len(), 0);
                }
                for (i, x) in add.iter().enumerate() {
                    u[i] = addmod(u[i], *x, p);
                }
                trim(u);
            }
            hm.retain(|_, u| !u.is_empty());
            points.push(beta);
            newton = uni_mul(&newton, &[p - beta % p, 1], p);
        }
        if points.len() > bound {
            let hm = h.as_ref().unwrap();
            let hc = content(hm);
            let mut prim = hm.clone();
            for u in prim.values_mut() {
                *u = uni_div_exact(u, &hc, p);
            }
            let cand = groups_to_pp(&prim, v);
            if pp_div_exact(&a1, &cand, p).is_some() && pp_div_exact(&b1, &cand, p).is_some() {
                let full: BTreeMap<Mono, Vec<u64>> = prim.into_iter().map(|(k, u)| (k, uni_mul(&u, &c, p))).collect();
                return pp_monic(&groups_to_pp(&full, v), p);
            }
            h = None;
        }
    }
}

fn symmetric(x: &Int, m: &Int) -> Int {
    let half = m.div_rem(&Int::from(2)).0;
    if x > &half {
        x.sub(m)
    } else {
        x.clone()
    }
}

fn gcd_brown(a: &Poly, b: &Poly, vars: &[usize]) -> Poly {
    let gamma = a.lc().gcd(b.lc());
    let mut h: Option<BTreeMap<Mono, Int>> = None;
    let mut modulus = Int::ONE;
    let mut cur_lm = Mono::ONE;
    for &p in primes() {
        if a.lc().mod_u64(p) == 0 || b.lc().mod_u64(p) == 0 {
            continue;
        }
        let g = gcd_modp(&to_modp(a, p), &to_modp(b, p), vars, p);
        let lm = g[0].0;
        if lm.is_one() {
            return Poly::one();
        }
        if h.is_some() && lm > cur_lm {
            continue;
        }
        let gm = gamma.mod_u64(p);
        let g: BTreeMap<Mono, u64> = g.into_iter().map(|(m, c)| (m, mulmod(c, gm, p))).collect();
        if h.is_none() || lm < cur_lm {
            let pi = Int::from(p as i64);
            h = Some(g.iter().map(|(m, c)| (*m, symmetric(&Int::from(*c as i64), &pi))).collect());
            modulus = pi;
            cur_lm = lm;
            continue;
        }
        let old = h.take().unwrap();
        let minv = invmod(modulus.mod_u64(p), p);
        let mut keys: Vec<Mono> = old.keys().cloned().collect();
        keys.extend(g.keys().filter(|k| !old.contains_key(k)).cloned());
        let new_mod = modulus.mul(&Int::from(p as i64));
        let mut next = BTreeMap::new();
        for k in keys {
            let hv = old.get(&k).cloned().unwrap_or(Int::ZERO);
            let gv = g.get(&k).cloned().unwrap_or(0);
            let t = mulmod(submod(gv, hv.mod_u64(p), p), minv, p);
            let x = hv.add(&modulus.mul(&Int::from(t as i64)));
            let x = symmetric(&x.div_rem(&new_mod).1.add(&new_mod).div_rem(&new_mod).1, &new_mod);
            if !x.is_zero() {
                next.insert(k, x);
            }
        }
        let stable = next == old;
        modulus = new_mod;
        if stable {
            let cand = Poly::from_terms(next.iter().map(|(m, c)| (*m, c.clone())).collect());
            let (_, cand) = cand.primitive();
            if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                return cand;
            }
        }
        h = Some(next);
    }
    panic!("modular gcd did not converge");
}

fn var_list(mask: u32) -> Vec<usize> {
    (0..MAX_VARS).filter(|i| mask & (1 << i) != 0).collect()
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self, p: u64) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) % (p - 1) + 1
    }
}

/// Upper bounds for the degree of the gcd in each variable, from one modular
/// image per variable. Entry `None` means the probe was inconclusive.
fn degree_probe(a: &Poly, b: &Poly, vars: &[usize]) -> Vec<Option<u16>> {
    let p = primes()[primes().len() - 1];
    let ap = to_modp(a, p);
    let bp = to_modp(b, p);
    let mut rng = Lcg(0x9e3779b97f4a7c15 ^ (a.len() as u64) << 20 ^ b.len() as u64);
    let mut out = Vec::with_capacity(vars.len());
    for &v in vars {
        let mut point = [0u64; MAX_VARS];
        for &w in vars {
            point[w] = rng.next(p);
        }
        let project = |x: &PP| -> (Vec<u64>, usize) {
            let mut u: Vec<u64> = Vec::new();
            let mut deg_full = 0usize;
            for (m, c) in x {
                let mut t = *c;
                for &w in vars {
                    if w != v && m.0[w] > 0 {
                        t = mulmod(t, powmod(point[w], m.0[w] as u64, p), p);
                    }
                }
                let e = m.0[v] as usize;
                deg_full = deg_full.max(e);
                if u.len() <= e {
                    u.resize(e + 1, 0);
                }
                u[e] = addmod(u[e], t, p);
            }
            trim(&mut u);
            (u, deg_full)
        };
        let (ua, da) = project(&ap);
        let (ub, db) = project(&bp);
        if ua.len() != da + 1 || ub.len() != db + 1 || a.degree(v) as usize != da || b.degree(v) as usize != db {
            out.push(None);
            continue;
        }
        let g = uni_gcd(&ua, &ub, p);
        out.push(Some((g.len() - 1) as u16));
    }
    out
}

/// Greatest common divisor with unit content and positive leading coefficient.
///
/// Integer contents of the operands are ignored.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive().1;
    }
    if b.is_zero() {
        return a.primitive().1;
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let m = ma.meet(&mb);
    let a = if ma.is_one() { a.primitive().1 } else { a.div_exact(&Poly::term(ma, Int::ONE)).unwrap().primitive().1 };
    let b = if mb.is_one() { b.primitive().1 } else { b.div_exact(&Poly::term(mb, Int::ONE)).unwrap().primitive().1 };
    let mono = Poly::term(m, Int::ONE);
    if a.is_constant() || b.is_constant() {
        return mono;
    }
    mono.mul(&gcd_core(&a, &b))
}

/// Both inputs primitive, free of monomial content, nonconstant.
fn gcd_core(a: &Poly, b: &Poly) -> Poly {
    let va = a.var_mask();
    let vb = b.var_mask();
    if va & !vb != 0 {
        let v = (va & !vb).trailing_zeros() as usize;
        return gcd_with_coeffs(b, a, v);
    }
    if vb & !va != 0 {
        let v = (vb & !va).trailing_zeros() as usize;
        return gcd_with_coeffs(a, b, v);
    }
    if a == b {
        return a.clone();
    }
    let vars = var_list(va);
    let probe = degree_probe(a, b, &vars);
    if probe.iter().all(|d| *d == Some(0)) {
        return Poly::one();
    }
    if let Some(i) = probe.iter().position(|d| *d == Some(0)) {
        // the gcd does not involve this variable: it divides every coefficient
        let v = vars[i];
        let mut cs: Vec<Poly> = a.coeffs_in(v).into_values().chain(b.coeffs_in(v).into_values()).collect();
        cs.sort_by_key(|c| c.len());
        let mut g = cs[0].primitive().1;
        for c in &cs[1..] {
            if g.is_constant() {
                break;
            }
            g = gcd(&g, c);
        }
        return g;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.div_exact(small).is_some() {
        return small.clone();
    }
    // order variables so the one with the largest degree is the univariate base
    let mut order: Vec<(u16, usize)> = vars.iter().map(|&v| (a.degree(v).min(b.degree(v)), v)).collect();
    order.sort();
    let ordered: Vec<usize> = order.into_iter().map(|(_, v)| v).collect();
    gcd_brown(a, b, &ordered)
}

/// gcd of `a` with every coefficient of `b` with respect to `v` (which `a` lacks).
fn gcd_with_coeffs(a: &Poly, b: &Poly, v: usize) -> Poly {
    let mut cs: Vec<Poly> = b.coeffs_in(v).into_values().collect();
    cs.sort_by_key(|c| c.len());
    let mut g = a.clone();
    for c in &cs {
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}
