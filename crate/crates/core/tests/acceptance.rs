//! Acceptance criteria, one line per criterion.
//!
//! Each criterion runs under a shared lock so that its wall-clock time is
//! measured alone, and writes a `criterion NN PASS|FAIL` line to the real
//! stdout so the line is visible without `--nocapture`.

use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use monge_backlund::backlund::{check_rank1, el_obstructions, mu_epsilon, soliton_propagate, Grid, LiftingData, Seed, SpecialType, Verdict};
use monge_backlund::cli::doc::{form, load_candidate, load_frame, row, Document};
use monge_backlund::cli::parse::{parse_expr, parse_form, FnDecl, Functions};
use monge_backlund::exterior::{derived_flag, Basis, Form, Pfaffian};
use monge_backlund::frameverify::{abstract_invariants, check_exact, check_invariant_locus, check_involutive, mutate, restrict_locus, Mutation};
use monge_backlund::ma_invariants::gauge::transformed_invariants;
use monge_backlund::ma_invariants::{gauge_transform, invariants, ElType, GaugeElement, InvariantReport, MongeAmpereSystem, CHART};
use monge_backlund::symexpr::eval::Evaluator;
use monge_backlund::symexpr::{Context, Expr};
use monge_backlund::variational::{lagrangian_ratio, poincare_cartan, variational};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

static LOCK: Mutex<()> = Mutex::new(());

fn criterion(n: u32, what: &str, limit_s: f64, body: impl FnOnce()) {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(body));
    let secs = t.elapsed().as_secs_f64();
    let ok = r.is_ok() && secs <= limit_s;
    let _ = writeln!(std::io::stdout(), "criterion {n:02} {}: {what} ({secs:.2} s, limit {limit_s} s)", if ok { "PASS" } else { "FAIL" });
    if let Err(e) = r {
        resume_unwind(e);
    }
    assert!(secs <= limit_s, "criterion {n} took {secs:.2} s");
}

fn within(t: Instant, limit_s: u64, what: &str) {
    assert!(t.elapsed() <= Duration::from_secs(limit_s), "{what} took {:?}", t.elapsed());
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn functions() -> Functions {
    let mut f = Functions::new();
    f.declare("f", FnDecl { derivative: Some("fp".into()), square: None });
    f.declare("fp", FnDecl { derivative: Some("fpp".into()), square: None });
    f.declare("fpp", FnDecl::default());
    f
}

struct Ma {
    ctx: Context,
    f: Functions,
    sys: MongeAmpereSystem,
}

impl Ma {
    fn new(c: [&str; 5], assume: Option<&str>) -> Ma {
        let ctx = Context::with_coords(&CHART);
        let f = functions();
        if let Some(a) = assume {
            ctx.add_assumption(&parse_expr(a, &ctx, &f).unwrap());
        }
        let sys = MongeAmpereSystem::new(&ctx, c.map(|s| parse_expr(s, &ctx, &f).unwrap())).unwrap();
        Ma { ctx, f, sys }
    }

    fn rhs(rhs: &str, assume: Option<&str>) -> Ma {
        let ctx = Context::with_coords(&CHART);
        let f = functions();
        if let Some(a) = assume {
            ctx.add_assumption(&parse_expr(a, &ctx, &f).unwrap());
        }
        let sys = MongeAmpereSystem::from_rhs(&ctx, &parse_expr(rhs, &ctx, &f).unwrap()).unwrap();
        Ma { ctx, f, sys }
    }

    fn e(&self, s: &str) -> Expr {
        parse_expr(s, &self.ctx, &self.f).unwrap()
    }

    fn form(&self, t: &[(&str, &str)]) -> Form {
        parse_form(&self.sys.chart, t, &self.f).unwrap()
    }
}

fn k_minus_one() -> Ma {
    Ma::new(["1", "0", "0", "0", "(1+p^2+q^2)^2"], None)
}

fn k_plus_one() -> Ma {
    Ma::new(["1", "0", "0", "0", "(1+p^2-q^2)^2"], Some("1+p^2-q^2"))
}

const G: &str = "(2*p^2*z^2+2*p^2+q*z)";

fn abcde() -> Ma {
    Ma::new(
        [
            "2*q*z*(z^2+1)^3",
            "2*q^2*(z^2+1)^2*(4*p^2*z^3 - q*z^2 + 4*p^2*z + 3*q)",
            "-2*p*q*(z^2+1)^3*(4*p^2*z+q)",
            "(z^2+1)*(4*p^2*z^3+q*z^2+4*p^2*z - q)*(2*p^2*z^2+q*z+2*p^2)",
            "-q^3*(4*p^2*z^5+q*z^4 - 16*p^2*z^3 - 8*q*z^2 - 20*p^2*z - q)",
        ],
        Some(G),
    )
}

#[test]
fn criterion_01_invariants_of_the_examples() {
    criterion(1, "K=-1, K=1, ABCDE: S2 = 0, det S1 as tabulated, types -, +, +", 180.0, || {
        let cases = [
            (k_minus_one(), "-(p^2+q^2+1)/16".to_string(), ElType::Negative),
            (k_plus_one(), "(p^2-q^2+1)/16".to_string(), ElType::Positive),
            (abcde(), format!("z^2*q^4*(4*p^2*z^5-16*p^2*z^3+q*z^4-20*p^2*z-8*q*z^2-q)^2/(32*{G}^3*(z^2+1)^6)"), ElType::Positive),
        ];
        for (m, det, ty) in &cases {
            let t = Instant::now();
            let (_, rep) = invariants(&m.sys, 0, 32).unwrap();
            assert!(rep.s2.iter().all(Expr::is_zero));
            assert_eq!(rep.det_s1, m.e(det));
            assert_eq!(rep.el_type, *ty);
            within(t, 60, det);
        }
    });
}

#[test]
fn criterion_02_wave_and_f_gordon() {
    criterion(2, "wave S1 = S2 = 0; f-Gordon S2 = 0, det S1 = 0, S1 != 0", 10.0, || {
        let (_, rep) = invariants(&Ma::rhs("0", None).sys, 0, 32).unwrap();
        assert!(rep.s1.iter().chain(&rep.s2).all(Expr::is_zero));
        assert!(rep.is_wave);
        let (_, rep) = invariants(&Ma::rhs("f(z)", None).sys, 0, 32).unwrap();
        assert!(rep.s2.iter().all(Expr::is_zero));
        assert!(rep.det_s1.is_zero());
        assert!(rep.s1.iter().any(|v| !v.is_zero()));
        assert!(!rep.is_wave);
        assert_eq!(rep.el_type, ElType::Degenerate);
    });
}

#[test]
fn criterion_03_goursat_and_abcde_types() {
    criterion(3, "Goursat degenerate; ABCDE positive with disc 8q^4(2p^2z^2+2p^2+zq)(z^2+1)^4", 60.0, || {
        let g = Ma::rhs("2*z/(x+y)^2", Some("x+y"));
        let (_, rep) = invariants(&g.sys, 0, 32).unwrap();
        assert!(rep.is_euler_lagrange);
        assert!(rep.det_s1.is_zero());
        assert_eq!(rep.el_type, ElType::Degenerate);
        let m = abcde();
        assert_eq!(m.sys.discriminant(), m.e(&format!("8*q^4*{G}*(z^2+1)^4")));
        let (_, rep) = invariants(&m.sys, 0, 32).unwrap();
        assert_eq!(rep.el_type, ElType::Positive);
    });
}

fn reference_pi(m: &Ma, g: &str) -> Form {
    m.form(&[("dx^dy^dz", "4"), ("dz^dp^dq", &format!("4/{g}^2")), ("dx^dp^dq", &format!("-4*p/{g}^2")), ("dy^dp^dq", &format!("-4*q/{g}^2"))])
}

#[test]
fn criterion_04_variational_data() {
    criterion(4, "phi0 and lambda for K=+-1; dLambda = Pi; reference Lagrangians for K=+-1 and ABCDE", 120.0, || {
        for (m, g, sq, dp) in [(k_minus_one(), "(1+p^2+q^2)", "q", "2"), (k_plus_one(), "(1+p^2-q^2)", "-q", "-2")] {
            let (cf, _) = invariants(&m.sys, 0, 16).unwrap();
            let v = variational(&cf).unwrap();
            assert_eq!(v.phi0, m.form(&[("dp", &format!("p/{g}")), ("dq", &format!("{sq}/{g}"))]));
            assert_eq!(v.lambda, m.e(g));
            assert_eq!(v.lagrangian.d().unwrap(), v.pi);
            assert_eq!(v.pi, reference_pi(&m, g));
            let lp = m.form(&[("dx^dy", "4*z"), ("dp^dq", &format!("4*z/{g}^2")), ("dx^dq", &format!("-2/{g}")), ("dy^dp", &format!("{dp}/{g}"))]);
            assert_eq!(lp.d().unwrap(), v.pi);
        }

        let m = abcde();
        let t = Instant::now();
        let (cf, _) = invariants(&m.sys, 0, 16).unwrap();
        let v = variational(&cf).unwrap();
        assert_eq!(v.lagrangian.d().unwrap(), v.pi);
        let lam = m.e(&format!("q^2*(4*p^2*z^5 - 16*p^2*z^3 + q*z^4 - 20*p^2*z - 8*q*z^2-q)^2/({G}^2*(z^2+1)^4)"));
        assert!(v.lambda.div(&lam).unwrap().is_constant());
        // the root introduced by the coframe construction
        let root = m.e("m");
        assert_eq!(&root * &root, m.e(&format!("2*{G}")));
        let sigma = format!(
            "(-8*p^3*z^6 + (-16*p^4*x - 16*p^3*q*y - 4*p*q)*z^5 + (-12*p^2*q*x - 4*p*q^2*y - 24*p^3)*z^4 + (-32*p^4*x-32*p^3*q*y-3*q^2*x - 8*p*q)*z^3 + (-12*p^2*q*x - 8*p*q^2*y - 24*p^3)*z^2 + (-16*p^4*x - 16*p^3*q*y+q^2*x - 4*p*q)*z - 4*p*q^2*y - 8*p^3)/(2*(z^2+1)*q^2*{G})"
        );
        let pre = format!("8*m/{G}");
        let lp = m.form(&[
            ("dy^dp", &format!("{pre}*4*(z^2+1)")),
            ("dz^dp", &format!("{pre}*(p*x+2*q*y)*(8*p^2*z+2*q)*(z^2+1)/(q*{G})")),
            ("dx^dq", &format!("-{pre}*z/q")),
            ("dx^dy", &format!("{pre}*2*q*(z^2-1)/(z^2+1)")),
            ("dz^dq", &format!("{pre}*{sigma}")),
        ]);
        assert_eq!(lp.d().unwrap(), poincare_cartan(&cf, &lam).unwrap());
        assert_eq!(lagrangian_ratio(&lp, &v.pi).unwrap(), Some(lam.div(&v.lambda).unwrap()));
        within(t, 120, "ABCDE Lagrangian");
    });
}

fn load(name: &str) -> (Document, Basis, Functions) {
    let doc = Document::load(&data(name)).unwrap();
    let (b, f) = load_frame(&doc).unwrap();
    (doc, b, f)
}

fn restricted(doc: &Document, b: &Basis, f: &Functions) -> Basis {
    let ctx = b.ctx();
    let subs: Vec<(usize, Expr)> =
        doc.locus.as_ref().unwrap().substitute.iter().map(|(k, v)| (ctx.lookup(k).unwrap(), parse_expr(v, ctx, f).unwrap())).collect();
    restrict_locus(b, &subs).unwrap()
}

#[test]
fn criterion_05_table1_and_mutations() {
    criterion(5, "table1 frame d^2 residuals vanish; 24 structure mutations are all detected", 300.0, || {
        let (_, b, _) = load("table1.toml");
        let r = check_involutive(&b).unwrap();
        assert_eq!(r.residuals.len() + r.aux_residuals.len(), 9);
        assert!(r.residuals.iter().chain(&r.aux_residuals).all(|(_, f)| f.is_zero()));
        assert!(r.pass);
        let ctx = b.ctx();
        let mut rng = SplitMix64::seed_from_u64(2024);
        let mut seen: Vec<(usize, usize, usize)> = Vec::new();
        while seen.len() < 24 {
            let (i, j, k) = (rng.random_range(0..6), rng.random_range(0..6), rng.random_range(0..6));
            if j >= k || seen.contains(&(i, j, k)) {
                continue;
            }
            let delta = Expr::int(ctx, [-2, -1, 1, 2][rng.random_range(0..4)]);
            let m = Mutation { i, j, k, delta };
            assert!(!check_involutive(&mutate(&b, &m).unwrap()).unwrap().pass, "{m:?} passed");
            seen.push((i, j, k));
        }
    });
}

#[test]
fn criterion_06_invariant_locus() {
    criterion(6, "T - 2R^2S^2 = 0 is invariant and the restricted frame is involutive", 60.0, || {
        let (doc, b, f) = load("table1.toml");
        let inv = doc.locus.as_ref().unwrap().invariant.as_deref().unwrap();
        assert_eq!(parse_expr(inv, b.ctx(), &f).unwrap(), parse_expr("T - 2*R^2*S^2", b.ctx(), &f).unwrap());
        assert!(check_invariant_locus(&b, &parse_expr(inv, b.ctx(), &f).unwrap()).unwrap());
        let r = restricted(&doc, &b, &f);
        assert!(check_involutive(&r).unwrap().pass);
    });
}

fn coframe(doc: &Document, b: &Basis, f: &Functions, name: &str) -> Vec<Vec<Expr>> {
    doc.coframes[name].rows.iter().map(|t| row(b, t, f).unwrap()).collect()
}

#[test]
fn criterion_07_sigma_and_tau_coframes() {
    criterion(7, "sigma/tau: S1 and S1bar as tabulated, S2 = S2bar = 0, det 0 and 2T", 120.0, || {
        let (doc, b, f) = load("table1.toml");
        let e = |s: &str| parse_expr(s, b.ctx(), &f).unwrap();
        let (_, rep) = abstract_invariants(&b, coframe(&doc, &b, &f, "sigma"), 0, 8).unwrap();
        assert_eq!(rep.s1, [e("2*S"), e("-T/R"), e("4*S^2*R/T"), e("-2*S")]);
        assert!(rep.s2.iter().all(Expr::is_zero));
        assert!(rep.det_s1.is_zero());
        let (_, rep) = abstract_invariants(&b, coframe(&doc, &b, &f, "tau"), 0, 8).unwrap();
        assert_eq!(rep.s1, [e("-2*R*S"), e("T/R"), e("2*R*(2*S^2*R^2 - T)/T"), e("-2*R*S")]);
        assert!(rep.s2.iter().all(Expr::is_zero));
        assert_eq!(rep.det_s1, e("2*T"));
    });
}

#[test]
fn criterion_08_closed_form_and_blocks() {
    criterion(8, "printed phi is not closed (ledgered), corrected phi is closed; xi and eta blocks involutive", 120.0, || {
        let (doc, b, f) = load("table1.toml");
        let r = restricted(&doc, &b, &f);
        let forms = &doc.locus.as_ref().unwrap().forms;
        let printed = check_exact(&form(&r, &forms["phi_printed"], &f).unwrap()).unwrap();
        let _ = writeln!(std::io::stdout(), "criterion 08 note: printed phi closed = {printed} (expected false, recorded in the decision ledger)");
        assert!(!printed);
        assert!(check_exact(&form(&r, &forms["phi"], &f).unwrap()).unwrap());
        for name in ["xi.toml", "eta.toml"] {
            let (_, b, _) = load(name);
            assert!(check_involutive(&b).unwrap().pass, "{name}");
        }
    });
}

#[test]
fn criterion_09_derived_flag() {
    criterion(9, "K=-1 characteristic system I10 has derived flag 3 -> 2 -> 0", 30.0, || {
        let m = k_minus_one();
        let (cf, _) = invariants(&m.sys, 0, 16).unwrap();
        let i10 = Pfaffian::new((0..3).map(|i| cf.omega_form(i)).collect()).unwrap();
        assert_eq!(derived_flag(&i10).unwrap(), vec![3, 2, 0]);
    });
}

#[test]
fn criterion_10_mu_epsilon() {
    criterion(10, "special frame gives eps*mu^4 = -1; sine-Gordon gives mu = 1, eps = -1 and passes check_rank1", 60.0, || {
        let (c, _) = load_candidate(&Document::load(&data("clelland.toml")).unwrap(), 0).unwrap();
        let me = mu_epsilon(&c).unwrap();
        assert_eq!(me.rho_exact, Some(Expr::int(c.basis.ctx(), -1)));
        assert_eq!(f64::from(me.epsilon) * me.mu.powi(4), -1.0);
        let (c, _) = load_candidate(&Document::load(&data("sine_gordon_bt.toml")).unwrap(), 0).unwrap();
        let me = mu_epsilon(&c).unwrap();
        assert_eq!((me.mu, me.epsilon), (1.0, -1));
        let r = check_rank1(&c, 0, 8, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
    });
}

/// Independent integer evaluation of the obstructions and the resulting class.
fn oracle(v: [i64; 4], w: [i64; 4], mu: i64, eps: i64, st: Option<(i64, i64)>) -> &'static str {
    let m4 = mu.pow(4);
    let phi = [eps * w[0] - m4 * v[0], w[1] - m4 * v[1], m4 * w[3] - v[3], m4 * w[1] - v[1]];
    if phi.iter().any(|&p| p != 0) {
        return "inconsistent";
    }
    if eps == 1 || mu != 1 {
        return "not-special";
    }
    let rel = w[0] == -v[0] && w[1] == v[1] && w[3] == v[3];
    let tor = st.is_none_or(|(s, t)| v[2] + w[2] + 2 * s * t == 0);
    if !rel || !tor {
        return "inconsistent";
    }
    match (v[1] != 0, v[0] * v[3] != 0, v[0] == 0 && v[3] == 0) {
        (true, _, _) => "III",
        (false, true, _) => "I",
        (false, false, true) => "IIa",
        _ => "IIb",
    }
}

fn lifting(ctx: &Context, v: [i64; 4], w: [i64; 4], mu: i64, eps: i64, st: Option<(i64, i64)>) -> LiftingData {
    let e = |x: i64| Expr::int(ctx, x);
    LiftingData::new(v.map(e), w.map(e), e(mu), eps as i32, st.map(|p| e(p.0)), st.map(|p| e(p.1))).unwrap()
}

#[test]
fn criterion_11_lifting_obstructions() {
    criterion(11, "1000 random liftings match the integer oracle; hand cases I, IIa, IIb, III, eps = 1 inconsistency", 10.0, || {
        let ctx = Context::new();
        let mut rng = SplitMix64::seed_from_u64(99);
        let small = |rng: &mut SplitMix64| rng.random_range(-3i64..=3);
        let mut seen = std::collections::BTreeSet::new();
        for n in 0..1000 {
            let mut v = [0; 4].map(|_| small(&mut rng));
            let mut w = [0; 4].map(|_| small(&mut rng));
            let mode = n % 5;
            let mu = if mode == 4 { 1 } else { rng.random_range(1i64..=3) };
            let eps = if mu == 1 || rng.random_bool(0.5) { -1 } else { 1 };
            let st = rng.random_bool(0.5).then(|| (small(&mut rng), small(&mut rng)));
            // steer a share of the draws onto consistent data so every class appears
            match mode {
                1 => w = [-v[0], v[1], w[2], v[3]],
                2 => {
                    let m4 = mu.pow(4);
                    v = [v[0], 0, v[2], m4 * v[3]];
                    w = [eps * m4 * v[0], 0, w[2], v[3] / m4];
                }
                3 => {
                    w = [-v[0], v[1], w[2], v[3]];
                    if let Some((s, t)) = st {
                        w[2] = -v[2] - 2 * s * t;
                    }
                }
                4 => {
                    v = [0, 0, v[2], 0];
                    w = [0, 0, -v[2] - st.map_or(0, |(s, t)| 2 * s * t), 0];
                }
                _ => {}
            }
            let got = el_obstructions(&lifting(&ctx, v, w, mu, eps, st)).verdict;
            let want = oracle(v, w, mu, eps, st);
            assert_eq!(got.name(), want, "V = {v:?}, W = {w:?}, mu = {mu}, eps = {eps}, s,t = {st:?}");
            seen.insert(want);
        }
        assert_eq!(seen.len(), 6, "{seen:?}");

        let case = |v, w, mu, eps, st| el_obstructions(&lifting(&ctx, v, w, mu, eps, st)).verdict;
        assert_eq!(case([1, 0, 5, 2], [-1, 0, -11, 2], 1, -1, Some((1, 3))), Verdict::Special(SpecialType::I));
        assert_eq!(case([0, 0, 5, 0], [0, 0, -5, 0], 1, -1, None), Verdict::Special(SpecialType::IIa));
        assert_eq!(case([1, 0, 0, 0], [-1, 0, 0, 0], 1, -1, None), Verdict::Special(SpecialType::IIb));
        assert_eq!(case([1, 2, 3, -4], [-1, 2, 9, -4], 1, -1, None), Verdict::Special(SpecialType::III));
        assert_eq!(case([0, 1, 0, 0], [0, 16, 0, 0], 2, 1, None), Verdict::Inconsistent);
    });
}

#[test]
fn criterion_12_soliton() {
    criterion(12, "one Backlund step from u = 0, lambda = 1, 200x200, h = 0.02: all errors below 1e-6", 5.0, || {
        let grid = Grid { nx: 200, ny: 200, hx: 0.02, hy: 0.02, x0: 0.0, y0: 0.0 };
        let run = soliton_propagate(&Seed::zero(), 1.0, std::f64::consts::FRAC_PI_2, grid, 1e-9).unwrap();
        assert!(run.pde_residual < 1e-6, "pde {}", run.pde_residual);
        assert!(run.compatibility < 1e-6, "compatibility {}", run.compatibility);
        assert!(run.closed_form_error.unwrap() < 1e-6, "closed form {:?}", run.closed_form_error);
    });
}

fn random_expr(rng: &mut SplitMix64, atoms: &[&str], depth: u32) -> String {
    if depth == 0 || rng.random_range(0..3) == 0 {
        return if rng.random_bool(0.7) { atoms[rng.random_range(0..atoms.len())].to_string() } else { rng.random_range(1..5).to_string() };
    }
    let a = random_expr(rng, atoms, depth - 1);
    match rng.random_range(0..7) {
        0 => format!("({a})+({})", random_expr(rng, atoms, depth - 1)),
        1 => format!("({a})-({})", random_expr(rng, atoms, depth - 1)),
        2 => format!("({a})*({})", random_expr(rng, atoms, depth - 1)),
        3 => format!("({a})/(1+({})^2)", random_expr(rng, atoms, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("exp({a})"),
        _ => format!("atan({a})"),
    }
}

fn random_form(rng: &mut SplitMix64, b: &Basis, deg: usize) -> Form {
    let atoms: Vec<&str> = CHART.to_vec();
    let mut items = Vec::new();
    for _ in 0..rng.random_range(1..4) {
        let mut idx: Vec<usize> = (0..5).collect();
        while idx.len() > deg {
            idx.remove(rng.random_range(0..idx.len()));
        }
        items.push((idx, parse_expr(&random_expr(rng, &atoms, 2), b.ctx(), &Functions::new()).unwrap()));
    }
    Form::from_terms(b, deg, items).unwrap()
}

fn sign(b: &Basis, n: usize) -> Expr {
    Expr::int(b.ctx(), if n % 2 == 0 { 1 } else { -1 })
}

#[test]
fn criterion_13_property_suites() {
    criterion(13, "gauge equivariance (100 gauges), d^2/Leibniz/graded commutativity (200 forms), finite differences", 120.0, || {
        // gauge equivariance
        let m = k_minus_one();
        let (cf, rep) = invariants(&m.sys, 0, 16).unwrap();
        let ctx = &m.ctx;
        let r = |n: i64| Expr::int(ctx, n);
        let mut rng = SplitMix64::seed_from_u64(5);
        let mut gauges = 0;
        while gauges < 100 {
            let g = if gauges == 0 {
                GaugeElement::J
            } else {
                let a: [i64; 4] = [0; 4].map(|_| rng.random_range(-3..=3));
                let b: [i64; 3] = [0; 3].map(|_| rng.random_range(-3..=3));
                let det = a[0] * a[3] - a[1] * a[2];
                if det == 0 || b[0] == 0 {
                    continue;
                }
                let b22 = Expr::rational(ctx, det + b[1] * b[2], b[0]);
                GaugeElement::diag([[r(a[0]), r(a[1])], [r(a[2]), r(a[3])]], [[r(b[0]), r(b[1])], [r(b[2]), b22]]).unwrap()
            };
            let cf2 = gauge_transform(&cf, &g).unwrap();
            let rep2 = InvariantReport::from_coframe(&cf2, 0, 16).unwrap();
            let (w1, w2) = transformed_invariants(&g, &rep.s1, &rep.s2).unwrap();
            assert_eq!(rep2.s1, w1);
            assert_eq!(rep2.s2, w2);
            assert_eq!(rep2.el_type, rep.el_type);
            gauges += 1;
        }

        // exterior algebra laws
        for _ in 0..200 {
            let ctx = Context::with_coords(&CHART);
            let b = Basis::chart(&ctx, &CHART).unwrap();
            let (da, db) = (rng.random_range(0..=2), rng.random_range(0..=2));
            let a = random_form(&mut rng, &b, da);
            let c = random_form(&mut rng, &b, db);
            assert!(a.d().unwrap().d().unwrap().is_zero());
            let lhs = a.wedge(&c).unwrap().d().unwrap();
            let rhs = a.d().unwrap().wedge(&c).unwrap().add(&a.wedge(&c.d().unwrap()).unwrap().scale(&sign(&b, da))).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(a.wedge(&c).unwrap(), c.wedge(&a).unwrap().scale(&sign(&b, da * db)));
        }

        // symbolic derivatives against a five-point stencil
        let central = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let mut checked = 0;
        while checked < 50 {
            let ctx = Context::with_coords(&CHART);
            let s = random_expr(&mut rng, &CHART, 3);
            let e = parse_expr(&s, &ctx, &Functions::new()).unwrap();
            let probe: Vec<(&str, f64)> = CHART.iter().map(|c| (*c, 0.5)).collect();
            // beyond this size the stencil's round-off (eps·|f|/h) exceeds the tolerance
            if e.eval_at(&probe).map_or(true, |v| v.abs() > 1e4) {
                continue;
            }
            checked += 1;
            for _ in 0..10 {
                let pt: Vec<f64> = (0..5).map(|_| rng.random_range(-0.9..0.9)).collect();
                let at = |k: usize, t: f64| {
                    let mut ev = Evaluator::new(&ctx);
                    for (i, c) in CHART.iter().enumerate() {
                        ev.set_named(c, if i == k { t } else { pt[i] }).unwrap();
                    }
                    ev
                };
                for k in 0..5 {
                    let sym = at(k, pt[k]).eval(&e.diff(ctx.lookup(CHART[k]).unwrap()).unwrap()).unwrap();
                    let num = central(&|t| at(k, t).eval(&e).unwrap(), pt[k], 1e-3);
                    assert!((sym - num).abs() <= 1e-6 * sym.abs().max(1.0), "{s} d/d{}: {sym} vs {num}", CHART[k]);
                }
            }
        }
    });
}
