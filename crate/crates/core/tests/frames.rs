//! Abstract frames: involutivity, the invariant locus, restricted frames,
//! closedness and invariants of adapted coframes.

use std::path::PathBuf;

use monge_backlund::cli::doc::{build_frame, form, load_frame, row, Document, FrameSection};
use monge_backlund::cli::parse::{parse_expr, Functions};
use monge_backlund::exterior::{Basis, Form};
use monge_backlund::frameverify::{abstract_invariants, check_exact, check_invariant_locus, check_involutive, mutate, restrict_locus, Mutation};
use monge_backlund::ma_invariants::{invariants, ElType, MongeAmpereSystem, CHART};
use monge_backlund::symexpr::{Context, Expr};
use monge_backlund::Error;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn load(name: &str) -> (Document, Basis, Functions) {
    let doc = Document::load(&data(name)).unwrap();
    let (b, f) = load_frame(&doc).unwrap();
    (doc, b, f)
}

fn ex(b: &Basis, f: &Functions, s: &str) -> Expr {
    parse_expr(s, b.ctx(), f).unwrap()
}

fn restricted(doc: &Document, b: &Basis, f: &Functions) -> Basis {
    let ctx = b.ctx();
    let subs: Vec<(usize, Expr)> = doc.locus.as_ref().unwrap().substitute.iter().map(|(k, v)| (ctx.lookup(k).unwrap(), ex(b, f, v))).collect();
    restrict_locus(b, &subs).unwrap()
}

#[test]
fn table1_is_involutive() {
    let (_, b, _) = load("table1.toml");
    let r = check_involutive(&b).unwrap();
    assert_eq!(r.residuals.len(), 6);
    assert_eq!(r.aux_residuals.len(), 3);
    assert!(r.pass, "failures: {:?}", r.failures());
}

#[test]
fn table1_mutations_fail() {
    let (_, b, _) = load("table1.toml");
    let ctx = b.ctx();
    // C^1_12 + 1 means d w1 gains -w1^w2
    let m = Mutation { i: 0, j: 0, k: 1, delta: Expr::int(ctx, -1) };
    let r = check_involutive(&mutate(&b, &m).unwrap()).unwrap();
    assert!(!r.pass);
    assert!(r.failures().contains(&"w1"));
    let mut rng = SplitMix64::seed_from_u64(7);
    let mut seen = Vec::new();
    while seen.len() < 24 {
        let i = rng.random_range(0..6);
        let j = rng.random_range(0..6);
        let k = rng.random_range(0..6);
        if j >= k || seen.iter().any(|m: &Mutation| (m.i, m.j, m.k) == (i, j, k)) {
            continue;
        }
        let d = [-2, -1, 1, 2][rng.random_range(0..4)];
        let m = Mutation { i, j, k, delta: Expr::int(ctx, d) };
        let r = check_involutive(&mutate(&b, &m).unwrap()).unwrap();
        assert!(!r.pass, "mutation {m:?} passed");
        seen.push(m);
    }
}

#[test]
fn flat_frame_passes() {
    let ctx = Context::new();
    let sec = FrameSection { names: (0..4).map(|i| format!("e{i}")).collect(), ..FrameSection::default() };
    let b = build_frame(&sec, &ctx, &Functions::new()).unwrap();
    assert!(check_involutive(&b).unwrap().pass);
}

#[test]
fn invariant_locus() {
    let (doc, b, f) = load("table1.toml");
    let inv = ex(&b, &f, doc.locus.as_ref().unwrap().invariant.as_deref().unwrap());
    assert!(check_invariant_locus(&b, &inv).unwrap());
    assert!(!check_invariant_locus(&b, &ex(&b, &f, "R")).unwrap());
    assert!(check_invariant_locus(&b, &Expr::one(b.ctx())).unwrap());
}

#[test]
fn restricted_frame_is_involutive() {
    let (doc, b, f) = load("table1.toml");
    let r = restricted(&doc, &b, &f);
    assert_eq!(r.differentials().len(), 2);
    assert!(r.differentials().iter().all(|(a, _)| b.ctx().name(*a) != "T"));
    let rep = check_involutive(&r).unwrap();
    assert!(rep.pass, "failures: {:?}", rep.failures());
    // every structure function is free of T
    let t = b.ctx().lookup("T").unwrap();
    assert!((0..6).all(|i| r.d_element(i).terms().values().all(|c| !c.depends_on(t))));
}

#[test]
fn inconsistent_and_identity_substitutions() {
    let (_, b, f) = load("table1.toml");
    let ctx = b.ctx();
    let t = ctx.lookup("T").unwrap();
    let err = restrict_locus(&b, &[(t, ex(&b, &f, "R"))]).unwrap_err();
    assert!(matches!(err, Error::InconsistentSubstitution(ref m) if m.contains("dT mismatch")), "{err}");
    let same = restrict_locus(&b, &[(t, Expr::atom(ctx, t))]).unwrap();
    assert!(same == b);
}

fn coframe_rows(doc: &Document, b: &Basis, f: &Functions, name: &str) -> Vec<Vec<Expr>> {
    doc.coframes[name].rows.iter().map(|t| row(b, t, f).unwrap()).collect()
}

#[test]
fn sigma_and_tau_invariants() {
    let (doc, b, f) = load("table1.toml");
    let e = |s: &str| ex(&b, &f, s);
    let (_, rep) = abstract_invariants(&b, coframe_rows(&doc, &b, &f, "sigma"), 0, 8).unwrap();
    assert_eq!(rep.s1, [e("2*S"), e("-T/R"), e("4*S^2*R/T"), e("-2*S")]);
    assert!(rep.s2.iter().all(Expr::is_zero));
    assert!(rep.det_s1.is_zero());
    assert_eq!(rep.el_type, ElType::Degenerate);
    let (_, rep) = abstract_invariants(&b, coframe_rows(&doc, &b, &f, "tau"), 0, 8).unwrap();
    assert_eq!(rep.s1, [e("-2*R*S"), e("T/R"), e("2*R*(2*S^2*R^2 - T)/T"), e("-2*R*S")]);
    assert!(rep.s2.iter().all(Expr::is_zero));
    assert_eq!(rep.det_s1, e("2*T"));
}

#[test]
fn non_adapted_rows_are_rejected() {
    let (_, b, _) = load("table1.toml");
    let rows: Vec<Vec<Expr>> = (0..5).map(|i| Form::basis_element(&b, i).components()).collect();
    let err = abstract_invariants(&b, rows, 0, 8).unwrap_err();
    assert!(matches!(err, Error::NotAdapted(_)), "{err}");
}

#[test]
fn closedness_of_phi() {
    let (doc, b, f) = load("table1.toml");
    let r = restricted(&doc, &b, &f);
    let forms = &doc.locus.as_ref().unwrap().forms;
    // the printed coefficient of sigma^4 gives a form that is not closed
    assert!(!check_exact(&form(&r, &forms["phi_printed"], &f).unwrap()).unwrap());
    // half of it gives a closed form
    assert!(check_exact(&form(&r, &forms["phi"], &f).unwrap()).unwrap());
    assert!(!check_exact(&Form::basis_element(&b, 0)).unwrap());
    let g = Form::scalar(&b, ex(&b, &f, "R*S/T")).d().unwrap();
    assert!(check_exact(&g).unwrap());
}

#[test]
fn xi_and_eta_blocks_are_involutive() {
    for name in ["xi.toml", "eta.toml"] {
        let (_, b, _) = load(name);
        let r = check_involutive(&b).unwrap();
        assert!(r.pass, "{name}: {:?}", r.failures());
    }
}

#[test]
fn f_gordon_abstract_matches_coordinates() {
    let (doc, b, f) = load("f_gordon_frame.toml");
    assert!(check_involutive(&b).unwrap().pass);
    let (_, rep) = abstract_invariants(&b, coframe_rows(&doc, &b, &f, "identity"), 0, 8).unwrap();
    let fp = ex(&b, &f, "fp(z)");
    assert_eq!(rep.s1, [Expr::zero(b.ctx()), Expr::zero(b.ctx()), fp.neg(), Expr::zero(b.ctx())]);
    let ctx = Context::with_coords(&CHART);
    let g = parse_expr("-f(z)", &ctx, &f).unwrap();
    let half = Expr::rational(&ctx, 1, 2);
    let z = Expr::zero(&ctx);
    let sys = MongeAmpereSystem::new(&ctx, [z.clone(), z.clone(), half, z, g]).unwrap();
    let (_, coord) = invariants(&sys, 0, 8).unwrap();
    for r in [&rep, &coord] {
        assert!(r.s2.iter().all(Expr::is_zero));
        assert!(r.det_s1.is_zero());
        assert!(r.s1.iter().any(|v| !v.is_zero()));
        assert_eq!(r.el_type, ElType::Degenerate);
    }
}

/// Every shipped expression re-parses to itself after canonical rendering.
#[test]
fn data_files_round_trip() {
    for entry in std::fs::read_dir(data("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|s| s.to_str()) != Some("toml") {
            continue;
        }
        let doc = Document::load(&path).unwrap();
        let Some(sec) = &doc.frame else { continue };
        let (b, f) = load_frame(&doc).unwrap();
        let mut all: Vec<&String> = sec.structure.values().collect();
        all.extend(sec.differentials.values().flat_map(|t| t.values()));
        for s in all {
            let e = ex(&b, &f, s);
            assert_eq!(ex(&b, &f, &e.to_string()), e, "{}: {s}", path.display());
        }
    }
}
