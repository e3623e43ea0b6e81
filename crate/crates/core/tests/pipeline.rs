use std::time::Instant;

use monge_backlund::cli::parse::{parse_expr, FnDecl, Functions};
use monge_backlund::ma_invariants::{invariants, ElType, MongeAmpereSystem, CHART};
use monge_backlund::symexpr::{Context, Expr};

fn sys(ctx: &Context, f: &Functions, c: [&str; 5]) -> MongeAmpereSystem {
    let e = c.map(|s| parse_expr(s, ctx, f).unwrap());
    MongeAmpereSystem::new(ctx, e).unwrap()
}

#[test]
fn k_plus_one() {
    let ctx = Context::with_coords(&CHART);
    let f = Functions::new();
    ctx.add_assumption(&parse_expr("1+p^2-q^2", &ctx, &f).unwrap());
    let s = sys(&ctx, &f, ["1", "0", "0", "0", "(1+p^2-q^2)^2"]);
    let (_, rep) = invariants(&s, 0, 32).unwrap();
    assert!(rep.s2.iter().all(|v| v.is_zero()));
    assert_eq!(rep.det_s1, parse_expr("(p^2-q^2+1)/16", &ctx, &f).unwrap());
    assert_eq!(rep.el_type, ElType::Positive);
}

#[test]
fn abcde() {
    let ctx = Context::with_coords(&CHART);
    let f = Functions::new();
    ctx.add_assumption(&parse_expr("2*p^2*z^2+2*p^2+z*q", &ctx, &f).unwrap());
    let t = Instant::now();
    let s = sys(
        &ctx,
        &f,
        [
            "2*q*z*(z^2+1)^3",
            "2*q^2*(z^2+1)^2*(4*p^2*z^3 - q*z^2 + 4*p^2*z + 3*q)",
            "-2*p*q*(z^2+1)^3*(4*p^2*z+q)",
            "(z^2+1)*(4*p^2*z^3+q*z^2+4*p^2*z - q)*(2*p^2*z^2+q*z+2*p^2)",
            "-q^3*(4*p^2*z^5+q*z^4 - 16*p^2*z^3 - 8*q*z^2 - 20*p^2*z - q)",
        ],
    );
    assert_eq!(s.discriminant(), parse_expr("8*q^4*(2*p^2*z^2+2*p^2+z*q)*(z^2+1)^4", &ctx, &f).unwrap());
    let (_, rep) = invariants(&s, 0, 32).unwrap();
    eprintln!("abcde {:?}", t.elapsed());
    assert!(rep.s2.iter().all(|v| v.is_zero()));
    let want = parse_expr(
        "z^2*q^4*(4*p^2*z^5-16*p^2*z^3+q*z^4-20*p^2*z-8*q*z^2-q)^2/(32*(2*p^2*z^2+2*p^2+z*q)^3*(z^2+1)^6)",
        &ctx,
        &f,
    )
    .unwrap();
    assert_eq!(rep.det_s1, want);
    assert_eq!(rep.el_type, ElType::Positive);
}

#[test]
fn wave_and_f_gordon() {
    let ctx = Context::with_coords(&CHART);
    let mut f = Functions::new();
    f.declare("f", FnDecl { derivative: Some("fp".into()), square: None });
    f.declare("fp", FnDecl { derivative: Some("fpp".into()), square: None });
    f.declare("fpp", FnDecl::default());
    let w = MongeAmpereSystem::from_rhs(&ctx, &Expr::zero(&ctx)).unwrap();
    let (_, rep) = invariants(&w, 0, 32).unwrap();
    assert!(rep.is_wave);
    let fz = parse_expr("f(z)", &ctx, &f).unwrap();
    let g = MongeAmpereSystem::from_rhs(&ctx, &fz).unwrap();
    let (_, rep) = invariants(&g, 0, 32).unwrap();
    eprintln!("fgordon s1 {:?}", rep.s1.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    assert!(rep.is_euler_lagrange && !rep.is_wave);
    assert!(rep.det_s1.is_zero());
    assert_eq!(rep.el_type, ElType::Degenerate);
}

#[test]
fn goursat_is_degenerate() {
    let ctx = Context::with_coords(&CHART);
    let f = Functions::new();
    let g = MongeAmpereSystem::from_rhs(&ctx, &parse_expr("2*z/(x+y)^2", &ctx, &f).unwrap()).unwrap();
    let (_, rep) = invariants(&g, 0, 32).unwrap();
    assert!(rep.is_euler_lagrange);
    assert_eq!(rep.el_type, ElType::Degenerate);
}

#[test]
fn k_minus_one_characteristic_derived_flag() {
    use monge_backlund::exterior::{derived_flag, derived_system, Matrix, Pfaffian};
    let ctx = Context::with_coords(&CHART);
    let f = Functions::new();
    let s = sys(&ctx, &f, ["1", "0", "0", "0", "(1+p^2+q^2)^2"]);
    let (cf, _) = invariants(&s, 0, 16).unwrap();
    let i10 = Pfaffian::new((0..3).map(|i| cf.omega_form(i)).collect()).unwrap();
    assert_eq!(derived_flag(&i10).unwrap(), vec![3, 2, 0]);
    // the first derived system is spanned by ω¹, ω²
    let d1 = derived_system(&i10).unwrap();
    let mut rows: Vec<Vec<Expr>> = d1.gens.iter().map(|g| g.components()).collect();
    rows.extend([1, 2].map(|i| cf.rows[i].clone()));
    assert_eq!(Matrix::from_rows(rows).rank(), 2);
    let i01 = Pfaffian::new([0, 3, 4].map(|i| cf.omega_form(i)).to_vec()).unwrap();
    assert_eq!(derived_flag(&i01).unwrap(), vec![3, 2, 0]);
}
