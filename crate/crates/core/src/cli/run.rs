//! Subcommand dispatch and JSON reports.

use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::doc::{self, form, load_candidate, load_frame, load_lifting, load_system, row, DocKind, Document};
use super::parse::{parse_expr, Functions};
use crate::backlund::{check_rank1, el_obstructions, mu_epsilon, soliton_propagate, Grid, Seed};
use crate::error::{Error, Result};
use crate::exterior::poincare::potential;
use crate::exterior::{derived_flag, Basis, Form, Pfaffian};
use crate::frameverify::{abstract_invariants, check_exact, check_invariant_locus, check_involutive, restrict_locus, FrameCheckReport};
use crate::ma_invariants::{invariants, ElType, InvariantReport};
use crate::symexpr::Expr;
use crate::variational::{integrating_factor, lagrangian, lagrangian_ratio, phi0, poincare_cartan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Classify,
    Lagrangian,
    VerifyFrame,
    InvariantsAbstract,
    Restrict,
    BacklundObstruct,
    MuEpsilon,
    CheckRank1,
    Derived,
    Soliton,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Lagrangian => "lagrangian",
            Command::VerifyFrame => "verify-frame",
            Command::InvariantsAbstract => "invariants-abstract",
            Command::Restrict => "restrict",
            Command::BacklundObstruct => "backlund-obstruct",
            Command::MuEpsilon => "mu-epsilon",
            Command::CheckRank1 => "check-rank1",
            Command::Derived => "derived",
            Command::Soliton => "soliton",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    /// Base point override `x=..,y=..` for potentials.
    pub base: Option<String>,
    /// Include wall-clock timings (reports are then no longer byte-stable).
    pub timings: bool,
    /// Where to write the soliton grid.
    pub csv: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Options {
        Options { seed: 0, samples: 32, tol: 1e-6, base: None, timings: false, csv: None }
    }
}

/// A finished run: the report and whether every check it performed passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

fn s(e: &Expr) -> Value {
    Value::String(e.to_string())
}

fn exprs(es: &[Expr]) -> Value {
    Value::Array(es.iter().map(s).collect())
}

fn form_json(f: &Form) -> Value {
    Value::String(f.to_string())
}

fn el_type(t: ElType) -> &'static str {
    match t {
        ElType::Positive => "positive",
        ElType::Negative => "negative",
        ElType::Degenerate => "degenerate",
        ElType::Indefinite => "indefinite",
        ElType::NotEl => "not-euler-lagrange",
    }
}

fn invariant_json(r: &InvariantReport) -> Value {
    let mut m = Map::new();
    m.insert("s1".into(), exprs(&r.s1));
    m.insert("s2".into(), exprs(&r.s2));
    m.insert("det_s1".into(), s(&r.det_s1));
    m.insert("euler_lagrange".into(), json!(r.is_euler_lagrange));
    m.insert("wave".into(), json!(r.is_wave));
    m.insert("type".into(), json!(el_type(r.el_type)));
    if let Some(n) = &r.normalization {
        m.insert("normalization".into(), json!(format!("{n:?}")));
    }
    if let Some(e) = &r.evidence {
        m.insert("evidence".into(), serde_json::to_value(e).unwrap_or(Value::Null));
    }
    Value::Object(m)
}

fn expect(doc: &Document, kinds: &[DocKind], cmd: Command) -> Result<()> {
    let k = doc.kind()?;
    if kinds.contains(&k) {
        Ok(())
    } else {
        Err(Error::Input(format!("`{}` does not accept a {k:?} document", cmd.name())))
    }
}

/// Runs one subcommand on a parsed document.
pub fn run(cmd: Command, doc: &Document, opts: &Options) -> Result<Outcome> {
    let start = Instant::now();
    let (mut body, pass) = match cmd {
        Command::Classify => classify(doc, opts)?,
        Command::Lagrangian => lagrangian_cmd(doc, opts)?,
        Command::VerifyFrame => verify_frame(doc)?,
        Command::InvariantsAbstract => invariants_abstract(doc, opts)?,
        Command::Restrict => restrict(doc)?,
        Command::BacklundObstruct => obstruct(doc)?,
        Command::MuEpsilon => mu_eps(doc, opts)?,
        Command::CheckRank1 => rank1(doc, opts)?,
        Command::Derived => derived(doc, opts)?,
        Command::Soliton => soliton(doc, opts)?,
    };
    body.insert("command".into(), json!(cmd.name()));
    body.insert("pass".into(), json!(pass));
    body.insert("seed".into(), json!(opts.seed));
    body.insert("samples".into(), json!(opts.samples));
    body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    if opts.timings {
        body.insert("elapsed_s".into(), json!(start.elapsed().as_secs_f64()));
    }
    Ok(Outcome { report: Value::Object(body), pass })
}

type Body = (Map<String, Value>, bool);

fn classify(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::MongeAmpere], Command::Classify)?;
    let (sys, _) = load_system(doc)?;
    let disc = sys.discriminant();
    let (_, rep) = invariants(&sys, opts.seed, opts.samples)?;
    let mut m = Map::new();
    m.insert("discriminant".into(), s(&disc));
    m.insert("invariants".into(), invariant_json(&rep));
    m.insert("type".into(), json!(el_type(rep.el_type)));
    m.insert("det_s1".into(), s(&rep.det_s1));
    Ok((m, true))
}

fn parse_base(b: &Basis, funcs: &Functions, spec: &str) -> Result<Vec<(usize, Expr)>> {
    let ctx = b.ctx();
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Input(format!("bad base entry `{t}`")))?;
            let a = ctx.lookup(k.trim()).filter(|a| b.coords().is_some_and(|c| c.contains(a))).ok_or_else(|| Error::Input(format!("`{}` is not a chart coordinate", k.trim())))?;
            Ok((a, parse_expr(v, ctx, funcs)?))
        })
        .collect()
}

fn lagrangian_cmd(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::MongeAmpere], Command::Lagrangian)?;
    let (sys, funcs) = load_system(doc)?;
    let (cf, rep) = invariants(&sys, opts.seed, opts.samples)?;
    if !rep.is_euler_lagrange {
        return Err(Error::NotEulerLagrange);
    }
    let phi = phi0(&cf)?;
    let lambda = integrating_factor(&phi)?;
    let pi = poincare_cartan(&cf, &lambda)?;
    let l = lagrangian(&pi)?;
    let mut m = Map::new();
    m.insert("phi0".into(), form_json(&phi));
    m.insert("lambda".into(), s(&lambda));
    m.insert("pi".into(), form_json(&pi));
    m.insert("lagrangian".into(), form_json(&l));
    m.insert("d_lagrangian_equals_pi".into(), json!(l.d()? == pi));
    if let Some(spec) = &opts.base {
        let base = parse_base(&sys.chart, &funcs, spec)?;
        m.insert("phi0_potential".into(), s(&potential(&phi, Some(&base))?));
    }
    let mut pass = l.d()? == pi;
    if let Some(t) = doc.monge_ampere.as_ref().and_then(|ma| ma.lagrangian.as_ref()) {
        let reference = form(&sys.chart, t, &funcs)?;
        let ratio = lagrangian_ratio(&reference, &pi)?;
        pass &= ratio.is_some();
        m.insert("reference_ratio".into(), ratio.as_ref().map_or(Value::Null, s));
    }
    Ok((m, pass))
}

fn frame_json(r: &FrameCheckReport) -> Value {
    let res = |v: &[(String, Form)]| -> Value { v.iter().map(|(n, f)| (n.clone(), form_json(f))).collect::<Map<_, _>>().into() };
    json!({ "residuals": res(&r.residuals), "aux_residuals": res(&r.aux_residuals), "pass": r.pass, "failures": r.failures() })
}

fn verify_frame(doc: &Document) -> Result<Body> {
    expect(doc, &[DocKind::Frame], Command::VerifyFrame)?;
    let (b, funcs) = load_frame(doc)?;
    let r = check_involutive(&b)?;
    let mut pass = r.pass;
    let mut m = Map::new();
    m.insert("frame".into(), frame_json(&r));
    if let Some(inv) = doc.locus.as_ref().and_then(|l| l.invariant.as_ref()) {
        let ok = check_invariant_locus(&b, &parse_expr(inv, b.ctx(), &funcs)?)?;
        pass &= ok;
        m.insert("invariant_locus".into(), json!({ "expression": inv, "invariant": ok }));
    }
    Ok((m, pass))
}

fn invariants_abstract(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::Frame], Command::InvariantsAbstract)?;
    let (b, funcs) = load_frame(doc)?;
    if doc.coframes.is_empty() {
        return Err(Error::Input("no [coframes] to evaluate".into()));
    }
    let mut out = Map::new();
    for (name, cs) in &doc.coframes {
        let rows = cs.rows.iter().map(|t| row(&b, t, &funcs)).collect::<Result<Vec<_>>>()?;
        let (_, rep) = abstract_invariants(&b, rows, opts.seed, opts.samples)?;
        out.insert(name.clone(), invariant_json(&rep));
    }
    let mut m = Map::new();
    m.insert("coframes".into(), Value::Object(out));
    Ok((m, true))
}

fn restrict(doc: &Document) -> Result<Body> {
    expect(doc, &[DocKind::Frame], Command::Restrict)?;
    let (b, funcs) = load_frame(doc)?;
    let locus = doc.locus.as_ref().ok_or_else(|| Error::Input("missing [locus]".into()))?;
    let ctx = b.ctx();
    let subs = locus
        .substitute
        .iter()
        .map(|(k, v)| Ok((ctx.lookup(k).ok_or_else(|| Error::UnknownAtom(k.clone()))?, parse_expr(v, ctx, &funcs)?)))
        .collect::<Result<Vec<_>>>()?;
    let r = restrict_locus(&b, &subs)?;
    let check = check_involutive(&r)?;
    let mut pass = check.pass;
    let mut closed = Map::new();
    for (name, t) in &locus.forms {
        let ok = check_exact(&form(&r, t, &funcs)?)?;
        pass &= ok;
        closed.insert(name.clone(), json!(ok));
    }
    let mut m = Map::new();
    m.insert("structure".into(), json!(doc::render_structure(&r)));
    m.insert("frame".into(), frame_json(&check));
    m.insert("closed".into(), Value::Object(closed));
    Ok((m, pass))
}

fn obstruct(doc: &Document) -> Result<Body> {
    expect(doc, &[DocKind::Backlund], Command::BacklundObstruct)?;
    let l = load_lifting(doc)?;
    let r = el_obstructions(&l);
    let mut m = Map::new();
    m.insert("phi".into(), exprs(&r.phi));
    m.insert("special_relations".into(), json!(r.special_relations));
    m.insert("torsion_relation".into(), json!(r.torsion_relation));
    m.insert("verdict".into(), json!(r.verdict.name()));
    m.insert("annotations".into(), json!(r.annotations));
    Ok((m, true))
}

fn mu_eps(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::Backlund], Command::MuEpsilon)?;
    let (c, _) = load_candidate(doc, opts.seed)?;
    let me = mu_epsilon(&c)?;
    let mut m = Map::new();
    m.insert("epsilon".into(), json!(me.epsilon));
    m.insert("mu".into(), json!(me.mu));
    m.insert("epsilon_mu4".into(), json!(me.rho));
    m.insert("epsilon_mu4_exact".into(), me.rho_exact.as_ref().map_or(Value::Null, s));
    m.insert("special".into(), json!(me.epsilon == -1 && (me.mu - 1.0).abs() < opts.tol));
    m.insert("r".into(), s(&me.r));
    m.insert("pencil".into(), exprs(&me.pencil));
    Ok((m, true))
}

fn rank1(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::Backlund], Command::CheckRank1)?;
    let (c, _) = load_candidate(doc, opts.seed)?;
    let r = check_rank1(&c, opts.seed, opts.samples, opts.tol)?;
    let mut m = Map::new();
    m.insert("jacobian_ranks".into(), json!(r.jacobian_ranks));
    m.insert("numeric_confirmations".into(), json!(r.numeric_confirmations));
    m.insert("condition1".into(), json!(r.condition1));
    m.insert("span_ranks".into(), json!(r.span_ranks));
    m.insert("condition2".into(), json!(r.condition2));
    Ok((m, r.pass))
}

fn flag_json(gens: Vec<Form>) -> Result<Value> {
    Ok(json!(derived_flag(&Pfaffian::new(gens)?)?))
}

fn derived(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::MongeAmpere, DocKind::Frame, DocKind::Pfaffian], Command::Derived)?;
    let mut m = Map::new();
    if doc.kind()? == DocKind::MongeAmpere {
        let (sys, _) = load_system(doc)?;
        let (cf, _) = invariants(&sys, opts.seed, opts.samples)?;
        let gens = |idx: [usize; 3]| idx.iter().map(|&i| cf.omega_form(i)).collect::<Vec<_>>();
        m.insert("I10".into(), flag_json(gens([0, 1, 2]))?);
        m.insert("I01".into(), flag_json(gens([0, 3, 4]))?);
        return Ok((m, true));
    }
    let gens_sec = doc.derived.as_ref().ok_or_else(|| Error::Input("missing [derived]".into()))?;
    let (b, funcs) = if doc.kind()? == DocKind::Frame {
        load_frame(doc)?
    } else {
        let funcs = doc.functions();
        let ctx = doc.chart_context(&funcs)?;
        let coords: Vec<&str> = doc.chart.as_ref().expect("checked").coords.iter().map(String::as_str).collect();
        (Basis::chart(&ctx, &coords)?, funcs)
    };
    let gens = gens_sec.generators.iter().map(|t| form(&b, t, &funcs)).collect::<Result<Vec<_>>>()?;
    m.insert("flag".into(), flag_json(gens)?);
    Ok((m, true))
}

fn soliton(doc: &Document, opts: &Options) -> Result<Body> {
    expect(doc, &[DocKind::Soliton], Command::Soliton)?;
    let sec = doc.soliton.as_ref().expect("checked");
    let grid = Grid { nx: sec.nx, ny: sec.ny, hx: sec.hx, hy: sec.hy, x0: sec.x0, y0: sec.y0 };
    let run = soliton_propagate(&Seed::zero(), sec.lambda, sec.v0, grid, opts.tol)?;
    if let Some(p) = &opts.csv {
        let f = std::fs::File::create(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
        run.write_csv(&mut std::io::BufWriter::new(f)).map_err(|e| Error::Input(e.to_string()))?;
    }
    let pass = run.pde_residual < opts.tol && run.compatibility < opts.tol && run.closed_form_error.is_none_or(|e| e < opts.tol);
    let mut m = Map::new();
    m.insert("pde_residual".into(), json!(run.pde_residual));
    m.insert("compatibility".into(), json!(run.compatibility));
    m.insert("closed_form_error".into(), json!(run.closed_form_error));
    m.insert("grid".into(), json!([sec.nx, sec.ny]));
    Ok((m, pass))
}

/// `key: value` lines for the text format, nested keys joined by dots.
pub fn render_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::String(s) => out.push(format!("{prefix}: {s}")),
            other => out.push(format!("{prefix}: {other}")),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out.join("\n")
}
