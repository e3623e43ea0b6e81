//! TOML input documents and their translation into contexts, bases and forms.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::parse::{parse_expr, parse_form, FnDecl, Functions};
use crate::backlund::{apply_identities, verify_identity, BacklundCandidate, LiftingData};
use crate::error::{Error, Result};
use crate::exterior::{mask_of, Basis, Form};
use crate::ma_invariants::{MongeAmpereSystem, CHART};
use crate::symexpr::{Context, Expr};

/// A form written as a table from basis monomials (`"dx^dp"`) to coefficients.
pub type FormTable = BTreeMap<String, String>;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub chart: Option<ChartSection>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSection>,
    #[serde(default)]
    pub assumptions: AssumptionSection,
    pub monge_ampere: Option<MongeAmpereSection>,
    pub frame: Option<FrameSection>,
    #[serde(default)]
    pub coframes: BTreeMap<String, CoframeSection>,
    pub locus: Option<LocusSection>,
    #[serde(default)]
    pub forms: BTreeMap<String, FormTable>,
    pub derived: Option<DerivedSection>,
    pub backlund: Option<BacklundSection>,
    pub soliton: Option<SolitonSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSection {
    pub coords: Vec<String>,
    #[serde(default)]
    pub params: Vec<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSection {
    pub derivative: Option<String>,
    pub square: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionSection {
    /// Expressions asserted positive on the working domain.
    #[serde(default)]
    pub positive: Vec<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MongeAmpereSection {
    #[serde(rename = "A")]
    pub a: Option<String>,
    #[serde(rename = "B")]
    pub b: Option<String>,
    #[serde(rename = "C")]
    pub c: Option<String>,
    #[serde(rename = "D")]
    pub d: Option<String>,
    #[serde(rename = "E")]
    pub e: Option<String>,
    /// `z_xy = rhs` shorthand.
    pub rhs: Option<String>,
    /// A reference Lagrangian 2-form to compare against `Π`.
    pub lagrangian: Option<FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub names: Vec<String>,
    #[serde(default)]
    pub aux: Vec<String>,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub index_base: usize,
    /// Scalars assumed nonvanishing; they guard numeric sampling.
    #[serde(default)]
    pub nonzero: Vec<String>,
    /// `"C.i.j.k"` (with `d e^i = -1/2 C^i_jk e^j^e^k`) or `"d.i.j.k"` (direct coefficient).
    #[serde(default)]
    pub structure: BTreeMap<String, String>,
    /// Differential of each aux scalar, by basis element name.
    #[serde(default)]
    pub differentials: BTreeMap<String, FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoframeSection {
    /// Five 1-forms by element name.
    pub rows: Vec<FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusSection {
    pub invariant: Option<String>,
    #[serde(default)]
    pub substitute: BTreeMap<String, String>,
    /// 1-forms on the restricted frame to test for closedness.
    #[serde(default)]
    pub forms: BTreeMap<String, FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedSection {
    /// Pfaffian generators on the document's basis.
    pub generators: Vec<FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSection {
    pub coords: Vec<String>,
    /// Factor coordinate as an expression on `N`.
    #[serde(default)]
    pub map: BTreeMap<String, String>,
    pub theta: FormTable,
    pub omega: Option<FormTable>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftingSection {
    #[serde(rename = "V")]
    pub v: [String; 4],
    #[serde(rename = "W")]
    pub w: [String; 4],
    pub mu: String,
    pub epsilon: i64,
    pub s2: Option<String>,
    pub t4: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacklundSection {
    /// Abstract basis for `N`; otherwise `[chart]` is used.
    pub frame: Option<FrameSection>,
    pub theta: Option<FormTable>,
    pub theta_bar: Option<FormTable>,
    pub omega: Option<FormTable>,
    pub omega_bar: Option<FormTable>,
    pub factor1: Option<FactorSection>,
    pub factor2: Option<FactorSection>,
    /// Rewrites of function atoms (`"sin(2*u)" = "..."`), verified numerically.
    #[serde(default)]
    pub identities: BTreeMap<String, String>,
    pub lifting: Option<LiftingSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSection {
    pub lambda: f64,
    pub v0: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
}

/// The kind of computation a document encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    MongeAmpere,
    Frame,
    Backlund,
    Soliton,
    /// Only `[derived]` generators over a `[chart]`.
    Pfaffian,
}

impl Document {
    pub fn from_toml(s: &str) -> Result<Document> {
        let d: Document = toml::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        d.kind()?;
        Ok(d)
    }

    pub fn load(path: &std::path::Path) -> Result<Document> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Document::from_toml(&s)
    }

    /// Exactly one of the four main sections must be present.
    pub fn kind(&self) -> Result<DocKind> {
        let present: Vec<DocKind> = [
            (self.monge_ampere.is_some(), DocKind::MongeAmpere),
            (self.frame.is_some(), DocKind::Frame),
            (self.backlund.is_some(), DocKind::Backlund),
            (self.soliton.is_some(), DocKind::Soliton),
        ]
        .into_iter()
        .filter_map(|(p, k)| p.then_some(k))
        .collect();
        match present[..] {
            [k] => Ok(k),
            [] if self.derived.is_some() && self.chart.is_some() => Ok(DocKind::Pfaffian),
            [] => Err(Error::Input("document needs one of [monge_ampere], [frame], [backlund], [soliton]".into())),
            _ => Err(Error::Input("[monge_ampere], [frame], [backlund] and [soliton] are mutually exclusive".into())),
        }
    }

    pub fn functions(&self) -> Functions {
        let mut f = Functions::new();
        for (name, d) in &self.functions {
            f.declare(name, FnDecl { derivative: d.derivative.clone(), square: d.square.clone() });
        }
        f
    }

    /// Context holding the chart coordinates and parameters, with assumptions registered.
    pub fn chart_context(&self, funcs: &Functions) -> Result<Context> {
        let chart = self.chart.as_ref().ok_or_else(|| Error::Input("missing [chart]".into()))?;
        let ctx = Context::new();
        for c in &chart.coords {
            ctx.add_coordinate(c)?;
        }
        for p in &chart.params {
            ctx.add_parameter(p)?;
        }
        self.add_assumptions(&ctx, funcs)?;
        Ok(ctx)
    }

    pub fn add_assumptions(&self, ctx: &Context, funcs: &Functions) -> Result<()> {
        for a in &self.assumptions.positive {
            ctx.add_assumption(&parse_expr(a, ctx, funcs)?);
        }
        Ok(())
    }
}

/// The Monge-Ampère system of a `[monge_ampere]` document. Without `[chart]`
/// the coordinates are `x, y, z, p, q`.
pub fn load_system(doc: &Document) -> Result<(MongeAmpereSystem, Functions)> {
    let sec = doc.monge_ampere.as_ref().ok_or_else(|| Error::Input("missing [monge_ampere]".into()))?;
    let funcs = doc.functions();
    let ctx = match &doc.chart {
        Some(_) => doc.chart_context(&funcs)?,
        None => {
            let ctx = Context::with_coords(&CHART);
            doc.add_assumptions(&ctx, &funcs)?;
            ctx
        }
    };
    let p = |s: &Option<String>| s.as_deref().map_or_else(|| Ok(Expr::zero(&ctx)), |s| parse_expr(s, &ctx, &funcs));
    let sys = match &sec.rhs {
        Some(r) => {
            if [&sec.a, &sec.b, &sec.c, &sec.d, &sec.e].iter().any(|c| c.is_some()) {
                return Err(Error::Input("give either rhs or A..E".into()));
            }
            MongeAmpereSystem::from_rhs(&ctx, &parse_expr(r, &ctx, &funcs)?)?
        }
        None => MongeAmpereSystem::new(&ctx, [p(&sec.a)?, p(&sec.b)?, p(&sec.c)?, p(&sec.d)?, p(&sec.e)?])?,
    };
    Ok((sys, funcs))
}

/// Registers a frame's aux scalars and parameters, reusing atoms already present.
pub fn frame_context(sec: &FrameSection, ctx: &Context) -> Result<()> {
    for a in &sec.aux {
        if ctx.lookup(a).is_none() {
            ctx.add_coordinate(a)?;
        }
    }
    for p in &sec.params {
        if ctx.lookup(p).is_none() {
            ctx.add_parameter(p)?;
        }
    }
    Ok(())
}

fn element(names: &[String], name: &str) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| Error::Input(format!("`{name}` is not a coframe element")))
}

/// Builds the abstract basis of a frame section over `ctx`.
pub fn build_frame(sec: &FrameSection, ctx: &Context, funcs: &Functions) -> Result<Basis> {
    frame_context(sec, ctx)?;
    let n = sec.names.len();
    let mut dforms: Vec<BTreeMap<u32, Expr>> = vec![BTreeMap::new(); n];
    for (key, val) in &sec.structure {
        let parts: Vec<&str> = key.split('.').collect();
        let bad = || Error::Input(format!("bad structure key `{key}`"));
        let [tag, i, j, k] = parts[..] else { return Err(bad()) };
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| bad())?;
            v.checked_sub(sec.index_base).filter(|&v| v < n).ok_or_else(bad)
        };
        let (i, j, k) = (idx(i)?, idx(j)?, idx(k)?);
        let Some((s, mask)) = mask_of(&[j, k]) else { return Err(bad()) };
        let mut c = parse_expr(val, ctx, funcs)?;
        match tag {
            "C" => c = c.neg(),
            "d" => {}
            _ => return Err(bad()),
        }
        let c = c.scale(s as i64);
        let slot = dforms[i].entry(mask).or_insert_with(|| Expr::zero(ctx));
        *slot = &*slot + &c;
    }
    for m in &mut dforms {
        m.retain(|_, c| !c.is_zero());
    }
    let mut diffs = Vec::new();
    for a in &sec.aux {
        let atom = ctx.lookup(a).expect("registered above");
        let mut v = vec![Expr::zero(ctx); n];
        if let Some(t) = sec.differentials.get(a) {
            for (name, c) in t {
                v[element(&sec.names, name)?] = parse_expr(c, ctx, funcs)?;
            }
        }
        diffs.push((atom, v));
    }
    for a in sec.differentials.keys() {
        if !sec.aux.contains(a) {
            return Err(Error::Input(format!("differential given for `{a}`, which is not an aux scalar")));
        }
    }
    Basis::frame(ctx, sec.names.clone(), dforms, diffs)
}

/// Parses a form table on `b`.
pub fn form(b: &Basis, t: &FormTable, funcs: &Functions) -> Result<Form> {
    if t.is_empty() {
        return Err(Error::Input("empty form table".into()));
    }
    let terms: Vec<(&String, &String)> = t.iter().collect();
    parse_form(b, &terms, funcs)
}

/// Parses a 1-form table into a coefficient row on `b`.
pub fn row(b: &Basis, t: &FormTable, funcs: &Functions) -> Result<Vec<Expr>> {
    let f = form(b, t, funcs)?;
    if f.degree() != 1 {
        return Err(Error::Input("expected a 1-form".into()));
    }
    Ok(f.components())
}

/// Structure entries of an abstract basis as `"d.i.j.k"` strings, zero-based.
pub fn render_structure(b: &Basis) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for i in 0..b.dim() {
        for (m, c) in b.d_element(i).terms() {
            let idx = crate::exterior::indices(*m);
            out.insert(format!("d.{i}.{}.{}", idx[0], idx[1]), c.to_string());
        }
    }
    out
}

/// The abstract basis of a `[frame]` document on a fresh context.
pub fn load_frame(doc: &Document) -> Result<(Basis, Functions)> {
    let sec = doc.frame.as_ref().ok_or_else(|| Error::Input("missing [frame]".into()))?;
    let funcs = doc.functions();
    let ctx = Context::new();
    frame_context(sec, &ctx)?;
    doc.add_assumptions(&ctx, &funcs)?;
    let b = build_frame(sec, &ctx, &funcs)?;
    Ok((b, funcs))
}

/// Pulls back a factor form along the coordinate map; factor coordinates
/// without a map entry must be coordinates of `n`.
fn factor_form(n: &Basis, sec: &FactorSection, t: &FormTable, funcs: &Functions) -> Result<Form> {
    let ctx = n.ctx();
    let names: Vec<&str> = sec.coords.iter().map(String::as_str).collect();
    let chart = Basis::chart(ctx, &names)?;
    form(&chart, t, funcs)?.pullback(n, &factor_map(n, sec, funcs)?)
}

fn factor_map(n: &Basis, sec: &FactorSection, funcs: &Functions) -> Result<Vec<(usize, Expr)>> {
    let ctx = n.ctx();
    let mut map = Vec::new();
    for (k, v) in &sec.map {
        let a = ctx.lookup(k).filter(|_| sec.coords.contains(k)).ok_or_else(|| Error::Input(format!("map entry `{k}` is not a factor coordinate")))?;
        map.push((a, parse_expr(v, ctx, funcs)?));
    }
    Ok(map)
}

/// The five factor coordinates as functions on `n`.
fn projection(n: &Basis, sec: &FactorSection, funcs: &Functions) -> Result<Vec<Expr>> {
    let ctx = n.ctx();
    let map = factor_map(n, sec, funcs)?;
    let on_n = n.coords().unwrap_or(&[]);
    sec.coords
        .iter()
        .map(|c| {
            let a = ctx.lookup(c).expect("registered");
            match map.iter().find(|(k, _)| *k == a) {
                Some((_, e)) => Ok(e.clone()),
                None if on_n.contains(&a) => Ok(Expr::atom(ctx, a)),
                None => Err(Error::Input(format!("factor coordinate `{c}` has no map to N"))),
            }
        })
        .collect()
}

/// Parsed identity rules `atom = expression`, each confirmed at `samples` points.
pub fn identities(ctx: &Context, t: &BTreeMap<String, String>, funcs: &Functions, seed: u64, samples: usize) -> Result<Vec<(usize, Expr)>> {
    let mut rules = Vec::new();
    for (k, v) in t {
        let lhs = parse_expr(k, ctx, funcs)?;
        let m = lhs.var_mask();
        let atom = (m.count_ones() == 1).then(|| m.trailing_zeros() as usize).filter(|&a| lhs == Expr::atom(ctx, a));
        let Some(a) = atom else {
            return Err(Error::Input(format!("identity left side `{k}` is not a single atom")));
        };
        let rhs = parse_expr(v, ctx, funcs)?;
        if !verify_identity(&lhs, &rhs, seed, samples, 1e-9)? {
            return Err(Error::Input(format!("identity `{k} = {v}` fails numerically")));
        }
        rules.push((a, rhs));
    }
    Ok(rules)
}

/// The Bäcklund candidate of a `[backlund]` document. Forms come either from
/// the section directly (on the abstract frame or the chart) or from the
/// factors, pulled back along their maps.
pub fn load_candidate(doc: &Document, seed: u64) -> Result<(BacklundCandidate, Functions)> {
    let sec = doc.backlund.as_ref().ok_or_else(|| Error::Input("missing [backlund]".into()))?;
    let funcs = doc.functions();
    let b = match &sec.frame {
        Some(f) => {
            let ctx = Context::new();
            frame_context(f, &ctx)?;
            doc.add_assumptions(&ctx, &funcs)?;
            build_frame(f, &ctx, &funcs)?
        }
        None => {
            let ctx = doc.chart_context(&funcs)?;
            let coords: Vec<&str> = doc.chart.as_ref().expect("checked").coords.iter().map(String::as_str).collect();
            Basis::chart(&ctx, &coords)?
        }
    };
    let ctx = b.ctx();
    for f in [&sec.factor1, &sec.factor2].into_iter().flatten() {
        if sec.frame.is_some() {
            return Err(Error::Input("factor maps need a coordinate chart for N".into()));
        }
        if f.coords.len() != 5 {
            return Err(Error::Input("a factor has five coordinates".into()));
        }
        for c in &f.coords {
            if ctx.lookup(c).is_none() {
                ctx.add_coordinate(c)?;
            }
        }
    }
    let rules = identities(ctx, &sec.identities, &funcs, seed, 16)?;
    let pick = |direct: &Option<FormTable>, factor: &Option<FactorSection>, omega: bool, what: &str| -> Result<Option<Form>> {
        let f = match (direct, factor) {
            (Some(t), _) => form(&b, t, &funcs)?,
            (None, Some(fs)) => match (omega, &fs.omega) {
                (false, _) => factor_form(&b, fs, &fs.theta, &funcs)?,
                (true, Some(t)) => factor_form(&b, fs, t, &funcs)?,
                (true, None) => return Ok(None),
            },
            (None, None) if omega => return Ok(None),
            (None, None) => return Err(Error::Input(format!("missing {what}"))),
        };
        Ok(Some(apply_identities(&f, &rules)?))
    };
    let theta = pick(&sec.theta, &sec.factor1, false, "theta")?.expect("required");
    let theta_bar = pick(&sec.theta_bar, &sec.factor2, false, "theta_bar")?.expect("required");
    let mut c = BacklundCandidate::new(theta, theta_bar)?;
    if let (Some(o), Some(ob)) = (pick(&sec.omega, &sec.factor1, true, "omega")?, pick(&sec.omega_bar, &sec.factor2, true, "omega_bar")?) {
        c = c.with_omegas(o, ob)?;
    }
    if let (Some(f1), Some(f2)) = (&sec.factor1, &sec.factor2) {
        c = c.with_projections(projection(&b, f1, &funcs)?, projection(&b, f2, &funcs)?)?;
    }
    Ok((c, funcs))
}

/// Lifting data of a `[backlund.lifting]` table, with its own parameters from `[chart]`.
pub fn load_lifting(doc: &Document) -> Result<LiftingData> {
    let l = doc.backlund.as_ref().and_then(|s| s.lifting.as_ref()).ok_or_else(|| Error::Input("missing [backlund.lifting]".into()))?;
    let funcs = doc.functions();
    let ctx = match &doc.chart {
        Some(_) => doc.chart_context(&funcs)?,
        None => Context::new(),
    };
    let p = |s: &str| parse_expr(s, &ctx, &funcs);
    let four = |a: &[String; 4]| -> Result<[Expr; 4]> { Ok([p(&a[0])?, p(&a[1])?, p(&a[2])?, p(&a[3])?]) };
    let eps = i32::try_from(l.epsilon).map_err(|_| Error::Forbidden(format!("ε = {}", l.epsilon)))?;
    LiftingData::new(four(&l.v)?, four(&l.w)?, p(&l.mu)?, eps, l.s2.as_deref().map(p).transpose()?, l.t4.as_deref().map(p).transpose()?)
}
