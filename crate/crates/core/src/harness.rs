//! Exhaustive verification suites over a loaded model, the splitting
//! dependence probe, and orbit tables, all producing JSON-serializable reports.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use serde::Serialize;
use serde_json::{json, Value};

use crate::actions::{pi0_act, pi0_element, pi0_lifts, pi0_of_cm_point, ActionError, Actions, CmPoint, TorusModel};
use crate::cm::{CmContext, CmType};
use crate::config::Model;
use crate::group::{transfer_with_section, Elem};
use crate::lattice::{AbElem, AbHom, FinAb};
use crate::plectic::{GaloisContext, PlecticElement};
use crate::recip::{RecipError, RecipFlags, RecipModel, Splitting};

pub const SCHEMA_VERSION: u32 = 1;
const MAX_COUNTEREXAMPLES: usize = 5;
/// Per CM type, the full product `Cl_K × I_K × I_R` is used up to this size.
const DENSE_POINTS: u128 = 16;
const SPLITTING_CAP: u128 = 4096;

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize, Clone, Debug)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    pub checked: u64,
    pub failures: u64,
    pub counterexamples: Vec<Value>,
}

#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub model: String,
    pub chi_f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<RecipFlags>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    pub timing_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} on model {}", self.command, self.model);
        if let Some(chi) = &self.chi_f {
            let _ = writeln!(out, "chi_F = {chi}");
        }
        if let Some(f) = &self.flags {
            let _ = writeln!(
                out,
                "flags: top_cartesian={} bottom_cartesian={} sign_bijection={}",
                f.top_cartesian, f.bottom_cartesian, f.sign_bijection
            );
        }
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = write!(out, "{tag}  {:<12} {}", c.suite, c.name);
            match c.status {
                Status::Skipped => {
                    let _ = write!(out, ": {}", c.reason.as_deref().unwrap_or(""));
                    if let Some(f) = &c.flag {
                        let _ = write!(out, " [flag {f}]");
                    }
                }
                _ => {
                    let _ = write!(out, " ({} checked", c.checked);
                    if c.failures > 0 {
                        let _ = write!(out, ", {} failed", c.failures);
                    }
                    let _ = write!(out, ")");
                }
            }
            out.push('\n');
            for cex in &c.counterexamples {
                let _ = writeln!(out, "      {cex}");
            }
        }
        match self.command.as_str() {
            "orbits" => render_orbits(&mut out, &self.data),
            "chi-dependence" => render_chi(&mut out, &self.data),
            _ => {}
        }
        let (p, f, s) = self.checks.iter().fold((0, 0, 0), |(p, f, s), c| match c.status {
            Status::Pass => (p + 1, f, s),
            Status::Fail => (p, f + 1, s),
            Status::Skipped => (p, f, s + 1),
        });
        let _ = writeln!(out, "{p} passed, {f} failed, {s} skipped ({} ms)", self.timing_ms);
        out
    }
}

fn names(v: &Value) -> String {
    let xs: Vec<&str> = v.as_array().map(|a| a.iter().filter_map(Value::as_str).collect()).unwrap_or_default();
    format!("{{{}}}", xs.join(","))
}

fn render_orbits(out: &mut String, data: &Value) {
    let Some(groups) = data.as_object() else { return };
    for (g, table) in groups {
        let _ = writeln!(out, "{g} orbits on {} CM types: sizes {}", table["cm_types"], table["sizes"]);
        for o in table["orbits"].as_array().into_iter().flatten() {
            let _ = writeln!(out, "  size {} representative {}", o["size"], names(&o["representative"]));
        }
    }
}

fn render_chi(out: &mut String, data: &Value) {
    let _ = writeln!(
        out,
        "{} admissible splittings; Taniyama values vary: {} ({} of {} (α, Φ) pairs)",
        data["splittings"], data["taniyama_varies"], data["taniyama_varying_pairs"], data["taniyama_pairs"]
    );
    for t in data["tori"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "  torus {}: CM subgroup varies {}, CM-point orbits vary {}, π₀ action invariant {}",
            t["torus"].as_str().unwrap_or("?"),
            t["cm_subgroup_varies"],
            t["cm_point_orbits_vary"],
            t["pi0_action_invariant"]
        );
    }
    for s in data["per_splitting"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "  chi_F {}{}: sign compatible {}",
            s["chi_f"].as_str().unwrap_or("?"),
            if s["canonical"] == true { " (canonical)" } else { "" },
            s["sign_compatible"]
        );
    }
}

struct Tally {
    suite: String,
    name: String,
    checked: u64,
    failures: u64,
    cex: Vec<Value>,
}

impl Tally {
    fn new(suite: &str, name: impl Into<String>) -> Self {
        Tally { suite: suite.into(), name: name.into(), checked: 0, failures: 0, cex: Vec::new() }
    }

    fn check(&mut self, ok: bool, cex: impl FnOnce() -> Value) {
        if ok {
            self.checked += 1;
        } else {
            self.fail_with(cex());
        }
    }

    fn fail_with(&mut self, cex: Value) {
        self.checked += 1;
        self.failures += 1;
        if self.cex.len() < MAX_COUNTEREXAMPLES {
            self.cex.push(cex);
        }
    }

    fn done(self) -> Check {
        Check {
            suite: self.suite,
            name: self.name,
            status: if self.failures > 0 { Status::Fail } else { Status::Pass },
            reason: None,
            flag: None,
            checked: self.checked,
            failures: self.failures,
            counterexamples: self.cex,
        }
    }
}

fn skipped(suite: &str, name: impl Into<String>, reason: impl Into<String>, flag: Option<&str>) -> Check {
    Check {
        suite: suite.into(),
        name: name.into(),
        status: Status::Skipped,
        reason: Some(reason.into()),
        flag: flag.map(String::from),
        checked: 0,
        failures: 0,
        counterexamples: Vec::new(),
    }
}

fn failed(suite: &str, name: impl Into<String>, err: impl fmt::Display) -> Check {
    let mut t = Tally::new(suite, name);
    t.fail_with(json!({ "error": err.to_string() }));
    t.done()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    ProdMap,
    HalfTransfer,
    Taniyama,
    CmAction,
    Pi0,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::ProdMap, Suite::HalfTransfer, Suite::Taniyama, Suite::CmAction, Suite::Pi0];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProdMap => "prodmap",
            Suite::HalfTransfer => "halftransfer",
            Suite::Taniyama => "taniyama",
            Suite::CmAction => "cmaction",
            Suite::Pi0 => "pi0",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected one of prodmap, halftransfer, taniyama, cmaction, pi0)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupChoice {
    Galois,
    Plectic,
}

impl FromStr for GroupChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "galois" => Ok(GroupChoice::Galois),
            "plectic" => Ok(GroupChoice::Plectic),
            _ => Err(format!("unknown group `{s}` (expected galois or plectic)")),
        }
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Plectic group elements with an index for composition lookups.
struct Elements {
    list: Vec<PlecticElement>,
    index: HashMap<PlecticElement, usize>,
}

impl Elements {
    fn new(ctx: &GaloisContext) -> Result<Self, String> {
        let list = ctx.enumerate().map_err(|e| e.to_string())?;
        let index = list.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(Elements { list, index })
    }

    fn product(&self, ctx: &GaloisContext, i: usize, j: usize) -> usize {
        let ab = ctx.compose(&self.list[i], &self.list[j]).expect("same context");
        self.index[&ab]
    }
}

fn repr(ctx: &GaloisContext, a: &PlecticElement) -> Value {
    serde_json::to_value(ctx.to_repr(a)).expect("plain data")
}

fn type_json(cm: &CmContext, phi: &CmType) -> Value {
    json!(cm.type_names(phi))
}

// ---------------------------------------------------------------- prodmap

pub fn prodmap_checks(ctx: &GaloisContext) -> Vec<Check> {
    const S: &str = "prodmap";
    let els = match Elements::new(ctx) {
        Ok(e) => e,
        Err(e) => return vec![failed(S, "enumerate plectic group", e)],
    };
    let g = ctx.gamma();
    let hf_ab = ctx.hf_ab().group();
    let p: Vec<AbElem> = els.list.iter().map(|a| ctx.product_map(a).expect("same context")).collect();
    let mut out = Vec::new();

    let mut t = Tally::new(S, "P is independent of the section");
    let shifts = ctx.h_f().members().to_vec();
    for tuple in (0..ctx.r()).map(|_| shifts.iter().copied()).multi_cartesian_product() {
        let other = ctx.rebased(&tuple).expect("shift lies in H_F");
        for (a, pa) in els.list.iter().zip(&p) {
            let map = ctx.as_map(a).expect("same context");
            let b = other.factor(&map).expect("plectic maps factor in any section");
            let pb = other.product_map(&b).expect("same context");
            t.check(&pb == pa, || {
                json!({ "alpha": repr(ctx, a), "section": other.section().iter().map(|&s| g.name(s)).collect::<Vec<_>>(),
                        "p": pa, "p_other": pb })
            });
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "P is a homomorphism");
    for i in 0..els.list.len() {
        for j in 0..els.list.len() {
            let k = els.product(ctx, i, j);
            let sum = hf_ab.add(&p[i], &p[j]);
            t.check(p[k] == sum, || json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]) }));
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "embedding of Galois elements is a homomorphism");
    for a in g.elements() {
        let ea = ctx.embed(a);
        let map = ctx.as_map(&ea).expect("same context");
        t.check(g.elements().all(|x| map[x.0] == g.mul(a, x)), || json!({ "gamma": g.name(a), "issue": "not left translation" }));
        for b in g.elements() {
            let lhs = ctx.embed(g.mul(a, b));
            let rhs = ctx.compose(&ea, &ctx.embed(b)).expect("same context");
            t.check(lhs == rhs, || json!({ "gamma": g.name(a), "delta": g.name(b) }));
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "P on Galois elements is the transfer");
    for a in g.elements() {
        let pe = ctx.product_map(&ctx.embed(a)).expect("same context");
        let v = ctx.transfer(a);
        t.check(pe == v, || json!({ "gamma": g.name(a), "p": pe, "transfer": v }));
    }
    out.push(t.done());

    let name = if g.is_abelian() {
        "transfer matches the power map"
    } else {
        "transfer is independent of the coset representatives"
    };
    let mut t = Tally::new(S, name);
    let index = ctx.sigma().len() as i64;
    let sections = if g.is_abelian() { Vec::new() } else { ctx.sigma().all_sections() };
    for a in g.elements() {
        let v = ctx.transfer(a);
        if g.is_abelian() {
            let oracle = ctx.hf_ab().proj(g.pow(a, index));
            t.check(v == oracle, || json!({ "gamma": g.name(a), "transfer": v, "power": oracle }));
        } else {
            for s in &sections {
                let w = transfer_with_section(ctx.sigma(), ctx.hf_ab(), s, a);
                t.check(v == w, || json!({ "gamma": g.name(a), "transfer": v, "other": w }));
            }
        }
    }
    out.push(t.done());
    out
}

// ----------------------------------------------------------- halftransfer

pub fn halftransfer_checks(cm: &CmContext) -> Vec<Check> {
    const S: &str = "halftransfer";
    let ctx = cm.base();
    let g = ctx.gamma();
    let els = match Elements::new(ctx) {
        Ok(e) => e,
        Err(e) => return vec![failed(S, "enumerate plectic group", e)],
    };
    let types = cm.enumerate_cm_types();
    let tindex: HashMap<&CmType, usize> = types.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let w = cm.canonical_section();
    let hk = cm.hk_ab().group();
    let mut out = Vec::new();

    let mut t = Tally::new(S, "explicit action on Σ_K agrees with the coset action");
    for a in &els.list {
        for rho in 0..cm.sigma_k().len() {
            let x = cm.act_on_sigma_k(a, rho).expect("same context");
            let y = cm.act_on_sigma_k_via_map(a, rho).expect("same context");
            t.check(x == y, || json!({ "alpha": repr(ctx, a), "coset": cm.coset_name(rho), "formula": x, "map": y }));
        }
    }
    out.push(t.done());

    let mut act = vec![vec![0usize; types.len()]; els.list.len()];
    let mut big_f = vec![vec![Vec::new(); types.len()]; els.list.len()];
    for (i, a) in els.list.iter().enumerate() {
        for (k, phi) in types.iter().enumerate() {
            act[i][k] = tindex[&cm.act_on_cm_type(a, phi).expect("CM types map to CM types")];
            match cm.half_transfer(a, phi, &w) {
                Ok(v) => big_f[i][k] = v,
                Err(e) => return vec![failed(S, "half transfer is defined", e)],
            }
        }
    }

    let mut t = Tally::new(S, "cocycle relation");
    for i in 0..els.list.len() {
        for j in 0..els.list.len() {
            let ij = els.product(ctx, i, j);
            for k in 0..types.len() {
                let rhs = hk.add(&big_f[i][act[j][k]], &big_f[j][k]);
                t.check(big_f[ij][k] == rhs, || {
                    json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]),
                            "phi": type_json(cm, &types[k]), "lhs": big_f[ij][k], "rhs": rhs })
                });
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "independent of the equivariant section");
    for other in cm.all_sections() {
        for (i, a) in els.list.iter().enumerate() {
            for (k, phi) in types.iter().enumerate() {
                match cm.half_transfer(a, phi, &other) {
                    Ok(v) => t.check(v == big_f[i][k], || {
                        json!({ "alpha": repr(ctx, a), "phi": type_json(cm, phi),
                                "w": other.reps().iter().map(|&e| g.name(e)).collect::<Vec<_>>() })
                    }),
                    Err(e) => t.fail_with(json!({ "error": e.to_string() })),
                }
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "restriction formula");
    let hf = ctx.hf_ab().group();
    for (i, a) in els.list.iter().enumerate() {
        let pa = ctx.product_map(a).expect("same context");
        for (k, phi) in types.iter().enumerate() {
            let m = cm.m_vector(phi, &types[act[i][k]]);
            let lhs = cm.res().apply(&big_f[i][k]);
            let rhs = hf.add(&pa, &cm.conj_sum(&m));
            t.check(lhs == rhs, || json!({ "alpha": repr(ctx, a), "phi": type_json(cm, phi), "m": m, "lhs": lhs, "rhs": rhs }));
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "agrees with Tate's half transfer on Galois elements");
    for gamma in g.elements() {
        let i = els.index[&ctx.embed(gamma)];
        for (k, phi) in types.iter().enumerate() {
            match cm.tate_half_transfer(gamma, phi, &w) {
                Ok(v) => t.check(v == big_f[i][k], || json!({ "gamma": g.name(gamma), "phi": type_json(cm, phi) })),
                Err(e) => t.fail_with(json!({ "error": e.to_string() })),
            }
            let direct = cm.galois_act_on_cm_type(gamma, phi).expect("same context");
            t.check(direct == types[act[i][k]], || json!({ "gamma": g.name(gamma), "phi": type_json(cm, phi), "issue": "type action" }));
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, "complex conjugations are independent of the section");
    for s in ctx.sigma().all_sections() {
        let c = cm.complex_conjugations_for(&s);
        t.check(c == cm.complex_conjugations(), || json!({ "section": s.iter().map(|&e| g.name(e)).collect::<Vec<_>>() }));
    }
    out.push(t.done());
    out
}

// --------------------------------------------------------------- taniyama

fn needs_top(model: &RecipModel, suite: &str, names: &[&str]) -> Option<Vec<Check>> {
    if model.flags().top_cartesian {
        return None;
    }
    let why = format!(
        "top square not Cartesian ({})",
        model.flags().top_witness.as_deref().unwrap_or("no witness")
    );
    Some(names.iter().map(|n| skipped(suite, *n, why.clone(), Some("top_cartesian"))).collect())
}

pub fn splitting_checks(model: &RecipModel, split: &Splitting) -> Vec<Check> {
    const S: &str = "taniyama";
    let cm = model.cm();
    let hf = cm.base().hf_ab().group();
    let chi = split.chi_f();
    let mut out = Vec::new();
    let mut t = Tally::new(S, "splitting is a section of rec_F");
    let id = model.rec_f().compose(chi).map(|c| c.same_map(&AbHom::identity(hf))).unwrap_or(false);
    t.check(id, || json!({ "chi_f": split.fingerprint() }));
    out.push(t.done());

    let mut t = Tally::new(S, "splitting is compatible with the cyclotomic character");
    let g_ab = cm.base().gamma_ab().group();
    for e in g_ab.basis_elements() {
        let lhs = chi.apply(&model.v_fq().apply(&e));
        let rhs = model.i_fq().apply(&model.chi_cyc().apply(&e));
        t.check(lhs == rhs, || json!({ "generator": e, "lhs": lhs, "rhs": rhs }));
    }
    out.push(t.done());

    let name = "splitting inverts sign_F on complex conjugations";
    if model.flags().sign_bijection {
        let mut t = Tally::new(S, name);
        let signs = FinAb::elementary_two(cm.r());
        for (x, c) in cm.complex_conjugations().iter().enumerate() {
            let expected = model.sign_f().apply(&signs.basis(x));
            t.check(chi.apply(c) == expected, || json!({ "x": x }));
        }
        out.push(t.done());
    } else {
        out.push(skipped(S, name, "sign_F does not map bijectively onto the complex conjugations", Some("sign_bijection")));
    }
    out
}

pub fn taniyama_checks(model: &RecipModel, split: &Splitting) -> Vec<Check> {
    const S: &str = "taniyama";
    let mut out = splitting_checks(model, split);
    let names = [
        "Taniyama element exists and is unique",
        "Taniyama element satisfies its defining equations",
        "Taniyama element of the identity is trivial",
        "twisted cocycle relation",
        "agrees with the Galois characterization",
    ];
    if let Some(sk) = needs_top(model, S, &names) {
        out.extend(sk);
        return out;
    }
    let cm = model.cm();
    let ctx = cm.base();
    let g = ctx.gamma();
    let els = match Elements::new(ctx) {
        Ok(e) => e,
        Err(e) => {
            out.push(failed(S, "enumerate plectic group", e));
            return out;
        }
    };
    let types = cm.enumerate_cm_types();
    let tindex: HashMap<&CmType, usize> = types.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let w = cm.canonical_section();
    let i_k = model.i_k();
    let hk = cm.hk_ab().group();

    let mut t = Tally::new(S, names[0]);
    let mut f = vec![vec![None; types.len()]; els.list.len()];
    for (i, a) in els.list.iter().enumerate() {
        for (k, phi) in types.iter().enumerate() {
            match model.taniyama(split, a, phi) {
                Ok(v) => {
                    t.check(true, || Value::Null);
                    f[i][k] = Some(v);
                }
                Err(e) => t.fail_with(json!({ "alpha": repr(ctx, a), "phi": type_json(cm, phi), "error": e.to_string() })),
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, names[1]);
    let mut big_f = vec![vec![Vec::new(); types.len()]; els.list.len()];
    let mut act = vec![vec![0; types.len()]; els.list.len()];
    for (i, a) in els.list.iter().enumerate() {
        for (k, phi) in types.iter().enumerate() {
            big_f[i][k] = cm.half_transfer(a, phi, &w).expect("half transfer is defined");
            act[i][k] = tindex[&cm.act_on_cm_type(a, phi).expect("same context")];
            if let Some(v) = &f[i][k] {
                let ok = model.rec_k().apply(v) == big_f[i][k]
                    && model.n_kf().apply(v) == split.apply(&cm.res().apply(&big_f[i][k]));
                t.check(ok, || json!({ "alpha": repr(ctx, a), "phi": type_json(cm, phi), "f": v }));
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, names[2]);
    let e = els.index[&ctx.identity()];
    for k in 0..types.len() {
        t.check(f[e][k].as_ref().is_some_and(|v| i_k.is_zero(v)), || json!({ "phi": type_json(cm, &types[k]) }));
    }
    out.push(t.done());

    let mut t = Tally::new(S, names[3]);
    for i in 0..els.list.len() {
        for j in 0..els.list.len() {
            let ij = els.product(ctx, i, j);
            for k in 0..types.len() {
                let (Some(fij), Some(fi), Some(fj)) = (&f[ij][k], &f[i][act[j][k]], &f[j][k]) else { continue };
                let rec_ok = model.rec_k().apply(fij) == hk.add(&big_f[i][act[j][k]], &big_f[j][k]);
                let full_ok = *fij == i_k.add(fi, fj);
                t.check(rec_ok && full_ok, || {
                    json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]), "phi": type_json(cm, &types[k]),
                            "rec_level": rec_ok })
                });
            }
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, names[4]);
    let mut skip_reason = None;
    for gamma in g.elements() {
        let i = els.index[&ctx.embed(gamma)];
        for (k, phi) in types.iter().enumerate() {
            match model.taniyama_galois(gamma, phi) {
                Ok(v) => t.check(f[i][k].as_ref() == Some(&v), || {
                    json!({ "gamma": g.name(gamma), "phi": type_json(cm, phi), "plectic": f[i][k], "galois": v })
                }),
                Err(RecipError::NotUnique(_)) if !model.flags().bottom_cartesian => {
                    skip_reason = Some("Galois characterization is not unique: bottom square not Cartesian");
                }
                Err(e) => t.fail_with(json!({ "gamma": g.name(gamma), "phi": type_json(cm, phi), "error": e.to_string() })),
            }
        }
    }
    match skip_reason {
        Some(r) if t.failures == 0 => out.push(skipped(S, names[4], r, Some("bottom_cartesian"))),
        _ => out.push(t.done()),
    }
    out
}

// --------------------------------------------------------------- cmaction

fn is_full(model: &RecipModel, torus: &TorusModel) -> bool {
    torus.i_r().order() == model.i_f().order() && torus.vz().order() == 1u128 << model.cm().r()
}

fn is_minimal(model: &RecipModel, torus: &TorusModel) -> bool {
    torus.i_r().same_as(&model.i_fq().image())
}

/// The generated CM points for a torus: every type, and either the full
/// product of `Cl_K`, `I_K`, `I_R` or a sparse spanning set of it.
pub fn test_points(model: &RecipModel, torus: &TorusModel) -> Vec<CmPoint> {
    let cl = model.cl().codomain();
    let i_k = model.i_k();
    let i_f = model.i_f();
    let i_r = torus.i_r();
    let mut triples: Vec<(AbElem, AbElem, AbElem)> = Vec::new();
    if cl.order() * i_k.order() * i_r.order() <= DENSE_POINTS {
        let deltas = i_r.elements();
        for a in cl.elements() {
            for e in i_k.elements() {
                for d in &deltas {
                    triples.push((a.clone(), e.clone(), d.clone()));
                }
            }
        }
    } else {
        triples.push((cl.zero(), i_k.zero(), i_f.zero()));
        for b in cl.basis_elements() {
            triples.push((b, i_k.zero(), i_f.zero()));
        }
        for b in i_k.basis_elements() {
            triples.push((cl.zero(), b, i_f.zero()));
        }
        for u in i_r.gens() {
            triples.push((cl.zero(), i_k.zero(), u.clone()));
        }
        let sa = cl.sum(cl.basis_elements().iter());
        let se = i_k.sum(i_k.basis_elements().iter());
        let sd = i_f.sum(i_r.gens().iter());
        triples.push((sa, se, sd));
        triples.sort();
        triples.dedup();
    }
    let r = model.cm().r();
    let mut out = Vec::new();
    for phi in model.cm().enumerate_cm_types() {
        for (a, e, d) in &triples {
            out.push(CmPoint { phi: phi.clone(), a: a.clone(), sgn: vec![1; r], delta: d.clone(), e: e.clone() });
        }
    }
    out
}

fn point_json(model: &RecipModel, p: &CmPoint) -> Value {
    json!({ "phi": model.cm().type_names(&p.phi), "a": p.a, "delta": p.delta, "e": p.e })
}

/// Indices of elements of the CM subgroup for a torus.
fn cm_group(acts: &Actions, torus: &TorusModel, els: &Elements) -> Result<Vec<usize>, ActionError> {
    let mut out = Vec::new();
    for (i, a) in els.list.iter().enumerate() {
        if acts.in_cm_group(torus, a)? {
            out.push(i);
        }
    }
    Ok(out)
}

pub fn membership_checks(model: &RecipModel, split: &Splitting, torus: &TorusModel) -> Vec<Check> {
    const S: &str = "cmaction";
    let tn = torus.name();
    let acts = Actions::new(model, split);
    let ctx = model.cm().base();
    let g = ctx.gamma();
    let els = match Elements::new(ctx) {
        Ok(e) => e,
        Err(e) => return vec![failed(S, "enumerate plectic group", e)],
    };
    let members = match cm_group(&acts, torus, &els) {
        Ok(m) => m,
        Err(e) => return vec![failed(S, format!("[{tn}] CM subgroup membership"), e)],
    };
    let set: HashSet<usize> = members.iter().copied().collect();
    let mut out = Vec::new();

    let mut t = Tally::new(S, format!("[{tn}] CM subgroup is closed under products and inverses"));
    for &i in &members {
        let inv = ctx.inverse(&els.list[i]).expect("same context");
        t.check(set.contains(&els.index[&inv]), || json!({ "alpha": repr(ctx, &els.list[i]), "issue": "inverse" }));
        for &j in &members {
            let ij = els.product(ctx, i, j);
            t.check(set.contains(&ij), || json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]) }));
        }
    }
    out.push(t.done());

    let mut t = Tally::new(S, format!("[{tn}] Galois elements lie in the CM subgroup"));
    for gamma in g.elements() {
        t.check(set.contains(&els.index[&ctx.embed(gamma)]), || json!({ "gamma": g.name(gamma) }));
    }
    out.push(t.done());

    let name = format!("[{tn}] full torus: CM subgroup is the whole plectic group");
    if torus.i_r().order() == model.i_f().order() {
        let mut t = Tally::new(S, name);
        for (i, a) in els.list.iter().enumerate() {
            t.check(set.contains(&i), || json!({ "alpha": repr(ctx, a) }));
        }
        out.push(t.done());
    } else {
        out.push(skipped(S, name, "I_R is a proper subgroup of I_F", None));
    }

    let name = format!("[{tn}] minimal torus: membership iff P(α) lies in the image of V_FQ");
    if is_minimal(model, torus) {
        let mut t = Tally::new(S, name);
        let im_v = model.v_fq().image();
        for (i, a) in els.list.iter().enumerate() {
            let pred = im_v.contains(&ctx.product_map(a).expect("same context"));
            t.check(pred == set.contains(&i), || json!({ "alpha": repr(ctx, a), "member": set.contains(&i), "predicate": pred }));
        }
        out.push(t.done());
    } else {
        out.push(skipped(S, name, "I_R is larger than the image of i_FQ", None));
    }
    out
}

pub fn cmaction_checks(model: &RecipModel, split: &Splitting, torus: &TorusModel) -> Vec<Check> {
    const S: &str = "cmaction";
    let tn = torus.name();
    let mut out = membership_checks(model, split, torus);
    let names = [
        format!("[{tn}] identity acts trivially"),
        format!("[{tn}] group action law"),
        format!("[{tn}] extends the Galois action"),
        format!("[{tn}] sign condition"),
        format!("[{tn}] m-vector bookkeeping"),
        format!("[{tn}] level class is preserved"),
    ];
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    if let Some(sk) = needs_top(model, S, &name_refs) {
        out.extend(sk);
        return out;
    }
    let cm = model.cm();
    let ctx = cm.base();
    let g = ctx.gamma();
    let els = Elements::new(ctx).expect("enumerated above");
    let mut acts = Actions::new(model, split);
    let members = match cm_group(&acts, torus, &els) {
        Ok(m) => m,
        Err(e) => {
            out.push(failed(S, names[1].clone(), e));
            return out;
        }
    };
    let points = test_points(model, torus);

    let mut t = Tally::new(S, names[0].clone());
    for p in &points {
        match acts.plectic_act(torus, &ctx.identity(), p) {
            Ok((q, _)) => t.check(&q == p, || point_json(model, p)),
            Err(e) => t.fail_with(json!({ "point": point_json(model, p), "error": e.to_string() })),
        }
    }
    out.push(t.done());

    // first[i][k] = members[i] acting on points[k]
    let mut sign = Tally::new(S, names[3].clone());
    let mut mvec = Tally::new(S, names[4].clone());
    let mut level = Tally::new(S, names[5].clone());
    let mut law = Tally::new(S, names[1].clone());
    let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(n, &i)| (i, n)).collect();
    let mut first: Vec<Vec<Option<CmPoint>>> = vec![vec![None; points.len()]; members.len()];
    for (n, &i) in members.iter().enumerate() {
        let a = &els.list[i];
        for (k, p) in points.iter().enumerate() {
            match acts.plectic_act(torus, a, p) {
                Ok((q, trace)) => {
                    if trace.sign_checked {
                        sign.check(true, || Value::Null);
                    }
                    let independent = independent_m(cm, a, &p.phi);
                    mvec.check(independent == trace.m, || {
                        json!({ "alpha": repr(ctx, a), "phi": type_json(cm, &p.phi), "trace": trace.m, "independent": independent })
                    });
                    let (l0, l1) = (acts.level_class(torus, p), acts.level_class(torus, &q));
                    level.check(l0 == l1, || json!({ "alpha": repr(ctx, a), "point": point_json(model, p), "before": l0, "after": l1 }));
                    first[n][k] = Some(q);
                }
                Err(ActionError::SignViolation { expected, got }) => {
                    sign.fail_with(json!({ "alpha": repr(ctx, a), "point": point_json(model, p), "expected": expected, "chi": got }));
                }
                Err(e) => law.fail_with(json!({ "alpha": repr(ctx, a), "point": point_json(model, p), "error": e.to_string() })),
            }
        }
    }
    for &i in &members {
        for (m, &j) in members.iter().enumerate() {
            let ij = els.product(ctx, i, j);
            for k in 0..points.len() {
                let Some(q) = &first[m][k] else { continue };
                let lhs = match pos.get(&ij) {
                    Some(&nij) => first[nij][k].clone(),
                    None => {
                        law.fail_with(json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]), "issue": "product left the CM subgroup" }));
                        continue;
                    }
                };
                let rhs = acts.plectic_act(torus, &els.list[i], q).map(|x| x.0);
                match (lhs, rhs) {
                    (Some(l), Ok(r)) => law.check(l == r, || {
                        json!({ "alpha": repr(ctx, &els.list[i]), "beta": repr(ctx, &els.list[j]), "point": point_json(model, &points[k]),
                                "lhs": point_json(model, &l), "rhs": point_json(model, &r) })
                    }),
                    (_, Err(ActionError::SignViolation { .. })) | (None, _) => {}
                    (_, Err(e)) => law.fail_with(json!({ "error": e.to_string() })),
                }
            }
        }
    }
    out.push(law.done());

    let mut t = Tally::new(S, names[2].clone());
    let mut galois_unavailable = false;
    for gamma in g.elements() {
        let eg = ctx.embed(gamma);
        for p in &points {
            let gal = match acts.galois_act(gamma, p) {
                Ok(q) => q,
                Err(ActionError::Recip(RecipError::NotUnique(_))) if !model.flags().bottom_cartesian => {
                    galois_unavailable = true;
                    continue;
                }
                Err(e) => {
                    t.fail_with(json!({ "gamma": g.name(gamma), "error": e.to_string() }));
                    continue;
                }
            };
            let l0 = acts.level_class(torus, p);
            level.check(l0 == acts.level_class(torus, &gal), || json!({ "gamma": g.name(gamma), "point": point_json(model, p) }));
            match acts.plectic_act(torus, &eg, p) {
                Ok((q, _)) => t.check(q == gal, || {
                    json!({ "gamma": g.name(gamma), "point": point_json(model, p), "plectic": point_json(model, &q), "galois": point_json(model, &gal) })
                }),
                Err(e) => t.fail_with(json!({ "gamma": g.name(gamma), "error": e.to_string() })),
            }
        }
    }
    if galois_unavailable && t.failures == 0 {
        out.push(skipped(S, names[2].clone(), "Galois Taniyama element not unique: bottom square not Cartesian", Some("bottom_cartesian")));
    } else {
        out.push(t.done());
    }
    if split.sign_compatible() {
        out.push(sign.done());
    } else {
        out.push(skipped(
            S,
            names[3].clone(),
            "splitting does not invert sign_F on complex conjugations, so the sign class is not predicted",
            Some("sign_compatible"),
        ));
    }
    out.push(mvec.done());
    out.push(level.done());
    out
}

/// `m_x` from the coset action on members of `Φ`, not from the type formula.
fn independent_m(cm: &CmContext, a: &PlecticElement, phi: &CmType) -> Vec<u8> {
    let ctx = cm.base();
    let mut m = vec![0u8; cm.r()];
    for &rho in phi.members() {
        let target = cm.act_on_sigma_k_via_map(a, rho).expect("same context");
        let y = ctx.sigma().coset_of(cm.sigma_k().coset(target)[0]);
        m[y] = u8::from(!phi.members().contains(&target));
    }
    m
}

// -------------------------------------------------------------------- pi0

pub fn pi0_checks(model: &RecipModel, split: &Splitting, torus: &TorusModel) -> Vec<Check> {
    const S: &str = "pi0";
    let tn = torus.name();
    let names = [
        format!("[{tn}] torus model contract"),
        format!("[{tn}] CM subgroup embeds in the π₀ plectic group"),
        format!("[{tn}] π₀ equivariance"),
        format!("[{tn}] Galois elements act by multiplication with i(χ_cyc)"),
        format!("[{tn}] full torus: every plectic element acts on π₀"),
    ];
    let mut out = Vec::new();
    let cm = model.cm();
    let ctx = cm.base();
    let g = ctx.gamma();

    let mut t = Tally::new(S, names[0].clone());
    let contract = torus.from_parts(model, torus.quot().clone(), torus.mu().clone(), torus.iota_q().clone());
    match contract {
        Ok(_) => t.check(true, || Value::Null),
        Err(e) => t.fail_with(json!({ "error": e.to_string() })),
    }
    out.push(t.done());

    let els = match Elements::new(ctx) {
        Ok(e) => e,
        Err(e) => {
            out.push(failed(S, "enumerate plectic group", e));
            return out;
        }
    };

    let name = names[4].clone();
    if is_full(model, torus) {
        let mut t = Tally::new(S, name);
        for a in &els.list {
            match pi0_lifts(model, torus, a) {
                Ok(l) => t.check(!l.is_empty(), || json!({ "alpha": repr(ctx, a) })),
                Err(e) => t.fail_with(json!({ "error": e.to_string() })),
            }
        }
        out.push(t.done());
    } else {
        out.push(skipped(S, name, "torus is not the full Weil restriction", None));
    }

    let rest = [names[1].clone(), names[2].clone(), names[3].clone()];
    let rest_refs: Vec<&str> = rest.iter().map(String::as_str).collect();
    if let Some(sk) = needs_top(model, S, &rest_refs) {
        out.extend(sk);
        return out;
    }
    let mut acts = Actions::new(model, split);
    let members = match cm_group(&acts, torus, &els) {
        Ok(m) => m,
        Err(e) => {
            out.push(failed(S, names[1].clone(), e));
            return out;
        }
    };
    let points = test_points(model, torus);

    let mut emb = Tally::new(S, names[1].clone());
    let mut eq = Tally::new(S, names[2].clone());
    for &i in &members {
        let a = &els.list[i];
        let lifted = acts.to_pi0(torus, a);
        let pi0a = match lifted {
            Ok(x) => {
                emb.check(true, || Value::Null);
                x
            }
            Err(e) => {
                emb.fail_with(json!({ "alpha": repr(ctx, a), "error": e.to_string(),
                                      "p": ctx.product_map(a).ok(), "lambda": acts.lambda(torus, a).ok() }));
                continue;
            }
        };
        for p in &points {
            let before = match pi0_of_cm_point(torus, p) {
                Ok(x) => x,
                Err(e) => {
                    eq.fail_with(json!({ "point": point_json(model, p), "error": e.to_string() }));
                    continue;
                }
            };
            let after = acts.plectic_act(torus, a, p).map_err(|e| e.to_string()).and_then(|(q, _)| {
                pi0_of_cm_point(torus, &q).map_err(|e| e.to_string())
            });
            match after {
                Ok(after) => {
                    let expected = pi0_act(torus, &pi0a, &before);
                    eq.check(after == expected, || {
                        json!({ "alpha": repr(ctx, a), "point": point_json(model, p), "pi0_after": after, "expected": expected })
                    });
                }
                Err(e) => eq.fail_with(json!({ "alpha": repr(ctx, a), "point": point_json(model, p), "error": e })),
            }
        }
    }
    out.push(emb.done());
    out.push(eq.done());

    let mut t = Tally::new(S, names[3].clone());
    for gamma in g.elements() {
        let gbar = ctx.gamma_ab().proj(gamma);
        let expected = torus.class_of_rational(&model.chi_cyc().apply(&gbar));
        let via = acts.lambda(torus, &ctx.embed(gamma));
        t.check(via.as_ref() == Ok(&expected), || json!({ "gamma": g.name(gamma), "lambda": via.ok(), "expected": expected }));
        let as_pi0 = pi0_element(model, torus, ctx.embed(gamma), expected.clone());
        t.check(as_pi0.is_ok(), || json!({ "gamma": g.name(gamma), "issue": "class does not lie over P" }));
        for p in &points {
            let Ok(before) = pi0_of_cm_point(torus, p) else { continue };
            match acts.galois_act(gamma, p) {
                Ok(q) => {
                    let after = pi0_of_cm_point(torus, &q);
                    let want = torus.p_r().add(&before, &expected);
                    t.check(after.as_ref() == Ok(&want), || json!({ "gamma": g.name(gamma), "point": point_json(model, p) }));
                }
                Err(ActionError::Recip(RecipError::NotUnique(_))) if !model.flags().bottom_cartesian => {}
                Err(e) => t.fail_with(json!({ "gamma": g.name(gamma), "error": e.to_string() })),
            }
        }
    }
    out.push(t.done());
    out
}

// ----------------------------------------------------------------- verify

fn recip_or_skip(model: &Model, suite: Suite) -> Result<(&RecipModel, Splitting), Check> {
    let s = suite.name();
    let Some(r) = &model.recip else {
        return Err(skipped(s, "reciprocity model", "model has no reciprocity data", None));
    };
    match r.canonical_splitting() {
        Ok(split) => Ok((r, split)),
        Err(e) => Err(failed(s, "admissible splitting exists", e)),
    }
}

pub fn verify(model: &Model, suites: &[Suite]) -> Report {
    let start = Instant::now();
    let mut checks = Vec::new();
    let canonical = model.recip.as_ref().and_then(|r| r.canonical_splitting().ok());
    for &suite in suites {
        match suite {
            Suite::ProdMap => checks.extend(prodmap_checks(model.cm.base())),
            Suite::HalfTransfer => checks.extend(halftransfer_checks(&model.cm)),
            Suite::Taniyama => match recip_or_skip(model, suite) {
                Ok((r, split)) => checks.extend(taniyama_checks(r, &split)),
                Err(c) => checks.push(c),
            },
            Suite::CmAction | Suite::Pi0 => match recip_or_skip(model, suite) {
                Ok((r, split)) => {
                    if model.tori.is_empty() {
                        checks.push(skipped(suite.name(), "torus models", "model defines no tori", None));
                    }
                    for t in &model.tori {
                        if suite == Suite::CmAction {
                            checks.extend(cmaction_checks(r, &split, t));
                        } else {
                            checks.extend(pi0_checks(r, &split, t));
                        }
                    }
                }
                Err(c) => checks.push(c),
            },
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        command: "verify".into(),
        model: model.id.clone(),
        chi_f: canonical.map(|s| s.fingerprint()),
        flags: model.recip.as_ref().map(|r| r.flags().clone()),
        checks,
        data: Value::Null,
        timing_ms: elapsed_ms(start),
    }
}

// ----------------------------------------------------------------- orbits

impl GroupChoice {
    pub fn name(self) -> &'static str {
        match self {
            GroupChoice::Galois => "galois",
            GroupChoice::Plectic => "plectic",
        }
    }
}

/// Orbit tables for each requested group, keyed by group name in `data`.
pub fn orbits(model: &Model, groups: &[GroupChoice]) -> Report {
    let start = Instant::now();
    let cm = &model.cm;
    let ctx = cm.base();
    let types = cm.enumerate_cm_types();
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    for &group in groups {
        let gname = group.name();
        let (gens, order) = match group {
            GroupChoice::Galois => (cm.galois_generators(), ctx.gamma().order() as u128),
            GroupChoice::Plectic => (ctx.generators(), ctx.plectic_order()),
        };
        match cm.orbits(&gens, &types) {
            Ok(orbits) => {
                let mut t = Tally::new("orbits", format!("[{gname}] orbits partition the CM types"));
                let total: usize = orbits.iter().map(|o| o.size()).sum();
                t.check(total == types.len(), || json!({ "total": total, "types": types.len() }));
                checks.push(t.done());
                let mut t = Tally::new("orbits", format!("[{gname}] orbit sizes divide the group order"));
                for o in &orbits {
                    t.check(order % o.size() as u128 == 0, || json!({ "size": o.size(), "order": order.to_string() }));
                }
                checks.push(t.done());
                data.insert(
                    gname.into(),
                    json!({
                        "group_order": order.to_string(),
                        "cm_types": types.len(),
                        "sizes": orbits.iter().map(|o| o.size()).collect::<Vec<_>>(),
                        "orbits": cm.summarize(&orbits),
                    }),
                );
            }
            Err(e) => checks.push(failed("orbits", format!("[{gname}] orbit computation"), e)),
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        command: "orbits".into(),
        model: model.id.clone(),
        chi_f: None,
        flags: model.recip.as_ref().map(|r| r.flags().clone()),
        checks,
        data: Value::Object(data),
        timing_ms: elapsed_ms(start),
    }
}

// -------------------------------------------------------- chi-dependence

#[derive(Serialize, Clone, Debug)]
struct TorusSnapshot {
    torus: String,
    cm_subgroup_order: usize,
    #[serde(skip)]
    members: Vec<usize>,
    #[serde(skip)]
    lambda: BTreeMap<usize, AbElem>,
    point_orbit_sizes: Vec<usize>,
}

#[derive(Serialize, Clone, Debug)]
struct SplittingSnapshot {
    chi_f: String,
    sign_compatible: bool,
    canonical: bool,
    taniyama: Vec<Value>,
    #[serde(skip)]
    taniyama_all: Vec<Option<AbElem>>,
    #[serde(skip)]
    galois_taniyama: Vec<Option<AbElem>>,
    tori: Vec<TorusSnapshot>,
}

/// Orbits of the generated points under the CM subgroup, as sorted sizes.
fn point_orbit_sizes(
    acts: &mut Actions,
    torus: &TorusModel,
    els: &Elements,
    members: &[usize],
) -> Result<Vec<usize>, ActionError> {
    let points = test_points(acts.model(), torus);
    let mut seen: HashSet<CmPoint> = HashSet::new();
    let mut sizes = Vec::new();
    for p in points {
        if seen.contains(&p) {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([p.clone()]);
        seen.insert(p);
        while let Some(q) = queue.pop_front() {
            size += 1;
            for &i in members {
                let (next, _) = acts.plectic_act(torus, &els.list[i], &q)?;
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sizes)
}

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("model `{0}` has no reciprocity data")]
    NoRecip(String),
    #[error("plectic group enumeration failed: {0}")]
    Enumerate(String),
    #[error(transparent)]
    Recip(#[from] RecipError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

pub fn chi_dependence(model: &Model) -> Result<Report, ProbeError> {
    const S: &str = "chi-dependence";
    let start = Instant::now();
    let Some(recip) = &model.recip else {
        return Err(ProbeError::NoRecip(model.id.clone()));
    };
    let splittings = recip.all_splittings(SPLITTING_CAP)?;
    let canonical = recip.canonical_splitting()?;
    let cm = recip.cm();
    let ctx = cm.base();
    let g = ctx.gamma();
    let els = Elements::new(ctx).map_err(ProbeError::Enumerate)?;
    let types = cm.enumerate_cm_types();
    let top = recip.flags().top_cartesian;
    let gens: Vec<usize> = ctx.generators().iter().map(|a| els.index[a]).collect();
    let mut checks = Vec::new();
    let mut snaps = Vec::new();

    for split in &splittings {
        let mut acts = Actions::new(recip, split);
        let mut taniyama_all = Vec::new();
        if top {
            for a in &els.list {
                for phi in &types {
                    taniyama_all.push(acts.taniyama(a, phi).ok());
                }
            }
        }
        let mut galois_taniyama = Vec::new();
        for gamma in g.elements() {
            for phi in &types {
                galois_taniyama.push(acts.taniyama_galois(gamma, phi).ok());
            }
        }
        let mut taniyama = Vec::new();
        if top {
            for &i in &gens {
                for (k, phi) in types.iter().enumerate() {
                    taniyama.push(json!({ "alpha": repr(ctx, &els.list[i]), "phi": type_json(cm, phi),
                                          "f": taniyama_all[i * types.len() + k] }));
                }
            }
        }
        let mut tori = Vec::new();
        for torus in &model.tori {
            let members = cm_group(&acts, torus, &els)?;
            let mut lambda = BTreeMap::new();
            for &i in &members {
                if let Ok(l) = acts.lambda(torus, &els.list[i]) {
                    lambda.insert(i, l);
                }
            }
            let point_orbit_sizes = if top {
                point_orbit_sizes(&mut acts, torus, &els, &members).unwrap_or_default()
            } else {
                Vec::new()
            };
            tori.push(TorusSnapshot {
                torus: torus.name().into(),
                cm_subgroup_order: members.len(),
                members,
                lambda,
                point_orbit_sizes,
            });
        }
        snaps.push(SplittingSnapshot {
            chi_f: split.fingerprint(),
            sign_compatible: split.sign_compatible(),
            canonical: *split == canonical,
            taniyama,
            taniyama_all,
            galois_taniyama,
            tori,
        });
    }

    let first = &snaps[0];
    let taniyama_varies = snaps.iter().any(|s| s.taniyama_all != first.taniyama_all);
    let mut varying_pairs = 0usize;
    for idx in 0..first.taniyama_all.len() {
        if snaps.iter().any(|s| s.taniyama_all[idx] != first.taniyama_all[idx]) {
            varying_pairs += 1;
        }
    }

    let mut t = Tally::new(S, "Taniyama elements of Galois elements do not depend on the splitting");
    for (idx, v) in first.galois_taniyama.iter().enumerate() {
        t.check(snaps.iter().all(|s| &s.galois_taniyama[idx] == v), || {
            json!({ "gamma": g.name(Elem(idx / types.len())), "phi": type_json(cm, &types[idx % types.len()]) })
        });
    }
    checks.push(t.done());

    let mut per_torus = Vec::new();
    for (ti, torus) in model.tori.iter().enumerate() {
        let mut t = Tally::new(S, format!("[{}] π₀ action does not depend on the splitting", torus.name()));
        let mut all: BTreeMap<usize, Vec<&AbElem>> = BTreeMap::new();
        for s in &snaps {
            for (i, l) in &s.tori[ti].lambda {
                all.entry(*i).or_default().push(l);
            }
        }
        for (i, ls) in &all {
            t.check(ls.iter().all(|l| *l == ls[0]), || {
                json!({ "alpha": repr(ctx, &els.list[*i]), "classes": ls })
            });
            let fiber = pi0_element(recip, torus, els.list[*i].clone(), ls[0].clone());
            t.check(fiber.is_ok(), || json!({ "alpha": repr(ctx, &els.list[*i]), "issue": "class does not lie over P(α)" }));
        }
        checks.push(t.done());
        let membership_varies = snaps.iter().any(|s| s.tori[ti].members != first.tori[ti].members);
        let orbits_vary = snaps.iter().any(|s| s.tori[ti].point_orbit_sizes != first.tori[ti].point_orbit_sizes);
        per_torus.push(json!({
            "torus": torus.name(),
            "cm_subgroup_varies": membership_varies,
            "cm_point_orbits_vary": orbits_vary,
            "pi0_action_invariant": checks.last().map(|c| c.status == Status::Pass),
        }));
    }

    let data = json!({
        "splittings": snaps.len(),
        "taniyama_computed": top,
        "taniyama_varies": taniyama_varies,
        "taniyama_varying_pairs": varying_pairs,
        "taniyama_pairs": first.taniyama_all.len(),
        "tori": per_torus,
        "per_splitting": snaps,
    });
    if !top {
        checks.push(skipped(S, "Taniyama values per splitting", "top square not Cartesian", Some("top_cartesian")));
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "chi-dependence".into(),
        model: model.id.clone(),
        chi_f: Some(canonical.fingerprint()),
        flags: Some(recip.flags().clone()),
        checks,
        data,
        timing_ms: elapsed_ms(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_model;

    #[test]
    fn builtin_reports_have_no_failures() {
        for id in crate::config::builtin_ids() {
            let m = load_model(id).unwrap();
            let r = verify(&m, &[Suite::ProdMap, Suite::HalfTransfer, Suite::Taniyama]);
            assert!(r.passed(), "{}", r.render_text());
            assert!(r.render_text().contains("passed"));
            let o = orbits(&m, &[GroupChoice::Galois, GroupChoice::Plectic]);
            assert!(o.passed());
        }
    }

    #[test]
    fn suite_and_group_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!("plectic".parse::<GroupChoice>().unwrap(), GroupChoice::Plectic);
    }
}
