//! Model files: TOML descriptions of a Galois model, its CM field, an
//! optional reciprocity model and torus models.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::actions::{ActionError, TorusModel, TorusSpec};
use crate::cm::{CmContext, CmError};
use crate::group::{AbelianQuotient, FiniteGroup, GroupError, Subgroup};
use crate::lattice::{AbElem, AbHom, FinAb, LatticeError};
use crate::plectic::{GaloisContext, PlecticError};
use crate::recip::{RecipData, RecipError, RecipModel};

pub const MODEL_DIR_ENV: &str = "PLECTIC_CM_MODEL_DIR";

const BUILTIN: &[(&str, &str)] = &[
    ("zeta15", include_str!("../fixtures/zeta15.toml")),
    ("zeta15-synthetic", include_str!("../fixtures/zeta15-synthetic.toml")),
    ("zeta15-wide", include_str!("../fixtures/zeta15-wide.toml")),
    ("sextic", include_str!("../fixtures/sextic.toml")),
    ("sextic-synthetic", include_str!("../fixtures/sextic-synthetic.toml")),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid model file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Plectic(#[from] PlecticError),
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error(transparent)]
    Recip(#[from] RecipError),
    #[error(transparent)]
    Torus(#[from] ActionError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub description: Option<String>,
    pub group: GroupConfig,
    pub field: FieldConfig,
    pub recip: Option<RecipConfig>,
    #[serde(default)]
    pub torus: Vec<TorusConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub units_mod: Option<u64>,
    pub cyclic: Option<usize>,
    pub elements: Option<Vec<String>>,
    pub table: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub h_f: Vec<String>,
    pub h_k: Vec<String>,
    pub conjugation: String,
    pub section: Option<Vec<String>>,
}

#[derive(Debug, Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "lowercase")]
pub enum RecipKind {
    Explicit,
    Synthetic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipConfig {
    pub kind: RecipKind,
    pub i_f: Vec<i64>,
    pub rec_f: Vec<String>,
    pub norm_of_inclusion: Option<Vec<Vec<i64>>>,
    pub i_q: Option<Vec<i64>>,
    pub rec_q: Option<Vec<String>>,
    pub i_k: Option<Vec<i64>>,
    pub rec_k: Option<Vec<String>>,
    pub n_kf: Option<Vec<Vec<i64>>>,
    pub i_kf: Option<Vec<Vec<i64>>>,
    pub i_fq: Option<Vec<Vec<i64>>>,
    pub sign_f: Option<Vec<Vec<i64>>>,
    pub class_group: Option<Vec<i64>>,
    pub cl_k: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    Preset(String),
    List(Vec<Vec<i64>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub name: String,
    pub vz: Generators,
    pub i_r: Generators,
}

/// A fully validated model.
#[derive(Clone, Debug)]
pub struct Model {
    pub id: String,
    pub description: Option<String>,
    pub cm: CmContext,
    pub recip: Option<RecipModel>,
    pub tori: Vec<TorusModel>,
}

impl Model {
    pub fn torus(&self, name: &str) -> Option<&TorusModel> {
        self.tori.iter().find(|t| t.name() == name)
    }
}

pub fn builtin_ids() -> Vec<&'static str> {
    BUILTIN.iter().map(|(id, _)| *id).collect()
}

fn normalize_id(id: &str) -> &str {
    id.strip_prefix("model_").unwrap_or(id)
}

/// Resolves `spec` as a file path, then `$PLECTIC_CM_MODEL_DIR/<id>.toml`,
/// then a built-in fixture.
pub fn load_model(spec: &str) -> Result<Model, ConfigError> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = read(path)?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
        return parse_model(normalize_id(id), &text);
    }
    let id = normalize_id(spec);
    if let Ok(dir) = std::env::var(MODEL_DIR_ENV) {
        for name in [format!("{id}.toml"), format!("model_{id}.toml")] {
            let p = Path::new(&dir).join(name);
            if p.is_file() {
                return parse_model(id, &read(&p)?);
            }
        }
    }
    match BUILTIN.iter().find(|(b, _)| *b == id) {
        Some((_, text)) => parse_model(id, text),
        None => Err(ConfigError::UnknownModel(spec.into())),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })
}

pub fn parse_model(id: &str, text: &str) -> Result<Model, ConfigError> {
    let cfg: ModelConfig = toml::from_str(text)?;
    build_model(id, cfg)
}

fn build_group(g: &GroupConfig) -> Result<FiniteGroup, ConfigError> {
    match (g.units_mod, g.cyclic, &g.elements, &g.table) {
        (Some(n), None, None, None) => Ok(FiniteGroup::units_mod(n)?),
        (None, Some(n), None, None) => Ok(FiniteGroup::cyclic(n)),
        (None, None, Some(names), Some(table)) => Ok(FiniteGroup::from_table(names.clone(), table)?),
        _ => Err(ConfigError::Invalid(
            "[group] needs exactly one of `units_mod`, `cyclic`, or `elements` with `table`".into(),
        )),
    }
}

fn finab(what: &str, moduli: &[i64]) -> Result<FinAb, ConfigError> {
    FinAb::new(moduli.to_vec()).map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))
}

fn named_hom(
    what: &str,
    g: &FiniteGroup,
    domain: &FinAb,
    target: &AbelianQuotient,
    names: &[String],
) -> Result<AbHom, ConfigError> {
    if names.len() != domain.rank() {
        return Err(ConfigError::Invalid(format!("{what}: expected {} images", domain.rank())));
    }
    let mut images = Vec::new();
    for n in names {
        let e = g.elem(n)?;
        if !target.source().contains(e) {
            return Err(ConfigError::Invalid(format!("{what}: {n} is outside the target subgroup")));
        }
        images.push(target.proj(e));
    }
    AbHom::from_images(domain.clone(), target.group().clone(), &images)
        .map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))
}

fn matrix_hom(what: &str, domain: &FinAb, codomain: &FinAb, rows: &[Vec<i64>]) -> Result<AbHom, ConfigError> {
    AbHom::from_rows(domain.clone(), codomain.clone(), rows).map_err(|e| ConfigError::Invalid(format!("{what}: {e}")))
}

fn required<'a, T>(what: &str, v: &'a Option<T>) -> Result<&'a T, ConfigError> {
    v.as_ref().ok_or_else(|| ConfigError::Invalid(format!("explicit [recip] is missing `{what}`")))
}

fn build_recip(cm: &CmContext, r: &RecipConfig) -> Result<RecipModel, ConfigError> {
    let base = cm.base();
    let g = base.gamma();
    let i_f = finab("i_f", &r.i_f)?;
    let rec_f = named_hom("rec_f", g, &i_f, base.hf_ab(), &r.rec_f)?;
    match r.kind {
        RecipKind::Synthetic => {
            let explicit_only = [
                ("i_q", r.i_q.is_some()),
                ("rec_q", r.rec_q.is_some()),
                ("i_k", r.i_k.is_some()),
                ("rec_k", r.rec_k.is_some()),
                ("n_kf", r.n_kf.is_some()),
                ("i_kf", r.i_kf.is_some()),
                ("i_fq", r.i_fq.is_some()),
                ("sign_f", r.sign_f.is_some()),
                ("class_group", r.class_group.is_some()),
                ("cl_k", r.cl_k.is_some()),
            ];
            if let Some((k, _)) = explicit_only.iter().find(|(_, set)| *set) {
                return Err(ConfigError::Invalid(format!("`{k}` is only allowed for explicit models")));
            }
            let hint = match &r.norm_of_inclusion {
                Some(rows) => Some(matrix_hom("norm_of_inclusion", &i_f, &i_f, rows)?),
                None => None,
            };
            Ok(RecipModel::synthesize(cm, &rec_f, hint.as_ref())?)
        }
        RecipKind::Explicit => {
            if r.norm_of_inclusion.is_some() {
                return Err(ConfigError::Invalid("`norm_of_inclusion` is only allowed for synthetic models".into()));
            }
            let i_q = finab("i_q", required("i_q", &r.i_q)?)?;
            let i_k = finab("i_k", required("i_k", &r.i_k)?)?;
            let signs = FinAb::elementary_two(cm.r());
            let cl = match (&r.class_group, &r.cl_k) {
                (Some(c), Some(rows)) => Some(matrix_hom("cl_k", &i_k, &finab("class_group", c)?, rows)?),
                (None, None) => None,
                _ => return Err(ConfigError::Invalid("`class_group` and `cl_k` must be given together".into())),
            };
            let d = RecipData {
                rec_q: named_hom("rec_q", g, &i_q, base.gamma_ab(), required("rec_q", &r.rec_q)?)?,
                rec_k: named_hom("rec_k", g, &i_k, cm.hk_ab(), required("rec_k", &r.rec_k)?)?,
                n_kf: matrix_hom("n_kf", &i_k, &i_f, required("n_kf", &r.n_kf)?)?,
                i_kf: matrix_hom("i_kf", &i_f, &i_k, required("i_kf", &r.i_kf)?)?,
                i_fq: matrix_hom("i_fq", &i_q, &i_f, required("i_fq", &r.i_fq)?)?,
                sign_f: matrix_hom("sign_f", &signs, &i_f, required("sign_f", &r.sign_f)?)?,
                i_q,
                i_f,
                i_k,
                rec_f,
                cl,
            };
            Ok(RecipModel::new(cm, d)?)
        }
    }
}

fn torus_spec(t: &TorusConfig, r: usize) -> Result<TorusSpec, ConfigError> {
    let bad = |m: String| ConfigError::Invalid(format!("torus `{}`: {m}", t.name));
    let vz_full = matches!(&t.vz, Generators::Preset(p) if p == "full");
    let ir_full = matches!(&t.i_r, Generators::Preset(p) if p == "full");
    let vz_diag = matches!(&t.vz, Generators::Preset(p) if p == "diagonal");
    let ir_min = matches!(&t.i_r, Generators::Preset(p) if p == "minimal");
    if vz_full && ir_full {
        return Ok(TorusSpec::Full);
    }
    if vz_diag && ir_min {
        return Ok(TorusSpec::Minimal);
    }
    let vz: Vec<AbElem> = match &t.vz {
        Generators::Preset(p) if p == "full" => (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect(),
        Generators::Preset(p) if p == "diagonal" => vec![vec![1; r]],
        Generators::Preset(p) => return Err(bad(format!("unknown vz preset `{p}`"))),
        Generators::List(vs) => {
            let mut out = Vec::new();
            for v in vs {
                let conv: Option<Vec<i64>> = v
                    .iter()
                    .map(|&s| match s {
                        1 => Some(0),
                        -1 => Some(1),
                        _ => None,
                    })
                    .collect();
                out.push(conv.ok_or_else(|| bad("vz entries must be +1 or -1".into()))?);
            }
            out
        }
    };
    let i_r = match &t.i_r {
        Generators::Preset(p) if p == "minimal" => Vec::new(),
        Generators::Preset(p) => return Err(bad(format!("i_r preset `{p}` needs a matching vz preset"))),
        Generators::List(us) => us.clone(),
    };
    Ok(TorusSpec::Generators { vz, i_r })
}

fn build_model(id: &str, cfg: ModelConfig) -> Result<Model, ConfigError> {
    let g = Arc::new(build_group(&cfg.group)?);
    let h_f = Subgroup::from_names(&g, &cfg.field.h_f)?;
    let mut base = GaloisContext::new(&g, &h_f)?;
    if let Some(s) = &cfg.field.section {
        let elems: Result<Vec<_>, _> = s.iter().map(|n| g.elem(n)).collect();
        base = base.with_section(&elems?)?;
    }
    let h_k = Subgroup::from_names(&g, &cfg.field.h_k)?;
    let cm = CmContext::new(&base, &h_k, g.elem(&cfg.field.conjugation)?)?;
    let recip = match &cfg.recip {
        Some(r) => Some(build_recip(&cm, r)?),
        None => None,
    };
    let mut tori = Vec::new();
    for t in &cfg.torus {
        let Some(model) = &recip else {
            return Err(ConfigError::Invalid("[[torus]] requires a [recip] section".into()));
        };
        if tori.iter().any(|x: &TorusModel| x.name() == t.name) {
            return Err(ConfigError::Invalid(format!("duplicate torus `{}`", t.name)));
        }
        let spec = torus_spec(t, cm.r())?;
        tori.push(TorusModel::build(model, &t.name, &spec)?);
    }
    Ok(Model { id: id.into(), description: cfg.description, cm, recip, tori })
}
