//! Torus models `(V_Z, I_R, π₀)`, model CM points, and the Galois and plectic
//! actions on CM points and on connected components.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::cm::{CmError, CmType};
use crate::group::Elem;
use crate::lattice::{quotient, AbElem, AbHom, AbSubgroup, FinAb, IntMatrix, LatticeError, SubgroupIso};
use crate::plectic::{PlecticElement, PlecticError};
use crate::recip::{RecipError, RecipModel, Splitting};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("element is not in the CM subgroup for this torus")]
    NotInCMGroup,
    #[error("no component class lies over P(α)")]
    NotInPi0Group,
    #[error("sign condition fails: χ = {got:?}, expected sign_F(m) = {expected:?}")]
    SignViolation { expected: AbElem, got: AbElem },
    #[error("delta {0:?} is not in I_R")]
    DeltaOutsideModel(AbElem),
    #[error("invalid torus model: {0}")]
    BadTorus(String),
    #[error("invalid CM point: {0}")]
    BadPoint(String),
    #[error(transparent)]
    Recip(#[from] RecipError),
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl From<PlecticError> for ActionError {
    fn from(e: PlecticError) -> Self {
        ActionError::Cm(CmError::Plectic(e))
    }
}

/// `vz ⊂ (Z/2)^Σ`, `I_R ⊂ I_F`, and `P_R = (vz ⊕ I_R)/N` with
/// `mu: P_R → H_F^ab` and `iota_Q: I_Q → I_R`.
#[derive(Clone, Debug)]
pub struct TorusModel {
    name: String,
    vz: SubgroupIso,
    i_r: SubgroupIso,
    source: FinAb,
    p_r: FinAb,
    quot: AbHom,
    mu: AbHom,
    iota_q: AbHom,
}

/// Generators of the two torus subgroups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorusSpec {
    /// `vz = (Z/2)^Σ`, `I_R = I_F`.
    Full,
    /// `vz = {±(1,…,1)}`, `I_R = im i_FQ`.
    Minimal,
    Generators { vz: Vec<AbElem>, i_r: Vec<AbElem> },
}

impl TorusModel {
    pub fn build(model: &RecipModel, name: &str, spec: &TorusSpec) -> Result<Self, ActionError> {
        let r = model.cm().r();
        let signs = FinAb::elementary_two(r);
        let i_f = model.i_f();
        let i_fq_image: Vec<AbElem> = model.i_fq().images();
        let (vz_gens, mut ir_gens) = match spec {
            TorusSpec::Full => (signs.basis_elements(), i_f.basis_elements()),
            TorusSpec::Minimal => (vec![vec![1; r]], Vec::new()),
            TorusSpec::Generators { vz, i_r } => {
                if vz.iter().any(|v| v.len() != r) || i_r.iter().any(|u| u.len() != i_f.rank()) {
                    return Err(ActionError::BadTorus("generator has the wrong length".into()));
                }
                (vz.clone(), i_r.clone())
            }
        };
        ir_gens.extend(i_fq_image);
        let vz = AbSubgroup::generated(&signs, &vz_gens).abstract_group();
        let i_r = AbSubgroup::generated(i_f, &ir_gens).abstract_group();
        let source = vz.group().direct_sum(i_r.group());

        let mut relations: Vec<AbElem> = Vec::new();
        let connected = model.rec_f().kernel().intersect(i_r.subgroup());
        for k in connected.gens() {
            let mut rel = vz.group().zero();
            rel.extend(i_r.coords(k).expect("kernel part lies in I_R"));
            relations.push(rel);
        }
        let sign_on_vz = model.sign_f().compose(&vz.embed)?;
        let principal = i_r.subgroup().preimage_under(&sign_on_vz);
        for v in principal.gens() {
            let mut rel = v.clone();
            rel.extend(i_r.coords(&sign_on_vz.apply(v)).expect("preimage of I_R"));
            relations.push(rel);
        }
        let q = quotient(&AbSubgroup::generated(&source, &relations));
        let mu_src = mu_on_source(model, &vz, &i_r)?;
        let images: Vec<AbElem> = q.group.basis_elements().iter().map(|b| mu_src.apply(&q.lift(b))).collect();
        let mu = AbHom::from_images(q.group.clone(), mu_src.codomain().clone(), &images)?;
        let iota_images: Vec<AbElem> = model
            .i_q()
            .basis_elements()
            .iter()
            .map(|z| i_r.coords(&model.i_fq().apply(z)).expect("I_R contains im i_FQ"))
            .collect();
        let iota_q = AbHom::from_images(model.i_q().clone(), i_r.group().clone(), &iota_images)?;
        Ok(TorusModel { name: name.into(), vz, i_r, source, p_r: q.group, quot: q.proj, mu, iota_q })
    }

    /// Replaces the component data after checking `mu∘quot = μ_source`,
    /// `quot` surjective, and `embed∘iota_Q = i_FQ`.
    pub fn from_parts(&self, model: &RecipModel, quot: AbHom, mu: AbHom, iota_q: AbHom) -> Result<Self, ActionError> {
        if quot.domain() != &self.source || mu.domain() != quot.codomain() || iota_q.codomain() != self.i_r.group() {
            return Err(ActionError::BadTorus("maps have the wrong shape".into()));
        }
        if !quot.is_surjective() {
            return Err(ActionError::BadTorus("quot is not surjective".into()));
        }
        if !mu.compose(&quot)?.same_map(&mu_on_source(model, &self.vz, &self.i_r)?) {
            return Err(ActionError::BadTorus("mu∘quot differs from the sign/reciprocity map".into()));
        }
        if !self.i_r.embed.compose(&iota_q)?.same_map(model.i_fq()) {
            return Err(ActionError::BadTorus("iota_Q does not lift i_FQ".into()));
        }
        Ok(self.from_parts_unchecked(quot, mu, iota_q))
    }

    /// No validation; for mutation tests.
    pub fn from_parts_unchecked(&self, quot: AbHom, mu: AbHom, iota_q: AbHom) -> Self {
        TorusModel { p_r: quot.codomain().clone(), quot, mu, iota_q, ..self.clone() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vz(&self) -> &AbSubgroup {
        self.vz.subgroup()
    }

    pub fn i_r(&self) -> &AbSubgroup {
        self.i_r.subgroup()
    }

    pub fn p_r(&self) -> &FinAb {
        &self.p_r
    }

    pub fn quot(&self) -> &AbHom {
        &self.quot
    }

    pub fn mu(&self) -> &AbHom {
        &self.mu
    }

    pub fn iota_q(&self) -> &AbHom {
        &self.iota_q
    }

    /// `quot(1, u)` for `u ∈ I_R` given in `I_F` coordinates.
    pub fn class_of(&self, u: &[i64]) -> Option<AbElem> {
        let mut v = self.vz.group().zero();
        v.extend(self.i_r.coords(u)?);
        Some(self.quot.apply(&v))
    }

    /// `quot(1, ι(z))` for `z ∈ I_Q`.
    pub fn class_of_rational(&self, z: &[i64]) -> AbElem {
        let mut v = self.vz.group().zero();
        v.extend(self.iota_q.apply(z));
        self.quot.apply(&v)
    }
}

/// `(v, u) ↦ Σ v_x c_x + rec_F(u)`.
fn mu_on_source(model: &RecipModel, vz: &SubgroupIso, i_r: &SubgroupIso) -> Result<AbHom, ActionError> {
    let cm = model.cm();
    let hf = cm.base().hf_ab().group();
    let conj = AbHom::from_images(FinAb::elementary_two(cm.r()), hf.clone(), cm.complex_conjugations())?;
    Ok(conj.compose(&vz.embed)?.hstack(&model.rec_f().compose(&i_r.embed)?)?)
}

/// A model CM point. Signs are kept normalized to `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CmPoint {
    pub phi: CmType,
    /// Class in `Cl_K`.
    pub a: AbElem,
    pub sgn: Vec<i8>,
    /// Determinant class of the level structure, in `I_F`.
    pub delta: AbElem,
    /// `I_K`-class of the level structure.
    pub e: AbElem,
}

/// Intermediate values of one plectic action step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionTrace {
    pub m: Vec<u8>,
    pub f: AbElem,
    pub u: AbElem,
    pub chi: AbElem,
    pub sign_checked: bool,
}

/// An element of the fiber product of plectic elements and component classes
/// over `H_F^ab`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pi0Element {
    alpha: PlecticElement,
    p: AbElem,
}

impl Pi0Element {
    pub fn alpha(&self) -> &PlecticElement {
        &self.alpha
    }

    pub fn class(&self) -> &AbElem {
        &self.p
    }
}

/// A reciprocity model with a fixed splitting; memoizes Taniyama elements.
pub struct Actions<'a> {
    model: &'a RecipModel,
    split: &'a Splitting,
    plectic_cache: HashMap<(PlecticElement, CmType), AbElem>,
    galois_cache: HashMap<(Elem, CmType), AbElem>,
}

impl<'a> Actions<'a> {
    pub fn new(model: &'a RecipModel, split: &'a Splitting) -> Self {
        Actions { model, split, plectic_cache: HashMap::new(), galois_cache: HashMap::new() }
    }

    pub fn model(&self) -> &RecipModel {
        self.model
    }

    pub fn splitting(&self) -> &Splitting {
        self.split
    }

    pub fn point(&self, phi: CmType, a: AbElem, delta: AbElem, e: AbElem) -> Result<CmPoint, ActionError> {
        let m = self.model;
        if !m.cl().codomain().is_element(&a) || !m.i_f().is_element(&delta) || !m.i_k().is_element(&e) {
            return Err(ActionError::BadPoint("coordinates are not reduced group elements".into()));
        }
        Ok(CmPoint { phi, a, sgn: vec![1; m.cm().r()], delta, e })
    }

    pub fn taniyama(&mut self, a: &PlecticElement, phi: &CmType) -> Result<AbElem, ActionError> {
        let key = (a.clone(), phi.clone());
        if let Some(f) = self.plectic_cache.get(&key) {
            return Ok(f.clone());
        }
        let f = self.model.taniyama(self.split, a, phi)?;
        self.plectic_cache.insert(key, f.clone());
        Ok(f)
    }

    pub fn taniyama_galois(&mut self, gamma: Elem, phi: &CmType) -> Result<AbElem, ActionError> {
        let key = (gamma, phi.clone());
        if let Some(f) = self.galois_cache.get(&key) {
            return Ok(f.clone());
        }
        let f = self.model.taniyama_galois(gamma, phi)?;
        self.galois_cache.insert(key, f.clone());
        Ok(f)
    }

    pub fn in_cm_group(&self, torus: &TorusModel, a: &PlecticElement) -> Result<bool, ActionError> {
        Ok(self.model.in_cm_group(self.split, torus.i_r(), a)?)
    }

    /// `γ·(Φ, a, δ, e) = (γΦ, f a, i_FQ(χ_cyc γ̄) δ, f e)` with `f` the
    /// Taniyama element of `γ`.
    pub fn galois_act(&mut self, gamma: Elem, p: &CmPoint) -> Result<CmPoint, ActionError> {
        let m = self.model;
        let f = self.taniyama_galois(gamma, &p.phi)?;
        let gbar = m.cm().base().gamma_ab().proj(gamma);
        let scale = m.i_fq().apply(&m.chi_cyc().apply(&gbar));
        Ok(CmPoint {
            phi: m.cm().galois_act_on_cm_type(gamma, &p.phi)?,
            a: m.cl().codomain().add(&m.cl().apply(&f), &p.a),
            sgn: p.sgn.clone(),
            delta: m.i_f().add(&scale, &p.delta),
            e: m.i_k().add(&f, &p.e),
        })
    }

    /// Plectic action on a CM point together with its intermediate values.
    pub fn plectic_act(
        &mut self,
        torus: &TorusModel,
        a: &PlecticElement,
        p: &CmPoint,
    ) -> Result<(CmPoint, ActionTrace), ActionError> {
        let m = self.model;
        let u = m.chi_of_product(self.split, a)?;
        if !torus.i_r().contains(&u) {
            return Err(ActionError::NotInCMGroup);
        }
        let f = self.taniyama(a, &p.phi)?;
        let phi = m.cm().act_on_cm_type(a, &p.phi)?;
        let mvec = m.cm().m_vector(&p.phi, &phi);
        let chi = m.i_f().sub(&u, &m.n_kf().apply(&f));
        let sign_checked = self.split.sign_compatible();
        if sign_checked {
            let mv: AbElem = mvec.iter().map(|&x| i64::from(x)).collect();
            let expected = m.sign_f().apply(&mv);
            if expected != chi {
                return Err(ActionError::SignViolation { expected, got: chi });
            }
        }
        let q = CmPoint {
            phi,
            a: m.cl().codomain().add(&m.cl().apply(&f), &p.a),
            sgn: p.sgn.clone(),
            delta: m.i_f().add(&u, &p.delta),
            e: m.i_k().add(&f, &p.e),
        };
        Ok((q, ActionTrace { m: mvec, f, u, chi, sign_checked }))
    }

    /// `λ(α) = quot(1, χ_F(P(α)))`.
    pub fn lambda(&self, torus: &TorusModel, a: &PlecticElement) -> Result<AbElem, ActionError> {
        let u = self.model.chi_of_product(self.split, a)?;
        torus.class_of(&u).ok_or(ActionError::NotInCMGroup)
    }

    /// The image of `α ∈ Γ^pl_CM` in the π₀ plectic group.
    pub fn to_pi0(&self, torus: &TorusModel, a: &PlecticElement) -> Result<Pi0Element, ActionError> {
        let p = self.lambda(torus, a)?;
        pi0_element(self.model, torus, a.clone(), p)
    }

    /// Class in `I_F / (I_R + im sign_F + χ_F(𝔠))` of `δ − n_KF(e)`.
    pub fn level_class(&self, torus: &TorusModel, p: &CmPoint) -> AbElem {
        let m = self.model;
        let mut gens = torus.i_r().gens().to_vec();
        gens.extend(m.sign_f().images());
        gens.extend(m.cm().complex_conjugations().iter().map(|c| self.split.apply(c)));
        let q = quotient(&AbSubgroup::generated(m.i_f(), &gens));
        q.proj.apply(&m.i_f().sub(&p.delta, &m.n_kf().apply(&p.e)))
    }
}

/// Validates `mu(p) = P(α)`.
pub fn pi0_element(
    model: &RecipModel,
    torus: &TorusModel,
    alpha: PlecticElement,
    p: AbElem,
) -> Result<Pi0Element, ActionError> {
    if !torus.p_r().is_element(&p) {
        return Err(ActionError::NotInPi0Group);
    }
    let prod = model.cm().base().product_map(&alpha)?;
    if torus.mu().apply(&p) != prod {
        return Err(ActionError::NotInPi0Group);
    }
    Ok(Pi0Element { alpha, p })
}

/// Every class lying over `P(α)`; empty if `α` is not in the π₀ plectic group.
pub fn pi0_lifts(model: &RecipModel, torus: &TorusModel, alpha: &PlecticElement) -> Result<Vec<AbElem>, ActionError> {
    let prod = model.cm().base().product_map(alpha)?;
    match torus.mu().preimage(&prod) {
        Ok(pre) => Ok(pre.all()),
        Err(LatticeError::NoSolution) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// `π₀(P) = quot(1, δ)`.
pub fn pi0_of_cm_point(torus: &TorusModel, p: &CmPoint) -> Result<AbElem, ActionError> {
    torus.class_of(&p.delta).ok_or_else(|| ActionError::DeltaOutsideModel(p.delta.clone()))
}

/// Multiplication by the class of `g`.
pub fn pi0_act(torus: &TorusModel, g: &Pi0Element, q: &[i64]) -> AbElem {
    torus.p_r().add(&g.p, q)
}

/// Changes one basis image of `h` by the first nonzero element that keeps it a
/// homomorphism, or `None` if every such change is impossible.
pub fn perturb(h: &AbHom) -> Option<AbHom> {
    let (dom, cod) = (h.domain(), h.codomain());
    for j in 0..dom.rank() {
        for x in cod.elements() {
            if cod.is_zero(&x) {
                continue;
            }
            let mut images = h.images();
            images[j] = cod.add(&images[j], &x);
            let m = IntMatrix::from_columns(cod.rank(), &images);
            if let Ok(g) = AbHom::new(dom.clone(), cod.clone(), m) {
                return Some(g);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::CmContext;
    use crate::group::{FiniteGroup, Subgroup};
    use crate::plectic::GaloisContext;
    use std::sync::Arc;

    fn model() -> RecipModel {
        let g = Arc::new(FiniteGroup::units_mod(15).unwrap());
        let h_f = Subgroup::from_names(&g, &["1", "4", "11", "14"]).unwrap();
        let base = GaloisContext::new(&g, &h_f).unwrap();
        let h_k = Subgroup::from_names(&g, &["1", "11"]).unwrap();
        let cm = CmContext::new(&base, &h_k, g.elem("14").unwrap()).unwrap();
        let images: Vec<AbElem> = ["4", "11"].iter().map(|n| base.hf_ab().proj(g.elem(n).unwrap())).collect();
        let rec_f = AbHom::from_images(FinAb::new(vec![2, 2]).unwrap(), base.hf_ab().group().clone(), &images).unwrap();
        RecipModel::synthesize(&cm, &rec_f, None).unwrap()
    }

    #[test]
    fn torus_presets() {
        let m = model();
        let full = TorusModel::build(&m, "full", &TorusSpec::Full).unwrap();
        assert_eq!(full.i_r().order(), 4);
        assert_eq!(full.vz().order(), 4);
        // sign relations identify (v, sign_F v); rec_F is injective here
        assert_eq!(full.p_r().order(), 4);
        let min = TorusModel::build(&m, "minimal", &TorusSpec::Minimal).unwrap();
        assert_eq!(min.i_r().order(), 2);
        assert!(full.from_parts(&m, full.quot().clone(), full.mu().clone(), full.iota_q().clone()).is_ok());
        let bad = perturb(full.mu()).unwrap();
        assert!(full.from_parts(&m, full.quot().clone(), bad, full.iota_q().clone()).is_err());
    }

    #[test]
    fn plectic_action_example() {
        let m = model();
        let split = m.canonical_splitting().unwrap();
        let torus = TorusModel::build(&m, "full", &TorusSpec::Full).unwrap();
        let mut acts = Actions::new(&m, &split);
        let cm = m.cm();
        let ctx = cm.base();
        let g = ctx.gamma();
        let a = ctx.element(vec![0, 1], vec![g.elem("4").unwrap(), g.identity()]).unwrap();
        let phi = cm.cm_type(&[0, 1]).unwrap();
        let p = acts.point(phi.clone(), m.cl().codomain().zero(), m.i_f().zero(), m.i_k().zero()).unwrap();
        let (q, trace) = acts.plectic_act(&torus, &a, &p).unwrap();
        assert_eq!(q.phi, cm.cm_type(&[2, 1]).unwrap());
        assert_eq!(trace.m, vec![1, 0]);
        let four = ctx.hf_ab().proj(g.elem("4").unwrap());
        assert_eq!(q.delta, split.apply(&four));
        let (same, _) = acts.plectic_act(&torus, &ctx.identity(), &p).unwrap();
        assert_eq!(same, p);
        assert_eq!(pi0_of_cm_point(&torus, &p).unwrap(), torus.p_r().zero());
    }

    #[test]
    fn galois_extension() {
        let m = model();
        let split = m.canonical_splitting().unwrap();
        let torus = TorusModel::build(&m, "minimal", &TorusSpec::Minimal).unwrap();
        let mut acts = Actions::new(&m, &split);
        let cm = m.cm();
        for phi in cm.enumerate_cm_types() {
            let p = acts.point(phi, m.cl().codomain().zero(), m.i_f().zero(), m.i_k().zero()).unwrap();
            for gamma in cm.base().gamma().elements() {
                let (q, _) = acts.plectic_act(&torus, &cm.base().embed(gamma), &p).unwrap();
                assert_eq!(q, acts.galois_act(gamma, &p).unwrap());
            }
        }
    }
}
