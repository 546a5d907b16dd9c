//! CM fields over a Galois model: the coset space `Σ_K = Γ/H_K` with its
//! conjugation pairing, CM types, the plectic action on them, complex
//! conjugations `c_x`, and the plectic half transfer.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::group::{transfer_hom, AbelianQuotient, CosetSpace, Elem, GroupError, Subgroup};
use crate::lattice::{AbElem, AbHom, AbSubgroup};
use crate::plectic::{GaloisContext, PlecticElement, PlecticError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CmError {
    #[error("H_K must have index 2 in H_F")]
    BadIndex,
    #[error("bad complex conjugation: {0}")]
    BadConjugation(String),
    #[error("not a CM type: {0}")]
    NotACmType(String),
    #[error("not an equivariant section: {0}")]
    NotASection(String),
    #[error("object belongs to a different CM context")]
    ContextMismatch,
    #[error("internal error: {0}")]
    InternalError(String),
    #[error(transparent)]
    Plectic(#[from] PlecticError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A CM field `K ⊃ F` modeled by `H_K ⊂ H_F` of index 2 and complex conjugation `c`.
#[derive(Clone, Debug)]
pub struct CmContext {
    base: GaloisContext,
    h_k: Subgroup,
    c: Elem,
    sigma_k: CosetSpace,
    pairing: Vec<usize>,
    over: Vec<usize>,
    phi: Vec<usize>,
    hk_ab: AbelianQuotient,
    res: AbHom,
    v_kf: AbHom,
    conj: Vec<AbElem>,
}

/// One element of `Σ_K` over each `x ∈ Σ`, stored as sorted coset indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CmType {
    ctx: u64,
    members: Vec<usize>,
}

impl CmType {
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

/// Coset representatives `w_ρ ∈ ρ` with `w_{cρ} = c w_ρ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EquivariantSection {
    ctx: u64,
    w: Vec<Elem>,
}

impl EquivariantSection {
    pub fn reps(&self) -> &[Elem] {
        &self.w
    }
}

/// An orbit of CM types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub representative: CmType,
    pub members: Vec<CmType>,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

impl CmContext {
    pub fn new(base: &GaloisContext, h_k: &Subgroup, c: Elem) -> Result<Self, CmError> {
        let g = base.gamma().clone();
        let h_f = base.h_f();
        if !h_k.is_subgroup_of(h_f) || h_k.order() * 2 != h_f.order() {
            return Err(CmError::BadIndex);
        }
        let name = g.name(c).to_string();
        if c == g.identity() || g.mul(c, c) != g.identity() {
            return Err(CmError::BadConjugation(format!("{name} is not an involution")));
        }
        if !h_f.contains(c) || h_k.contains(c) {
            return Err(CmError::BadConjugation(format!("{name} must lie in H_F but not in H_K")));
        }
        for &s in base.section() {
            let conj = g.product(&[g.inv(s), c, s]);
            if !h_f.contains(conj) || h_k.contains(conj) {
                return Err(CmError::BadConjugation(format!(
                    "{name} conjugated by {} is {}, which does not act as complex conjugation on K",
                    g.name(s),
                    g.name(conj)
                )));
            }
        }
        let sigma_k = CosetSpace::new(base.whole(), h_k)?;
        let pairing: Vec<usize> =
            sigma_k.least_section().iter().map(|&w| sigma_k.coset_of(g.mul(c, w))).collect();
        let over: Vec<usize> = sigma_k.least_section().iter().map(|&w| base.sigma().coset_of(w)).collect();
        for (rho, &pr) in pairing.iter().enumerate() {
            if pr == rho || pairing[pr] != rho || over[pr] != over[rho] {
                return Err(CmError::BadConjugation("pairing on Σ_K is not a fixed-point-free involution".into()));
            }
        }
        let phi = base.section().iter().map(|&s| sigma_k.coset_of(s)).collect();
        let hk_ab = AbelianQuotient::new(h_k);
        let res = hk_ab.inclusion_into(base.hf_ab())?;
        let k_in_f = CosetSpace::new(h_f, h_k)?;
        let v_kf = transfer_hom(&k_in_f, base.hf_ab(), &hk_ab);
        let conj = base
            .section()
            .iter()
            .map(|&s| base.hf_ab().proj(g.product(&[g.inv(s), c, s])))
            .collect();
        Ok(CmContext { base: base.clone(), h_k: h_k.clone(), c, sigma_k, pairing, over, phi, hk_ab, res, v_kf, conj })
    }

    pub fn base(&self) -> &GaloisContext {
        &self.base
    }

    pub fn h_k(&self) -> &Subgroup {
        &self.h_k
    }

    pub fn conjugation(&self) -> Elem {
        self.c
    }

    pub fn sigma_k(&self) -> &CosetSpace {
        &self.sigma_k
    }

    pub fn r(&self) -> usize {
        self.base.r()
    }

    /// `ρ ↦ cρ`.
    pub fn pair(&self, rho: usize) -> usize {
        self.pairing[rho]
    }

    /// The embedding of `F` under `ρ`.
    pub fn over(&self, rho: usize) -> usize {
        self.over[rho]
    }

    /// `φ_x = s_x H_K`.
    pub fn phi(&self, x: usize) -> usize {
        self.phi[x]
    }

    pub fn hk_ab(&self) -> &AbelianQuotient {
        &self.hk_ab
    }

    /// Restriction `H_K^ab → H_F^ab`.
    pub fn res(&self) -> &AbHom {
        &self.res
    }

    /// Transfer `H_F^ab → H_K^ab`.
    pub fn v_kf(&self) -> &AbHom {
        &self.v_kf
    }

    /// `c_x = proj(s_x⁻¹ c s_x)` for the context section.
    pub fn complex_conjugations(&self) -> &[AbElem] {
        &self.conj
    }

    /// `c_x` recomputed for an arbitrary section of `Σ`.
    pub fn complex_conjugations_for(&self, section: &[Elem]) -> Vec<AbElem> {
        let g = self.base.gamma();
        section.iter().map(|&s| self.base.hf_ab().proj(g.product(&[g.inv(s), self.c, s]))).collect()
    }

    /// The subgroup `𝔠 = ⟨c_x⟩ ⊂ H_F^ab`.
    pub fn conj_subgroup(&self) -> AbSubgroup {
        AbSubgroup::generated(self.base.hf_ab().group(), &self.conj)
    }

    /// Display name of a coset of `H_K`.
    pub fn coset_name(&self, rho: usize) -> String {
        let names = self.sigma_k.names(rho);
        if names.len() == 1 {
            names[0].clone()
        } else {
            format!("{{{}}}", names.join(","))
        }
    }

    pub fn cm_type(&self, members: &[usize]) -> Result<CmType, CmError> {
        let r = self.r();
        let mut seen = vec![false; r];
        for &rho in members {
            if rho >= self.sigma_k.len() {
                return Err(CmError::NotACmType(format!("coset index {rho} out of range")));
            }
            if std::mem::replace(&mut seen[self.over[rho]], true) {
                return Err(CmError::NotACmType("two members over the same embedding of F".into()));
            }
        }
        if members.len() != r {
            return Err(CmError::NotACmType(format!("expected {r} members")));
        }
        let mut m = members.to_vec();
        m.sort();
        Ok(CmType { ctx: self.base.id(), members: m })
    }

    /// CM type from coset names as produced by [`Self::coset_name`] or any member name.
    pub fn cm_type_from_names(&self, names: &[impl AsRef<str>]) -> Result<CmType, CmError> {
        let g = self.base.gamma();
        let mut members = Vec::new();
        for n in names {
            let n = n.as_ref();
            let rho = (0..self.sigma_k.len()).find(|&rho| self.coset_name(rho) == n);
            let rho = match rho {
                Some(r) => r,
                None => self.sigma_k.coset_of(g.elem(n)?),
            };
            members.push(rho);
        }
        self.cm_type(&members)
    }

    pub fn type_names(&self, phi: &CmType) -> Vec<String> {
        phi.members.iter().map(|&rho| self.coset_name(rho)).collect()
    }

    /// All `2^r` CM types in increasing order.
    pub fn enumerate_cm_types(&self) -> Vec<CmType> {
        let r = self.r();
        let mut out: Vec<CmType> = (0..1usize << r)
            .map(|bits| {
                let members: Vec<usize> = (0..r)
                    .map(|x| if bits >> x & 1 == 0 { self.phi[x] } else { self.pairing[self.phi[x]] })
                    .collect();
                self.cm_type(&members).expect("one coset over each embedding")
            })
            .collect();
        out.sort();
        out
    }

    fn check_type(&self, phi: &CmType) -> Result<(), CmError> {
        if phi.ctx != self.base.id() {
            return Err(CmError::ContextMismatch);
        }
        Ok(())
    }

    /// The member of `phi` lying over `x`.
    pub fn member_over(&self, phi: &CmType, x: usize) -> usize {
        *phi.members.iter().find(|&&rho| self.over[rho] == x).expect("CM types meet every fiber")
    }

    /// `α(c^b φ_x) = c^{b + h̄_x} φ_{π(x)}`.
    pub fn act_on_sigma_k(&self, a: &PlecticElement, rho: usize) -> Result<usize, CmError> {
        if a.context_id() != self.base.id() {
            return Err(CmError::ContextMismatch);
        }
        let x = self.over[rho];
        let b = rho != self.phi[x];
        let hbar = !self.h_k.contains(a.h[x]);
        let target = self.phi[a.pi[x]];
        Ok(if b ^ hbar { self.pairing[target] } else { target })
    }

    /// Coset action induced by the bijection of `Γ` underlying `a`.
    pub fn act_on_sigma_k_via_map(&self, a: &PlecticElement, rho: usize) -> Result<usize, CmError> {
        let map = self.base.as_map(a)?;
        Ok(self.sigma_k.coset_of(map[self.sigma_k.coset(rho)[0].0]))
    }

    /// `αΦ = {α(φ) : φ ∈ Φ}`.
    pub fn act_on_cm_type(&self, a: &PlecticElement, phi: &CmType) -> Result<CmType, CmError> {
        self.check_type(phi)?;
        let members: Result<Vec<usize>, _> = phi.members.iter().map(|&rho| self.act_on_sigma_k(a, rho)).collect();
        self.cm_type(&members?)
    }

    /// Galois action `γΦ` computed directly by left multiplication.
    pub fn galois_act_on_cm_type(&self, gamma: Elem, phi: &CmType) -> Result<CmType, CmError> {
        self.check_type(phi)?;
        let g = self.base.gamma();
        let members: Vec<usize> = phi
            .members
            .iter()
            .map(|&rho| self.sigma_k.coset_of(g.mul(gamma, self.sigma_k.coset(rho)[0])))
            .collect();
        self.cm_type(&members)
    }

    /// `m_x = 0` iff `Φ` and `αΦ` agree over `x`.
    pub fn m_vector(&self, phi: &CmType, alpha_phi: &CmType) -> Vec<u8> {
        (0..self.r()).map(|x| u8::from(self.member_over(phi, x) != self.member_over(alpha_phi, x))).collect()
    }

    /// `w_ρ` = least member of the lower-indexed coset of each pair, extended by `w_{cρ} = c w_ρ`.
    pub fn canonical_section(&self) -> EquivariantSection {
        let choice: Vec<Elem> = self.lower_cosets().iter().map(|&rho| self.sigma_k.coset(rho)[0]).collect();
        self.section_from_choice(&choice)
    }

    fn lower_cosets(&self) -> Vec<usize> {
        (0..self.sigma_k.len()).filter(|&rho| rho < self.pairing[rho]).collect()
    }

    fn section_from_choice(&self, choice: &[Elem]) -> EquivariantSection {
        let g = self.base.gamma();
        let mut w = vec![g.identity(); self.sigma_k.len()];
        for (&rho, &rep) in self.lower_cosets().iter().zip(choice) {
            w[rho] = rep;
            w[self.pairing[rho]] = g.mul(self.c, rep);
        }
        EquivariantSection { ctx: self.base.id(), w }
    }

    /// Every equivariant section (`|H_K|^r` of them).
    pub fn all_sections(&self) -> Vec<EquivariantSection> {
        let mut choices: Vec<Vec<Elem>> = vec![Vec::new()];
        for rho in self.lower_cosets() {
            let members = self.sigma_k.coset(rho);
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    members.iter().map(move |&m| {
                        let mut d = c.clone();
                        d.push(m);
                        d
                    })
                })
                .collect();
        }
        choices.iter().map(|c| self.section_from_choice(c)).collect()
    }

    /// Validates a section given as one representative per coset.
    pub fn section(&self, w: Vec<Elem>) -> Result<EquivariantSection, CmError> {
        let g = self.base.gamma();
        if !self.sigma_k.is_section(&w) {
            return Err(CmError::NotASection("representatives do not lie in their cosets".into()));
        }
        for rho in 0..w.len() {
            if w[self.pairing[rho]] != g.mul(self.c, w[rho]) {
                return Err(CmError::NotASection(format!("w_(c rho) != c w_rho at coset {rho}")));
            }
        }
        Ok(EquivariantSection { ctx: self.base.id(), w })
    }

    /// `F_Φ(α) = ∏_{φ∈Φ} (w_{α(φ)}⁻¹ α(w_φ))|_{K^ab}`.
    pub fn half_transfer(&self, a: &PlecticElement, phi: &CmType, w: &EquivariantSection) -> Result<AbElem, CmError> {
        self.check_type(phi)?;
        if w.ctx != self.base.id() {
            return Err(CmError::ContextMismatch);
        }
        let g = self.base.gamma();
        let mut terms = Vec::with_capacity(phi.members.len());
        for &rho in &phi.members {
            let target = self.act_on_sigma_k(a, rho)?;
            let factor = g.mul(g.inv(w.w[target]), self.base.apply(a, w.w[rho]));
            if !self.h_k.contains(factor) {
                return Err(CmError::InternalError(format!(
                    "half-transfer factor {} escapes H_K",
                    g.name(factor)
                )));
            }
            terms.push(self.hk_ab.proj(factor));
        }
        Ok(self.hk_ab.group().sum(terms.iter()))
    }

    /// Tate's half transfer `∏ (w_{γφ}⁻¹ γ w_φ)|_{K^ab}` evaluated directly in `Γ`.
    pub fn tate_half_transfer(&self, gamma: Elem, phi: &CmType, w: &EquivariantSection) -> Result<AbElem, CmError> {
        self.check_type(phi)?;
        let g = self.base.gamma();
        let mut terms = Vec::new();
        for &rho in &phi.members {
            let moved = g.mul(gamma, w.w[rho]);
            let target = self.sigma_k.coset_of(moved);
            let factor = g.mul(g.inv(w.w[target]), moved);
            if !self.h_k.contains(factor) {
                return Err(CmError::InternalError("Tate factor escapes H_K".into()));
            }
            terms.push(self.hk_ab.proj(factor));
        }
        Ok(self.hk_ab.group().sum(terms.iter()))
    }

    /// `Σ_x m_x c_x` in `H_F^ab`.
    pub fn conj_sum(&self, m: &[u8]) -> AbElem {
        let ab = self.base.hf_ab().group();
        let terms: Vec<AbElem> =
            m.iter().zip(&self.conj).filter(|(&mx, _)| mx == 1).map(|(_, c)| c.clone()).collect();
        ab.sum(terms.iter())
    }

    /// Generators of the image of `Γ` in the plectic group.
    pub fn galois_generators(&self) -> Vec<PlecticElement> {
        self.base.whole().generators().iter().map(|&g| self.base.embed(g)).collect()
    }

    /// Orbits of `types` under the group generated by `gens`, closing `types`
    /// under the action. Orbits are sorted by their least member.
    pub fn orbits(&self, gens: &[PlecticElement], types: &[CmType]) -> Result<Vec<Orbit>, CmError> {
        for t in types {
            self.check_type(t)?;
        }
        let mut assigned: HashMap<CmType, usize> = HashMap::new();
        let mut orbits: Vec<BTreeSet<CmType>> = Vec::new();
        let mut start: Vec<CmType> = types.to_vec();
        start.sort();
        for t in start {
            if assigned.contains_key(&t) {
                continue;
            }
            let idx = orbits.len();
            let mut orbit = BTreeSet::new();
            let mut seen = HashSet::new();
            let mut frontier = vec![t.clone()];
            seen.insert(t);
            while let Some(x) = frontier.pop() {
                for g in gens {
                    let y = self.act_on_cm_type(g, &x)?;
                    if seen.insert(y.clone()) {
                        frontier.push(y);
                    }
                }
                assigned.insert(x.clone(), idx);
                orbit.insert(x);
            }
            orbits.push(orbit);
        }
        let mut out: Vec<Orbit> = orbits
            .into_iter()
            .map(|o| {
                let members: Vec<CmType> = o.into_iter().collect();
                Orbit { representative: members[0].clone(), members }
            })
            .collect();
        out.sort_by(|a, b| a.representative.cmp(&b.representative));
        Ok(out)
    }
}

/// Serializable orbit summary.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OrbitSummary {
    pub size: usize,
    pub representative: Vec<String>,
    pub members: Vec<Vec<String>>,
}

impl CmContext {
    pub fn summarize(&self, orbits: &[Orbit]) -> Vec<OrbitSummary> {
        orbits
            .iter()
            .map(|o| OrbitSummary {
                size: o.size(),
                representative: self.type_names(&o.representative),
                members: o.members.iter().map(|m| self.type_names(m)).collect(),
            })
            .collect()
    }
}

impl fmt::Display for CmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use std::sync::Arc;

    fn zeta15() -> CmContext {
        let g = Arc::new(FiniteGroup::units_mod(15).unwrap());
        let h_f = Subgroup::from_names(&g, &["1", "4", "11", "14"]).unwrap();
        let base = GaloisContext::new(&g, &h_f).unwrap();
        let h_k = Subgroup::from_names(&g, &["1", "11"]).unwrap();
        CmContext::new(&base, &h_k, g.elem("14").unwrap()).unwrap()
    }

    fn sextic() -> CmContext {
        let g = Arc::new(FiniteGroup::cyclic(6));
        let h_f = Subgroup::from_names(&g, &["g0", "g3"]).unwrap();
        let base = GaloisContext::new(&g, &h_f).unwrap();
        CmContext::new(&base, &Subgroup::trivial(&g), g.elem("g3").unwrap()).unwrap()
    }

    #[test]
    fn zeta15_context() {
        let cm = zeta15();
        assert_eq!(cm.sigma_k().len(), 4);
        assert_eq!(cm.coset_name(0), "{1,11}");
        assert_eq!(cm.coset_name(1), "{2,7}");
        assert_eq!(cm.coset_name(2), "{4,14}");
        assert_eq!(cm.coset_name(3), "{8,13}");
        assert_eq!(cm.pair(0), 2);
        assert_eq!(cm.pair(1), 3);
        assert_eq!(cm.enumerate_cm_types().len(), 4);
        let w = cm.canonical_section();
        let names: Vec<&str> = w.reps().iter().map(|&e| cm.base().gamma().name(e)).collect();
        assert_eq!(names, vec!["1", "2", "14", "13"]);
        let hf = cm.base().hf_ab();
        let fourteen = hf.proj(cm.base().gamma().elem("14").unwrap());
        assert_eq!(cm.complex_conjugations(), &[fourteen.clone(), fourteen]);
        assert_eq!(cm.conj_subgroup().order(), 2);
    }

    #[test]
    fn bad_contexts() {
        let g = Arc::new(FiniteGroup::units_mod(15).unwrap());
        let h_f = Subgroup::from_names(&g, &["1", "4", "11", "14"]).unwrap();
        let base = GaloisContext::new(&g, &h_f).unwrap();
        let h_k = Subgroup::from_names(&g, &["1", "11"]).unwrap();
        let err = CmContext::new(&base, &h_k, g.elem("11").unwrap()).unwrap_err();
        assert!(matches!(err, CmError::BadConjugation(_)));
        let err = CmContext::new(&base, &Subgroup::trivial(&g), g.elem("14").unwrap()).unwrap_err();
        assert_eq!(err, CmError::BadIndex);
        let err = CmContext::new(&base, &h_k, g.identity()).unwrap_err();
        assert!(matches!(err, CmError::BadConjugation(_)));
    }

    #[test]
    fn sextic_context() {
        let cm = sextic();
        assert_eq!(cm.sigma_k().len(), 6);
        assert_eq!(cm.enumerate_cm_types().len(), 8);
        let g = cm.base().gamma();
        let c = cm.base().hf_ab().proj(g.elem("g3").unwrap());
        assert!(cm.complex_conjugations().iter().all(|x| *x == c));
    }

    #[test]
    fn action_examples_zeta15() {
        let cm = zeta15();
        let ctx = cm.base();
        let g = ctx.gamma();
        let a = ctx.element(vec![0, 1], vec![g.elem("4").unwrap(), g.identity()]).unwrap();
        assert_eq!(cm.act_on_sigma_k(&a, 0).unwrap(), 2);
        let swap = ctx.element(vec![1, 0], vec![g.identity(), g.identity()]).unwrap();
        assert_eq!(cm.act_on_sigma_k(&swap, 0).unwrap(), 1);
        let phi = cm.cm_type(&[0, 1]).unwrap();
        assert_eq!(cm.act_on_cm_type(&a, &phi).unwrap(), cm.cm_type(&[2, 1]).unwrap());
        assert_eq!(cm.act_on_cm_type(&ctx.identity(), &phi).unwrap(), phi);
    }

    #[test]
    fn half_transfer_examples_zeta15() {
        let cm = zeta15();
        let ctx = cm.base();
        let g = ctx.gamma();
        let w = cm.canonical_section();
        let phi = cm.cm_type(&[0, 1]).unwrap();
        let swap = ctx.element(vec![1, 0], vec![g.identity(), g.identity()]).unwrap();
        assert_eq!(cm.half_transfer(&swap, &phi, &w).unwrap(), cm.hk_ab().group().zero());
        let a = ctx.element(vec![0, 1], vec![g.elem("4").unwrap(), g.identity()]).unwrap();
        assert_eq!(cm.half_transfer(&a, &phi, &w).unwrap(), cm.hk_ab().proj(g.elem("11").unwrap()));
        assert_eq!(cm.half_transfer(&ctx.identity(), &phi, &w).unwrap(), cm.hk_ab().group().zero());
    }

    #[test]
    fn sextic_orbits() {
        let cm = sextic();
        let types = cm.enumerate_cm_types();
        let orbits = cm.orbits(&cm.galois_generators(), &types).unwrap();
        let sizes: Vec<usize> = orbits.iter().map(Orbit::size).collect();
        assert_eq!(sizes, vec![6, 2]);
        assert_eq!(cm.type_names(&orbits[0].representative), vec!["g0", "g1", "g2"]);
        assert_eq!(cm.type_names(&orbits[1].representative), vec!["g0", "g2", "g4"]);
        let plectic = cm.orbits(&cm.base().generators(), &types).unwrap();
        assert_eq!(plectic.len(), 1);
        assert_eq!(plectic[0].size(), 8);
        let trivial = cm.orbits(&[], &types).unwrap();
        assert_eq!(trivial.len(), 8);
    }

    #[test]
    fn formula_matches_coset_action() {
        for cm in [zeta15(), sextic()] {
            for a in cm.base().enumerate().unwrap() {
                for rho in 0..cm.sigma_k().len() {
                    assert_eq!(cm.act_on_sigma_k(&a, rho).unwrap(), cm.act_on_sigma_k_via_map(&a, rho).unwrap());
                }
            }
        }
    }
}
