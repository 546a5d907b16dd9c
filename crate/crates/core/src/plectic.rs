//! The plectic group `S_Σ ⋉ H_F^Σ` of a finite Galois model, its action on
//! `Γ` by right-`H_F`-equivariant bijections, and the product map `P`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{
    transfer, transfer_hom, AbelianQuotient, CosetSpace, Elem, FiniteGroup, GroupError, Subgroup, DEFAULT_MAX_ORDER,
};
use crate::lattice::{AbElem, AbHom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlecticError {
    #[error("elements belong to different Galois contexts")]
    ContextMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("not a coset section: {0}")]
    NotASection(String),
    #[error("map on the group is not a right-equivariant bijection: {0}")]
    NotEquivariant(String),
    #[error("malformed plectic element: {0}")]
    BadElement(String),
    #[error("plectic group of order {0} exceeds the enumeration cap {1}")]
    TooLarge(u128, usize),
}

/// Finite model of `Γ_Q ⊃ Γ_F` with a fixed section `s` of `Σ = Γ/H_F`.
#[derive(Clone, Debug)]
pub struct GaloisContext {
    id: u64,
    gamma: Arc<FiniteGroup>,
    whole: Subgroup,
    h_f: Subgroup,
    sigma: CosetSpace,
    section: Vec<Elem>,
    gamma_ab: AbelianQuotient,
    hf_ab: AbelianQuotient,
    cap: usize,
}

/// `(π, h)` relative to the section of its context.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PlecticElement {
    ctx: u64,
    pub pi: Vec<usize>,
    pub h: Vec<Elem>,
}

impl PlecticElement {
    pub fn context_id(&self) -> u64 {
        self.ctx
    }
}

/// Serialized form `{pi: [images], h: [element names]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlecticRepr {
    pub pi: Vec<usize>,
    pub h: Vec<String>,
}

impl GaloisContext {
    /// Context with the least-member section.
    pub fn new(gamma: &Arc<FiniteGroup>, h_f: &Subgroup) -> Result<Self, PlecticError> {
        let whole = Subgroup::whole(gamma);
        let sigma = CosetSpace::new(&whole, h_f)?;
        let section = sigma.least_section();
        let gamma_ab = AbelianQuotient::new(&whole);
        let hf_ab = AbelianQuotient::new(h_f);
        let mut ctx = GaloisContext {
            id: 0,
            gamma: gamma.clone(),
            whole,
            h_f: h_f.clone(),
            sigma,
            section,
            gamma_ab,
            hf_ab,
            cap: DEFAULT_MAX_ORDER,
        };
        ctx.id = ctx.fingerprint();
        Ok(ctx)
    }

    fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.gamma.id().hash(&mut hasher);
        self.h_f.members().hash(&mut hasher);
        self.section.hash(&mut hasher);
        hasher.finish()
    }

    /// Same model with a different section.
    pub fn with_section(&self, section: &[Elem]) -> Result<Self, PlecticError> {
        if !self.sigma.is_section(section) {
            return Err(PlecticError::NotASection(format!("{section:?}")));
        }
        let mut ctx = self.clone();
        ctx.section = section.to_vec();
        ctx.id = ctx.fingerprint();
        Ok(ctx)
    }

    /// Same model with section `s'_x = s_x t_x`.
    pub fn rebased(&self, t: &[Elem]) -> Result<Self, PlecticError> {
        self.check_shift(t)?;
        let s: Vec<Elem> = self.section.iter().zip(t).map(|(&s, &t)| self.gamma.mul(s, t)).collect();
        self.with_section(&s)
    }

    /// Caps materialization of the full plectic group.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn check_shift(&self, t: &[Elem]) -> Result<(), PlecticError> {
        if t.len() != self.r() || t.iter().any(|&x| !self.h_f.contains(x)) {
            return Err(PlecticError::BadElement("shift must be a vector of elements of H_F".into()));
        }
        Ok(())
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn gamma(&self) -> &Arc<FiniteGroup> {
        &self.gamma
    }

    pub fn whole(&self) -> &Subgroup {
        &self.whole
    }

    pub fn h_f(&self) -> &Subgroup {
        &self.h_f
    }

    pub fn sigma(&self) -> &CosetSpace {
        &self.sigma
    }

    pub fn section(&self) -> &[Elem] {
        &self.section
    }

    /// Number of embeddings `r = [Γ : H_F]`.
    pub fn r(&self) -> usize {
        self.sigma.len()
    }

    pub fn gamma_ab(&self) -> &AbelianQuotient {
        &self.gamma_ab
    }

    pub fn hf_ab(&self) -> &AbelianQuotient {
        &self.hf_ab
    }

    /// Transfer `Γ → H_F^ab`.
    pub fn transfer(&self, gamma: Elem) -> AbElem {
        transfer(&self.sigma, &self.hf_ab, gamma)
    }

    /// Transfer `Γ^ab → H_F^ab` as a homomorphism.
    pub fn transfer_hom(&self) -> AbHom {
        transfer_hom(&self.sigma, &self.gamma_ab, &self.hf_ab)
    }

    fn check(&self, a: &PlecticElement) -> Result<(), PlecticError> {
        if a.ctx != self.id {
            return Err(PlecticError::ContextMismatch);
        }
        Ok(())
    }

    /// Builds and validates an element.
    pub fn element(&self, pi: Vec<usize>, h: Vec<Elem>) -> Result<PlecticElement, PlecticError> {
        let r = self.r();
        if pi.len() != r || h.len() != r {
            return Err(PlecticError::BadElement(format!("expected {r} coordinates")));
        }
        let mut seen = vec![false; r];
        for &p in &pi {
            if p >= r || std::mem::replace(&mut seen[p], true) {
                return Err(PlecticError::BadElement(format!("{pi:?} is not a permutation")));
            }
        }
        if let Some(&x) = h.iter().find(|&&x| !self.h_f.contains(x)) {
            return Err(PlecticError::BadElement(format!("{} is not in H_F", self.gamma.name(x))));
        }
        Ok(PlecticElement { ctx: self.id, pi, h })
    }

    pub fn from_repr(&self, repr: &PlecticRepr) -> Result<PlecticElement, PlecticError> {
        let h: Result<Vec<Elem>, _> = repr.h.iter().map(|n| self.gamma.elem(n)).collect();
        self.element(repr.pi.clone(), h?)
    }

    pub fn to_repr(&self, a: &PlecticElement) -> PlecticRepr {
        PlecticRepr { pi: a.pi.clone(), h: a.h.iter().map(|&x| self.gamma.name(x).to_string()).collect() }
    }

    pub fn identity(&self) -> PlecticElement {
        PlecticElement { ctx: self.id, pi: (0..self.r()).collect(), h: vec![self.gamma.identity(); self.r()] }
    }

    /// `(π,h)(π',h') = (ππ', (h_{π'(x)} h'_x)_x)`.
    pub fn compose(&self, a: &PlecticElement, b: &PlecticElement) -> Result<PlecticElement, PlecticError> {
        self.check(a)?;
        self.check(b)?;
        let pi = b.pi.iter().map(|&y| a.pi[y]).collect();
        let h = (0..self.r()).map(|x| self.gamma.mul(a.h[b.pi[x]], b.h[x])).collect();
        Ok(PlecticElement { ctx: self.id, pi, h })
    }

    pub fn inverse(&self, a: &PlecticElement) -> Result<PlecticElement, PlecticError> {
        self.check(a)?;
        let r = self.r();
        let mut pi_inv = vec![0; r];
        for (x, &y) in a.pi.iter().enumerate() {
            pi_inv[y] = x;
        }
        let h = (0..r).map(|x| self.gamma.inv(a.h[pi_inv[x]])).collect();
        Ok(PlecticElement { ctx: self.id, pi: pi_inv, h })
    }

    /// The bijection `s_x δ ↦ s_{π(x)} h_x δ` of `Γ`, indexed by element.
    pub fn as_map(&self, a: &PlecticElement) -> Result<Vec<Elem>, PlecticError> {
        self.check(a)?;
        let g = &self.gamma;
        Ok(g.elements()
            .map(|gamma| {
                let x = self.sigma.coset_of(gamma);
                let delta = g.mul(g.inv(self.section[x]), gamma);
                g.product(&[self.section[a.pi[x]], a.h[x], delta])
            })
            .collect())
    }

    /// Image of a single element under [`Self::as_map`].
    pub fn apply(&self, a: &PlecticElement, gamma: Elem) -> Elem {
        let g = &self.gamma;
        let x = self.sigma.coset_of(gamma);
        let delta = g.mul(g.inv(self.section[x]), gamma);
        g.product(&[self.section[a.pi[x]], a.h[x], delta])
    }

    /// Inverse of [`Self::as_map`]: factors a right-`H_F`-equivariant bijection
    /// as `h_x = s_{π(x)}⁻¹ α(s_x)`.
    pub fn factor(&self, map: &[Elem]) -> Result<PlecticElement, PlecticError> {
        let g = &self.gamma;
        if map.len() != g.order() {
            return Err(PlecticError::NotEquivariant("map has the wrong length".into()));
        }
        let mut hit = vec![false; g.order()];
        for &y in map {
            if y.0 >= g.order() || std::mem::replace(&mut hit[y.0], true) {
                return Err(PlecticError::NotEquivariant("not a bijection".into()));
            }
        }
        for gamma in g.elements() {
            for &delta in self.h_f.members() {
                if map[g.mul(gamma, delta).0] != g.mul(map[gamma.0], delta) {
                    return Err(PlecticError::NotEquivariant(format!(
                        "fails at {} * {}",
                        g.name(gamma),
                        g.name(delta)
                    )));
                }
            }
        }
        let pi: Vec<usize> = self.section.iter().map(|&s| self.sigma.coset_of(map[s.0])).collect();
        let h = self
            .section
            .iter()
            .zip(&pi)
            .map(|(&s, &p)| g.mul(g.inv(self.section[p]), map[s.0]))
            .collect();
        self.element(pi, h)
    }

    /// Left translation by `γ`: `π(x) = γx`, `h_x = s_{γx}⁻¹ γ s_x`.
    pub fn embed(&self, gamma: Elem) -> PlecticElement {
        let g = &self.gamma;
        let (pi, h) = self
            .section
            .iter()
            .map(|&s| {
                let gs = g.mul(gamma, s);
                let y = self.sigma.coset_of(gs);
                (y, g.mul(g.inv(self.section[y]), gs))
            })
            .unzip();
        PlecticElement { ctx: self.id, pi, h }
    }

    /// Coordinates of `a` relative to the section `s_x t_x`: `h'_x = t_{π(x)}⁻¹ h_x t_x`.
    pub fn rebase(&self, a: &PlecticElement, t: &[Elem]) -> Result<PlecticElement, PlecticError> {
        self.check(a)?;
        let target = self.rebased(t)?;
        let g = &self.gamma;
        let h = (0..self.r()).map(|x| g.product(&[g.inv(t[a.pi[x]]), a.h[x], t[x]])).collect();
        Ok(PlecticElement { ctx: target.id, pi: a.pi.clone(), h })
    }

    /// `P(π, h) = ∏_x h_x` in `H_F^ab`.
    pub fn product_map(&self, a: &PlecticElement) -> Result<AbElem, PlecticError> {
        self.check(a)?;
        let ab = &self.hf_ab;
        Ok(ab.group().sum(a.h.iter().map(|&x| ab.proj(x)).collect::<Vec<_>>().iter()))
    }

    /// `r! · |H_F|^r`.
    pub fn plectic_order(&self) -> u128 {
        let r = self.r() as u128;
        let fact: u128 = (1..=r).product();
        fact * (self.h_f.order() as u128).pow(self.r() as u32)
    }

    /// Every element, permutations in lexicographic order and then `h` in
    /// lexicographic order of member index.
    pub fn enumerate(&self) -> Result<Vec<PlecticElement>, PlecticError> {
        let n = self.plectic_order();
        if n > self.cap as u128 {
            return Err(PlecticError::TooLarge(n, self.cap));
        }
        let r = self.r();
        let members = self.h_f.members();
        let hs: Vec<Vec<Elem>> =
            (0..r).map(|_| members.iter().copied()).multi_cartesian_product().collect();
        let hs = if r == 0 { vec![Vec::new()] } else { hs };
        let mut out = Vec::with_capacity(n as usize);
        for pi in (0..r).permutations(r) {
            for h in &hs {
                out.push(PlecticElement { ctx: self.id, pi: pi.clone(), h: h.clone() });
            }
        }
        Ok(out)
    }

    /// Generators of the plectic group: `(id, h)` with `h` a basis vector of
    /// `H_F` generators in one slot, plus adjacent transpositions.
    pub fn generators(&self) -> Vec<PlecticElement> {
        let r = self.r();
        let e = self.gamma.identity();
        let mut out = Vec::new();
        for x in 0..r {
            for g in self.h_f.generators() {
                let mut h = vec![e; r];
                h[x] = g;
                out.push(PlecticElement { ctx: self.id, pi: (0..r).collect(), h });
            }
        }
        for x in 0..r.saturating_sub(1) {
            let mut pi: Vec<usize> = (0..r).collect();
            pi.swap(x, x + 1);
            out.push(PlecticElement { ctx: self.id, pi, h: vec![e; r] });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta15() -> GaloisContext {
        let g = Arc::new(FiniteGroup::units_mod(15).unwrap());
        let h = Subgroup::from_names(&g, &["1", "4", "11", "14"]).unwrap();
        GaloisContext::new(&g, &h).unwrap()
    }

    fn el(ctx: &GaloisContext, pi: &[usize], h: &[&str]) -> PlecticElement {
        let h = h.iter().map(|n| ctx.gamma().elem(n).unwrap()).collect();
        ctx.element(pi.to_vec(), h).unwrap()
    }

    #[test]
    fn compose_example() {
        let ctx = zeta15();
        let a = el(&ctx, &[1, 0], &["4", "11"]);
        let b = el(&ctx, &[1, 0], &["14", "1"]);
        assert_eq!(ctx.compose(&a, &b).unwrap(), el(&ctx, &[0, 1], &["4", "4"]));
    }

    #[test]
    fn map_and_embed_examples() {
        let ctx = zeta15();
        let g = ctx.gamma().clone();
        let a = el(&ctx, &[1, 0], &["1", "4"]);
        let m = ctx.as_map(&a).unwrap();
        assert_eq!(g.name(m[g.elem("1").unwrap().0]), "2");
        assert_eq!(g.name(m[g.elem("2").unwrap().0]), "4");
        assert_eq!(ctx.embed(g.elem("2").unwrap()), a);
        assert_eq!(ctx.embed(g.identity()), ctx.identity());
        let id_map = ctx.as_map(&ctx.identity()).unwrap();
        assert!(g.elements().all(|x| id_map[x.0] == x));
    }

    #[test]
    fn product_map_examples() {
        let ctx = zeta15();
        let g = ctx.gamma().clone();
        let ab = ctx.hf_ab();
        let p = ctx.product_map(&ctx.embed(g.elem("2").unwrap())).unwrap();
        assert_eq!(p, ab.proj(g.elem("4").unwrap()));
        assert_eq!(p, ctx.transfer(g.elem("2").unwrap()));
        let p = ctx.product_map(&el(&ctx, &[1, 0], &["4", "11"])).unwrap();
        assert_eq!(p, ab.proj(g.elem("14").unwrap()));
    }

    #[test]
    fn rebase_example() {
        let ctx = zeta15();
        let g = ctx.gamma().clone();
        let a = el(&ctx, &[1, 0], &["1", "4"]);
        let t = vec![g.elem("4").unwrap(), g.elem("1").unwrap()];
        let b = ctx.rebase(&a, &t).unwrap();
        let other = ctx.rebased(&t).unwrap();
        assert_eq!(other.as_map(&b).unwrap(), ctx.as_map(&a).unwrap());
        let t_inv: Vec<Elem> = t.iter().map(|&x| g.inv(x)).collect();
        let back = other.rebase(&b, &t_inv).unwrap();
        assert_eq!(back, a);
        assert_eq!(other.product_map(&b).unwrap(), ctx.product_map(&a).unwrap());
    }

    #[test]
    fn context_mismatch() {
        let ctx = zeta15();
        let other = zeta15();
        let a = ctx.identity();
        let b = other.identity();
        assert_eq!(ctx.compose(&a, &b).unwrap_err(), PlecticError::ContextMismatch);
    }

    #[test]
    fn exhaustive_group_laws_zeta15() {
        let ctx = zeta15();
        let all = ctx.enumerate().unwrap();
        assert_eq!(all.len(), 32);
        let id = ctx.identity();
        for a in &all {
            let inv = ctx.inverse(a).unwrap();
            assert_eq!(ctx.compose(a, &inv).unwrap(), id);
            assert_eq!(ctx.compose(&id, a).unwrap(), *a);
            assert_eq!(ctx.factor(&ctx.as_map(a).unwrap()).unwrap(), *a);
            for b in &all {
                let ab = ctx.compose(a, b).unwrap();
                let ma = ctx.as_map(a).unwrap();
                let mb = ctx.as_map(b).unwrap();
                let mab = ctx.as_map(&ab).unwrap();
                for x in ctx.gamma().elements() {
                    assert_eq!(mab[x.0], ma[mb[x.0].0]);
                }
            }
        }
    }

    #[test]
    fn generators_generate() {
        let ctx = zeta15();
        let gens = ctx.generators();
        let mut seen = std::collections::HashSet::new();
        let mut frontier = vec![ctx.identity()];
        seen.insert(ctx.identity());
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = ctx.compose(g, &x).unwrap();
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        assert_eq!(seen.len(), 32);
    }
}
