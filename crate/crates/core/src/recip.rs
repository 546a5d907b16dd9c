//! Finite models of the reciprocity diagrams for `Q ⊂ F ⊂ K`, splittings
//! `χ_F` of `rec_F`, and the plectic Taniyama element.

use serde::Serialize;
use thiserror::Error;

use crate::cm::{CmContext, CmError, CmType};
use crate::group::Elem;
use crate::lattice::{
    fiber_product, is_cartesian_square, section_of_surjection, AbElem, AbHom, AbSubgroup, CartesianWitness, FinAb,
    HomConstraint, HomProblem, LatticeError,
};
use crate::plectic::PlecticElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecipError {
    #[error("diagram does not commute: {0}")]
    DiagramNotCommuting(String),
    #[error("{0} is not surjective")]
    NotSurjective(String),
    #[error("{0} is not an isomorphism")]
    NotIsomorphism(String),
    #[error("{0}: wrong domain or codomain")]
    Shape(String),
    #[error("top square is not Cartesian, so the Taniyama element is not determined")]
    NotCartesian,
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("solution is not unique: {0}")]
    NotUnique(String),
    #[error("rec_F does not split")]
    NotSplit,
    #[error("no splitting satisfies `{0}`")]
    ConstraintInfeasible(String),
    #[error("no compatible inclusion map: {0}")]
    IncompatibleInclusion(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Cm(#[from] CmError),
}

/// Maps of a reciprocity model, before validation.
#[derive(Clone, Debug)]
pub struct RecipData {
    pub i_q: FinAb,
    pub i_f: FinAb,
    pub i_k: FinAb,
    pub rec_q: AbHom,
    pub rec_f: AbHom,
    pub rec_k: AbHom,
    pub n_kf: AbHom,
    pub i_kf: AbHom,
    pub i_fq: AbHom,
    pub sign_f: AbHom,
    /// `I_K ↠ Cl_K`; the identity of `I_K` when absent.
    pub cl: Option<AbHom>,
}

/// Properties computed from the data, never read from config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecipFlags {
    pub top_cartesian: bool,
    pub bottom_cartesian: bool,
    pub sign_bijection: bool,
    pub top_witness: Option<String>,
    pub bottom_witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RecipModel {
    cm: CmContext,
    d: RecipData,
    cl: AbHom,
    chi_cyc: AbHom,
    v_fq: AbHom,
    flags: RecipFlags,
}

/// A section `χ_F` of `rec_F` satisfying the model's admissibility constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    chi_f: AbHom,
    sign_compatible: bool,
}

impl Splitting {
    pub fn chi_f(&self) -> &AbHom {
        &self.chi_f
    }

    /// Whether `χ_F(c_x) = sign_F(e_x)` for every `x`.
    pub fn sign_compatible(&self) -> bool {
        self.sign_compatible
    }

    pub fn apply(&self, a: &[i64]) -> AbElem {
        self.chi_f.apply(a)
    }

    /// Row-major matrix, e.g. `[[1,0],[0,1]]`.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&self.chi_f.to_rows()).expect("integer matrix serializes")
    }
}

fn check_shape(name: &str, f: &AbHom, dom: &FinAb, cod: &FinAb) -> Result<(), RecipError> {
    if f.domain() != dom || f.codomain() != cod {
        return Err(RecipError::Shape(name.into()));
    }
    Ok(())
}

fn describe_witness(w: Option<CartesianWitness>) -> Option<String> {
    w.map(|w| match w {
        CartesianWitness::KernelElement(k) => format!("corner element {k:?} maps to zero both ways"),
        CartesianWitness::MissingPair(a, b) => format!("compatible pair ({a:?}, {b:?}) has no preimage"),
    })
}

impl RecipModel {
    /// Validates every square and computes the flags.
    pub fn new(cm: &CmContext, d: RecipData) -> Result<Self, RecipError> {
        let base = cm.base();
        let g_ab = base.gamma_ab().group();
        let hf = base.hf_ab().group();
        let hk = cm.hk_ab().group();
        let signs = FinAb::elementary_two(cm.r());
        check_shape("rec_Q", &d.rec_q, &d.i_q, g_ab)?;
        check_shape("rec_F", &d.rec_f, &d.i_f, hf)?;
        check_shape("rec_K", &d.rec_k, &d.i_k, hk)?;
        check_shape("n_KF", &d.n_kf, &d.i_k, &d.i_f)?;
        check_shape("i_KF", &d.i_kf, &d.i_f, &d.i_k)?;
        check_shape("i_FQ", &d.i_fq, &d.i_q, &d.i_f)?;
        check_shape("sign_F", &d.sign_f, &signs, &d.i_f)?;
        for (name, f) in [("rec_F", &d.rec_f), ("rec_K", &d.rec_k)] {
            if !f.is_surjective() {
                return Err(RecipError::NotSurjective(name.into()));
            }
        }
        if !d.rec_q.is_isomorphism() {
            return Err(RecipError::NotIsomorphism("rec_Q".into()));
        }
        let cl = match &d.cl {
            Some(cl) => {
                if cl.domain() != &d.i_k {
                    return Err(RecipError::Shape("cl_K".into()));
                }
                if !cl.is_surjective() {
                    return Err(RecipError::NotSurjective("cl_K".into()));
                }
                cl.clone()
            }
            None => AbHom::identity(&d.i_k),
        };
        let v_fq = base.transfer_hom();
        let squares = [
            ("norm: rec_F∘n_KF = res∘rec_K", d.rec_f.compose(&d.n_kf)?, cm.res().compose(&d.rec_k)?),
            ("inclusion K/F: rec_K∘i_KF = V_KF∘rec_F", d.rec_k.compose(&d.i_kf)?, cm.v_kf().compose(&d.rec_f)?),
            ("inclusion F/Q: rec_F∘i_FQ = V_FQ∘rec_Q", d.rec_f.compose(&d.i_fq)?, v_fq.compose(&d.rec_q)?),
        ];
        for (name, lhs, rhs) in squares {
            if !lhs.same_map(&rhs) {
                return Err(RecipError::DiagramNotCommuting(name.into()));
            }
        }
        let signed = d.rec_f.compose(&d.sign_f)?;
        for (x, c) in cm.complex_conjugations().iter().enumerate() {
            if &signed.apply(&signs.basis(x)) != c {
                return Err(RecipError::DiagramNotCommuting(format!("sign: rec_F∘sign_F(e_{x}) = c_{x}")));
            }
        }
        let top = is_cartesian_square(&d.rec_k, &d.n_kf, cm.res(), &d.rec_f)?;
        let bottom = is_cartesian_square(&d.rec_f, &d.i_kf, cm.v_kf(), &d.rec_k)?;
        let flags = RecipFlags {
            top_cartesian: top.cartesian,
            bottom_cartesian: bottom.cartesian,
            sign_bijection: signed.is_injective(),
            top_witness: describe_witness(top.witness),
            bottom_witness: describe_witness(bottom.witness),
        };
        let chi_cyc = d.rec_q.inverse()?;
        Ok(RecipModel { cm: cm.clone(), d, cl, chi_cyc, v_fq, flags })
    }

    /// Builds a model whose top square is Cartesian by construction:
    /// `I_K = I_F ×_{H_F^ab} H_K^ab`, `I_Q = Γ^ab`, `rec_Q = id`, and `i_FQ`,
    /// `sign_F` the lexicographically least lifts through `rec_F`.
    /// `i_KF(u) = (φ(u), V_KF(rec_F u))` with `φ` the hint or `2·id`.
    pub fn synthesize(cm: &CmContext, rec_f: &AbHom, norm_of_inclusion: Option<&AbHom>) -> Result<Self, RecipError> {
        let base = cm.base();
        let g_ab = base.gamma_ab().group().clone();
        let hf = base.hf_ab().group();
        let i_f = rec_f.domain().clone();
        check_shape("rec_F", rec_f, &i_f, hf)?;
        if !rec_f.is_surjective() {
            return Err(RecipError::NotSurjective("rec_F".into()));
        }
        let fp = fiber_product(rec_f, cm.res())?;
        let i_k = fp.group.clone();
        let v_fq = base.transfer_hom();

        let mut lift = HomProblem::new(&g_ab, &i_f);
        for (j, e) in g_ab.basis_elements().into_iter().enumerate() {
            let value = v_fq.apply(&e);
            lift.constrain(&format!("i_FQ on generator {j}"), e, rec_f.clone(), value);
        }
        let i_fq = lift.solve().map_err(|e| RecipError::IncompatibleInclusion(e.to_string()))?.canonical();

        let signs = FinAb::elementary_two(cm.r());
        let mut lift = HomProblem::new(&signs, &i_f);
        for (x, c) in cm.complex_conjugations().iter().enumerate() {
            lift.constrain(&format!("sign_F(e_{x}) over c_{x}"), signs.basis(x), rec_f.clone(), c.clone());
        }
        let sign_f = lift.solve().map_err(|e| RecipError::IncompatibleInclusion(e.to_string()))?.canonical();

        let phi = match norm_of_inclusion {
            Some(h) => {
                check_shape("norm_of_inclusion", h, &i_f, &i_f)?;
                h.clone()
            }
            None => AbHom::identity(&i_f).scale(2),
        };
        let mut images = Vec::new();
        for u in i_f.basis_elements() {
            let a = phi.apply(&u);
            let b = cm.v_kf().apply(&rec_f.apply(&u));
            let p = fp.pair(&a, &b).ok_or_else(|| {
                RecipError::IncompatibleInclusion(format!("image of {u:?} is not a compatible pair"))
            })?;
            images.push(p);
        }
        let i_kf = AbHom::from_images(i_f.clone(), i_k.clone(), &images)?;
        let d = RecipData {
            i_q: g_ab.clone(),
            i_f,
            i_k,
            rec_q: AbHom::identity(&g_ab),
            rec_f: rec_f.clone(),
            rec_k: fp.proj_b.clone(),
            n_kf: fp.proj_a.clone(),
            i_kf,
            i_fq,
            sign_f,
            cl: None,
        };
        RecipModel::new(cm, d)
    }

    pub fn cm(&self) -> &CmContext {
        &self.cm
    }

    pub fn data(&self) -> &RecipData {
        &self.d
    }

    pub fn flags(&self) -> &RecipFlags {
        &self.flags
    }

    pub fn i_f(&self) -> &FinAb {
        &self.d.i_f
    }

    pub fn i_k(&self) -> &FinAb {
        &self.d.i_k
    }

    pub fn i_q(&self) -> &FinAb {
        &self.d.i_q
    }

    pub fn rec_f(&self) -> &AbHom {
        &self.d.rec_f
    }

    pub fn rec_k(&self) -> &AbHom {
        &self.d.rec_k
    }

    pub fn n_kf(&self) -> &AbHom {
        &self.d.n_kf
    }

    pub fn i_kf(&self) -> &AbHom {
        &self.d.i_kf
    }

    pub fn i_fq(&self) -> &AbHom {
        &self.d.i_fq
    }

    pub fn sign_f(&self) -> &AbHom {
        &self.d.sign_f
    }

    pub fn cl(&self) -> &AbHom {
        &self.cl
    }

    pub fn chi_cyc(&self) -> &AbHom {
        &self.chi_cyc
    }

    pub fn v_fq(&self) -> &AbHom {
        &self.v_fq
    }

    /// The admissibility constraints on `χ_F` beyond being a section.
    fn constraints(&self) -> Vec<HomConstraint> {
        let g_ab = self.cm.base().gamma_ab().group();
        let id = AbHom::identity(&self.d.i_f);
        let mut out = Vec::new();
        for e in g_ab.basis_elements() {
            out.push(HomConstraint {
                label: "cyclotomic: χ_F∘V_FQ = i_FQ∘χ_cyc".into(),
                at: self.v_fq.apply(&e),
                via: id.clone(),
                value: self.d.i_fq.apply(&self.chi_cyc.apply(&e)),
            });
        }
        if self.flags.sign_bijection {
            let signs = FinAb::elementary_two(self.cm.r());
            for (x, c) in self.cm.complex_conjugations().iter().enumerate() {
                out.push(HomConstraint {
                    label: "sign: χ_F inverts sign_F on complex conjugations".into(),
                    at: c.clone(),
                    via: id.clone(),
                    value: self.d.sign_f.apply(&signs.basis(x)),
                });
            }
        }
        out
    }

    fn solutions(&self) -> Result<crate::lattice::HomSolutions, RecipError> {
        section_of_surjection(&self.d.rec_f, &self.constraints()).map_err(|e| match e {
            LatticeError::NotSplit => RecipError::NotSplit,
            LatticeError::NotSurjective => RecipError::NotSurjective("rec_F".into()),
            LatticeError::ConstraintInfeasible(l) => RecipError::ConstraintInfeasible(l),
            other => RecipError::Lattice(other),
        })
    }

    fn wrap(&self, chi_f: AbHom) -> Splitting {
        let signs = FinAb::elementary_two(self.cm.r());
        let sign_compatible = self
            .cm
            .complex_conjugations()
            .iter()
            .enumerate()
            .all(|(x, c)| chi_f.apply(c) == self.d.sign_f.apply(&signs.basis(x)));
        Splitting { chi_f, sign_compatible }
    }

    /// The admissible splitting with lexicographically least matrix.
    pub fn canonical_splitting(&self) -> Result<Splitting, RecipError> {
        Ok(self.wrap(self.solutions()?.canonical()))
    }

    /// Every admissible splitting, sorted by matrix.
    pub fn all_splittings(&self, cap: u128) -> Result<Vec<Splitting>, RecipError> {
        Ok(self.solutions()?.enumerate(cap)?.into_iter().map(|c| self.wrap(c)).collect())
    }

    pub fn splitting_count(&self) -> Result<u128, RecipError> {
        Ok(self.solutions()?.count())
    }

    /// Validates a user-supplied `χ_F` against every admissibility constraint.
    pub fn splitting(&self, chi_f: AbHom) -> Result<Splitting, RecipError> {
        check_shape("chi_F", &chi_f, self.cm.base().hf_ab().group(), &self.d.i_f)?;
        if !self.d.rec_f.compose(&chi_f)?.same_map(&AbHom::identity(chi_f.domain())) {
            return Err(RecipError::ConstraintInfeasible("section: rec_F∘χ_F = id".into()));
        }
        for c in self.constraints() {
            if c.via.apply(&chi_f.apply(&c.at)) != c.value {
                return Err(RecipError::ConstraintInfeasible(c.label));
            }
        }
        Ok(self.wrap(chi_f))
    }

    fn unique_preimage(&self, map: &AbHom, target: &[i64], what: &str) -> Result<AbElem, RecipError> {
        let pre = map.preimage(target).map_err(|_| RecipError::NoSolution(what.into()))?;
        if !pre.is_unique() {
            return Err(RecipError::NotUnique(what.into()));
        }
        Ok(pre.particular)
    }

    /// `f_Φ(α)`: the unique `f ∈ I_K` with `rec_K f = F_Φ(α)` and
    /// `n_KF f = χ_F(F_Φ(α)|_F)`.
    pub fn taniyama(&self, split: &Splitting, a: &PlecticElement, phi: &CmType) -> Result<AbElem, RecipError> {
        if !self.flags.top_cartesian {
            return Err(RecipError::NotCartesian);
        }
        let w = self.cm.canonical_section();
        let big_f = self.cm.half_transfer(a, phi, &w)?;
        let mut target = big_f.clone();
        target.extend(split.apply(&self.cm.res().apply(&big_f)));
        let map = self.d.rec_k.vstack(&self.d.n_kf)?;
        self.unique_preimage(&map, &target, "Taniyama element")
    }

    /// Taniyama element of `γ` from Tate's half transfer and the norm-free
    /// condition `i_KF n_KF f = i_KF i_FQ χ_cyc(γ̄)`.
    pub fn taniyama_galois(&self, gamma: Elem, phi: &CmType) -> Result<AbElem, RecipError> {
        let w = self.cm.canonical_section();
        let big_f = self.cm.tate_half_transfer(gamma, phi, &w)?;
        let gbar = self.cm.base().gamma_ab().proj(gamma);
        let mut target = big_f;
        target.extend(self.d.i_kf.apply(&self.d.i_fq.apply(&self.chi_cyc.apply(&gbar))));
        let map = self.d.rec_k.vstack(&self.d.i_kf.compose(&self.d.n_kf)?)?;
        self.unique_preimage(&map, &target, "Galois Taniyama element")
    }

    /// `χ_F(P(α))`.
    pub fn chi_of_product(&self, split: &Splitting, a: &PlecticElement) -> Result<AbElem, RecipError> {
        let p = self.cm.base().product_map(a).map_err(CmError::from)?;
        Ok(split.apply(&p))
    }

    /// Membership of `α` in the subgroup cut out by `χ_F(P(α)) ∈ I_R`.
    pub fn in_cm_group(&self, split: &Splitting, i_r: &AbSubgroup, a: &PlecticElement) -> Result<bool, RecipError> {
        Ok(i_r.contains(&self.chi_of_product(split, a)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, Subgroup};
    use crate::plectic::GaloisContext;
    use std::sync::Arc;

    fn zeta15_cm() -> CmContext {
        let g = Arc::new(FiniteGroup::units_mod(15).unwrap());
        let h_f = Subgroup::from_names(&g, &["1", "4", "11", "14"]).unwrap();
        let base = GaloisContext::new(&g, &h_f).unwrap();
        let h_k = Subgroup::from_names(&g, &["1", "11"]).unwrap();
        CmContext::new(&base, &h_k, g.elem("14").unwrap()).unwrap()
    }

    fn rec_by_names(cm: &CmContext, moduli: &[i64], names: &[&str]) -> AbHom {
        let g = cm.base().gamma();
        let images: Vec<AbElem> = names.iter().map(|n| cm.base().hf_ab().proj(g.elem(n).unwrap())).collect();
        AbHom::from_images(FinAb::new(moduli.to_vec()).unwrap(), cm.base().hf_ab().group().clone(), &images).unwrap()
    }

    #[test]
    fn synthetic_zeta15() {
        let cm = zeta15_cm();
        let rec_f = rec_by_names(&cm, &[2, 2], &["4", "11"]);
        let m = RecipModel::synthesize(&cm, &rec_f, None).unwrap();
        assert_eq!(m.i_k().order(), 2);
        assert!(m.flags().top_cartesian);
        assert!(m.flags().bottom_cartesian);
        assert!(!m.flags().sign_bijection);
        let split = m.canonical_splitting().unwrap();
        assert!(split.chi_f().same_map(&AbHom::identity(m.i_f())) || m.rec_f().is_isomorphism());
        assert!(m.rec_f().compose(split.chi_f()).unwrap().same_map(&AbHom::identity(cm.base().hf_ab().group())));
        assert!(split.sign_compatible());

        let ctx = cm.base();
        let g = ctx.gamma();
        let a = ctx.element(vec![0, 1], vec![g.elem("4").unwrap(), g.identity()]).unwrap();
        let phi = cm.cm_type(&[0, 1]).unwrap();
        let f = m.taniyama(&split, &a, &phi).unwrap();
        assert_eq!(cm.hk_ab().describe(&m.rec_k().apply(&f)), "11");
        assert_eq!(ctx.hf_ab().describe(&m.rec_f().apply(&m.n_kf().apply(&f))), "11");
        let f0 = m.taniyama(&split, &ctx.identity(), &phi).unwrap();
        assert!(m.i_k().is_zero(&f0));
    }

    #[test]
    fn galois_route_agrees() {
        let cm = zeta15_cm();
        let rec_f = rec_by_names(&cm, &[2, 2], &["4", "11"]);
        let m = RecipModel::synthesize(&cm, &rec_f, None).unwrap();
        let split = m.canonical_splitting().unwrap();
        for phi in cm.enumerate_cm_types() {
            for gamma in cm.base().gamma().elements() {
                let plectic = m.taniyama(&split, &cm.base().embed(gamma), &phi).unwrap();
                assert_eq!(plectic, m.taniyama_galois(gamma, &phi).unwrap());
            }
        }
    }

    #[test]
    fn explicit_model_flags() {
        let cm = zeta15_cm();
        let g_ab = cm.base().gamma_ab();
        let g = cm.base().gamma();
        let i_q = FinAb::new(vec![2, 4]).unwrap();
        let rec_q_images: Vec<AbElem> = ["14", "2"].iter().map(|n| g_ab.proj(g.elem(n).unwrap())).collect();
        let rec_q = AbHom::from_images(i_q.clone(), g_ab.group().clone(), &rec_q_images).unwrap();
        let rec_f = rec_by_names(&cm, &[2, 2], &["4", "11"]);
        let i_f = rec_f.domain().clone();
        let i_k = FinAb::new(vec![2, 2]).unwrap();
        let hk = cm.hk_ab();
        let rec_k_images: Vec<AbElem> = ["11", "1"].iter().map(|n| hk.proj(g.elem(n).unwrap())).collect();
        let rec_k = AbHom::from_images(i_k.clone(), hk.group().clone(), &rec_k_images).unwrap();
        let d = RecipData {
            i_q: i_q.clone(),
            i_f: i_f.clone(),
            i_k: i_k.clone(),
            rec_q,
            rec_f,
            rec_k,
            n_kf: AbHom::from_images(i_k.clone(), i_f.clone(), &[vec![0, 1], vec![0, 0]]).unwrap(),
            i_kf: AbHom::zero(&i_f, &i_k),
            i_fq: AbHom::from_rows(i_q, i_f.clone(), &[vec![0, 1], vec![0, 0]]).unwrap(),
            sign_f: AbHom::from_images(FinAb::elementary_two(2), i_f.clone(), &[vec![1, 1], vec![1, 1]]).unwrap(),
            cl: None,
        };
        let m = RecipModel::new(&cm, d.clone()).unwrap();
        assert!(!m.flags().top_cartesian);
        assert!(!m.flags().sign_bijection);
        let split = m.canonical_splitting().unwrap();
        let a = cm.base().identity();
        let phi = cm.cm_type(&[0, 1]).unwrap();
        assert_eq!(m.taniyama(&split, &a, &phi).unwrap_err(), RecipError::NotCartesian);

        let mut bad = d.clone();
        bad.n_kf = AbHom::zero(&i_k, &i_f);
        assert!(matches!(RecipModel::new(&cm, bad).unwrap_err(), RecipError::DiagramNotCommuting(s) if s.starts_with("norm")));
        let mut bad = d;
        bad.rec_f = AbHom::zero(&i_f, cm.base().hf_ab().group());
        assert_eq!(RecipModel::new(&cm, bad).unwrap_err(), RecipError::NotSurjective("rec_F".into()));
    }

    #[test]
    fn wide_model_has_two_splittings() {
        let cm = zeta15_cm();
        let rec_f = rec_by_names(&cm, &[2, 2, 2], &["4", "11", "1"]);
        let i_f = rec_f.domain().clone();
        let hint = AbHom::from_rows(i_f.clone(), i_f.clone(), &[vec![0, 0, 0], vec![0, 0, 0], vec![0, 0, 1]]).unwrap();
        let m = RecipModel::synthesize(&cm, &rec_f, Some(&hint)).unwrap();
        assert!(m.flags().top_cartesian && m.flags().bottom_cartesian);
        let all = m.all_splittings(100).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0], m.canonical_splitting().unwrap());
        for s in &all {
            assert_eq!(m.splitting(s.chi_f().clone()).unwrap(), *s);
        }
        let plain = RecipModel::synthesize(&cm, &rec_f, None).unwrap();
        assert!(!plain.flags().bottom_cartesian);
    }

    #[test]
    fn non_split_rec() {
        // 11 only lifts to elements of order 4
        let cm = zeta15_cm();
        let rec_f = rec_by_names(&cm, &[2, 4], &["14", "11"]);
        let m = RecipModel::synthesize(&cm, &rec_f, None).unwrap();
        assert_eq!(m.canonical_splitting().unwrap_err(), RecipError::NotSplit);
    }
}
