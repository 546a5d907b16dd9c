use super::finab::{AbElem, AbHom, FinAb};
use super::matrix::IntMatrix;
use super::snf::smith_normal_form;
use super::{gcd, LatticeError};

/// Solutions of `A x ≡ b (mod moduli)` over the integers: a particular solution
/// and generators of the homogeneous solution lattice in `Z^n`.
#[derive(Clone, Debug)]
pub struct ModSolution {
    pub particular: Vec<i64>,
    pub kernel: Vec<Vec<i64>>,
}

pub fn solve_mod(a: &IntMatrix, moduli: &[i64], b: &[i64]) -> Option<ModSolution> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(moduli.len(), m, "one modulus per row");
    assert_eq!(b.len(), m, "right-hand side has wrong length");
    let big = a.hstack(&IntMatrix::diagonal(moduli));
    let s = smith_normal_form(&big);
    let ub = s.u.mul_vec(b);
    let mut z = vec![0i64; n + m];
    for i in 0..m {
        let d = if i < s.rank { s.d[(i, i)] } else { 0 };
        if d == 0 {
            if ub[i] != 0 {
                return None;
            }
        } else {
            if ub[i] % d != 0 {
                return None;
            }
            z[i] = ub[i] / d;
        }
    }
    let y = s.v.mul_vec(&z);
    let particular = y[..n].to_vec();
    let kernel = (s.rank..n + m).map(|j| s.v.column(j)[..n].to_vec()).collect();
    Some(ModSolution { particular, kernel })
}

/// A finite group given as `Z^n / colspan(relations)`, identified with a
/// product of cyclic groups in invariant-factor form.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub group: FinAb,
    /// Rows map `Z^n` to group coordinates.
    pub to_coords: IntMatrix,
    /// Columns lift group basis elements back to `Z^n`.
    pub from_coords: IntMatrix,
}

impl Presentation {
    pub fn coords(&self, x: &[i64]) -> AbElem {
        self.group.reduce(&self.to_coords.mul_vec(x))
    }

    pub fn lift(&self, q: &[i64]) -> Vec<i64> {
        self.from_coords.mul_vec(q)
    }
}

pub fn presentation(n: usize, relations: &IntMatrix) -> Result<Presentation, LatticeError> {
    if relations.rows() != n {
        return Err(LatticeError::DimensionMismatch("relation matrix has wrong height".into()));
    }
    let s = smith_normal_form(relations);
    let mut kept = Vec::new();
    let mut moduli = Vec::new();
    for i in 0..n {
        let d = if i < s.rank { s.d[(i, i)] } else { 0 };
        if d == 0 {
            return Err(LatticeError::InfiniteQuotient);
        }
        if d > 1 {
            kept.push(i);
            moduli.push(d);
        }
    }
    let group = FinAb::new(moduli)?;
    let mut to_coords = s.u.select_rows(&kept);
    for i in 0..to_coords.rows() {
        for j in 0..to_coords.cols() {
            to_coords[(i, j)] = to_coords[(i, j)].rem_euclid(group.moduli()[i]);
        }
    }
    let from_coords = s.u_inv.select_cols(&kept);
    Ok(Presentation { group, to_coords, from_coords })
}

/// All preimages of a point: `particular + kernel`.
#[derive(Clone, Debug)]
pub struct Preimage {
    pub particular: AbElem,
    pub kernel: AbSubgroup,
}

impl Preimage {
    pub fn is_unique(&self) -> bool {
        self.kernel.order() == 1
    }

    /// Every preimage, sorted.
    pub fn all(&self) -> Vec<AbElem> {
        let amb = self.kernel.ambient();
        let mut out: Vec<AbElem> =
            self.kernel.elements().iter().map(|k| amb.add(&self.particular, k)).collect();
        out.sort();
        out
    }
}

/// Subgroup of a finite abelian group, given by generators.
#[derive(Clone, Debug)]
pub struct AbSubgroup {
    ambient: FinAb,
    gens: Vec<AbElem>,
}

impl AbSubgroup {
    pub fn generated(ambient: &FinAb, gens: &[AbElem]) -> Self {
        let gens = gens
            .iter()
            .map(|g| ambient.reduce(g))
            .filter(|g| !ambient.is_zero(g))
            .collect();
        AbSubgroup { ambient: ambient.clone(), gens }
    }

    pub fn trivial(ambient: &FinAb) -> Self {
        AbSubgroup { ambient: ambient.clone(), gens: Vec::new() }
    }

    pub fn full(ambient: &FinAb) -> Self {
        AbSubgroup::generated(ambient, &ambient.basis_elements())
    }

    pub fn ambient(&self) -> &FinAb {
        &self.ambient
    }

    pub fn gens(&self) -> &[AbElem] {
        &self.gens
    }

    fn gen_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(self.ambient.rank(), &self.gens)
    }

    /// Integer coefficients expressing `a` in the generators, if `a` lies in the subgroup.
    pub fn express(&self, a: &[i64]) -> Option<Vec<i64>> {
        let a = self.ambient.reduce(a);
        solve_mod(&self.gen_matrix(), self.ambient.moduli(), &a).map(|s| s.particular)
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        self.express(a).is_some()
    }

    pub fn contains_subgroup(&self, other: &AbSubgroup) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn same_as(&self, other: &AbSubgroup) -> bool {
        self.ambient == other.ambient && self.contains_subgroup(other) && other.contains_subgroup(self)
    }

    /// The quotient `ambient / self`.
    pub fn quotient(&self) -> Quotient {
        quotient(self)
    }

    pub fn index(&self) -> u128 {
        self.quotient().group.order()
    }

    pub fn order(&self) -> u128 {
        self.ambient.order() / self.index()
    }

    /// The subgroup as an abstract group in invariant-factor form.
    pub fn abstract_group(&self) -> SubgroupIso {
        let s = self.gens.len();
        let g = self.gen_matrix();
        let sol = solve_mod(&g, self.ambient.moduli(), &self.ambient.zero()).expect("homogeneous system");
        let rel = IntMatrix::from_columns(s, &sol.kernel);
        let pres = presentation(s, &rel).expect("subgroup of a finite group is finite");
        let images: Vec<AbElem> = (0..pres.group.rank())
            .map(|i| self.ambient.reduce(&g.mul_vec(&pres.from_coords.column(i))))
            .collect();
        let embed = AbHom::from_images(pres.group.clone(), self.ambient.clone(), &images)
            .expect("embedding of a subgroup is well defined");
        SubgroupIso { subgroup: self.clone(), embed, pres }
    }

    /// Elements in sorted order.
    pub fn elements(&self) -> Vec<AbElem> {
        let iso = self.abstract_group();
        let mut out: Vec<AbElem> = iso.embed.domain().elements().map(|e| iso.embed.apply(&e)).collect();
        out.sort();
        out
    }

    pub fn sum(&self, other: &AbSubgroup) -> AbSubgroup {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        AbSubgroup::generated(&self.ambient, &gens)
    }

    pub fn intersect(&self, other: &AbSubgroup) -> AbSubgroup {
        // pairs (c, d) with G c = H d
        let g = self.gen_matrix();
        let mut h = IntMatrix::from_columns(self.ambient.rank(), &other.gens);
        for j in 0..h.cols() {
            h.negate_col(j);
        }
        let sol = solve_mod(&g.hstack(&h), self.ambient.moduli(), &self.ambient.zero()).expect("homogeneous system");
        let s = self.gens.len();
        let gens: Vec<AbElem> = sol.kernel.iter().map(|k| self.ambient.reduce(&g.mul_vec(&k[..s]))).collect();
        AbSubgroup::generated(&self.ambient, &gens)
    }

    /// Preimage of this subgroup under `f`.
    pub fn preimage_under(&self, f: &AbHom) -> AbSubgroup {
        let q = self.quotient();
        q.proj.compose(f).expect("f lands in the ambient group").kernel()
    }
}

/// A subgroup `S ≤ A` identified with an abstract group `Z/d_1 x ...`.
#[derive(Clone, Debug)]
pub struct SubgroupIso {
    subgroup: AbSubgroup,
    pub embed: AbHom,
    pres: Presentation,
}

impl SubgroupIso {
    pub fn group(&self) -> &FinAb {
        self.embed.domain()
    }

    pub fn subgroup(&self) -> &AbSubgroup {
        &self.subgroup
    }

    /// Abstract coordinates of an ambient element lying in the subgroup.
    pub fn coords(&self, a: &[i64]) -> Option<AbElem> {
        self.subgroup.express(a).map(|c| self.pres.coords(&c))
    }
}

/// Quotient `A / S` with its projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: FinAb,
    pub proj: AbHom,
    lift: IntMatrix,
}

impl Quotient {
    /// A representative in the ambient group of a quotient element.
    pub fn lift(&self, q: &[i64]) -> AbElem {
        self.proj.domain().reduce(&self.lift.mul_vec(q))
    }
}

pub fn quotient(sub: &AbSubgroup) -> Quotient {
    let amb = sub.ambient();
    let n = amb.rank();
    let rel = IntMatrix::diagonal(amb.moduli()).hstack(&IntMatrix::from_columns(n, sub.gens()));
    let pres = presentation(n, &rel).expect("quotient of a finite group is finite");
    let proj = AbHom::new(amb.clone(), pres.group.clone(), pres.to_coords.clone())
        .expect("projection onto a quotient is well defined");
    Quotient { group: pres.group, proj, lift: pres.from_coords }
}

/// `{(a, b) : f(a) = g(b)}` with its projections.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub group: FinAb,
    pub proj_a: AbHom,
    pub proj_b: AbHom,
    iso: SubgroupIso,
    split: usize,
}

impl FiberProduct {
    pub fn embed(&self) -> &AbHom {
        &self.iso.embed
    }

    /// Coordinates of the pair `(a, b)`, or `None` if `f(a) != g(b)`.
    pub fn pair(&self, a: &[i64], b: &[i64]) -> Option<AbElem> {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        self.iso.coords(&v)
    }

    pub fn split_point(&self) -> usize {
        self.split
    }
}

pub fn fiber_product(f: &AbHom, g: &AbHom) -> Result<FiberProduct, LatticeError> {
    let h = f.hstack(&g.scale(-1))?;
    let iso = h.kernel().abstract_group();
    let a = f.domain();
    let b = g.domain();
    let sum = a.direct_sum(b);
    let pa = IntMatrix::identity(a.rank()).hstack(&IntMatrix::zeros(a.rank(), b.rank()));
    let pb = IntMatrix::zeros(b.rank(), a.rank()).hstack(&IntMatrix::identity(b.rank()));
    let pa = AbHom::new(sum.clone(), a.clone(), pa)?;
    let pb = AbHom::new(sum, b.clone(), pb)?;
    Ok(FiberProduct {
        group: iso.group().clone(),
        proj_a: pa.compose(&iso.embed)?,
        proj_b: pb.compose(&iso.embed)?,
        iso,
        split: a.rank(),
    })
}

/// Why a commuting square fails to be Cartesian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CartesianWitness {
    /// Nonzero corner element mapping to zero in both directions.
    KernelElement(AbElem),
    /// Compatible pair not hit by the corner.
    MissingPair(AbElem, AbElem),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareCheck {
    pub cartesian: bool,
    pub witness: Option<CartesianWitness>,
}

/// Tests the square
///
/// ```text
///   A --top--> B
///   |          |
///  left      right
///   v          v
///   C --bot--> D
/// ```
///
/// for commutativity and then for `A ≅ B ×_D C`.
pub fn is_cartesian_square(
    top: &AbHom,
    left: &AbHom,
    right: &AbHom,
    bottom: &AbHom,
) -> Result<SquareCheck, LatticeError> {
    if !right.compose(top)?.same_map(&bottom.compose(left)?) {
        return Err(LatticeError::NotCommuting);
    }
    let canon = top.vstack(left)?;
    if let Some(k) = canon.kernel().gens().first() {
        return Ok(SquareCheck { cartesian: false, witness: Some(CartesianWitness::KernelElement(k.clone())) });
    }
    let fp = fiber_product(right, bottom)?;
    if fp.group.order() == top.domain().order() {
        return Ok(SquareCheck { cartesian: true, witness: None });
    }
    let image = canon.image();
    let missing = fp
        .group
        .basis_elements()
        .iter()
        .map(|e| fp.embed().apply(e))
        .find(|p| !image.contains(p))
        .expect("a proper subgroup misses some generator");
    let split = fp.split_point();
    Ok(SquareCheck {
        cartesian: false,
        witness: Some(CartesianWitness::MissingPair(missing[..split].to_vec(), missing[split..].to_vec())),
    })
}

/// Smallest element of `x0 + ⟨gens⟩` in lexicographic order of reduced coordinates.
pub fn lexmin_in_coset(space: &FinAb, x0: &[i64], gens: &[AbElem]) -> AbElem {
    let mut x = space.reduce(x0);
    let mut gens: Vec<AbElem> = gens.iter().map(|g| space.reduce(g)).filter(|g| !space.is_zero(g)).collect();
    for i in 0..space.rank() {
        if gens.is_empty() {
            break;
        }
        let m = space.moduli()[i];
        let step = gens.iter().fold(m, |acc, g| gcd(acc, g[i]));
        let target = x[i] % step;
        let row = IntMatrix::from_rows(&[gens.iter().map(|g| g[i]).collect()]).expect("single row");
        let sol = solve_mod(&row, &[m], &[target - x[i]]).expect("target is reachable by construction");
        for (c, g) in sol.particular.iter().zip(&gens) {
            x = space.add(&x, &space.scale(*c, g));
        }
        debug_assert_eq!(x[i], target);
        // keep only combinations that vanish in coordinate i
        gens = sol
            .kernel
            .iter()
            .map(|k| {
                let comb = k.iter().zip(&gens).fold(space.zero(), |acc, (&c, g)| space.add(&acc, &space.scale(c, g)));
                comb
            })
            .filter(|g| !space.is_zero(g))
            .collect();
    }
    x
}

/// Linear condition `via(X(at)) = value` on an unknown homomorphism `X`.
#[derive(Clone, Debug)]
pub struct HomConstraint {
    pub label: String,
    pub at: AbElem,
    pub via: AbHom,
    pub value: AbElem,
}

/// Search space of homomorphisms `domain -> codomain` subject to linear constraints.
#[derive(Clone, Debug)]
pub struct HomProblem {
    domain: FinAb,
    codomain: FinAb,
    constraints: Vec<HomConstraint>,
}

impl HomProblem {
    pub fn new(domain: &FinAb, codomain: &FinAb) -> Self {
        HomProblem { domain: domain.clone(), codomain: codomain.clone(), constraints: Vec::new() }
    }

    /// Requires `via(X(at)) = value`.
    pub fn constrain(&mut self, label: &str, at: AbElem, via: AbHom, value: AbElem) -> &mut Self {
        assert_eq!(via.domain(), &self.codomain, "constraint map must start at the codomain");
        self.constraints.push(HomConstraint { label: label.to_string(), at, via, value });
        self
    }

    /// Requires `X(at) = value`.
    pub fn prescribe(&mut self, label: &str, at: AbElem, value: AbElem) -> &mut Self {
        let id = AbHom::identity(&self.codomain);
        self.constrain(label, at, id, value)
    }

    fn space(&self) -> FinAb {
        let nb = self.domain.rank();
        let moduli: Vec<i64> =
            self.codomain.moduli().iter().flat_map(|&m| std::iter::repeat_n(m, nb)).collect();
        FinAb::new(moduli).expect("positive moduli")
    }

    fn system(&self, count: usize) -> (IntMatrix, Vec<i64>, Vec<i64>) {
        let (na, nb) = (self.codomain.rank(), self.domain.rank());
        let idx = |i: usize, j: usize| i * nb + j;
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let mut moduli = Vec::new();
        let mut rhs = Vec::new();
        for (j, &d) in self.domain.moduli().iter().enumerate() {
            for (i, &m) in self.codomain.moduli().iter().enumerate() {
                let mut row = vec![0; na * nb];
                row[idx(i, j)] = d;
                rows.push(row);
                moduli.push(m);
                rhs.push(0);
            }
        }
        for c in &self.constraints[..count] {
            let target = c.via.codomain();
            let value = target.reduce(&c.value);
            for r in 0..target.rank() {
                let mut row = vec![0; na * nb];
                for i in 0..na {
                    for j in 0..nb {
                        row[idx(i, j)] = c.via.matrix()[(r, i)] * c.at[j];
                    }
                }
                rows.push(row);
                moduli.push(target.moduli()[r]);
                rhs.push(value[r]);
            }
        }
        let m = if rows.is_empty() {
            IntMatrix::zeros(0, na * nb)
        } else {
            IntMatrix::from_rows(&rows).expect("rectangular system")
        };
        (m, moduli, rhs)
    }

    fn solve_prefix(&self, count: usize) -> Option<HomSolutions> {
        let (m, moduli, rhs) = self.system(count);
        let sol = solve_mod(&m, &moduli, &rhs)?;
        let space = self.space();
        let kernel = sol.kernel.iter().map(|k| space.reduce(k)).filter(|k| !space.is_zero(k)).collect();
        Some(HomSolutions {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            particular: space.reduce(&sol.particular),
            space,
            kernel,
        })
    }

    /// Solves all constraints. On failure names the first constraint that
    /// makes the system infeasible.
    pub fn solve(&self) -> Result<HomSolutions, LatticeError> {
        if let Some(s) = self.solve_prefix(self.constraints.len()) {
            return Ok(s);
        }
        for k in 1..=self.constraints.len() {
            if self.solve_prefix(k).is_none() {
                return Err(LatticeError::ConstraintInfeasible(self.constraints[k - 1].label.clone()));
            }
        }
        unreachable!("the unconstrained problem always has the zero map")
    }
}

/// Solution set of a [`HomProblem`]: a coset in the group of all matrices.
#[derive(Clone, Debug)]
pub struct HomSolutions {
    domain: FinAb,
    codomain: FinAb,
    space: FinAb,
    particular: AbElem,
    kernel: Vec<AbElem>,
}

impl HomSolutions {
    fn to_hom(&self, x: &[i64]) -> AbHom {
        let nb = self.domain.rank();
        let rows: Vec<Vec<i64>> = (0..self.codomain.rank()).map(|i| x[i * nb..(i + 1) * nb].to_vec()).collect();
        AbHom::from_rows(self.domain.clone(), self.codomain.clone(), &rows).expect("solutions are homomorphisms")
    }

    pub fn count(&self) -> u128 {
        AbSubgroup::generated(&self.space, &self.kernel).order()
    }

    /// The solution with lexicographically smallest row-major matrix.
    pub fn canonical(&self) -> AbHom {
        self.to_hom(&lexmin_in_coset(&self.space, &self.particular, &self.kernel))
    }

    /// All solutions sorted by row-major matrix, refusing more than `cap`.
    pub fn enumerate(&self, cap: u128) -> Result<Vec<AbHom>, LatticeError> {
        let sub = AbSubgroup::generated(&self.space, &self.kernel);
        let n = sub.order();
        if n > cap {
            return Err(LatticeError::TooLarge(n));
        }
        let mut xs: Vec<AbElem> = sub.elements().iter().map(|k| self.space.add(&self.particular, k)).collect();
        xs.sort();
        Ok(xs.iter().map(|x| self.to_hom(x)).collect())
    }
}

/// Sections `s` of a surjection `f` (so `f ∘ s = id`), subject to extra constraints.
pub fn section_of_surjection(f: &AbHom, extra: &[HomConstraint]) -> Result<HomSolutions, LatticeError> {
    if !f.is_surjective() {
        return Err(LatticeError::NotSurjective);
    }
    let b = f.codomain();
    let mut problem = HomProblem::new(b, f.domain());
    for e in b.basis_elements() {
        problem.constrain("section", e.clone(), f.clone(), e);
    }
    let base = problem.solve().map_err(|_| LatticeError::NotSplit)?;
    if extra.is_empty() {
        return Ok(base);
    }
    for c in extra {
        problem.constrain(&c.label, c.at.clone(), c.via.clone(), c.value.clone());
    }
    problem.solve()
}
