use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::solve::{solve_mod, AbSubgroup, Preimage};
use super::{lcm, LatticeError};

/// Element of a [`FinAb`]: one reduced residue per cyclic factor.
pub type AbElem = Vec<i64>;

/// A finite abelian group `Z/m_1 x ... x Z/m_k`.
///
/// Groups produced by Smith normal form are in invariant-factor form
/// (`m_i | m_{i+1}`, all `m_i > 1`), but direct sums of such groups need not be,
/// so the type accepts any positive moduli.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAb {
    moduli: Vec<i64>,
}

impl FinAb {
    pub fn new(moduli: Vec<i64>) -> Result<Self, LatticeError> {
        if let Some(&m) = moduli.iter().find(|&&m| m < 1) {
            return Err(LatticeError::BadModulus(m));
        }
        Ok(FinAb { moduli })
    }

    pub fn trivial() -> Self {
        FinAb { moduli: Vec::new() }
    }

    pub fn cyclic(n: i64) -> Self {
        assert!(n >= 1, "cyclic group of order {n}");
        FinAb { moduli: vec![n] }
    }

    /// `(Z/2)^n`.
    pub fn elementary_two(n: usize) -> Self {
        FinAb { moduli: vec![2; n] }
    }

    pub fn direct_sum(&self, other: &FinAb) -> FinAb {
        let mut moduli = self.moduli.clone();
        moduli.extend_from_slice(&other.moduli);
        FinAb { moduli }
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    /// Number of cyclic factors (coordinates).
    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn exponent(&self) -> i64 {
        self.moduli.iter().fold(1, |acc, &m| lcm(acc, m))
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_invariant_form(&self) -> bool {
        self.moduli.iter().all(|&m| m > 1) && self.moduli.windows(2).all(|w| w[1] % w[0] == 0)
    }

    pub fn zero(&self) -> AbElem {
        vec![0; self.rank()]
    }

    pub fn basis(&self, i: usize) -> AbElem {
        let mut e = self.zero();
        e[i] = 1 % self.moduli[i];
        e
    }

    pub fn basis_elements(&self) -> Vec<AbElem> {
        (0..self.rank()).map(|i| self.basis(i)).collect()
    }

    pub fn reduce(&self, v: &[i64]) -> AbElem {
        assert_eq!(v.len(), self.rank(), "element has wrong number of coordinates");
        v.iter().zip(&self.moduli).map(|(&x, &m)| x.rem_euclid(m)).collect()
    }

    /// True if `v` has the right length and every entry is already reduced.
    pub fn is_element(&self, v: &[i64]) -> bool {
        v.len() == self.rank() && v.iter().zip(&self.moduli).all(|(&x, &m)| (0..m).contains(&x))
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> AbElem {
        let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn sub(&self, a: &[i64], b: &[i64]) -> AbElem {
        let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&s)
    }

    pub fn neg(&self, a: &[i64]) -> AbElem {
        let s: Vec<i64> = a.iter().map(|x| -x).collect();
        self.reduce(&s)
    }

    pub fn scale(&self, k: i64, a: &[i64]) -> AbElem {
        let s: Vec<i64> = a.iter().zip(&self.moduli).map(|(&x, &m)| (k.rem_euclid(m) * x) % m).collect();
        self.reduce(&s)
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a AbElem>) -> AbElem {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    pub fn is_zero(&self, a: &[i64]) -> bool {
        self.reduce(a).iter().all(|&x| x == 0)
    }

    pub fn element_order(&self, a: &[i64]) -> i64 {
        let a = self.reduce(a);
        a.iter().zip(&self.moduli).fold(1, |acc, (&x, &m)| lcm(acc, m / super::gcd(x, m)))
    }

    /// Mixed-radix index of an element, first coordinate most significant.
    pub fn index_of(&self, a: &[i64]) -> usize {
        let a = self.reduce(a);
        a.iter().zip(&self.moduli).fold(0usize, |acc, (&x, &m)| acc * m as usize + x as usize)
    }

    pub fn element_at(&self, mut idx: usize) -> AbElem {
        let mut out = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let m = self.moduli[i] as usize;
            out[i] = (idx % m) as i64;
            idx /= m;
        }
        out
    }

    /// All elements in lexicographic order. Panics if the group has more than `2^24` elements.
    pub fn elements(&self) -> impl Iterator<Item = AbElem> + '_ {
        let n = self.order();
        assert!(n <= 1 << 24, "refusing to enumerate {n} elements");
        (0..n as usize).map(move |i| self.element_at(i))
    }
}

impl fmt::Debug for FinAb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FinAb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z/{m}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Homomorphism between finite abelian groups, stored as the matrix of images
/// of the domain's basis elements (one column per domain coordinate).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbHom {
    domain: FinAb,
    codomain: FinAb,
    matrix: IntMatrix,
}

impl AbHom {
    /// Validates dimensions and well-definedness, then reduces entries row by
    /// row modulo the codomain.
    pub fn new(domain: FinAb, codomain: FinAb, matrix: IntMatrix) -> Result<Self, LatticeError> {
        if matrix.rows() != codomain.rank() || matrix.cols() != domain.rank() {
            return Err(LatticeError::DimensionMismatch(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.rank(),
                domain.rank()
            )));
        }
        for (j, &d) in domain.moduli().iter().enumerate() {
            let col: Vec<i64> = matrix.column(j).iter().map(|x| x * d).collect();
            if !codomain.is_zero(&col) {
                return Err(LatticeError::NotWellDefined { column: j, modulus: d });
            }
        }
        let mut m = matrix;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m[(i, j)] = m[(i, j)].rem_euclid(codomain.moduli()[i]);
            }
        }
        Ok(AbHom { domain, codomain, matrix: m })
    }

    /// Builds the map sending the j-th basis element of `domain` to `images[j]`.
    pub fn from_images(domain: FinAb, codomain: FinAb, images: &[AbElem]) -> Result<Self, LatticeError> {
        if images.len() != domain.rank() || images.iter().any(|v| v.len() != codomain.rank()) {
            return Err(LatticeError::DimensionMismatch("image list does not match the groups".into()));
        }
        let m = IntMatrix::from_columns(codomain.rank(), images);
        AbHom::new(domain, codomain, m)
    }

    /// Builds a map from a row-major matrix whose rows are codomain coordinates.
    pub fn from_rows(domain: FinAb, codomain: FinAb, rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        let m = if rows.is_empty() {
            IntMatrix::zeros(0, domain.rank())
        } else {
            IntMatrix::from_rows(rows).ok_or_else(|| LatticeError::DimensionMismatch("ragged matrix".into()))?
        };
        AbHom::new(domain, codomain, m)
    }

    /// Skips validation. Only for deliberately corrupting maps in mutation tests.
    pub fn from_matrix_unchecked(domain: FinAb, codomain: FinAb, matrix: IntMatrix) -> Self {
        AbHom { domain, codomain, matrix }
    }

    pub fn identity(a: &FinAb) -> Self {
        AbHom { domain: a.clone(), codomain: a.clone(), matrix: IntMatrix::identity(a.rank()) }
            .reduced()
    }

    pub fn zero(domain: &FinAb, codomain: &FinAb) -> Self {
        AbHom {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: IntMatrix::zeros(codomain.rank(), domain.rank()),
        }
    }

    fn reduced(mut self) -> Self {
        for i in 0..self.matrix.rows() {
            for j in 0..self.matrix.cols() {
                self.matrix[(i, j)] = self.matrix[(i, j)].rem_euclid(self.codomain.moduli()[i]);
            }
        }
        self
    }

    pub fn domain(&self) -> &FinAb {
        &self.domain
    }

    pub fn codomain(&self) -> &FinAb {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, a: &[i64]) -> AbElem {
        assert_eq!(a.len(), self.domain.rank(), "argument has wrong number of coordinates");
        self.codomain.reduce(&self.matrix.mul_vec(a))
    }

    /// Images of the domain basis.
    pub fn images(&self) -> Vec<AbElem> {
        (0..self.domain.rank()).map(|j| self.matrix.column(j)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AbHom) -> Result<AbHom, LatticeError> {
        if inner.codomain != self.domain {
            return Err(LatticeError::DimensionMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.domain, self.codomain, inner.domain, inner.codomain
            )));
        }
        Ok(AbHom {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.mul(&inner.matrix),
        }
        .reduced())
    }

    pub fn add(&self, other: &AbHom) -> Result<AbHom, LatticeError> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(LatticeError::DimensionMismatch("adding maps between different groups".into()));
        }
        let images: Vec<AbElem> = self
            .images()
            .iter()
            .zip(other.images())
            .map(|(a, b)| self.codomain.add(a, &b))
            .collect();
        AbHom::from_images(self.domain.clone(), self.codomain.clone(), &images)
    }

    pub fn scale(&self, k: i64) -> AbHom {
        let images: Vec<AbElem> = self.images().iter().map(|a| self.codomain.scale(k, a)).collect();
        AbHom::from_images(self.domain.clone(), self.codomain.clone(), &images).expect("multiple of a homomorphism")
    }

    /// `(a, b) ↦ self(a) + other(b)` on `domain ⊕ other.domain`.
    pub fn hstack(&self, other: &AbHom) -> Result<AbHom, LatticeError> {
        if self.codomain != other.codomain {
            return Err(LatticeError::DimensionMismatch("maps have different codomains".into()));
        }
        AbHom::new(
            self.domain.direct_sum(&other.domain),
            self.codomain.clone(),
            self.matrix.hstack(&other.matrix),
        )
    }

    /// `a ↦ (self(a), other(a))` into `codomain ⊕ other.codomain`.
    pub fn vstack(&self, other: &AbHom) -> Result<AbHom, LatticeError> {
        if self.domain != other.domain {
            return Err(LatticeError::DimensionMismatch("maps have different domains".into()));
        }
        AbHom::new(
            self.domain.clone(),
            self.codomain.direct_sum(&other.codomain),
            self.matrix.vstack(&other.matrix),
        )
    }

    pub fn image(&self) -> AbSubgroup {
        AbSubgroup::generated(&self.codomain, &self.images())
    }

    pub fn kernel(&self) -> AbSubgroup {
        let sol = solve_mod(&self.matrix, self.codomain.moduli(), &self.codomain.zero())
            .expect("zero is always in the image");
        let gens: Vec<AbElem> = sol.kernel.iter().map(|g| self.domain.reduce(g)).collect();
        AbSubgroup::generated(&self.domain, &gens)
    }

    pub fn is_surjective(&self) -> bool {
        self.image().order() == self.codomain.order()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().order() == 1
    }

    pub fn is_isomorphism(&self) -> bool {
        self.domain.order() == self.codomain.order() && self.is_injective()
    }

    /// One preimage of `b` plus kernel generators, or `NoSolution`.
    pub fn preimage(&self, b: &[i64]) -> Result<Preimage, LatticeError> {
        let b = self.codomain.reduce(b);
        let sol = solve_mod(&self.matrix, self.codomain.moduli(), &b).ok_or(LatticeError::NoSolution)?;
        let particular = self.domain.reduce(&sol.particular);
        let kernel: Vec<AbElem> = sol
            .kernel
            .iter()
            .map(|g| self.domain.reduce(g))
            .filter(|g| !self.domain.is_zero(g))
            .collect();
        Ok(Preimage { particular, kernel: AbSubgroup::generated(&self.domain, &kernel) })
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Result<AbHom, LatticeError> {
        if !self.is_isomorphism() {
            return Err(LatticeError::NoSolution);
        }
        let images: Result<Vec<AbElem>, _> = self
            .codomain
            .basis_elements()
            .iter()
            .map(|e| self.preimage(e).map(|p| p.particular))
            .collect();
        AbHom::from_images(self.codomain.clone(), self.domain.clone(), &images?)
    }

    /// True if the map agrees with `other` on every basis element.
    pub fn same_map(&self, other: &AbHom) -> bool {
        self.domain == other.domain && self.codomain == other.codomain && self.matrix == other.matrix
    }

    /// Row-major entries of the reduced matrix.
    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.matrix.to_rows()
    }
}

impl fmt::Debug for AbHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbHom({} -> {}, {})", self.domain, self.codomain, self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_roundtrip() {
        let g = FinAb::new(vec![2, 3, 4]).unwrap();
        let all: Vec<AbElem> = g.elements().collect();
        assert_eq!(all.len(), 24);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(g.index_of(a), i);
        }
        assert_eq!(g.exponent(), 12);
        assert_eq!(g.element_order(&[1, 1, 1]), 12);
    }

    #[test]
    fn ill_defined_matrix_rejected() {
        // Z/2 -> Z/3 sending 1 to 1 is not a homomorphism
        let err = AbHom::from_images(FinAb::cyclic(2), FinAb::cyclic(3), &[vec![1]]).unwrap_err();
        assert!(matches!(err, LatticeError::NotWellDefined { .. }));
        assert!(AbHom::from_images(FinAb::cyclic(2), FinAb::cyclic(4), &[vec![2]]).is_ok());
    }

    #[test]
    fn preimage_examples() {
        let f = AbHom::from_images(FinAb::cyclic(4), FinAb::cyclic(2), &[vec![1]]).unwrap();
        let p = f.preimage(&[1]).unwrap();
        assert_eq!(p.particular, vec![1]);
        assert_eq!(p.kernel.elements(), vec![vec![0], vec![2]]);

        let f = AbHom::from_images(FinAb::cyclic(2), FinAb::cyclic(4), &[vec![2]]).unwrap();
        assert_eq!(f.preimage(&[1]).unwrap_err(), LatticeError::NoSolution);

        let f = AbHom::from_images(FinAb::cyclic(6), FinAb::cyclic(6), &[vec![2]]).unwrap();
        let p = f.preimage(&[4]).unwrap();
        assert_eq!(f.apply(&p.particular), vec![4]);
        assert_eq!(p.kernel.elements(), vec![vec![0], vec![3]]);
        let mut all: Vec<i64> = p.all().into_iter().map(|v| v[0]).collect();
        all.sort();
        assert_eq!(all, vec![2, 5]);
    }

    #[test]
    fn inverse_of_automorphism() {
        let g = FinAb::cyclic(5);
        let f = AbHom::from_images(g.clone(), g.clone(), &[vec![2]]).unwrap();
        let inv = f.inverse().unwrap();
        assert_eq!(inv.apply(&[1]), vec![3]);
        assert!(f.compose(&inv).unwrap().same_map(&AbHom::identity(&g)));
    }
}
