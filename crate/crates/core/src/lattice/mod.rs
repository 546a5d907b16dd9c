//! Integer linear algebra for finite abelian groups.
//!
//! Every finite abelian group is a product of cyclic groups `Z/m_1 x ... x Z/m_k`
//! with elements stored as reduced coordinate vectors. Homomorphisms are integer
//! matrices acting on column vectors. All solving goes through one Smith normal
//! form routine.

mod finab;
mod matrix;
mod snf;
mod solve;

pub use finab::{AbElem, AbHom, FinAb};
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SmithForm};
pub use solve::{
    fiber_product, is_cartesian_square, lexmin_in_coset, presentation, quotient, section_of_surjection,
    solve_mod, AbSubgroup, CartesianWitness, FiberProduct, HomConstraint, HomProblem, HomSolutions, ModSolution,
    Preimage, Presentation, Quotient, SquareCheck, SubgroupIso,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("modulus must be positive, got {0}")]
    BadModulus(i64),
    #[error("matrix does not define a homomorphism: column {column} times {modulus} is nonzero in the codomain")]
    NotWellDefined { column: usize, modulus: i64 },
    #[error("no solution: target is not in the image")]
    NoSolution,
    #[error("map is not surjective")]
    NotSurjective,
    #[error("surjection does not split")]
    NotSplit,
    #[error("constraint `{0}` cannot be satisfied")]
    ConstraintInfeasible(String),
    #[error("square does not commute")]
    NotCommuting,
    #[error("presentation defines an infinite group")]
    InfiniteQuotient,
    #[error("enumeration of {0} elements exceeds the cap")]
    TooLarge(u128),
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}
