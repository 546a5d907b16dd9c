//! Brute-force oracles for the abelian-group solvers.

#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;
use plectic_core::lattice::{
    fiber_product, section_of_surjection, AbElem, AbHom, AbSubgroup, FinAb, HomProblem, LatticeError,
};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Largest search space the hom oracle is allowed to walk.
pub const ORACLE_CAP: u128 = 1 << 14;

/// Invariant-factor lists `d1 | d2 | ... | dk` with product at most `max`.
pub fn abelian_groups(max: i64) -> Vec<FinAb> {
    fn go(prev: i64, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        out.push(cur.clone());
        let mut d = if prev == 0 { 2 } else { prev };
        while d <= left {
            if prev == 0 || d % prev == 0 {
                cur.push(d);
                go(d, left / d, cur, out);
                cur.pop();
            }
            d += if prev == 0 { 1 } else { prev };
        }
    }
    let mut out = Vec::new();
    go(0, max, &mut Vec::new(), &mut out);
    out.into_iter().map(|m| FinAb::new(m).unwrap()).collect()
}

pub fn hom_space_size(d: &FinAb, c: &FinAb) -> u128 {
    c.order().saturating_pow(d.rank() as u32)
}

/// Every homomorphism `d -> c`, as image tuples of the basis.
pub fn all_homs(d: &FinAb, c: &FinAb) -> Vec<AbHom> {
    let choices: Vec<Vec<AbElem>> = d
        .moduli()
        .iter()
        .map(|&n| c.elements().filter(|b| c.is_zero(&c.scale(n, b))).collect())
        .collect();
    if choices.is_empty() {
        return vec![AbHom::zero(d, c)];
    }
    choices
        .into_iter()
        .multi_cartesian_product()
        .map(|images| AbHom::from_images(d.clone(), c.clone(), &images).unwrap())
        .collect()
}

pub fn random_elem(rng: &mut ChaCha8Rng, g: &FinAb) -> AbElem {
    g.moduli().iter().map(|&m| rng.random_range(0..m)).collect()
}

pub fn random_hom(rng: &mut ChaCha8Rng, d: &FinAb, c: &FinAb) -> AbHom {
    let images: Vec<AbElem> = d
        .moduli()
        .iter()
        .map(|&n| {
            let ok: Vec<AbElem> = c.elements().filter(|b| c.is_zero(&c.scale(n, b))).collect();
            ok.choose(rng).unwrap().clone()
        })
        .collect();
    AbHom::from_images(d.clone(), c.clone(), &images).unwrap()
}

fn key(h: &AbHom) -> Vec<AbElem> {
    h.images()
}

/// Outcome of one oracle comparison; `Err` carries a description.
pub type Verdict = Result<(), String>;

/// A random constrained hom problem `d -> c` solved both ways.
pub fn check_solve_hom(rng: &mut ChaCha8Rng, d: &FinAb, c: &FinAb, e: &FinAb) -> Verdict {
    let mut problem = HomProblem::new(d, c);
    let mut constraints = Vec::new();
    // satisfiable constraints from a planted solution, then one arbitrary one
    let planted = random_hom(rng, d, c);
    for _ in 0..rng.random_range(0..=2) {
        let at = random_elem(rng, d);
        let via = random_hom(rng, c, e);
        let value = via.apply(&planted.apply(&at));
        constraints.push((at, via, value));
    }
    if rng.random_bool(0.5) {
        let at = random_elem(rng, d);
        let via = random_hom(rng, c, e);
        constraints.push((at, via, random_elem(rng, e)));
    }
    for (i, (at, via, value)) in constraints.iter().enumerate() {
        problem.constrain(&format!("c{i}"), at.clone(), via.clone(), value.clone());
    }
    let brute: BTreeSet<Vec<AbElem>> = all_homs(d, c)
        .into_iter()
        .filter(|h| constraints.iter().all(|(at, via, value)| via.apply(&h.apply(at)) == *value))
        .map(|h| key(&h))
        .collect();
    match problem.solve() {
        Ok(sol) => {
            if sol.count() != brute.len() as u128 {
                return Err(format!("{d:?}->{c:?}: count {} vs brute {}", sol.count(), brute.len()));
            }
            let listed: BTreeSet<Vec<AbElem>> = sol.enumerate(ORACLE_CAP).unwrap().iter().map(key).collect();
            if listed != brute {
                return Err(format!("{d:?}->{c:?}: solution sets differ"));
            }
            if !brute.contains(&key(&sol.canonical())) {
                return Err(format!("{d:?}->{c:?}: canonical solution is not a solution"));
            }
            Ok(())
        }
        Err(LatticeError::ConstraintInfeasible(_)) if brute.is_empty() => Ok(()),
        Err(err) => Err(format!("{d:?}->{c:?}: solver error {err} with {} brute solutions", brute.len())),
    }
}

/// `a -> a/S` for a random subgroup `S`, sections compared with brute force.
pub fn check_section(rng: &mut ChaCha8Rng, a: &FinAb) -> Verdict {
    let gens: Vec<AbElem> = (0..rng.random_range(0..=2)).map(|_| random_elem(rng, a)).collect();
    let q = AbSubgroup::generated(a, &gens).quotient();
    let f = q.proj.clone();
    let b = f.codomain().clone();
    if hom_space_size(&b, a) > ORACLE_CAP {
        return Ok(());
    }
    let id = AbHom::identity(&b);
    let brute: BTreeSet<Vec<AbElem>> =
        all_homs(&b, a).into_iter().filter(|s| f.compose(s).unwrap().same_map(&id)).map(|s| key(&s)).collect();
    match section_of_surjection(&f, &[]) {
        Ok(sol) => {
            let listed: BTreeSet<Vec<AbElem>> = sol.enumerate(ORACLE_CAP).unwrap().iter().map(key).collect();
            if listed != brute {
                return Err(format!("{a:?} mod {gens:?}: {} sections vs brute {}", listed.len(), brute.len()));
            }
            Ok(())
        }
        Err(LatticeError::NotSplit) if brute.is_empty() => Ok(()),
        Err(err) => Err(format!("{a:?} mod {gens:?}: {err} with {} brute sections", brute.len())),
    }
}

/// Fiber product of two random maps into `c`, compared with the set of compatible pairs.
pub fn check_fiber_product(rng: &mut ChaCha8Rng, a: &FinAb, b: &FinAb, c: &FinAb) -> Verdict {
    let f = random_hom(rng, a, c);
    let g = random_hom(rng, b, c);
    let fp = fiber_product(&f, &g).map_err(|e| e.to_string())?;
    let brute: BTreeSet<(AbElem, AbElem)> = a
        .elements()
        .cartesian_product(b.elements().collect::<Vec<_>>())
        .filter(|(x, y)| f.apply(x) == g.apply(y))
        .collect();
    if fp.group.order() != brute.len() as u128 {
        return Err(format!("{a:?}x{b:?} over {c:?}: order {} vs {}", fp.group.order(), brute.len()));
    }
    let image: BTreeSet<(AbElem, AbElem)> =
        fp.group.elements().map(|z| (fp.proj_a.apply(&z), fp.proj_b.apply(&z))).collect();
    if image != brute {
        return Err(format!("{a:?}x{b:?} over {c:?}: pairs differ"));
    }
    for (x, y) in &brute {
        match fp.pair(x, y) {
            Some(z) if fp.proj_a.apply(&z) == *x && fp.proj_b.apply(&z) == *y => {}
            _ => return Err(format!("{a:?}x{b:?}: pair({x:?},{y:?}) not recovered")),
        }
    }
    Ok(())
}

/// Runs all three oracles with every group of order at most `max_order` as
/// the main group. Returns the number of comparisons and the failures.
pub fn lattice_sweep(rng: &mut ChaCha8Rng, max_order: i64, rounds: usize) -> (usize, Vec<String>) {
    let groups = abelian_groups(max_order);
    let small: Vec<FinAb> = groups.iter().filter(|g| g.order() <= 16).cloned().collect();
    let mut count = 0;
    let mut failures = Vec::new();
    for a in &groups {
        for _ in 0..rounds {
            let c = small.choose(rng).unwrap();
            let e = small.choose(rng).unwrap();
            if hom_space_size(a, c) <= ORACLE_CAP {
                count += 1;
                if let Err(m) = check_solve_hom(rng, a, c, e) {
                    failures.push(format!("solve_hom: {m}"));
                }
            }
            count += 1;
            if let Err(m) = check_section(rng, a) {
                failures.push(format!("section_of_surjection: {m}"));
            }
            let b = small.choose(rng).unwrap();
            count += 1;
            if let Err(m) = check_fiber_product(rng, a, b, c) {
                failures.push(format!("fiber_product: {m}"));
            }
        }
    }
    (count, failures)
}
