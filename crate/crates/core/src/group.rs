//! Finite groups given by multiplication tables, their subgroups, coset
//! spaces, abelianizations and transfer maps.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{presentation, AbElem, AbHom, FinAb, IntMatrix, Presentation};

pub const DEFAULT_MAX_ORDER: usize = 10_000;

static NEXT_GROUP_ID: AtomicU64 = AtomicU64::new(1);

/// Opaque element index into a [`FiniteGroup`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Elem(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication is not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NonAssociative(String, String, String),
    #[error("table has no two-sided identity")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NotInvertible(String),
    #[error("malformed table: {0}")]
    BadShape(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("group of order {0} exceeds the cap of {1}")]
    TooLarge(usize, usize),
    #[error("units mod {0}: modulus must be at least 2")]
    InvalidModulus(u64),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
}

enum Law {
    Table(Vec<u32>),
    UnitsMod { n: u64, values: Vec<u64>, index: Vec<u32> },
}

pub struct FiniteGroup {
    id: u64,
    names: Vec<String>,
    law: Law,
    identity: Elem,
    inverses: Vec<Elem>,
    name_index: HashMap<String, Elem>,
}

impl FiniteGroup {
    /// Builds a group from a square table of element names; row `a`, column `b` holds `a*b`.
    pub fn from_table(names: Vec<String>, table: &[Vec<String>]) -> Result<Self, GroupError> {
        Self::from_table_capped(names, table, DEFAULT_MAX_ORDER)
    }

    pub fn from_table_capped(names: Vec<String>, table: &[Vec<String>], cap: usize) -> Result<Self, GroupError> {
        let name_index = index_names(&names)?;
        let n = names.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(GroupError::BadShape(format!("expected a {n}x{n} table")));
        }
        let mut idx = Vec::with_capacity(n);
        for row in table {
            let r: Result<Vec<usize>, _> = row
                .iter()
                .map(|s| name_index.get(s).map(|e| e.0).ok_or_else(|| GroupError::UnknownElement(s.clone())))
                .collect();
            idx.push(r?);
        }
        Self::from_index_table(names, &idx, cap)
    }

    /// Builds a group from a table of element indices.
    pub fn from_index_table(names: Vec<String>, table: &[Vec<usize>], cap: usize) -> Result<Self, GroupError> {
        let n = names.len();
        if n == 0 {
            return Err(GroupError::BadShape("empty table".into()));
        }
        if n > cap {
            return Err(GroupError::TooLarge(n, cap));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(GroupError::BadShape(format!("expected a {n}x{n} table of indices below {n}")));
        }
        let name_index = index_names(&names)?;
        let flat: Vec<u32> = table.iter().flatten().map(|&x| x as u32).collect();
        let at = |a: usize, b: usize| flat[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| GroupError::NotInvertible(names[a].clone()))?;
            inverses.push(Elem(inv));
        }
        if n <= 1000 {
            for a in 0..n {
                for b in 0..n {
                    let ab = at(a, b);
                    for c in 0..n {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(GroupError::NonAssociative(
                                names[a].clone(),
                                names[b].clone(),
                                names[c].clone(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(FiniteGroup {
            id: NEXT_GROUP_ID.fetch_add(1, Ordering::Relaxed),
            names,
            law: Law::Table(flat),
            identity: Elem(identity),
            inverses,
            name_index,
        })
    }

    /// `(Z/n)^×` with elements named by their least positive residues, in increasing order.
    pub fn units_mod(n: u64) -> Result<Self, GroupError> {
        Self::units_mod_capped(n, DEFAULT_MAX_ORDER)
    }

    pub fn units_mod_capped(n: u64, cap: usize) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::InvalidModulus(n));
        }
        if n > (cap as u64).saturating_mul(64).max(1 << 20) {
            return Err(GroupError::TooLarge(n as usize, cap));
        }
        let values: Vec<u64> = (1..n).filter(|&v| gcd_u64(v, n) == 1).collect();
        if values.len() > cap {
            return Err(GroupError::TooLarge(values.len(), cap));
        }
        let mut index = vec![u32::MAX; n as usize];
        for (i, &v) in values.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let names: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let name_index = index_names(&names)?;
        let inverses = values
            .iter()
            .map(|&v| {
                let inv = values.iter().position(|&w| (v * w) % n == 1 % n).expect("units are invertible");
                Elem(inv)
            })
            .collect();
        Ok(FiniteGroup {
            id: NEXT_GROUP_ID.fetch_add(1, Ordering::Relaxed),
            names,
            law: Law::UnitsMod { n, values, index },
            identity: Elem(0),
            inverses,
            name_index,
        })
    }

    /// Cyclic group of order `n` with elements `g0, ..., g{n-1}`.
    pub fn cyclic(n: usize) -> Self {
        let names = (0..n).map(|i| format!("g{i}")).collect();
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_index_table(names, &table, usize::MAX).expect("cyclic group table is valid")
    }

    /// Symmetric group on `k` letters; elements named by one-line notation and
    /// ordered lexicographically, so the identity comes first.
    pub fn symmetric(k: usize) -> Self {
        let perms: Vec<Vec<usize>> = permutations(k);
        let pos: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| perms.iter().map(|b| pos[&b.iter().map(|&x| a[x]).collect::<Vec<_>>()]).collect())
            .collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        Self::from_index_table(names, &table, usize::MAX).expect("symmetric group table is valid")
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order()).map(Elem)
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.law {
            Law::Table(t) => Elem(t[a.0 * self.order() + b.0] as usize),
            Law::UnitsMod { n, values, index } => Elem(index[((values[a.0] * values[b.0]) % n) as usize] as usize),
        }
    }

    /// Product of a sequence, left to right.
    pub fn product(&self, items: &[Elem]) -> Elem {
        items.iter().fold(self.identity, |acc, &x| self.mul(acc, x))
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a.0]
    }

    pub fn pow(&self, a: Elem, k: i64) -> Elem {
        let base = if k < 0 { self.inv(a) } else { a };
        let mut out = self.identity;
        for _ in 0..k.unsigned_abs() {
            out = self.mul(out, base);
        }
        out
    }

    pub fn element_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// `g h g⁻¹`.
    pub fn conjugate(&self, g: Elem, h: Elem) -> Elem {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        self.product(&[a, b, self.inv(a), self.inv(b)])
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn name(&self, a: Elem) -> &str {
        &self.names[a.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elem(&self, name: &str) -> Result<Elem, GroupError> {
        self.name_index.get(name).copied().ok_or_else(|| GroupError::UnknownElement(name.to_string()))
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(order {}, id {})", self.order(), self.id)
    }
}

fn index_names(names: &[String]) -> Result<HashMap<String, Elem>, GroupError> {
    let mut out = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if out.insert(n.clone(), Elem(i)).is_some() {
            return Err(GroupError::BadShape(format!("duplicate element name `{n}`")));
        }
    }
    Ok(out)
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q: Vec<usize> = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// A subgroup, stored as its sorted member list.
#[derive(Clone)]
pub struct Subgroup {
    group: Arc<FiniteGroup>,
    members: Vec<Elem>,
    mask: Vec<bool>,
}

impl Subgroup {
    /// Validates closure under multiplication and inverses.
    pub fn new(group: &Arc<FiniteGroup>, members: &[Elem]) -> Result<Self, GroupError> {
        let mut mask = vec![false; group.order()];
        for &m in members {
            if m.0 >= group.order() {
                return Err(GroupError::NotASubgroup(format!("index {} out of range", m.0)));
            }
            mask[m.0] = true;
        }
        if !mask[group.identity().0] {
            return Err(GroupError::NotASubgroup("identity missing".into()));
        }
        let mut sorted: Vec<Elem> = members.to_vec();
        sorted.sort();
        sorted.dedup();
        for &a in &sorted {
            if !mask[group.inv(a).0] {
                return Err(GroupError::NotASubgroup(format!("inverse of {} missing", group.name(a))));
            }
            for &b in &sorted {
                if !mask[group.mul(a, b).0] {
                    return Err(GroupError::NotASubgroup(format!(
                        "{}*{} missing",
                        group.name(a),
                        group.name(b)
                    )));
                }
            }
        }
        Ok(Subgroup { group: group.clone(), members: sorted, mask })
    }

    pub fn from_names(group: &Arc<FiniteGroup>, names: &[impl AsRef<str>]) -> Result<Self, GroupError> {
        let members: Result<Vec<Elem>, _> = names.iter().map(|n| group.elem(n.as_ref())).collect();
        Self::new(group, &members?)
    }

    /// Subgroup generated by `gens`.
    pub fn generated(group: &Arc<FiniteGroup>, gens: &[Elem]) -> Self {
        let mut mask = vec![false; group.order()];
        let mut members = vec![group.identity()];
        mask[group.identity().0] = true;
        let mut frontier = vec![group.identity()];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = group.mul(x, g);
                if !mask[y.0] {
                    mask[y.0] = true;
                    members.push(y);
                    frontier.push(y);
                }
            }
        }
        members.sort();
        Subgroup { group: group.clone(), members, mask }
    }

    pub fn whole(group: &Arc<FiniteGroup>) -> Self {
        Subgroup { group: group.clone(), members: group.elements().collect(), mask: vec![true; group.order()] }
    }

    pub fn trivial(group: &Arc<FiniteGroup>) -> Self {
        Self::generated(group, &[])
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.mask.get(a.0).copied().unwrap_or(false)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.group.id() == other.group.id() && self.members.iter().all(|&m| other.contains(m))
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.group;
        self.members.iter().all(|&a| self.members.iter().all(|&b| g.mul(a, b) == g.mul(b, a)))
    }

    /// A short generating set chosen greedily in member order.
    pub fn generators(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut span = Subgroup::trivial(&self.group);
        for &m in &self.members {
            if !span.contains(m) {
                gens.push(m);
                span = Subgroup::generated(&self.group, &gens);
            }
        }
        gens
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|&m| self.group.name(m).to_string()).collect()
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.group.id() == other.group.id() && self.members == other.members
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(","))
    }
}

/// Left cosets `g H` of `sub` inside `outer`, ordered by least member.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    outer: Subgroup,
    sub: Subgroup,
    cosets: Vec<Vec<Elem>>,
    coset_of: Vec<usize>,
}

impl CosetSpace {
    pub fn new(outer: &Subgroup, sub: &Subgroup) -> Result<Self, GroupError> {
        if !sub.is_subgroup_of(outer) {
            return Err(GroupError::NotASubgroup("subgroup is not contained in the outer group".into()));
        }
        let g = outer.group();
        let mut coset_of = vec![usize::MAX; g.order()];
        let mut cosets = Vec::new();
        for &x in outer.members() {
            if coset_of[x.0] != usize::MAX {
                continue;
            }
            let mut c: Vec<Elem> = sub.members().iter().map(|&h| g.mul(x, h)).collect();
            c.sort();
            for &y in &c {
                coset_of[y.0] = cosets.len();
            }
            cosets.push(c);
        }
        Ok(CosetSpace { outer: outer.clone(), sub: sub.clone(), cosets, coset_of })
    }

    pub fn outer(&self) -> &Subgroup {
        &self.outer
    }

    pub fn sub(&self) -> &Subgroup {
        &self.sub
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn index(&self) -> usize {
        self.len()
    }

    pub fn cosets(&self) -> &[Vec<Elem>] {
        &self.cosets
    }

    pub fn coset(&self, i: usize) -> &[Elem] {
        &self.cosets[i]
    }

    /// Index of the coset containing `a`. Panics if `a` is outside the outer group.
    pub fn coset_of(&self, a: Elem) -> usize {
        let c = self.coset_of[a.0];
        assert!(c != usize::MAX, "element {} is outside the outer group", self.outer.group().name(a));
        c
    }

    /// Least member of each coset.
    pub fn least_section(&self) -> Vec<Elem> {
        self.cosets.iter().map(|c| c[0]).collect()
    }

    /// True if `section[x]` lies in coset `x` for every `x`.
    pub fn is_section(&self, section: &[Elem]) -> bool {
        section.len() == self.len() && section.iter().enumerate().all(|(x, &s)| self.coset_of[s.0] == x)
    }

    /// Every section, in lexicographic order of member positions.
    pub fn all_sections(&self) -> Vec<Vec<Elem>> {
        let mut out = vec![Vec::new()];
        for c in &self.cosets {
            out = out
                .into_iter()
                .flat_map(|s: Vec<Elem>| {
                    c.iter().map(move |&m| {
                        let mut t = s.clone();
                        t.push(m);
                        t
                    })
                })
                .collect();
        }
        out
    }

    pub fn names(&self, i: usize) -> Vec<String> {
        let g = self.outer.group();
        self.cosets[i].iter().map(|&m| g.name(m).to_string()).collect()
    }
}

/// `source / [source, source]` in invariant-factor form.
#[derive(Clone, Debug)]
pub struct AbelianQuotient {
    source: Subgroup,
    group: FinAb,
    proj: Vec<Option<AbElem>>,
    lifts: Vec<Elem>,
}

impl AbelianQuotient {
    pub fn new(source: &Subgroup) -> Self {
        let g = source.group().clone();
        let derived = derived_subgroup(source);
        let cosets = CosetSpace::new(source, &derived).expect("derived subgroup lies inside the source");
        let q = cosets.len();
        let reps = cosets.least_section();
        let qmul = |a: usize, b: usize| cosets.coset_of(g.mul(reps[a], reps[b]));
        let identity = cosets.coset_of(g.identity());

        // greedy generators of the quotient with coefficient vectors for its span
        let mut gens: Vec<usize> = Vec::new();
        let mut rel_cols: Vec<Vec<i64>> = Vec::new();
        let mut coeff: Vec<Option<Vec<i64>>> = vec![None; q];
        coeff[identity] = Some(Vec::new());
        let mut span: Vec<usize> = vec![identity];
        while span.len() < q {
            let x = (0..q).find(|&c| coeff[c].is_none()).expect("span is incomplete");
            let t = gens.len();
            let mut power = x;
            let mut k = 1i64;
            while coeff[power].is_none() {
                power = qmul(power, x);
                k += 1;
            }
            let mut rel = coeff[power].clone().expect("power lies in the span");
            rel.iter_mut().for_each(|c| *c = -*c);
            rel.push(k);
            for c in coeff.iter_mut().flatten() {
                c.push(0);
            }
            let mut new_span = Vec::with_capacity(span.len() * k as usize);
            for &s in &span {
                let mut cur = s;
                for j in 0..k {
                    if j > 0 {
                        let mut v = coeff[s].clone().expect("span member");
                        v[t] = j;
                        coeff[cur] = Some(v);
                    }
                    new_span.push(cur);
                    cur = qmul(cur, x);
                }
            }
            span = new_span;
            gens.push(x);
            rel_cols.push(rel);
        }
        let n = gens.len();
        let rel_cols: Vec<Vec<i64>> = rel_cols
            .into_iter()
            .map(|mut c| {
                c.resize(n, 0);
                c
            })
            .collect();
        let pres: Presentation = presentation(n, &IntMatrix::from_columns(n, &rel_cols))
            .expect("relations of a finite abelian group");
        let mut proj = vec![None; g.order()];
        for &m in source.members() {
            let c = coeff[cosets.coset_of(m)].as_ref().expect("every coset is spanned");
            proj[m.0] = Some(pres.coords(c));
        }
        let lifts = (0..pres.group.rank())
            .map(|i| {
                let col = pres.from_coords.column(i);
                let parts: Vec<Elem> = col.iter().zip(&gens).map(|(&e, &x)| g.pow(reps[x], e)).collect();
                g.product(&parts)
            })
            .collect();
        AbelianQuotient { source: source.clone(), group: pres.group, proj, lifts }
    }

    pub fn source(&self) -> &Subgroup {
        &self.source
    }

    pub fn group(&self) -> &FinAb {
        &self.group
    }

    /// Image of a source element. Panics on elements outside the source.
    pub fn proj(&self, a: Elem) -> AbElem {
        self.proj[a.0].clone().unwrap_or_else(|| {
            panic!("element {} is outside the abelianized subgroup", self.source.group().name(a))
        })
    }

    /// Source elements lifting the basis of the abelian group.
    pub fn lifts(&self) -> &[Elem] {
        &self.lifts
    }

    /// Some source element with the given image.
    pub fn lift(&self, a: &[i64]) -> Elem {
        let g = self.source.group();
        let a = self.group.reduce(a);
        let parts: Vec<Elem> = a.iter().zip(&self.lifts).map(|(&e, &x)| g.pow(x, e)).collect();
        g.product(&parts)
    }

    /// Homomorphism induced by the inclusion of `self.source` into `target.source`.
    pub fn inclusion_into(&self, target: &AbelianQuotient) -> Result<AbHom, GroupError> {
        if !self.source.is_subgroup_of(&target.source) {
            return Err(GroupError::NotASubgroup("inclusion target does not contain the source".into()));
        }
        let images: Vec<AbElem> = self.lifts.iter().map(|&x| target.proj(x)).collect();
        Ok(AbHom::from_images(self.group.clone(), target.group.clone(), &images).expect("inclusion is a homomorphism"))
    }

    /// Renders an element by the name of its least preimage.
    pub fn describe(&self, a: &[i64]) -> String {
        let a = self.group.reduce(a);
        let g = self.source.group();
        self.source
            .members()
            .iter()
            .find(|&&m| self.proj(m) == a)
            .map(|&m| g.name(m).to_string())
            .unwrap_or_else(|| format!("{a:?}"))
    }
}

/// Commutator subgroup of `h`.
pub fn derived_subgroup(h: &Subgroup) -> Subgroup {
    let g = h.group();
    let gens = h.generators();
    let mut comms: Vec<Elem> = Vec::new();
    for &a in &gens {
        for &b in &gens {
            comms.push(g.commutator(a, b));
        }
    }
    let mut d = Subgroup::generated(g, &comms);
    loop {
        let extra: Vec<Elem> = gens
            .iter()
            .flat_map(|&x| d.members().iter().map(move |&m| (x, m)))
            .map(|(x, m)| g.conjugate(x, m))
            .filter(|&c| !d.contains(c))
            .collect();
        if extra.is_empty() {
            return d;
        }
        comms.extend(extra);
        d = Subgroup::generated(g, &comms);
    }
}

/// Transfer from `cosets.outer()` to the abelianization of `cosets.sub()`,
/// using the given coset section: `∏_x proj(s_{γx}⁻¹ γ s_x)`.
pub fn transfer_with_section(cosets: &CosetSpace, ab: &AbelianQuotient, section: &[Elem], gamma: Elem) -> AbElem {
    assert!(cosets.is_section(section), "not a section of the coset space");
    assert!(cosets.sub() == ab.source(), "abelianization of the wrong subgroup");
    let g = cosets.outer().group();
    let terms: Vec<AbElem> = section
        .iter()
        .map(|&s| {
            let gs = g.mul(gamma, s);
            let t = section[cosets.coset_of(gs)];
            ab.proj(g.mul(g.inv(t), gs))
        })
        .collect();
    ab.group().sum(terms.iter())
}

/// Transfer with the least-member section.
pub fn transfer(cosets: &CosetSpace, ab: &AbelianQuotient, gamma: Elem) -> AbElem {
    transfer_with_section(cosets, ab, &cosets.least_section(), gamma)
}

/// The transfer as a homomorphism between abelianizations.
pub fn transfer_hom(cosets: &CosetSpace, outer_ab: &AbelianQuotient, sub_ab: &AbelianQuotient) -> AbHom {
    assert!(outer_ab.source() == cosets.outer(), "abelianization of the wrong outer group");
    let images: Vec<AbElem> = outer_ab.lifts().iter().map(|&x| transfer(cosets, sub_ab, x)).collect();
    AbHom::from_images(outer_ab.group().clone(), sub_ab.group().clone(), &images)
        .expect("transfer factors through the abelianization")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units(n: u64) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::units_mod(n).unwrap())
    }

    fn sub(g: &Arc<FiniteGroup>, names: &[&str]) -> Subgroup {
        Subgroup::from_names(g, names).unwrap()
    }

    #[test]
    fn units_mod_fifteen() {
        let g = units(15);
        assert_eq!(g.names(), &["1", "2", "4", "7", "8", "11", "13", "14"]);
        let five = units(5);
        assert_eq!(five.order(), 4);
        assert_eq!(five.element_order(five.elem("2").unwrap()), 4);
        assert_eq!(FiniteGroup::units_mod(1).unwrap_err(), GroupError::InvalidModulus(1));
        assert_eq!(units(2).order(), 1);
    }

    #[test]
    fn table_validation() {
        let names = vec!["e".to_string()];
        let g = FiniteGroup::from_table(names, &[vec!["e".to_string()]]).unwrap();
        assert_eq!(g.order(), 1);

        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        // no identity
        let err = FiniteGroup::from_table(s(&["a", "b"]), &[s(&["b", "a"]), s(&["a", "a"])]).unwrap_err();
        assert_eq!(err, GroupError::NoIdentity);
        // identity but b has no inverse
        let err = FiniteGroup::from_table(s(&["e", "b"]), &[s(&["e", "b"]), s(&["b", "b"])]).unwrap_err();
        assert_eq!(err, GroupError::NotInvertible("b".into()));
        // loop of order 5 that is not associative
        let t = [
            [0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0],
        ];
        let table: Vec<Vec<usize>> = t.iter().map(|r| r.to_vec()).collect();
        let err = FiniteGroup::from_index_table(s(&["0", "1", "2", "3", "4"]), &table, 100).unwrap_err();
        assert!(matches!(err, GroupError::NonAssociative(..)));
    }

    #[test]
    fn cosets_mod_fifteen() {
        let g = units(15);
        let h = sub(&g, &["1", "4", "11", "14"]);
        let cs = CosetSpace::new(&Subgroup::whole(&g), &h).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.names(0), vec!["1", "4", "11", "14"]);
        assert_eq!(cs.names(1), vec!["2", "7", "8", "13"]);
        let whole = CosetSpace::new(&Subgroup::whole(&g), &Subgroup::whole(&g)).unwrap();
        assert_eq!(whole.len(), 1);
        let triv = CosetSpace::new(&Subgroup::whole(&g), &Subgroup::trivial(&g)).unwrap();
        assert_eq!(triv.len(), 8);
        assert!(Subgroup::from_names(&g, &["1", "2"]).is_err());
    }

    #[test]
    fn abelianizations() {
        let g = units(15);
        let h = sub(&g, &["1", "4", "11", "14"]);
        let ab = AbelianQuotient::new(&h);
        assert_eq!(ab.group().moduli(), &[2, 2]);
        let mut images: Vec<AbElem> = h.members().iter().map(|&m| ab.proj(m)).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), 4);

        let triv = AbelianQuotient::new(&Subgroup::trivial(&g));
        assert!(triv.group().is_trivial());

        let s3 = Arc::new(FiniteGroup::symmetric(3));
        let ab = AbelianQuotient::new(&Subgroup::whole(&s3));
        assert_eq!(ab.group().moduli(), &[2]);
        assert_eq!(derived_subgroup(&Subgroup::whole(&s3)).order(), 3);

        let s4 = Arc::new(FiniteGroup::symmetric(4));
        assert_eq!(derived_subgroup(&Subgroup::whole(&s4)).order(), 12);
        assert_eq!(AbelianQuotient::new(&Subgroup::whole(&s4)).group().moduli(), &[2]);
    }

    #[test]
    fn projection_is_homomorphism_on_nonabelian_group() {
        let s4 = Arc::new(FiniteGroup::symmetric(4));
        let whole = Subgroup::whole(&s4);
        let ab = AbelianQuotient::new(&whole);
        for a in s4.elements() {
            for b in s4.elements() {
                assert_eq!(ab.proj(s4.mul(a, b)), ab.group().add(&ab.proj(a), &ab.proj(b)));
            }
        }
        for (i, &l) in ab.lifts().iter().enumerate() {
            assert_eq!(ab.proj(l), ab.group().basis(i));
        }
    }

    #[test]
    fn transfer_examples() {
        let g = units(15);
        let h = sub(&g, &["1", "4", "11", "14"]);
        let cs = CosetSpace::new(&Subgroup::whole(&g), &h).unwrap();
        let ab = AbelianQuotient::new(&h);
        let two = g.elem("2").unwrap();
        assert_eq!(transfer(&cs, &ab, two), ab.proj(g.elem("4").unwrap()));
        assert_eq!(transfer(&cs, &ab, g.identity()), ab.group().zero());

        let g5 = units(5);
        let h5 = sub(&g5, &["1", "4"]);
        let cs5 = CosetSpace::new(&Subgroup::whole(&g5), &h5).unwrap();
        let ab5 = AbelianQuotient::new(&h5);
        assert_eq!(transfer(&cs5, &ab5, g5.elem("2").unwrap()), ab5.proj(g5.elem("4").unwrap()));
    }

    #[test]
    fn transfer_section_independent_on_s4() {
        // S4 -> abelianization of a Klein-four-containing dihedral subgroup
        let s4 = Arc::new(FiniteGroup::symmetric(4));
        let d8 = Subgroup::generated(&s4, &[s4.elem("1230").unwrap(), s4.elem("0321").unwrap()]);
        assert_eq!(d8.order(), 8);
        let cs = CosetSpace::new(&Subgroup::whole(&s4), &d8).unwrap();
        let ab = AbelianQuotient::new(&d8);
        let sections = cs.all_sections();
        assert_eq!(sections.len(), 8usize.pow(3));
        for gamma in s4.elements() {
            let v = transfer(&cs, &ab, gamma);
            for s in &sections {
                assert_eq!(transfer_with_section(&cs, &ab, s, gamma), v);
            }
        }
        let hom = transfer_hom(&cs, &AbelianQuotient::new(&Subgroup::whole(&s4)), &ab);
        for a in s4.elements() {
            for b in s4.elements() {
                let lhs = transfer(&cs, &ab, s4.mul(a, b));
                assert_eq!(lhs, ab.group().add(&transfer(&cs, &ab, a), &transfer(&cs, &ab, b)));
            }
            assert_eq!(hom.apply(&AbelianQuotient::new(&Subgroup::whole(&s4)).proj(a)), transfer(&cs, &ab, a));
        }
    }
}
