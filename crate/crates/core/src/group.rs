//! Finite groups stored as Cayley tables, together with the subgroup
//! computations (closure, conjugation, normalizers, the conjugacy order)
//! that the rest of the crate needs.
//!
//! Elements are plain indices `0..order`. Index 0 is always the identity.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

/// Largest group order accepted by [`Group::named`].
pub const MAX_NAMED_ORDER: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group table is empty")]
    Empty,
    #[error("table has {rows} rows but {names} element names")]
    ShapeMismatch { rows: usize, names: usize },
    #[error("table row {row} has length {len}, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("duplicate element name {0:?}")]
    DuplicateName(String),
    #[error("product of elements {a} and {b} is {value}, outside 0..{order}")]
    NotClosed {
        a: usize,
        b: usize,
        value: usize,
        order: usize,
    },
    #[error("no two-sided identity element in table")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("group of order {order} exceeds the limit of {max}")]
    TooLarge { order: usize, max: usize },
    #[error("invalid parameter for {family} family: n = {n}")]
    InvalidParameter { family: &'static str, n: usize },
    #[error("element index {0} out of range")]
    ElementOutOfRange(usize),
    #[error("unknown element name {0:?}")]
    UnknownElement(String),
}

/// A named family member, as accepted by [`Group::named`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    /// `Z_n`, elements `a^k` at index `k`.
    Cyclic(usize),
    /// Symmetries of the `n`-gon, order `2n`. Index `k < n` is `r^k`,
    /// index `n + k` is `s r^k`.
    Dihedral(usize),
    /// All permutations of `n` symbols in lexicographic one-line order,
    /// named in cycle notation on `1..=n`.
    Symmetric(usize),
    /// Direct product; `(i, j)` sits at index `i * |B| + j`.
    Product(Box<GroupSpec>, Box<GroupSpec>),
}

impl GroupSpec {
    pub fn product(a: GroupSpec, b: GroupSpec) -> Self {
        GroupSpec::Product(Box::new(a), Box::new(b))
    }

    pub fn klein() -> Self {
        GroupSpec::product(GroupSpec::Cyclic(2), GroupSpec::Cyclic(2))
    }

    fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Cyclic(n) => Some(*n),
            GroupSpec::Dihedral(n) => n.checked_mul(2),
            GroupSpec::Symmetric(n) => (1..=*n).try_fold(1usize, |acc, k| acc.checked_mul(k)),
            GroupSpec::Product(a, b) => a.order()?.checked_mul(b.order()?),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "Z{n}"),
            GroupSpec::Dihedral(n) => write!(f, "D{n}"),
            GroupSpec::Symmetric(n) => write!(f, "S{n}"),
            GroupSpec::Product(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    names: Vec<String>,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

/// A subgroup as a sorted list of element indices of its parent group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subgroup(Vec<usize>);

impl Subgroup {
    pub fn trivial() -> Self {
        Subgroup(vec![0])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.0.binary_search(&g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|&g| other.contains(g))
    }
}

/// The full conjugacy class `[H]` of a subgroup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgroupClass {
    members: Vec<Subgroup>,
}

impl SubgroupClass {
    /// Conjugates in ascending order.
    pub fn members(&self) -> &[Subgroup] {
        &self.members
    }

    /// Lexicographically least member.
    pub fn canonical_rep(&self) -> &Subgroup {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, h: &Subgroup) -> bool {
        self.members.binary_search(h).is_ok()
    }
}

impl Group {
    /// Validates a Cayley table. If the identity is not at index 0 it is
    /// swapped there; errors report indices of the input table.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Group, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        if names.len() != n {
            return Err(GroupError::ShapeMismatch {
                rows: n,
                names: names.len(),
            });
        }
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GroupError::DuplicateName(name.clone()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if table[a][b] >= n {
                    return Err(GroupError::NotClosed {
                        a,
                        b,
                        value: table[a][b],
                        order: n,
                    });
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(GroupError::NoIdentity)?;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let mut inv = vec![0; n];
        for g in 0..n {
            inv[g] = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or(GroupError::NoInverse(g))?;
        }

        // Relabel with the swap identity <-> 0.
        let relabel = |i: usize| {
            if i == identity {
                0
            } else if i == 0 {
                identity
            } else {
                i
            }
        };
        let mut new_names = names;
        new_names.swap(0, identity);
        let mut mult = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                mult[relabel(a)][relabel(b)] = relabel(table[a][b]);
            }
        }
        let mut new_inv = vec![0; n];
        for g in 0..n {
            new_inv[relabel(g)] = relabel(inv[g]);
        }
        Ok(Group {
            names: new_names,
            mult,
            inv: new_inv,
        })
    }

    pub fn named(spec: &GroupSpec) -> Result<Group, GroupError> {
        match spec.order() {
            Some(order) if order <= MAX_NAMED_ORDER => {}
            order => {
                return Err(GroupError::TooLarge {
                    order: order.unwrap_or(usize::MAX),
                    max: MAX_NAMED_ORDER,
                })
            }
        }
        match spec {
            GroupSpec::Cyclic(n) => Self::cyclic(*n),
            GroupSpec::Dihedral(n) => Self::dihedral(*n),
            GroupSpec::Symmetric(n) => Self::symmetric(*n),
            GroupSpec::Product(a, b) => Ok(Self::direct_product(&Self::named(a)?, &Self::named(b)?)),
        }
    }

    fn cyclic(n: usize) -> Result<Group, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidParameter { family: "cyclic", n });
        }
        let names = (0..n).map(power_name("a")).collect();
        let mult = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        Ok(Self::from_trusted(names, mult))
    }

    fn dihedral(n: usize) -> Result<Group, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidParameter {
                family: "dihedral",
                n,
            });
        }
        let split = |i: usize| (i / n, i % n);
        let mut names: Vec<String> = (0..n).map(power_name("r")).collect();
        names.extend((0..n).map(|k| match k {
            0 => "s".to_string(),
            1 => "sr".to_string(),
            _ => format!("sr^{k}"),
        }));
        // (s^f r^k)(s^g r^l) = s^(f+g) r^((-1)^g k + l)
        let mult = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let (f, k) = split(a);
                        let (g, l) = split(b);
                        let rot = (if g == 0 { k + l } else { n - k + l }) % n;
                        ((f + g) % 2) * n + rot
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_trusted(names, mult))
    }

    fn symmetric(n: usize) -> Result<Group, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidParameter {
                family: "symmetric",
                n,
            });
        }
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let index_of = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
        let names = perms.iter().map(|p| cycle_name(p)).collect();
        let mult = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| {
                        let pq: Vec<usize> = q.iter().map(|&i| p[i]).collect();
                        index_of(&pq)
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_trusted(names, mult))
    }

    fn direct_product(a: &Group, b: &Group) -> Group {
        let nb = b.order();
        let n = a.order() * nb;
        let names = (0..n)
            .map(|i| format!("({},{})", a.name(i / nb), b.name(i % nb)))
            .collect();
        let mult = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
                    .collect()
            })
            .collect();
        Self::from_trusted(names, mult)
    }

    /// For family constructors whose tables are correct by construction.
    fn from_trusted(names: Vec<String>, mult: Vec<Vec<usize>>) -> Group {
        let g = Self::from_table(names, mult).expect("family table is a group");
        debug_assert!(g.is_latin_square());
        g
    }

    fn is_latin_square(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| {
            let row: BTreeSet<_> = self.mult[a].iter().collect();
            let col: BTreeSet<_> = (0..n).map(|b| self.mult[b][a]).collect();
            row.len() == n && col.len() == n
        })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup(self.elements().collect())
    }

    /// Validates that `members` is a subgroup (contains the identity, closed
    /// under products and inverses).
    pub fn subgroup(&self, members: impl IntoIterator<Item = usize>) -> Option<Subgroup> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if set.iter().any(|&g| g >= self.order()) || !set.contains(&0) {
            return None;
        }
        let closed = set.iter().all(|&a| {
            set.contains(&self.inv(a)) && set.iter().all(|&b| set.contains(&self.mul(a, b)))
        });
        closed.then(|| Subgroup(set.into_iter().collect()))
    }

    /// Smallest subgroup containing `gens`.
    pub fn generated(&self, gens: &[usize]) -> Result<Subgroup, GroupError> {
        if let Some(&bad) = gens.iter().find(|&&g| g >= self.order()) {
            return Err(GroupError::ElementOutOfRange(bad));
        }
        let mut set: BTreeSet<usize> = BTreeSet::from([0]);
        let mut frontier: Vec<usize> = vec![0];
        while let Some(a) = frontier.pop() {
            for &g in gens {
                let p = self.mul(a, g);
                if set.insert(p) {
                    frontier.push(p);
                }
            }
        }
        // Finite: closure under right multiplication by generators is a subgroup.
        Ok(Subgroup(set.into_iter().collect()))
    }

    /// `g^{-1} H g`.
    pub fn conjugate(&self, h: &Subgroup, g: usize) -> Subgroup {
        let gi = self.inv(g);
        let mut members: Vec<usize> = h
            .members()
            .iter()
            .map(|&x| self.mul(self.mul(gi, x), g))
            .collect();
        members.sort_unstable();
        Subgroup(members)
    }

    fn conjugates_by(&self, h: &Subgroup, by: impl IntoIterator<Item = usize>) -> Vec<Subgroup> {
        let set: BTreeSet<Subgroup> = by.into_iter().map(|g| self.conjugate(h, g)).collect();
        set.into_iter().collect()
    }

    pub fn conjugacy_class(&self, h: &Subgroup) -> SubgroupClass {
        SubgroupClass {
            members: self.conjugates_by(h, self.elements()),
        }
    }

    /// `[H]_N`: conjugates of `H` by elements of `N` only, ascending.
    pub fn n_conjugacy_class(&self, h: &Subgroup, n: &Subgroup) -> Vec<Subgroup> {
        self.conjugates_by(h, n.members().iter().copied())
    }

    pub fn normalizer(&self, h: &Subgroup) -> Subgroup {
        Subgroup(
            self.elements()
                .filter(|&g| &self.conjugate(h, g) == h)
                .collect(),
        )
    }

    /// `[H] <= [K]`: some conjugate of `K` contains `H`.
    pub fn conj_leq(&self, h: &Subgroup, k: &Subgroup) -> bool {
        h.len() <= k.len()
            && k.len() % h.len() == 0
            && self.elements().any(|g| h.is_subgroup_of(&self.conjugate(k, g)))
    }

    pub fn are_conjugate(&self, h: &Subgroup, k: &Subgroup) -> bool {
        h.len() == k.len() && self.elements().any(|g| &self.conjugate(h, g) == k)
    }

    pub fn subgroup_names(&self, h: &Subgroup) -> Vec<String> {
        h.members().iter().map(|&g| self.names[g].clone()).collect()
    }
}

fn power_name(base: &'static str) -> impl Fn(usize) -> String {
    move |k| match k {
        0 => "e".to_string(),
        1 => base.to_string(),
        _ => format!("{base}^{k}"),
    }
}

/// Cycle notation on symbols `1..=n`, `e` for the identity.
fn cycle_name(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = vec![];
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push((i + 1).to_string());
            i = p[i];
        }
        out.push_str(&format!("({})", cycle.join(" ")));
    }
    if out.is_empty() {
        "e".to_string()
    } else {
        out
    }
}
