//! Finite G-sets: a validated action table plus precomputed orbits and
//! stabilizers.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::group::{Group, Subgroup, SubgroupClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GSetError {
    #[error("a G-set needs at least one point")]
    NoPoints,
    #[error("action table has {rows} rows, group has order {order}")]
    RowCountMismatch { rows: usize, order: usize },
    #[error("action row for element {g} has {len} entries, expected {points}")]
    RowLengthMismatch { g: usize, len: usize, points: usize },
    #[error("element {g} sends point {x} to {image}, which is not a point")]
    PointOutOfRange { g: usize, x: usize, image: usize },
    #[error("identity moves point {0}")]
    IdentityAxiomViolated(usize),
    #[error("g.(h.x) != (gh).x for g={g}, h={h}, x={x}")]
    CompatibilityViolated { g: usize, h: usize, x: usize },
    #[error("subgroup {0} is not a subgroup of the group")]
    InvalidSubgroup(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub points: Vec<usize>,
    pub representative: usize,
}

/// `B_[H]`: the points whose stabilizer lies in the conjugacy class `[H]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointBox {
    pub class: SubgroupClass,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSet {
    group: Group,
    point_names: Vec<String>,
    action: Vec<Vec<usize>>,
    orbits: Vec<Orbit>,
    orbit_of: Vec<usize>,
    stabilizers: Vec<Subgroup>,
}

impl GSet {
    /// `action[g][x]` is the index of `g . x`.
    pub fn new(group: Group, point_names: Vec<String>, action: Vec<Vec<usize>>) -> Result<GSet, GSetError> {
        let n = point_names.len();
        if n == 0 {
            return Err(GSetError::NoPoints);
        }
        if action.len() != group.order() {
            return Err(GSetError::RowCountMismatch {
                rows: action.len(),
                order: group.order(),
            });
        }
        for (g, row) in action.iter().enumerate() {
            if row.len() != n {
                return Err(GSetError::RowLengthMismatch {
                    g,
                    len: row.len(),
                    points: n,
                });
            }
            if let Some((x, &image)) = row.iter().enumerate().find(|(_, &y)| y >= n) {
                return Err(GSetError::PointOutOfRange { g, x, image });
            }
        }
        if let Some(x) = (0..n).find(|&x| action[0][x] != x) {
            return Err(GSetError::IdentityAxiomViolated(x));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if let Some(x) = (0..n).find(|&x| action[gh][x] != action[g][action[h][x]]) {
                    return Err(GSetError::CompatibilityViolated { g, h, x });
                }
            }
        }

        let mut orbit_of = vec![usize::MAX; n];
        let mut orbits = Vec::new();
        for x in 0..n {
            if orbit_of[x] != usize::MAX {
                continue;
            }
            let points: BTreeSet<usize> = group.elements().map(|g| action[g][x]).collect();
            for &p in &points {
                orbit_of[p] = orbits.len();
            }
            orbits.push(Orbit {
                points: points.into_iter().collect(),
                representative: x,
            });
        }
        let stabilizers = (0..n)
            .map(|x| {
                group
                    .subgroup(group.elements().filter(|&g| action[g][x] == x))
                    .expect("stabilizers are subgroups")
            })
            .collect();

        Ok(GSet {
            group,
            point_names,
            action,
            orbits,
            orbit_of,
            stabilizers,
        })
    }

    /// Disjoint union of the left coset spaces `G/H_i`. Within each block the
    /// cosets are listed in order of their least element, so the identity
    /// coset `H_i` comes first.
    pub fn from_cosets(group: Group, subgroups: &[Subgroup]) -> Result<GSet, GSetError> {
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::new();
        for (i, h) in subgroups.iter().enumerate() {
            if group.subgroup(h.members().iter().copied()).as_ref() != Some(h) {
                return Err(GSetError::InvalidSubgroup(i));
            }
            let block: BTreeSet<Vec<usize>> = group
                .elements()
                .map(|g| {
                    let mut c: Vec<usize> = h.members().iter().map(|&k| group.mul(g, k)).collect();
                    c.sort_unstable();
                    c
                })
                .collect();
            block_of.extend(std::iter::repeat(i).take(block.len()));
            cosets.extend(block);
        }
        let find = |c: &[usize], b: usize| {
            (0..cosets.len())
                .position(|j| block_of[j] == b && cosets[j].as_slice() == c)
                .unwrap()
        };
        let action = group
            .elements()
            .map(|g| {
                cosets
                    .iter()
                    .zip(&block_of)
                    .map(|(c, &b)| {
                        let mut moved: Vec<usize> = c.iter().map(|&k| group.mul(g, k)).collect();
                        moved.sort_unstable();
                        find(&moved, b)
                    })
                    .collect()
            })
            .collect();
        let names = (0..cosets.len()).map(|i| i.to_string()).collect();
        GSet::new(group, names, action)
    }

    /// Every element acts as the identity.
    pub fn trivial_action(group: Group, n_points: usize) -> Result<GSet, GSetError> {
        let action = vec![(0..n_points).collect(); group.order()];
        GSet::new(group, (0..n_points).map(|i| i.to_string()).collect(), action)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn n_points(&self) -> usize {
        self.point_names.len()
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n_points()
    }

    pub fn point_names(&self) -> &[String] {
        &self.point_names
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.point_names.iter().position(|p| p == name)
    }

    pub fn action_table(&self) -> &[Vec<usize>] {
        &self.action
    }

    /// `g . x`
    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g][x]
    }

    pub fn orbit(&self, x: usize) -> &Orbit {
        &self.orbits[self.orbit_of[x]]
    }

    /// Index into [`GSet::orbits`] of the orbit containing `x`.
    #[inline]
    pub fn orbit_index(&self, x: usize) -> usize {
        self.orbit_of[x]
    }

    pub fn same_orbit(&self, x: usize, y: usize) -> bool {
        self.orbit_of[x] == self.orbit_of[y]
    }

    /// `X/G`, ordered by least point.
    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn stabilizer(&self, x: usize) -> &Subgroup {
        &self.stabilizers[x]
    }

    /// Partition into boxes, ordered by least point.
    pub fn boxes(&self) -> Vec<PointBox> {
        let mut boxes: Vec<PointBox> = Vec::new();
        for x in self.points() {
            let stab = self.stabilizer(x);
            match boxes.iter_mut().find(|b| b.class.contains(stab)) {
                Some(b) => b.points.push(x),
                None => boxes.push(PointBox {
                    class: self.group.conjugacy_class(stab),
                    points: vec![x],
                }),
            }
        }
        boxes
    }

    /// `Conj_G(X)`: the stabilizer conjugacy classes present, in box order.
    pub fn stabilizer_classes(&self) -> Vec<SubgroupClass> {
        self.boxes().into_iter().map(|b| b.class).collect()
    }

    pub fn box_leq(&self, lower: &PointBox, upper: &PointBox) -> bool {
        self.group
            .conj_leq(lower.class.canonical_rep(), upper.class.canonical_rep())
    }

    /// One point per orbit of the box, all with literally the same
    /// stabilizer `H`, where `H` is the stabilizer of the box's least point.
    pub fn box_representatives(&self, b: &PointBox) -> Vec<usize> {
        let h = self.stabilizer(b.points[0]);
        let mut reps = Vec::new();
        let mut seen_orbits = BTreeSet::new();
        for &x in &b.points {
            if self.stabilizer(x) == h && seen_orbits.insert(self.orbit_of[x]) {
                reps.push(x);
            }
        }
        debug_assert_eq!(
            reps.len(),
            b.points.iter().map(|&x| self.orbit_of[x]).collect::<BTreeSet<_>>().len()
        );
        reps
    }

    pub fn is_invariant_subset(&self, subset: &[usize]) -> bool {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        set.iter()
            .all(|&y| self.group.elements().all(|g| set.contains(&self.act(g, y))))
    }

    /// Some `g` with `g . x = y`, if `y` is in the orbit of `x`.
    pub fn transporter(&self, x: usize, y: usize) -> Option<usize> {
        self.group.elements().find(|&g| self.act(g, x) == y)
    }

    /// Points are named by single characters, so words can be written
    /// without separators.
    pub fn has_short_names(&self) -> bool {
        self.point_names.iter().all(|n| n.chars().count() == 1)
    }
}
