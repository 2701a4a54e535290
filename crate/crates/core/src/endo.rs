//! Equivariant self-maps of a G-set, stored as image words, and the
//! enumeration of `End_G(X)`.
//!
//! A map is determined by where it sends one representative per orbit, and
//! `x` may be sent to `y` exactly when `G_x ⊆ G_y`. Enumeration, counting and
//! the monoid indexing in [`crate::green`] are all built on that fact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::gset::GSet;

/// Default cap on the size of an enumerated monoid.
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error("word has length {got}, G-set has {expected} points")]
    WrongLength { expected: usize, got: usize },
    #[error("image {0} is not a point")]
    PointOutOfRange(usize),
    #[error("not equivariant: f({g}.{x}) != {g}.f({x})")]
    NotEquivariant { g: usize, x: usize },
    #[error("no image given for orbit representative {0}")]
    MissingRepresentative(usize),
    #[error("stabilizer of {x} is not contained in the stabilizer of {target}")]
    StabilizerNotContained { x: usize, target: usize },
    #[error("End_G(X) has {count} elements, above the cap of {cap}")]
    TooMany { count: u128, cap: u128 },
    #[error("domain is not a G-invariant set (point {0} leaves it)")]
    DomainNotInvariant(usize),
    #[error("partial map is not injective: {a} and {b} share an image")]
    NotInjective { a: usize, b: usize },
    #[error("partial map is not equivariant at g={g}, x={x}")]
    NotEquivariantOnDomain { g: usize, x: usize },
}

/// A G-equivariant transformation; `word()[x]` is the image of `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EquivMap {
    word: Vec<usize>,
}

/// The classes of `ker(f)`, each sorted, ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KernelPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl KernelPartition {
    /// Block label per point (labels follow block order).
    pub fn labels(&self) -> Vec<usize> {
        let n = self.blocks.iter().map(Vec::len).sum();
        let mut labels = vec![0; n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &p in b {
                labels[p] = i;
            }
        }
        labels
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &KernelPartition) -> bool {
        let labels = coarser.labels();
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&p| labels[p] == labels[b[0]]))
    }
}

impl EquivMap {
    /// Validates `word` as an equivariant map of `x`.
    pub fn new(x: &GSet, word: Vec<usize>) -> Result<EquivMap, EndoError> {
        if word.len() != x.n_points() {
            return Err(EndoError::WrongLength {
                expected: x.n_points(),
                got: word.len(),
            });
        }
        if let Some(&p) = word.iter().find(|&&p| p >= x.n_points()) {
            return Err(EndoError::PointOutOfRange(p));
        }
        for g in x.group().elements() {
            for p in x.points() {
                if word[x.act(g, p)] != x.act(g, word[p]) {
                    return Err(EndoError::NotEquivariant { g, x: p });
                }
            }
        }
        Ok(EquivMap { word })
    }

    pub fn identity(x: &GSet) -> EquivMap {
        EquivMap {
            word: x.points().collect(),
        }
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.word[p]
    }

    /// `self ∘ inner`, i.e. apply `inner` first.
    pub fn compose(&self, inner: &EquivMap) -> EquivMap {
        EquivMap {
            word: inner.word.iter().map(|&p| self.word[p]).collect(),
        }
    }

    pub fn kernel(&self) -> KernelPartition {
        let mut by_value: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (p, &v) in self.word.iter().enumerate() {
            by_value.entry(v).or_default().push(p);
        }
        let mut blocks: Vec<Vec<usize>> = by_value.into_values().collect();
        blocks.sort_by_key(|b| b[0]);
        KernelPartition { blocks }
    }

    pub fn image(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.word.iter().copied().collect();
        set.into_iter().collect()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.word.len()).filter(|&p| self.word[p] == p).collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.image().len() == self.word.len()
    }

    pub fn is_constant(&self) -> bool {
        self.word.iter().all(|&p| p == self.word[0])
    }

    /// Parenthesized word using point names, e.g. `(3000)`; names longer
    /// than one character are comma separated.
    pub fn display<'a>(&'a self, x: &'a GSet) -> WordDisplay<'a> {
        WordDisplay { map: self, gset: x }
    }
}

pub struct WordDisplay<'a> {
    map: &'a EquivMap,
    gset: &'a GSet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.gset.point_names();
        let sep = if self.gset.has_short_names() { "" } else { "," };
        let parts: Vec<&str> = self.map.word.iter().map(|&p| names[p].as_str()).collect();
        write!(f, "({})", parts.join(sep))
    }
}

/// Points `y` with `G_x ⊆ G_y`, ascending.
pub fn valid_targets(x: &GSet, p: usize) -> Vec<usize> {
    let stab = x.stabilizer(p);
    x.points()
        .filter(|&y| stab.is_subgroup_of(x.stabilizer(y)))
        .collect()
}

/// The unique equivariant map sending each orbit representative to the
/// given target.
pub fn from_representative_images(x: &GSet, assignment: &BTreeMap<usize, usize>) -> Result<EquivMap, EndoError> {
    let mut word = vec![usize::MAX; x.n_points()];
    for orbit in x.orbits() {
        let r = orbit.representative;
        let &t = assignment
            .get(&r)
            .ok_or(EndoError::MissingRepresentative(r))?;
        if t >= x.n_points() {
            return Err(EndoError::PointOutOfRange(t));
        }
        if !x.stabilizer(r).is_subgroup_of(x.stabilizer(t)) {
            return Err(EndoError::StabilizerNotContained { x: r, target: t });
        }
        for g in x.group().elements() {
            let (p, v) = (x.act(g, r), x.act(g, t));
            assert!(
                word[p] == usize::MAX || word[p] == v,
                "stabilizer containment guarantees a well-defined extension"
            );
            word[p] = v;
        }
    }
    Ok(EquivMap { word })
}

/// `|End_G(X)|` as the product over orbit representatives of the number of
/// admissible targets. Saturates at `u128::MAX`.
pub fn count_endos(x: &GSet) -> u128 {
    x.orbits().iter().fold(1u128, |acc, o| {
        acc.saturating_mul(valid_targets(x, o.representative).len() as u128)
    })
}

/// All of `End_G(X)` in lexicographic order of words.
///
/// The first position where two distinct maps differ is always an orbit
/// representative (representatives are least in their orbit), so running an
/// odometer over representative targets, first representative most
/// significant, yields word order.
pub fn enumerate_endos(x: &GSet, cap: u128) -> Result<Vec<EquivMap>, EndoError> {
    let count = count_endos(x);
    if count > cap {
        return Err(EndoError::TooMany { count, cap });
    }
    let reps: Vec<usize> = x.orbits().iter().map(|o| o.representative).collect();
    let targets: Vec<Vec<usize>> = reps.iter().map(|&r| valid_targets(x, r)).collect();
    let mut digits = vec![0usize; reps.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let mut word = vec![0; x.n_points()];
        for (k, &r) in reps.iter().enumerate() {
            let t = targets[k][digits[k]];
            for g in x.group().elements() {
                word[x.act(g, r)] = x.act(g, t);
            }
        }
        out.push(EquivMap { word });
        let mut k = reps.len();
        loop {
            if k == 0 {
                debug_assert_eq!(out.len() as u128, count);
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < targets[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// `Aut_G(X)`, in word order.
pub fn units(x: &GSet, cap: u128) -> Result<Vec<EquivMap>, EndoError> {
    Ok(enumerate_endos(x, cap)?
        .into_iter()
        .filter(EquivMap::is_bijective)
        .collect())
}

/// Identity off `orbit(p)`, `g.p ↦ g.q` on it. Requires `G_p ⊆ G_q`.
pub fn orbit_redirect(x: &GSet, p: usize, q: usize) -> Result<EquivMap, EndoError> {
    if !x.stabilizer(p).is_subgroup_of(x.stabilizer(q)) {
        return Err(EndoError::StabilizerNotContained { x: p, target: q });
    }
    let mut word: Vec<usize> = x.points().collect();
    for g in x.group().elements() {
        word[x.act(g, p)] = x.act(g, q);
    }
    Ok(EquivMap { word })
}

/// An equivariant map sending `p` to `q`, or `None` when
/// `G_p ⊄ G_q`. The witness is identity off `orbit(p)`.
pub fn exists_map_sending(x: &GSet, p: usize, q: usize) -> Option<EquivMap> {
    orbit_redirect(x, p, q).ok()
}

/// A bijective equivariant map sending `p` to `q`, or `None` when
/// `G_p != G_q`.
pub fn exists_bijection_sending(x: &GSet, p: usize, q: usize) -> Option<EquivMap> {
    if x.stabilizer(p) != x.stabilizer(q) {
        return None;
    }
    if x.same_orbit(p, q) {
        orbit_redirect(x, p, q).ok()
    } else {
        Some(orbit_exchange(x, p, q))
    }
}

/// `g.p ↔ g.q`, identity elsewhere. Caller guarantees `G_p = G_q` and
/// distinct orbits.
pub(crate) fn orbit_exchange(x: &GSet, p: usize, q: usize) -> EquivMap {
    let mut word: Vec<usize> = x.points().collect();
    for g in x.group().elements() {
        word[x.act(g, p)] = x.act(g, q);
        word[x.act(g, q)] = x.act(g, p);
    }
    EquivMap { word }
}

pub fn is_valid_constant(x: &GSet, c: usize) -> bool {
    x.stabilizer(c).len() == x.group().order()
}

pub fn constant_map(x: &GSet, c: usize) -> Option<EquivMap> {
    is_valid_constant(x, c).then(|| EquivMap {
        word: vec![c; x.n_points()],
    })
}

/// Extends an injective equivariant map defined on an invariant subset to a
/// bijection of `X`.
///
/// `partial[p]` is `Some(image)` exactly on the domain. Within each box the
/// orbits outside the domain are matched, in ascending order, with the
/// orbits outside the image, through representatives that share one
/// stabilizer.
pub fn extend_to_bijection(x: &GSet, partial: &[Option<usize>]) -> Result<EquivMap, EndoError> {
    let n = x.n_points();
    if partial.len() != n {
        return Err(EndoError::WrongLength {
            expected: n,
            got: partial.len(),
        });
    }
    for p in x.points() {
        let Some(v) = partial[p] else { continue };
        if v >= n {
            return Err(EndoError::PointOutOfRange(v));
        }
        for g in x.group().elements() {
            match partial[x.act(g, p)] {
                None => return Err(EndoError::DomainNotInvariant(p)),
                Some(w) if w != x.act(g, v) => return Err(EndoError::NotEquivariantOnDomain { g, x: p }),
                _ => {}
            }
        }
    }
    let mut preimage: Vec<Option<usize>> = vec![None; n];
    for p in x.points() {
        if let Some(v) = partial[p] {
            if let Some(a) = preimage[v] {
                return Err(EndoError::NotInjective { a, b: p });
            }
            preimage[v] = Some(p);
        }
    }

    let mut word: Vec<usize> = (0..n).map(|p| partial[p].unwrap_or(usize::MAX)).collect();
    for b in x.boxes() {
        let h = x.stabilizer(b.points[0]);
        let rep_with_h = |orbit_points: &[usize]| {
            *orbit_points
                .iter()
                .find(|&&p| x.stabilizer(p) == h)
                .expect("every orbit of a box has a point with each conjugate stabilizer")
        };
        let box_orbits: BTreeSet<usize> = b.points.iter().map(|&p| x.orbit_index(p)).collect();
        let orbit_pts = |o: usize| x.orbits()[o].points.as_slice();
        let sources: Vec<usize> = box_orbits
            .iter()
            .filter(|&&o| partial[orbit_pts(o)[0]].is_none())
            .map(|&o| rep_with_h(orbit_pts(o)))
            .collect();
        let targets: Vec<usize> = box_orbits
            .iter()
            .filter(|&&o| preimage[orbit_pts(o)[0]].is_none())
            .map(|&o| rep_with_h(orbit_pts(o)))
            .collect();
        assert_eq!(
            sources.len(),
            targets.len(),
            "injective equivariant maps preserve stabilizers, so orbit counts per box agree"
        );
        for (&s, &t) in sources.iter().zip(&targets) {
            for g in x.group().elements() {
                word[x.act(g, s)] = x.act(g, t);
            }
        }
    }
    let f = EquivMap { word };
    debug_assert!(f.is_bijective());
    debug_assert!(EquivMap::new(x, f.word.clone()).is_ok());
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::group::{Group, GroupSpec, Subgroup};
    use itertools::Itertools;

    fn w(v: &[usize]) -> Vec<usize> {
        v.to_vec()
    }

    /// Brute force: every function X -> X that commutes with the action.
    fn brute_force_endos(x: &GSet) -> Vec<Vec<usize>> {
        let n = x.n_points();
        (0..n)
            .map(|_| 0..n)
            .multi_cartesian_product()
            .filter(|word| {
                x.group()
                    .elements()
                    .all(|g| x.points().all(|p| word[x.act(g, p)] == x.act(g, word[p])))
            })
            .collect()
    }

    #[test]
    fn make_map_examples() {
        let x = example1();
        assert!(EquivMap::new(&x, w(&[3, 0, 0, 0])).is_ok());
        assert!(matches!(
            EquivMap::new(&x, w(&[0, 3, 0, 2])),
            Err(EndoError::NotEquivariant { .. })
        ));
        assert!(EquivMap::new(&x, w(&[0, 1, 2, 3])).is_ok());
        assert!(matches!(
            EquivMap::new(&x, w(&[0, 1])),
            Err(EndoError::WrongLength { .. })
        ));
    }

    #[test]
    fn extension_from_representatives() {
        let x = example1();
        let f = from_representative_images(&x, &BTreeMap::from([(0, 3), (1, 0), (3, 0)])).unwrap();
        assert_eq!(f.word(), &[3, 0, 0, 0]);
        assert_eq!(
            from_representative_images(&x, &BTreeMap::from([(0, 1), (1, 1), (3, 3)])),
            Err(EndoError::StabilizerNotContained { x: 0, target: 1 })
        );
        let id = from_representative_images(&x, &BTreeMap::from([(0, 0), (1, 1), (3, 3)])).unwrap();
        assert_eq!(id, EquivMap::identity(&x));
        assert_eq!(
            from_representative_images(&x, &BTreeMap::from([(0, 0)])),
            Err(EndoError::MissingRepresentative(1))
        );
    }

    #[test]
    fn enumeration_counts() {
        let x = example1();
        let all = enumerate_endos(&x, DEFAULT_CAP).unwrap();
        assert_eq!(all.len(), 16);
        assert_eq!(count_endos(&x), 16);
        let brute = brute_force_endos(&x);
        assert_eq!(all.iter().map(|f| f.word().to_vec()).collect::<Vec<_>>(), brute);

        let z2 = Group::named(&GroupSpec::Cyclic(2)).unwrap();
        let t = GSet::trivial_action(z2.clone(), 3).unwrap();
        assert_eq!(count_endos(&t), 27);
        assert_eq!(enumerate_endos(&t, DEFAULT_CAP).unwrap().len(), 27);

        let regular = GSet::from_cosets(z2, &[Subgroup::trivial()]).unwrap();
        assert_eq!(count_endos(&regular), 2);
        let s3 = Group::named(&GroupSpec::Symmetric(3)).unwrap();
        let reg6 = GSet::from_cosets(s3, &[Subgroup::trivial()]).unwrap();
        assert_eq!(enumerate_endos(&reg6, DEFAULT_CAP).unwrap().len(), 6);
        assert_eq!(
            enumerate_endos(&x, 15),
            Err(EndoError::TooMany { count: 16, cap: 15 })
        );
    }

    #[test]
    fn enumeration_is_word_ordered_and_closed() {
        let x = example1();
        let all = enumerate_endos(&x, DEFAULT_CAP).unwrap();
        assert!(all.windows(2).all(|p| p[0] < p[1]));
        let set: BTreeSet<&EquivMap> = all.iter().collect();
        for f in &all {
            for g in &all {
                assert!(set.contains(&f.compose(g)));
            }
        }
    }

    #[test]
    fn composition_examples() {
        let x = example1();
        let f = EquivMap::new(&x, w(&[0, 0, 0, 3])).unwrap();
        assert_eq!(f.compose(&f), f);
        assert_eq!(f.compose(&EquivMap::identity(&x)), f);
        let t = EquivMap::new(&x, w(&[3, 0, 0, 0])).unwrap();
        assert_eq!(t.compose(&t).word(), &[0, 3, 3, 3]);
    }

    #[test]
    fn kernels_and_images() {
        let x = example1();
        let id = EquivMap::identity(&x);
        assert_eq!(id.kernel().blocks, vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(id.image(), vec![0, 1, 2, 3]);
        // The printed pair list for ker((3000)) joins 0,1,2; evaluating the
        // word itself gives {0},{1,2,3}.
        let t = EquivMap::new(&x, w(&[3, 0, 0, 0])).unwrap();
        assert_eq!(t.kernel().blocks, vec![vec![0], vec![1, 2, 3]]);
        assert_eq!(t.image(), vec![0, 3]);
        let f = EquivMap::new(&x, w(&[0, 0, 0, 3])).unwrap();
        assert_eq!(f.kernel().blocks, vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(f.image(), vec![0, 3]);
        assert_eq!(f.fixed_points(), vec![0, 3]);
        assert!(t.fixed_points().is_empty());
        assert_eq!(id.fixed_points(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn units_of_example_one() {
        let x = example1();
        let u: Vec<Vec<usize>> = units(&x, DEFAULT_CAP)
            .unwrap()
            .into_iter()
            .map(|f| f.word().to_vec())
            .collect();
        assert_eq!(u, vec![w(&[0, 1, 2, 3]), w(&[0, 2, 1, 3]), w(&[3, 1, 2, 0]), w(&[3, 2, 1, 0])]);
        let z2 = Group::named(&GroupSpec::Cyclic(2)).unwrap();
        assert_eq!(units(&GSet::trivial_action(z2.clone(), 4).unwrap(), DEFAULT_CAP).unwrap().len(), 24);
        assert_eq!(units(&GSet::trivial_action(z2, 1).unwrap(), DEFAULT_CAP).unwrap().len(), 1);
    }

    #[test]
    fn map_sending_witnesses() {
        let x = example1();
        assert_eq!(exists_map_sending(&x, 1, 0).unwrap().word(), &[0, 0, 0, 3]);
        assert!(exists_map_sending(&x, 0, 1).is_none());
        assert_eq!(exists_map_sending(&x, 2, 2).unwrap(), EquivMap::identity(&x));
        assert_eq!(exists_bijection_sending(&x, 0, 3).unwrap().word(), &[3, 1, 2, 0]);
        assert_eq!(exists_bijection_sending(&x, 1, 2).unwrap().word(), &[0, 2, 1, 3]);
        assert!(exists_bijection_sending(&x, 0, 1).is_none());
    }

    #[test]
    fn constants() {
        let x = example1();
        assert!(is_valid_constant(&x, 0));
        assert!(EquivMap::new(&x, w(&[0, 0, 0, 0])).is_ok());
        assert!(!is_valid_constant(&x, 1));
        assert!(constant_map(&x, 1).is_none());
        let z2 = Group::named(&GroupSpec::Cyclic(2)).unwrap();
        let t = GSet::trivial_action(z2, 3).unwrap();
        assert!(t.points().all(|c| is_valid_constant(&t, c)));
    }

    #[test]
    fn extension_to_bijection() {
        let x = example1();
        let f = EquivMap::new(&x, w(&[3, 2, 1, 0])).unwrap();
        let total: Vec<Option<usize>> = f.word().iter().map(|&v| Some(v)).collect();
        assert_eq!(extend_to_bijection(&x, &total).unwrap(), f);

        let partial = vec![Some(3), None, None, Some(0)];
        assert_eq!(extend_to_bijection(&x, &partial).unwrap().word(), &[3, 1, 2, 0]);
        assert_eq!(
            extend_to_bijection(&x, &[None; 4]).unwrap(),
            EquivMap::identity(&x)
        );
        assert_eq!(
            extend_to_bijection(&x, &[None, Some(1), None, None]),
            Err(EndoError::DomainNotInvariant(1))
        );
        assert_eq!(
            extend_to_bijection(&x, &[Some(0), None, None, Some(0)]),
            Err(EndoError::NotInjective { a: 0, b: 3 })
        );
        assert!(matches!(
            extend_to_bijection(&x, &[None, Some(1), Some(1), None]),
            Err(EndoError::NotEquivariantOnDomain { .. })
        ));
    }

    #[test]
    fn word_display() {
        let x = example1();
        let f = EquivMap::new(&x, w(&[3, 0, 0, 0])).unwrap();
        assert_eq!(f.display(&x).to_string(), "(3000)");
        let z2 = Group::named(&GroupSpec::Cyclic(2)).unwrap();
        let big = GSet::trivial_action(z2, 11).unwrap();
        let id = EquivMap::identity(&big);
        assert!(id.display(&big).to_string().starts_with("(0,1,2,"));
    }
}
