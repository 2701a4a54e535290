//! Elementary collapsings: equivariant maps that fold exactly one orbit onto
//! another and miss exactly one orbit.
//!
//! Two independent detectors are provided. The characterization route looks
//! for an orbit off which the map is injective and checks that the image
//! misses a single orbit of matching stabilizer; the definition route
//! compares the kernel against the prescribed relation for every candidate
//! pair `(x, y)`. Debug builds run both and require agreement.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::endo::{self, EndoError, EquivMap};
use crate::green::MonoidTable;
use crate::group::Subgroup;
use crate::gset::GSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CollapsingError {
    #[error("map is not an elementary collapsing")]
    NotACollapsing,
    #[error("stabilizer of {x} is not contained in the stabilizer of {y}")]
    StabilizerNotContained { x: usize, y: usize },
    #[error("stabilizers of {x} and {y} differ")]
    StabilizersNotEqual { x: usize, y: usize },
    #[error("{x} and {y} are distinct points of one orbit")]
    OrbitsCoincide { x: usize, y: usize },
    #[error("factorization check failed: {0}")]
    FactorizationFailed(&'static str),
}

/// `(H, [K]_{N_H})` with the literal subgroup `H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CollapsingType {
    pub h: Subgroup,
    /// Conjugates of `K` by the normalizer of `H`, ascending.
    pub k_class: Vec<Subgroup>,
}

impl CollapsingType {
    pub fn new(x: &GSet, h: Subgroup, k: &Subgroup) -> CollapsingType {
        let group = x.group();
        let k_class = group.n_conjugacy_class(k, &group.normalizer(&h));
        CollapsingType { h, k_class }
    }

    pub fn k_rep(&self) -> &Subgroup {
        &self.k_class[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsingWitness {
    /// Point of the collapsed orbit.
    pub x: usize,
    /// Point outside `orbit(x)` with `f(y) = f(x)`.
    pub y: usize,
    /// Point of the orbit missing from the image, with `G_z = G_x`.
    pub z: usize,
    pub kind: CollapsingType,
}

fn injective_off(f: &EquivMap, skip: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    let skip: BTreeSet<usize> = skip.iter().copied().collect();
    (0..n)
        .filter(|p| !skip.contains(p))
        .all(|p| !std::mem::replace(&mut seen[f.apply(p)], true))
}

/// Orbit indices missing from the image, if the image is a union of whole
/// orbits (it always is for an equivariant map).
fn missing_orbits(x: &GSet, f: &EquivMap) -> Vec<usize> {
    let image: BTreeSet<usize> = f.word().iter().copied().collect();
    (0..x.orbits().len())
        .filter(|&o| !image.contains(&x.orbits()[o].representative))
        .collect()
}

/// The single orbit (as an index) missing from `Im(f)`, if exactly one is.
pub fn missing_orbit(x: &GSet, f: &EquivMap) -> Option<usize> {
    match missing_orbits(x, f).as_slice() {
        [o] => Some(*o),
        _ => None,
    }
}

/// Characterization route: some orbit `O = Gx` with `f` injective on
/// `X \ O`, and `Im(f) = X \ Gz` with `G_x = G_z`. Orbits are tried in
/// ascending order; within `O` the least `x` matching some stabilizer in
/// `Gz` is taken.
pub fn detect_by_characterization(x: &GSet, f: &EquivMap) -> Option<CollapsingWitness> {
    let n = x.n_points();
    let missing = missing_orbit(x, f)?;
    let z_points = &x.orbits()[missing].points;
    for orbit in x.orbits() {
        if !injective_off(f, &orbit.points, n) {
            continue;
        }
        let matched = orbit.points.iter().find_map(|&p| {
            z_points
                .iter()
                .find(|&&z| x.stabilizer(z) == x.stabilizer(p))
                .map(|&z| (p, z))
        });
        let Some((xp, z)) = matched else { continue };
        let y = x
            .points()
            .find(|&q| !x.same_orbit(q, xp) && f.apply(q) == f.apply(xp))
            .expect("f restricted off the collapsed orbit is onto the image");
        assert_eq!(
            x.stabilizer(y),
            x.stabilizer(f.apply(xp)),
            "the collapsed-onto point and its image share a stabilizer"
        );
        let kind = CollapsingType::new(x, x.stabilizer(xp).clone(), x.stabilizer(y));
        return Some(CollapsingWitness { x: xp, y, z, kind });
    }
    None
}

/// The relation `Δ ∪ {(g.x, g.y),(g.y, g.x)} ∪ {(g.x, h.x) : h⁻¹g ∈ G_y}` as
/// an `n × n` boolean matrix.
pub fn collapsing_relation(x: &GSet, p: usize, q: usize) -> Vec<Vec<bool>> {
    let n = x.n_points();
    let group = x.group();
    let mut rel = vec![vec![false; n]; n];
    for a in 0..n {
        rel[a][a] = true;
    }
    for g in group.elements() {
        let (gx, gy) = (x.act(g, p), x.act(g, q));
        rel[gx][gy] = true;
        rel[gy][gx] = true;
    }
    let stab_q = x.stabilizer(q);
    for g in group.elements() {
        for h in group.elements() {
            if stab_q.contains(group.mul(group.inv(h), g)) {
                let (gx, hx) = (x.act(g, p), x.act(h, p));
                rel[gx][hx] = true;
                rel[hx][gx] = true;
            }
        }
    }
    rel
}

/// Whether `(p, q)` witnesses `f` as an elementary collapsing by the
/// definition: distinct orbits and `ker(f)` equal to [`collapsing_relation`].
pub fn satisfies_definition(x: &GSet, f: &EquivMap, p: usize, q: usize) -> bool {
    if x.same_orbit(p, q) || f.apply(p) != f.apply(q) {
        return false;
    }
    let rel = collapsing_relation(x, p, q);
    x.points()
        .all(|a| x.points().all(|b| rel[a][b] == (f.apply(a) == f.apply(b))))
}

/// Definition route: least `(x, y)` satisfying the definition.
pub fn detect_by_definition(x: &GSet, f: &EquivMap) -> Option<(usize, usize)> {
    x.points()
        .flat_map(|p| x.points().map(move |q| (p, q)))
        .find(|&(p, q)| satisfies_definition(x, f, p, q))
}

/// Witness for `f` being an elementary collapsing, `None` otherwise.
pub fn is_elementary_collapsing(x: &GSet, f: &EquivMap) -> Option<CollapsingWitness> {
    let witness = detect_by_characterization(x, f);
    if cfg!(debug_assertions) {
        assert_eq!(
            witness.is_some(),
            detect_by_definition(x, f).is_some(),
            "collapsing detectors disagree on {:?}",
            f.word()
        );
        if let Some(w) = &witness {
            assert!(satisfies_definition(x, f, w.x, w.y));
        }
    }
    witness
}

pub fn collapsing_type(x: &GSet, f: &EquivMap) -> Result<CollapsingType, CollapsingError> {
    is_elementary_collapsing(x, f)
        .map(|w| w.kind)
        .ok_or(CollapsingError::NotACollapsing)
}

/// `[x↦y]`: identity off `orbit(x)`, `g.x ↦ g.y` on it. Bijective when
/// `x` and `y` share an orbit.
pub fn fixing_collapsing(x: &GSet, p: usize, q: usize) -> Result<EquivMap, CollapsingError> {
    endo::orbit_redirect(x, p, q).map_err(|e| match e {
        EndoError::StabilizerNotContained { x, target } => CollapsingError::StabilizerNotContained { x, y: target },
        other => unreachable!("orbit_redirect only fails on containment: {other}"),
    })
}

/// `(x↔y)`: exchanges `g.x` and `g.y`, identity elsewhere.
pub fn orbit_swap(x: &GSet, p: usize, q: usize) -> Result<EquivMap, CollapsingError> {
    if x.stabilizer(p) != x.stabilizer(q) {
        return Err(CollapsingError::StabilizersNotEqual { x: p, y: q });
    }
    if p == q {
        return Ok(EquivMap::identity(x));
    }
    if x.same_orbit(p, q) {
        return Err(CollapsingError::OrbitsCoincide { x: p, y: q });
    }
    Ok(endo::orbit_exchange(x, p, q))
}

/// `Some((x, y))` with `f = [x↦y]` and distinct orbits, if `f` is a fixing
/// elementary collapsing. `x` is the least point of the moved orbit.
pub fn is_fixing_collapsing(x: &GSet, f: &EquivMap) -> Option<(usize, usize)> {
    let moved: Vec<usize> = x.points().filter(|&p| f.apply(p) != p).collect();
    let &p = moved.first()?;
    if moved != x.orbit(p).points {
        return None;
    }
    let q = f.apply(p);
    if x.same_orbit(p, q) {
        return None;
    }
    let candidate = fixing_collapsing(x, p, q).ok()?;
    if &candidate != f {
        return None;
    }
    debug_assert!(is_elementary_collapsing(x, f).is_some());
    Some((p, q))
}

/// `τ̂`: agrees with `f` off `orbit(x)` and sends `g.x ↦ g.z`.
pub fn bijective_support(x: &GSet, f: &EquivMap) -> Result<EquivMap, CollapsingError> {
    let w = is_elementary_collapsing(x, f).ok_or(CollapsingError::NotACollapsing)?;
    let mut word = f.word().to_vec();
    for g in x.group().elements() {
        word[x.act(g, w.x)] = x.act(g, w.z);
    }
    let support = EquivMap::new(x, word).expect("G_x = G_z makes the support well defined");
    debug_assert!(support.is_bijective());
    Ok(support)
}

/// A witness whose `y` lies outside the missing orbit.
///
/// When the normalized witness has `y ∈ Gz` the two merged orbits have equal
/// stabilizers, so the missing orbit itself can play the collapsed orbit:
/// with `z = k.y`, the pair `(z, k.x)` is again a witness.
pub fn factorization_witness(x: &GSet, f: &EquivMap) -> Option<CollapsingWitness> {
    let w = is_elementary_collapsing(x, f)?;
    if !x.same_orbit(w.y, w.z) {
        return Some(w);
    }
    let k = x.transporter(w.y, w.z).expect("y and z share an orbit");
    let y = x.act(k, w.x);
    let alt = CollapsingWitness {
        x: w.z,
        y,
        z: w.z,
        kind: CollapsingType::new(x, x.stabilizer(w.z).clone(), x.stabilizer(y)),
    };
    debug_assert!(satisfies_definition(x, f, alt.x, alt.y));
    Some(alt)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RFactorization {
    /// `[z↦y]`
    pub fixing: EquivMap,
    /// `f = fixing ∘ m1`, with `m1 = f`.
    pub m1: EquivMap,
    /// `fixing = f ∘ m2`.
    pub m2: EquivMap,
    pub witness: CollapsingWitness,
}

/// Exhibits `f ∼_R [z↦y]` through `f = [z↦y] ∘ f` and `[z↦y] = f ∘ m`, where
/// `m` inverts `f` off the collapsed orbit and sends `g.z` to the preimage
/// of `g.y`.
pub fn r_factor_through_fixing(m: &MonoidTable, f: &EquivMap) -> Result<RFactorization, CollapsingError> {
    let x = m.gset();
    let w = factorization_witness(x, f).ok_or(CollapsingError::NotACollapsing)?;
    let fixing = fixing_collapsing(x, w.z, w.y)?;

    let n = x.n_points();
    let mut inverse = vec![usize::MAX; n];
    for p in x.points().filter(|&p| !x.same_orbit(p, w.x)) {
        inverse[f.apply(p)] = p;
    }
    let mut word = vec![usize::MAX; n];
    for t in x.points() {
        word[t] = if x.same_orbit(t, w.z) {
            let g = x.transporter(w.z, t).expect("same orbit");
            inverse[x.act(g, w.y)]
        } else {
            inverse[t]
        };
    }
    if word.iter().any(|&v| v == usize::MAX) {
        return Err(CollapsingError::FactorizationFailed("preimage missing"));
    }
    let m2 = EquivMap::new(x, word).map_err(|_| CollapsingError::FactorizationFailed("m is not equivariant"))?;
    if &fixing.compose(f) != f {
        return Err(CollapsingError::FactorizationFailed("f != [z↦y] f"));
    }
    if f.compose(&m2) != fixing {
        return Err(CollapsingError::FactorizationFailed("[z↦y] != f m"));
    }
    Ok(RFactorization {
        fixing,
        m1: f.clone(),
        m2,
        witness: w,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub element: usize,
    pub witness: CollapsingWitness,
    /// `(x, y)` with the element equal to `[x↦y]`, for fixing collapsings.
    pub fixing: Option<(usize, usize)>,
}

/// Every elementary collapsing of the monoid, by element id.
pub fn all_collapsings(m: &MonoidTable) -> Vec<CensusEntry> {
    use rayon::prelude::*;
    let x = m.gset();
    (0..m.len())
        .into_par_iter()
        .filter_map(|e| {
            let f = m.element(e);
            is_elementary_collapsing(x, f).map(|witness| CensusEntry {
                element: e,
                witness,
                fixing: is_fixing_collapsing(x, f),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRecord {
    pub element: String,
    pub x: usize,
    pub y: usize,
    pub z: usize,
    #[serde(rename = "H")]
    pub h: Vec<String>,
    #[serde(rename = "K_class")]
    pub k_class: Vec<Vec<String>>,
    pub fixing: bool,
}

impl WitnessRecord {
    pub fn new(m: &MonoidTable, entry: &CensusEntry) -> WitnessRecord {
        let group = m.gset().group();
        let w = &entry.witness;
        WitnessRecord {
            element: m.word_string(entry.element),
            x: w.x,
            y: w.y,
            z: w.z,
            h: group.subgroup_names(&w.kind.h),
            k_class: w.kind.k_class.iter().map(|k| group.subgroup_names(k)).collect(),
            fixing: entry.fixing.is_some(),
        }
    }
}
