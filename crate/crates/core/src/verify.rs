//! Falsification harness: the structural results about `End_G(X)` as
//! executable checks over a G-set, with counterexamples that can be replayed
//! against brute-force oracles.
//!
//! Each check is split into named parts. A part enumerates instances (pairs
//! of points, pairs of elements, ...) and tests one predicate per instance;
//! the first failing instance becomes the counterexample. Green relations
//! are queried through [`Ctx`], which answers from the engine during a sweep
//! and from principal ideals during a replay, so a failure caused by a wrong
//! engine answer is told apart from a genuinely false statement.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collapsing::{self, CollapsingWitness};
use crate::endo::{self, EndoError, EquivMap, DEFAULT_CAP};
use crate::fixtures;
use crate::green::{self, GreenStructure, MonoidTable};
use crate::group::{Group, Subgroup};
use crate::gset::GSet;
use crate::io::{self, GSetInput, GroupInput, InputError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("monoid has {count} elements, above the cap of {cap}")]
    MonoidTooLarge { count: u128, cap: u128 },
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("unknown check id {0:?}")]
    UnknownCheck(String),
    #[error("unknown mutation {0:?}")]
    UnknownMutation(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Endo(#[from] EndoError),
    #[error("malformed counterexample: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
    P13,
    P14,
    P15,
    P16,
    P17,
    P18,
    P19,
    P20,
    P21,
    P22,
    P23,
}

impl CheckId {
    pub const ALL: [CheckId; 23] = [
        CheckId::P1,
        CheckId::P2,
        CheckId::P3,
        CheckId::P4,
        CheckId::P5,
        CheckId::P6,
        CheckId::P7,
        CheckId::P8,
        CheckId::P9,
        CheckId::P10,
        CheckId::P11,
        CheckId::P12,
        CheckId::P13,
        CheckId::P14,
        CheckId::P15,
        CheckId::P16,
        CheckId::P17,
        CheckId::P18,
        CheckId::P19,
        CheckId::P20,
        CheckId::P21,
        CheckId::P22,
        CheckId::P23,
    ];

    pub fn description(self) -> &'static str {
        match self {
            CheckId::P1 => "some map sends x to y iff G_x ≤ G_y; some bijection iff G_x = G_y",
            CheckId::P2 => "constant maps exist iff G_c = G; they collapse iff |X/G| = 2",
            CheckId::P3 => "L-related maps have equal stabilizers of images",
            CheckId::P4 => "constant maps are pairwise L-related",
            CheckId::P5 => "a constant map is alone in its R-class",
            CheckId::P6 => "injective partial maps on invariant subsets extend to bijections",
            CheckId::P7 => "L by kernels agrees with L by principal left ideals",
            CheckId::P8 => "R-related maps have equal images",
            CheckId::P9 => "kernels contain the orbit and stabilizer closures",
            CheckId::P10 => "[x↦y′][x↦y] = [x↦y]",
            CheckId::P11 => "[x↦y][y↦x] = [x↦y]",
            CheckId::P12 => "[g·x↦g·y] = [x↦y]",
            CheckId::P13 => "ητ = η for τ = [x↦y] and (x, y) a witness of η",
            CheckId::P14 => "[x↦y] L [y↦x]",
            CheckId::P15 => "[x↦y] and [y↦x] are not R-related",
            CheckId::P16 => "[x↦y] R [x↦y′]",
            CheckId::P17 => "[x↦y] R [x′↦y′] iff x′ ∈ Gx",
            CheckId::P18 => "L preserves collapsing type",
            CheckId::P19 => "collapsings are the elements R-related to fixing collapsings",
            CheckId::P20 => "distinct fixing collapsings are not H-related",
            CheckId::P21 => "D-classes of collapsings hold only collapsings; detectors agree",
            CheckId::P22 => "D = J and L∘R = R∘L",
            CheckId::P23 => "count, enumeration, validity and closure agree",
        }
    }

    /// `all` or a comma-separated list such as `P1,P7`; sorted, deduplicated.
    pub fn parse_list(text: &str) -> Result<Vec<CheckId>, VerifyError> {
        if text.trim().eq_ignore_ascii_case("all") {
            return Ok(CheckId::ALL.to_vec());
        }
        let mut ids = text
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<CheckId>, _>>()?;
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for CheckId {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| VerifyError::UnknownCheck(s.to_string()))
    }
}

/// Deliberate engine corruptions for testing the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mutation {
    /// L-classes by image instead of kernel.
    LByImage,
}

impl FromStr for Mutation {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l-by-image" => Ok(Mutation::LByImage),
            _ => Err(VerifyError::UnknownMutation(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub cap: u128,
    pub mutation: Option<Mutation>,
    /// Whether to assert the existential parts; `None` asserts them only on
    /// the Example 1 fixture.
    pub existentials: Option<bool>,
    /// Budget of injective restrictions tried by the extension check.
    pub extension_samples: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            cap: DEFAULT_CAP,
            mutation: None,
            existentials: None,
            extension_samples: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationAnswer {
    pub relation: String,
    pub a: String,
    pub b: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub check_id: CheckId,
    pub part: String,
    pub gset: GSetInput,
    pub elements: Vec<String>,
    pub points: Vec<usize>,
    /// Green-relation answers the engine gave while testing this instance.
    pub engine_answers: Vec<RelationAnswer>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    /// Index of the G-set within its corpus.
    pub gset: usize,
    pub status: Status,
    /// Instances examined.
    pub cases: usize,
    pub counterexample: Option<Counterexample>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// The predicate fails again under oracle relations.
    Reproduced,
    /// A recorded engine answer contradicts the oracle.
    EngineFault {
        relation: String,
        a: String,
        b: String,
        recorded: bool,
        actual: bool,
    },
    NotReproduced,
}

impl Verdict {
    pub fn confirms_failure(&self) -> bool {
        !matches!(self, Verdict::NotReproduced)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Rel {
    L,
    R,
    H,
    D,
    J,
}

/// A relation query: a single Green relation, or the composite `a ρ c σ b`
/// for some `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Query {
    Rel(Rel),
    Then(Rel, Rel),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Rel(r) => write!(f, "{r:?}"),
            Query::Then(a, b) => write!(f, "{a:?}∘{b:?}"),
        }
    }
}

impl FromStr for Query {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rel = |t: &str| match t {
            "L" => Ok(Rel::L),
            "R" => Ok(Rel::R),
            "H" => Ok(Rel::H),
            "D" => Ok(Rel::D),
            "J" => Ok(Rel::J),
            _ => Err(VerifyError::Replay(format!("unknown relation {t:?}"))),
        };
        match s.split_once('∘') {
            Some((a, b)) => Ok(Query::Then(rel(a)?, rel(b)?)),
            None => Ok(Query::Rel(rel(s)?)),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Inst {
    elems: [usize; 2],
    n_elems: usize,
    points: Vec<usize>,
}

impl Inst {
    fn none() -> Inst {
        Inst::default()
    }

    fn one(e: usize) -> Inst {
        Inst {
            elems: [e, 0],
            n_elems: 1,
            points: Vec::new(),
        }
    }

    fn two(a: usize, b: usize) -> Inst {
        Inst {
            elems: [a, b],
            n_elems: 2,
            points: Vec::new(),
        }
    }

    fn at(points: Vec<usize>) -> Inst {
        Inst {
            points,
            ..Inst::default()
        }
    }

    fn with(mut self, points: Vec<usize>) -> Inst {
        self.points = points;
        self
    }

    fn e(&self, i: usize) -> usize {
        assert!(i < self.n_elems, "instance has {} elements", self.n_elems);
        self.elems[i]
    }

    fn p(&self, i: usize) -> usize {
        self.points[i]
    }

    fn elem_list(&self) -> &[usize] {
        &self.elems[..self.n_elems]
    }
}

enum Source {
    Engine {
        gs: GreenStructure,
        /// `(L-class, R-class)` pairs with nonempty intersection.
        occupied: FixedBitSet,
        n_r: usize,
    },
    Replay {
        record: HashMap<(Query, usize, usize), bool>,
    },
}

const LOG_LIMIT: usize = 64;

struct Ctx<'a> {
    x: &'a GSet,
    m: &'a MonoidTable,
    source: Source,
    collapse: Vec<Option<CollapsingWitness>>,
    images: Vec<Vec<usize>>,
    fixing: Vec<Vec<Option<usize>>>,
    fixing_elements: OnceCell<Vec<usize>>,
    kernel_l: OnceCell<Vec<usize>>,
    ideal_l: OnceCell<Vec<usize>>,
    log: RefCell<Vec<(Query, usize, usize, bool)>>,
    existentials: bool,
    samples: usize,
}

impl<'a> Ctx<'a> {
    fn base(x: &'a GSet, m: &'a MonoidTable, source: Source) -> Ctx<'a> {
        let collapse = (0..m.len())
            .into_par_iter()
            .map(|e| collapsing::is_elementary_collapsing(x, m.element(e)))
            .collect();
        let images = m.elements().iter().map(EquivMap::image).collect();
        let fixing = x
            .points()
            .map(|p| {
                x.points()
                    .map(|q| {
                        collapsing::fixing_collapsing(x, p, q)
                            .ok()
                            .map(|f| m.id_of(f.word()).expect("[x↦y] is equivariant"))
                    })
                    .collect()
            })
            .collect();
        Ctx {
            x,
            m,
            source,
            collapse,
            images,
            fixing,
            fixing_elements: OnceCell::new(),
            kernel_l: OnceCell::new(),
            ideal_l: OnceCell::new(),
            log: RefCell::new(Vec::new()),
            existentials: true,
            samples: RunOptions::default().extension_samples,
        }
    }

    fn engine(x: &'a GSet, m: &'a MonoidTable, opts: &RunOptions) -> Ctx<'a> {
        let gs = match opts.mutation {
            None => green::green_structure(m),
            Some(Mutation::LByImage) => {
                let l_of = green::label_by(m.elements().iter().map(EquivMap::image));
                GreenStructure::from_labels(m, l_of, green::r_labels(m))
            }
        };
        let n_r = gs.r_classes.len();
        let mut occupied = FixedBitSet::with_capacity(gs.l_classes.len() * n_r);
        for e in 0..m.len() {
            occupied.insert(gs.l_of[e] * n_r + gs.r_of[e]);
        }
        let mut ctx = Ctx::base(x, m, Source::Engine { gs, occupied, n_r });
        ctx.existentials = opts.existentials.unwrap_or_else(|| fixtures::is_example1(x));
        ctx.samples = opts.extension_samples;
        ctx
    }

    fn replay(x: &'a GSet, m: &'a MonoidTable, record: HashMap<(Query, usize, usize), bool>) -> Ctx<'a> {
        Ctx::base(x, m, Source::Replay { record })
    }

    fn gs(&self) -> &GreenStructure {
        match &self.source {
            Source::Engine { gs, .. } => gs,
            Source::Replay { .. } => panic!("instances are only enumerated during a sweep"),
        }
    }

    fn rel(&self, r: Rel, a: usize, b: usize) -> bool {
        self.query(Query::Rel(r), a, b)
    }

    fn then(&self, first: Rel, second: Rel, a: usize, b: usize) -> bool {
        self.query(Query::Then(first, second), a, b)
    }

    fn query(&self, q: Query, a: usize, b: usize) -> bool {
        let holds = match &self.source {
            Source::Engine { gs, occupied, n_r } => match q {
                Query::Rel(Rel::L) => gs.l_of[a] == gs.l_of[b],
                Query::Rel(Rel::R) => gs.r_of[a] == gs.r_of[b],
                Query::Rel(Rel::H) => gs.h_of[a] == gs.h_of[b],
                Query::Rel(Rel::D) => gs.d_of[a] == gs.d_of[b],
                Query::Rel(Rel::J) => gs.j_of[a] == gs.j_of[b],
                Query::Then(Rel::L, Rel::R) => occupied.contains(gs.l_of[a] * n_r + gs.r_of[b]),
                Query::Then(Rel::R, Rel::L) => occupied.contains(gs.l_of[b] * n_r + gs.r_of[a]),
                Query::Then(..) => self.oracle(q, a, b),
            },
            Source::Replay { record } => record
                .get(&(q, a, b))
                .copied()
                .unwrap_or_else(|| self.oracle(q, a, b)),
        };
        let mut log = self.log.borrow_mut();
        if log.len() < LOG_LIMIT {
            log.push((q, a, b, holds));
        }
        holds
    }

    /// Relations from principal ideals, pair by pair.
    fn oracle(&self, q: Query, a: usize, b: usize) -> bool {
        let m = self.m;
        match q {
            Query::Rel(Rel::L) => green::principal_left_ideal(m, a) == green::principal_left_ideal(m, b),
            Query::Rel(Rel::R) => green::principal_right_ideal(m, a) == green::principal_right_ideal(m, b),
            Query::Rel(Rel::H) => self.oracle(Query::Rel(Rel::L), a, b) && self.oracle(Query::Rel(Rel::R), a, b),
            Query::Rel(Rel::D) => self.oracle(Query::Then(Rel::L, Rel::R), a, b),
            Query::Rel(Rel::J) => green::two_sided_ideal(m, a) == green::two_sided_ideal(m, b),
            Query::Then(first, second) => {
                (0..m.len()).any(|c| self.oracle(Query::Rel(first), a, c) && self.oracle(Query::Rel(second), c, b))
            }
        }
    }

    fn el(&self, e: usize) -> &EquivMap {
        self.m.element(e)
    }

    fn coll(&self, e: usize) -> Option<&CollapsingWitness> {
        self.collapse[e].as_ref()
    }

    fn stab(&self, p: usize) -> &Subgroup {
        self.x.stabilizer(p)
    }

    /// `G_p ≤ G_q`.
    fn below(&self, p: usize, q: usize) -> bool {
        self.stab(p).is_subgroup_of(self.stab(q))
    }

    fn fix(&self, p: usize, q: usize) -> Result<usize, String> {
        self.fixing[p][q].ok_or_else(|| format!("[{p}↦{q}] is not defined"))
    }

    /// `[p↦q]` rebuilt from its defining formula rather than looked up.
    fn fix_map(&self, p: usize, q: usize) -> Result<EquivMap, String> {
        collapsing::fixing_collapsing(self.x, p, q).map_err(|e| e.to_string())
    }

    fn constants(&self) -> Vec<usize> {
        (0..self.m.len()).filter(|&e| self.el(e).is_constant()).collect()
    }

    fn fixing_elements(&self) -> &[usize] {
        self.fixing_elements.get_or_init(|| {
            (0..self.m.len())
                .filter(|&e| collapsing::is_fixing_collapsing(self.x, self.el(e)).is_some())
                .collect()
        })
    }

    fn kernel_l(&self) -> &[usize] {
        self.kernel_l.get_or_init(|| green::l_labels(self.m))
    }

    fn ideal_l(&self) -> &[usize] {
        self.ideal_l.get_or_init(|| green::l_labels_by_ideals(self.m))
    }

    fn word(&self, e: usize) -> String {
        self.m.word_string(e)
    }

    fn show(&self, f: &EquivMap) -> String {
        f.display(self.x).to_string()
    }
}

type Flow = ControlFlow<()>;
type Visit<'v> = dyn FnMut(Inst) -> Flow + 'v;

struct Part {
    name: &'static str,
    existential: bool,
    instances: fn(&Ctx<'_>, &mut Visit<'_>) -> Flow,
    holds: fn(&Ctx<'_>, &Inst) -> Result<(), String>,
}

const fn part(
    name: &'static str,
    instances: fn(&Ctx<'_>, &mut Visit<'_>) -> Flow,
    holds: fn(&Ctx<'_>, &Inst) -> Result<(), String>,
) -> Part {
    Part {
        name,
        existential: false,
        instances,
        holds,
    }
}

const fn existential(name: &'static str, holds: fn(&Ctx<'_>, &Inst) -> Result<(), String>) -> Part {
    Part {
        name,
        existential: true,
        instances: single_instance,
        holds,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Instance generators.

fn single_instance(_: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    visit(Inst::none())
}

fn each_point(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        visit(Inst::at(vec![p]))?;
    }
    Flow::Continue(())
}

fn point_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        for q in ctx.x.points() {
            visit(Inst::at(vec![p, q]))?;
        }
    }
    Flow::Continue(())
}

/// `(x, y)` with `G_x = G_y`, `x ≠ y`; only distinct orbits if `apart`.
fn equal_stabilizer_pairs(ctx: &Ctx<'_>, apart: bool, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        for q in ctx.x.points() {
            if p != q && ctx.stab(p) == ctx.stab(q) && !(apart && ctx.x.same_orbit(p, q)) {
                visit(Inst::at(vec![p, q]))?;
            }
        }
    }
    Flow::Continue(())
}

fn swap_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    equal_stabilizer_pairs(ctx, false, visit)
}

fn swap_pairs_apart(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    equal_stabilizer_pairs(ctx, true, visit)
}

/// `(x, y)` with `[x↦y]` a fixing collapsing.
fn redirect_targets<'c>(ctx: &'c Ctx<'_>, p: usize) -> impl Iterator<Item = usize> + 'c {
    ctx.x
        .points()
        .filter(move |&q| !ctx.x.same_orbit(p, q) && ctx.below(p, q))
}

fn redirect_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        for q in ctx.x.points().filter(|&q| ctx.below(p, q)) {
            visit(Inst::at(vec![p, q]))?;
        }
    }
    Flow::Continue(())
}

fn redirect_triples(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        for q in redirect_targets(ctx, p) {
            for q2 in redirect_targets(ctx, p) {
                visit(Inst::at(vec![p, q, q2]))?;
            }
        }
    }
    Flow::Continue(())
}

fn redirect_quadruples(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for p in ctx.x.points() {
        for q in redirect_targets(ctx, p) {
            for p2 in ctx.x.points() {
                for q2 in redirect_targets(ctx, p2) {
                    visit(Inst::at(vec![p, q, p2, q2]))?;
                }
            }
        }
    }
    Flow::Continue(())
}

fn each_element(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for e in 0..ctx.m.len() {
        visit(Inst::one(e))?;
    }
    Flow::Continue(())
}

fn each_collapsing(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for e in (0..ctx.m.len()).filter(|&e| ctx.coll(e).is_some()) {
        visit(Inst::one(e))?;
    }
    Flow::Continue(())
}

fn each_constant(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for e in ctx.constants() {
        visit(Inst::one(e))?;
    }
    Flow::Continue(())
}

fn element_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for a in 0..ctx.m.len() {
        for b in a + 1..ctx.m.len() {
            visit(Inst::two(a, b))?;
        }
    }
    Flow::Continue(())
}

/// Ordered pairs of distinct elements within each class.
fn ordered_class_pairs(classes: &[Vec<usize>], visit: &mut Visit<'_>) -> Flow {
    for class in classes {
        for &a in class {
            for &b in class.iter().filter(|&&b| b != a) {
                visit(Inst::two(a, b))?;
            }
        }
    }
    Flow::Continue(())
}

fn l_class_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    ordered_class_pairs(&ctx.gs().l_classes, visit)
}

fn r_class_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    ordered_class_pairs(&ctx.gs().r_classes, visit)
}

fn d_class_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    ordered_class_pairs(&ctx.gs().d_classes, visit)
}

fn constant_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    let constants = ctx.constants();
    for (i, &a) in constants.iter().enumerate() {
        for &b in &constants[i + 1..] {
            visit(Inst::two(a, b))?;
        }
    }
    Flow::Continue(())
}

fn constant_against_all(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for c in ctx.constants() {
        for b in (0..ctx.m.len()).filter(|&b| b != c) {
            visit(Inst::two(c, b))?;
        }
    }
    Flow::Continue(())
}

fn fixing_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    let fixing = ctx.fixing_elements();
    for (i, &a) in fixing.iter().enumerate() {
        for &b in &fixing[i + 1..] {
            visit(Inst::two(a, b))?;
        }
    }
    Flow::Continue(())
}

fn witness_pairs(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    for e in (0..ctx.m.len()).filter(|&e| ctx.coll(e).is_some()) {
        let f = ctx.el(e);
        for p in ctx.x.points() {
            for q in ctx.x.points() {
                if f.apply(p) == f.apply(q) && collapsing::satisfies_definition(ctx.x, f, p, q) {
                    visit(Inst::one(e).with(vec![p, q]))?;
                }
            }
        }
    }
    Flow::Continue(())
}

fn orbit_union(x: &GSet, mask: u64) -> Vec<usize> {
    let mut points: Vec<usize> = x
        .orbits()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < 64 && mask >> i & 1 == 1)
        .flat_map(|(_, o)| o.points.iter().copied())
        .collect();
    points.sort_unstable();
    points
}

fn injective_on(f: &EquivMap, domain: &[usize]) -> bool {
    let mut images: Vec<usize> = domain.iter().map(|&p| f.apply(p)).collect();
    images.sort_unstable();
    images.windows(2).all(|w| w[0] != w[1])
}

/// Restrictions of monoid elements to unions of orbits on which they are
/// injective; exhaustive when small, otherwise a fixed-seed sample.
fn extension_samples(ctx: &Ctx<'_>, visit: &mut Visit<'_>) -> Flow {
    let x = ctx.x;
    let k = x.orbits().len().min(63);
    let reps = |mask: u64| -> Vec<usize> {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| x.orbits()[i].representative)
            .collect()
    };
    let exhaustive = (ctx.m.len() as u128) << k <= ctx.samples as u128;
    if exhaustive {
        for e in 0..ctx.m.len() {
            for mask in 0..1u64 << k {
                if injective_on(ctx.el(e), &orbit_union(x, mask)) {
                    visit(Inst::one(e).with(reps(mask)))?;
                }
            }
        }
        return Flow::Continue(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x00e4_7e45);
    let mut found = 0;
    for _ in 0..ctx.samples * 20 {
        if found == ctx.samples {
            break;
        }
        let e = rng.gen_range(0..ctx.m.len());
        let mask = rng.gen::<u64>() & ((1u64 << k) - 1);
        if injective_on(ctx.el(e), &orbit_union(x, mask)) {
            found += 1;
            visit(Inst::one(e).with(reps(mask)))?;
        }
    }
    Flow::Continue(())
}

// Predicates.

fn maps_between_points(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q) = (inst.p(0), inst.p(1));
    let criterion = ctx.below(p, q);
    let brute = ctx.m.elements().iter().any(|f| f.apply(p) == q);
    ensure(brute == criterion, || {
        format!("G_{p} ≤ G_{q} is {criterion}, but a map sending {p} to {q} exists: {brute}")
    })?;
    match endo::exists_map_sending(ctx.x, p, q) {
        Some(f) => ensure(criterion && f.apply(p) == q && EquivMap::new(ctx.x, f.word().to_vec()).is_ok(), || {
            format!("constructed map {} is not an equivariant map sending {p} to {q}", ctx.show(&f))
        }),
        None => ensure(!criterion, || format!("no map constructed sending {p} to {q}")),
    }
}

fn bijections_between_points(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q) = (inst.p(0), inst.p(1));
    let criterion = ctx.stab(p) == ctx.stab(q);
    let brute = ctx.m.elements().iter().any(|f| f.is_bijective() && f.apply(p) == q);
    ensure(brute == criterion, || {
        format!("G_{p} = G_{q} is {criterion}, but a bijection sending {p} to {q} exists: {brute}")
    })?;
    match endo::exists_bijection_sending(ctx.x, p, q) {
        Some(f) => ensure(
            criterion && f.is_bijective() && f.apply(p) == q && EquivMap::new(ctx.x, f.word().to_vec()).is_ok(),
            || format!("constructed map {} is not a bijection sending {p} to {q}", ctx.show(&f)),
        ),
        None => ensure(!criterion, || format!("no bijection constructed sending {p} to {q}")),
    }
}

fn constant_maps(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let c = inst.p(0);
    let criterion = ctx.stab(c) == &ctx.x.group().whole();
    let brute = ctx.m.id_of(&vec![c; ctx.x.n_points()]).is_some();
    ensure(brute == criterion, || {
        format!("G_{c} = G is {criterion}, but the constant map to {c} is equivariant: {brute}")
    })?;
    ensure(
        endo::constant_map(ctx.x, c).is_some() == criterion && endo::is_valid_constant(ctx.x, c) == criterion,
        || format!("constant-map constructors disagree with the criterion at {c}"),
    )
}

fn constant_collapsings(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let e = inst.e(0);
    ensure(ctx.el(e).is_constant(), || format!("{} is not constant", ctx.word(e)))?;
    let two_orbits = ctx.x.orbits().len() == 2;
    ensure(ctx.coll(e).is_some() == two_orbits, || {
        format!(
            "constant {} collapsing: {}, with {} orbits",
            ctx.word(e),
            ctx.coll(e).is_some(),
            ctx.x.orbits().len()
        )
    })
}

fn l_stabilizers(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    if !ctx.rel(Rel::L, a, b) {
        return Ok(());
    }
    let (f, g) = (ctx.el(a), ctx.el(b));
    match ctx.x.points().find(|&p| ctx.stab(f.apply(p)) != ctx.stab(g.apply(p))) {
        Some(p) => Err(format!(
            "{} L {} but the stabilizers of their images of {p} differ",
            ctx.word(a),
            ctx.word(b)
        )),
        None => Ok(()),
    }
}

fn constants_l_related(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    ensure(ctx.rel(Rel::L, a, b), || {
        format!("constants {} and {} are not L-related", ctx.word(a), ctx.word(b))
    })
}

fn constant_r_alone(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (c, b) = (inst.e(0), inst.e(1));
    ensure(ctx.el(c).is_constant(), || format!("{} is not constant", ctx.word(c)))?;
    ensure(!ctx.rel(Rel::R, c, b), || {
        format!("constant {} shares its R-class with {}", ctx.word(c), ctx.word(b))
    })
}

fn extension_round_trip(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let x = ctx.x;
    let f = ctx.el(inst.e(0));
    let mut domain: Vec<usize> = inst
        .points
        .iter()
        .flat_map(|&p| x.orbit(p).points.iter().copied())
        .collect();
    domain.sort_unstable();
    domain.dedup();
    ensure(injective_on(f, &domain), || {
        format!("{} is not injective on {domain:?}", ctx.word(inst.e(0)))
    })?;
    let mut partial = vec![None; x.n_points()];
    for &p in &domain {
        partial[p] = Some(f.apply(p));
    }
    let ext = endo::extend_to_bijection(x, &partial).map_err(|e| format!("extension failed: {e}"))?;
    ensure(ext.is_bijective(), || format!("extension {} is not bijective", ctx.show(&ext)))?;
    ensure(EquivMap::new(x, ext.word().to_vec()).is_ok(), || {
        format!("extension {} is not equivariant", ctx.show(&ext))
    })?;
    ensure(domain.iter().all(|&p| ext.apply(p) == f.apply(p)), || {
        format!("extension {} disagrees with {} on {domain:?}", ctx.show(&ext), ctx.word(inst.e(0)))
    })
}

fn l_kernel_vs_ideals(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    let engine = ctx.rel(Rel::L, a, b);
    let ideals = ctx.ideal_l()[a] == ctx.ideal_l()[b];
    let kernels = ctx.kernel_l()[a] == ctx.kernel_l()[b];
    ensure(engine == ideals && kernels == ideals, || {
        format!(
            "{} and {}: engine L {engine}, equal left ideals {ideals}, equal kernels {kernels}",
            ctx.word(a),
            ctx.word(b)
        )
    })
}

fn r_images(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    ensure(!ctx.rel(Rel::R, a, b) || ctx.images[a] == ctx.images[b], || {
        format!("{} R {} but their images differ", ctx.word(a), ctx.word(b))
    })
}

fn same_image_not_r(ctx: &Ctx<'_>, _: &Inst) -> Result<(), String> {
    let mut by_image: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (e, image) in ctx.images.iter().enumerate() {
        by_image.entry(image.as_slice()).or_default().push(e);
    }
    let mut groups: Vec<&Vec<usize>> = by_image.values().collect();
    groups.sort();
    let found = groups.iter().any(|g| {
        g.iter()
            .enumerate()
            .any(|(i, &a)| g[i + 1..].iter().any(|&b| !ctx.rel(Rel::R, a, b)))
    });
    ensure(found, || "no pair with equal images lies in distinct R-classes".into())
}

fn kernel_closure_orbits(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (x, f) = (ctx.x, ctx.el(inst.e(0)));
    for p in x.points() {
        for q in x.points().filter(|&q| f.apply(q) == f.apply(p)) {
            if let Some(g) = x.group().elements().find(|&g| f.apply(x.act(g, p)) != f.apply(x.act(g, q))) {
                return Err(format!(
                    "{}: ({p}, {q}) in the kernel but not (g·{p}, g·{q}) for g = {}",
                    ctx.word(inst.e(0)),
                    x.group().name(g)
                ));
            }
        }
    }
    Ok(())
}

fn kernel_closure_stabilizer(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (x, f) = (ctx.x, ctx.el(inst.e(0)));
    let group = x.group();
    for p in x.points() {
        let stab = ctx.stab(f.apply(p));
        for g in group.elements() {
            for h in group.elements() {
                if stab.contains(group.mul(group.inv(h), g)) && f.apply(x.act(g, p)) != f.apply(x.act(h, p)) {
                    return Err(format!(
                        "{}: h⁻¹g ∈ G_f({p}) for g = {}, h = {} but (g·{p}, h·{p}) is not in the kernel",
                        ctx.word(inst.e(0)),
                        group.name(g),
                        group.name(h)
                    ));
                }
            }
        }
    }
    Ok(())
}

fn redirect_absorbs_retarget(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q, q2) = (inst.p(0), inst.p(1), inst.p(2));
    let lhs = ctx.fix_map(p, q2)?.compose(&ctx.fix_map(p, q)?);
    let rhs = ctx.fix_map(p, q)?;
    ensure(lhs == rhs, || {
        format!("[{p}↦{q2}][{p}↦{q}] = {} ≠ {} = [{p}↦{q}]", ctx.show(&lhs), ctx.show(&rhs))
    })
}

fn redirect_absorbs_return(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q) = (inst.p(0), inst.p(1));
    let lhs = ctx.fix_map(p, q)?.compose(&ctx.fix_map(q, p)?);
    let rhs = ctx.fix_map(p, q)?;
    ensure(lhs == rhs, || {
        format!("[{p}↦{q}][{q}↦{p}] = {} ≠ {} = [{p}↦{q}]", ctx.show(&lhs), ctx.show(&rhs))
    })
}

fn redirect_translation(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (x, p, q) = (ctx.x, inst.p(0), inst.p(1));
    let base = ctx.fix_map(p, q)?;
    for g in x.group().elements() {
        let (gp, gq) = (x.act(g, p), x.act(g, q));
        let moved = ctx.fix_map(gp, gq)?;
        ensure(moved == base, || {
            format!("[{gp}↦{gq}] = {} ≠ {} = [{p}↦{q}]", ctx.show(&moved), ctx.show(&base))
        })?;
    }
    Ok(())
}

fn collapsing_absorbs_redirect(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (e, p, q) = (inst.e(0), inst.p(0), inst.p(1));
    let eta = ctx.el(e);
    ensure(collapsing::satisfies_definition(ctx.x, eta, p, q), || {
        format!("({p}, {q}) is not a witness of {}", ctx.word(e))
    })?;
    let tau = ctx.fix_map(p, q)?;
    let product = eta.compose(&tau);
    ensure(&product == eta, || {
        format!("{}[{p}↦{q}] = {} ≠ {}", ctx.word(e), ctx.show(&product), ctx.word(e))
    })
}

fn swap_l_related(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q) = (inst.p(0), inst.p(1));
    let (a, b) = (ctx.fix(p, q)?, ctx.fix(q, p)?);
    ensure(ctx.rel(Rel::L, a, b), || {
        format!("[{p}↦{q}] = {} and [{q}↦{p}] = {} are not L-related", ctx.word(a), ctx.word(b))
    })
}

fn swap_not_r_related(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q) = (inst.p(0), inst.p(1));
    let (a, b) = (ctx.fix(p, q)?, ctx.fix(q, p)?);
    ensure(!ctx.rel(Rel::R, a, b), || {
        format!("[{p}↦{q}] = {} and [{q}↦{p}] = {} are R-related", ctx.word(a), ctx.word(b))
    })
}

fn retarget_r_related(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q, q2) = (inst.p(0), inst.p(1), inst.p(2));
    let (a, b) = (ctx.fix(p, q)?, ctx.fix(p, q2)?);
    ensure(ctx.rel(Rel::R, a, b), || {
        format!("[{p}↦{q}] = {} and [{p}↦{q2}] = {} are not R-related", ctx.word(a), ctx.word(b))
    })
}

fn r_iff_same_orbit(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (p, q, p2, q2) = (inst.p(0), inst.p(1), inst.p(2), inst.p(3));
    let (a, b) = (ctx.fix(p, q)?, ctx.fix(p2, q2)?);
    let related = ctx.rel(Rel::R, a, b);
    let same = ctx.x.same_orbit(p, p2);
    ensure(related == same, || {
        format!("[{p}↦{q}] R [{p2}↦{q2}] is {related} but {p2} ∈ G{p} is {same}")
    })
}

fn l_preserves_type(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    let Some(w) = ctx.coll(a) else { return Ok(()) };
    if !ctx.rel(Rel::L, a, b) {
        return Ok(());
    }
    match ctx.coll(b) {
        None => Err(format!(
            "{} is a collapsing L-related to the non-collapsing {}",
            ctx.word(a),
            ctx.word(b)
        )),
        Some(v) => ensure(v.kind == w.kind, || {
            format!("{} L {} but their collapsing types differ", ctx.word(a), ctx.word(b))
        }),
    }
}

fn same_type_not_l(ctx: &Ctx<'_>, _: &Inst) -> Result<(), String> {
    let colls: Vec<usize> = (0..ctx.m.len()).filter(|&e| ctx.coll(e).is_some()).collect();
    let found = colls.iter().enumerate().any(|(i, &a)| {
        colls[i + 1..]
            .iter()
            .any(|&b| ctx.coll(a).map(|w| &w.kind) == ctx.coll(b).map(|w| &w.kind) && !ctx.rel(Rel::L, a, b))
    });
    ensure(found, || "every two collapsings of equal type are L-related".into())
}

fn r_factorization(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let e = inst.e(0);
    let f = ctx.el(e);
    let fac = collapsing::r_factor_through_fixing(ctx.m, f).map_err(|err| format!("{}: {err}", ctx.word(e)))?;
    ensure(collapsing::is_fixing_collapsing(ctx.x, &fac.fixing).is_some(), || {
        format!("{} is not a fixing collapsing", ctx.show(&fac.fixing))
    })?;
    ensure(&fac.fixing.compose(&fac.m1) == f, || {
        format!("{} ≠ {}∘{}", ctx.word(e), ctx.show(&fac.fixing), ctx.show(&fac.m1))
    })?;
    ensure(f.compose(&fac.m2) == fac.fixing, || {
        format!("{} ≠ {}∘{}", ctx.show(&fac.fixing), ctx.word(e), ctx.show(&fac.m2))
    })?;
    let fixing = ctx
        .m
        .id_of(fac.fixing.word())
        .ok_or_else(|| format!("{} is not in the monoid", ctx.show(&fac.fixing)))?;
    ensure(ctx.rel(Rel::R, e, fixing), || {
        format!("{} and {} are not R-related", ctx.word(e), ctx.word(fixing))
    })
}

fn r_related_to_fixing(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let e = inst.e(0);
    let partner = ctx.fixing_elements().iter().copied().find(|&phi| ctx.rel(Rel::R, e, phi));
    ensure(partner.is_some() == ctx.coll(e).is_some(), || match partner {
        Some(phi) => format!(
            "{} is R-related to the fixing collapsing {} but is not a collapsing",
            ctx.word(e),
            ctx.word(phi)
        ),
        None => format!("collapsing {} is R-related to no fixing collapsing", ctx.word(e)),
    })
}

fn r_corollaries(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    let Some(w) = ctx.coll(a) else { return Ok(()) };
    if !ctx.rel(Rel::R, a, b) {
        return Ok(());
    }
    let v = ctx.coll(b).ok_or_else(|| {
        format!("{} is a collapsing R-related to the non-collapsing {}", ctx.word(a), ctx.word(b))
    })?;
    ensure(ctx.x.group().are_conjugate(&w.kind.h, &v.kind.h), || {
        format!("{} R {} with non-conjugate H", ctx.word(a), ctx.word(b))
    })?;
    let (ma, mb) = (
        collapsing::missing_orbit(ctx.x, ctx.el(a)),
        collapsing::missing_orbit(ctx.x, ctx.el(b)),
    );
    ensure(ma == mb, || {
        format!("{} R {} but they miss orbits {ma:?} and {mb:?}", ctx.word(a), ctx.word(b))
    })
}

fn fixing_not_h_related(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    ensure(!ctx.rel(Rel::H, a, b), || {
        format!("fixing collapsings {} and {} are H-related", ctx.word(a), ctx.word(b))
    })
}

fn d_closure(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    if ctx.coll(a).is_none() || !ctx.rel(Rel::D, a, b) {
        return Ok(());
    }
    ensure(ctx.coll(b).is_some(), || {
        format!("{} is D-related to the collapsing {} but is not one", ctx.word(b), ctx.word(a))
    })
}

fn detectors_agree(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (x, e) = (ctx.x, inst.e(0));
    let f = ctx.el(e);
    let by_char = collapsing::detect_by_characterization(x, f);
    let by_def = collapsing::detect_by_definition(x, f);
    ensure(by_char.is_some() == by_def.is_some(), || {
        format!(
            "{}: characterization says {}, definition says {}",
            ctx.word(e),
            by_char.is_some(),
            by_def.is_some()
        )
    })?;
    let Some(w) = by_char else { return Ok(()) };
    ensure(collapsing::satisfies_definition(x, f, w.x, w.y), || {
        format!("{}: witness ({}, {}) fails the definition", ctx.word(e), w.x, w.y)
    })?;
    ensure(
        ctx.stab(w.z) == ctx.stab(w.x) && collapsing::missing_orbit(x, f) == Some(x.orbit_index(w.z)),
        || format!("{}: z = {} is not a matching missing point", ctx.word(e), w.z),
    )
}

fn d_equals_j(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let (a, b) = (inst.e(0), inst.e(1));
    let (d, j) = (ctx.rel(Rel::D, a, b), ctx.rel(Rel::J, a, b));
    ensure(d == j, || format!("{} and {}: D {d}, J {j}", ctx.word(a), ctx.word(b)))
}

fn l_r_commute(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    for (a, b) in [(inst.e(0), inst.e(1)), (inst.e(1), inst.e(0))] {
        let lr = ctx.then(Rel::L, Rel::R, a, b);
        let rl = ctx.then(Rel::R, Rel::L, a, b);
        let d = ctx.rel(Rel::D, a, b);
        ensure(lr == rl && rl == d, || {
            format!("{} and {}: L∘R {lr}, R∘L {rl}, D {d}", ctx.word(a), ctx.word(b))
        })?;
    }
    Ok(())
}

const BRUTE_FORCE_LIMIT: u64 = 200_000;

fn count_matches_enumeration(ctx: &Ctx<'_>, _: &Inst) -> Result<(), String> {
    let x = ctx.x;
    let count = endo::count_endos(x);
    let listed = endo::enumerate_endos(x, u128::MAX).map_err(|e| e.to_string())?;
    ensure(count == listed.len() as u128 && listed.len() == ctx.m.len(), || {
        format!(
            "count {count}, enumeration {}, monoid table {}",
            listed.len(),
            ctx.m.len()
        )
    })?;
    let n = x.n_points();
    let Some(total) = (n as u64).checked_pow(n as u32).filter(|&t| t <= BRUTE_FORCE_LIMIT) else {
        return Ok(());
    };
    let mut word = vec![0usize; n];
    let mut equivariant = 0u64;
    for _ in 0..total {
        let commutes = x
            .group()
            .elements()
            .all(|g| x.points().all(|p| word[x.act(g, p)] == x.act(g, word[p])));
        if commutes {
            equivariant += 1;
            ensure(ctx.m.id_of(&word).is_some(), || {
                format!("equivariant function {word:?} is missing from the enumeration")
            })?;
        }
        for slot in word.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    ensure(equivariant == count as u64, || {
        format!("brute force finds {equivariant} equivariant functions, count says {count}")
    })
}

fn element_valid(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let e = inst.e(0);
    let word = ctx.el(e).word().to_vec();
    EquivMap::new(ctx.x, word.clone()).map_err(|err| format!("{}: {err}", ctx.word(e)))?;
    ensure(ctx.m.id_of(&word) == Some(e), || format!("{} has a wrong id", ctx.word(e)))
}

const CLOSURE_PARTNERS: usize = 1000;

fn closure(ctx: &Ctx<'_>, inst: &Inst) -> Result<(), String> {
    let a = inst.e(0);
    let len = ctx.m.len();
    let step = len.div_ceil(CLOSURE_PARTNERS).max(1);
    for b in (0..len).step_by(step) {
        let composite = ctx.el(a).compose(ctx.el(b));
        ensure(ctx.m.id_of(composite.word()) == Some(ctx.m.product(a, b)), || {
            format!(
                "{}∘{} = {} disagrees with the product table",
                ctx.word(a),
                ctx.word(b),
                ctx.show(&composite)
            )
        })?;
    }
    Ok(())
}

static P1: [Part; 2] = [
    part("maps", point_pairs, maps_between_points),
    part("bijections", point_pairs, bijections_between_points),
];
static P2: [Part; 2] = [
    part("constant-maps", each_point, constant_maps),
    part("constant-collapsings", each_constant, constant_collapsings),
];
static P3: [Part; 1] = [part("image-stabilizers", l_class_pairs, l_stabilizers)];
static P4: [Part; 1] = [part("constants-l-related", constant_pairs, constants_l_related)];
static P5: [Part; 1] = [part("constant-r-singleton", constant_against_all, constant_r_alone)];
static P6: [Part; 1] = [part("extension", extension_samples, extension_round_trip)];
static P7: [Part; 1] = [part("kernel-vs-ideals", element_pairs, l_kernel_vs_ideals)];
static P8: [Part; 2] = [
    part("r-images", r_class_pairs, r_images),
    existential("same-image-not-r", same_image_not_r),
];
static P9: [Part; 2] = [
    part("orbit-closure", each_element, kernel_closure_orbits),
    part("stabilizer-closure", each_element, kernel_closure_stabilizer),
];
static P10: [Part; 1] = [part("retarget", redirect_triples, redirect_absorbs_retarget)];
static P11: [Part; 1] = [part("return", swap_pairs_apart, redirect_absorbs_return)];
static P12: [Part; 1] = [part("translation", redirect_pairs, redirect_translation)];
static P13: [Part; 1] = [part("witness-redirect", witness_pairs, collapsing_absorbs_redirect)];
static P14: [Part; 1] = [part("swap-l", swap_pairs, swap_l_related)];
static P15: [Part; 1] = [part("swap-not-r", swap_pairs_apart, swap_not_r_related)];
static P16: [Part; 1] = [part("retarget-r", redirect_triples, retarget_r_related)];
static P17: [Part; 1] = [part("r-iff-orbit", redirect_quadruples, r_iff_same_orbit)];
static P18: [Part; 2] = [
    part("l-preserves-type", l_class_pairs, l_preserves_type),
    existential("same-type-not-l", same_type_not_l),
];
static P19: [Part; 3] = [
    part("factorization", each_collapsing, r_factorization),
    part("fixing-r-partner", each_element, r_related_to_fixing),
    part("r-corollaries", r_class_pairs, r_corollaries),
];
static P20: [Part; 1] = [part("fixing-h-singletons", fixing_pairs, fixing_not_h_related)];
static P21: [Part; 2] = [
    part("d-closure", d_class_pairs, d_closure),
    part("detector-agreement", each_element, detectors_agree),
];
static P22: [Part; 2] = [
    part("d-equals-j", element_pairs, d_equals_j),
    part("l-r-commute", element_pairs, l_r_commute),
];
static P23: [Part; 3] = [
    part("count", single_instance, count_matches_enumeration),
    part("validity", each_element, element_valid),
    part("closure", each_element, closure),
];

fn parts(check: CheckId) -> &'static [Part] {
    match check {
        CheckId::P1 => &P1,
        CheckId::P2 => &P2,
        CheckId::P3 => &P3,
        CheckId::P4 => &P4,
        CheckId::P5 => &P5,
        CheckId::P6 => &P6,
        CheckId::P7 => &P7,
        CheckId::P8 => &P8,
        CheckId::P9 => &P9,
        CheckId::P10 => &P10,
        CheckId::P11 => &P11,
        CheckId::P12 => &P12,
        CheckId::P13 => &P13,
        CheckId::P14 => &P14,
        CheckId::P15 => &P15,
        CheckId::P16 => &P16,
        CheckId::P17 => &P17,
        CheckId::P18 => &P18,
        CheckId::P19 => &P19,
        CheckId::P20 => &P20,
        CheckId::P21 => &P21,
        CheckId::P22 => &P22,
        CheckId::P23 => &P23,
    }
}

fn run_check(ctx: &Ctx<'_>, check: CheckId) -> CheckReport {
    let start = Instant::now();
    let mut cases = 0;
    let mut failure = None;
    for part in parts(check) {
        if part.existential && !ctx.existentials {
            continue;
        }
        let _ = (part.instances)(ctx, &mut |inst| {
            cases += 1;
            ctx.log.borrow_mut().clear();
            match (part.holds)(ctx, &inst) {
                Ok(()) => Flow::Continue(()),
                Err(message) => {
                    failure = Some((part.name, inst, message));
                    Flow::Break(())
                }
            }
        });
        if failure.is_some() {
            break;
        }
    }
    let counterexample = failure.map(|(part, inst, message)| Counterexample {
        check_id: check,
        part: part.to_string(),
        gset: GSetInput::from_gset(ctx.x),
        elements: inst.elem_list().iter().map(|&e| ctx.word(e)).collect(),
        points: inst.points,
        engine_answers: ctx
            .log
            .borrow()
            .iter()
            .map(|&(q, a, b, holds)| RelationAnswer {
                relation: q.to_string(),
                a: ctx.word(a),
                b: ctx.word(b),
                holds,
            })
            .collect(),
        message,
    });
    let status = match (&counterexample, cases) {
        (Some(_), _) => Status::Fail,
        (None, 0) => Status::Skipped,
        (None, _) => Status::Pass,
    };
    CheckReport {
        check_id: check,
        gset: 0,
        status,
        cases,
        counterexample,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn monoid_for(x: &GSet, cap: u128) -> Result<MonoidTable, VerifyError> {
    let count = endo::count_endos(x);
    if count > cap {
        return Err(VerifyError::MonoidTooLarge { count, cap });
    }
    Ok(MonoidTable::new(x, cap)?)
}

/// One report per requested check, in the order given.
pub fn run_checks(x: &GSet, which: &[CheckId], opts: &RunOptions) -> Result<Vec<CheckReport>, VerifyError> {
    let m = monoid_for(x, opts.cap)?;
    let ctx = Ctx::engine(x, &m, opts);
    Ok(which.iter().map(|&c| run_check(&ctx, c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupKeyword {
    Whole,
    Trivial,
}

/// A subgroup choice for the corpus generator: a keyword or a list of
/// generator names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubgroupPick {
    Keyword(SubgroupKeyword),
    Generators(Vec<String>),
}

impl SubgroupPick {
    /// `None` when some generator name is not an element of `group`.
    fn resolve(&self, group: &Group) -> Option<Subgroup> {
        match self {
            SubgroupPick::Keyword(SubgroupKeyword::Whole) => Some(group.whole()),
            SubgroupPick::Keyword(SubgroupKeyword::Trivial) => Some(Subgroup::trivial()),
            SubgroupPick::Generators(names) => {
                let gens = names.iter().map(|n| group.index_of(n)).collect::<Option<Vec<_>>>()?;
                group.generated(&gens).ok()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub groups: Vec<GroupInput>,
    pub max_points: usize,
    pub max_monoid: u64,
    pub count: usize,
    /// Restricts coset-space stabilizers to these subgroups where they apply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroups: Option<Vec<SubgroupPick>>,
}

const MAX_DRAWS: usize = 10_000;

impl CorpusSpec {
    pub fn parse(text: &str) -> Result<CorpusSpec, VerifyError> {
        let spec: CorpusSpec = serde_json::from_str(text).map_err(InputError::from)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |what: &str| Err(VerifyError::InvalidCorpus(format!("{what} must be positive")));
        if self.groups.is_empty() {
            return bad("the number of groups");
        }
        if self.max_points == 0 {
            return bad("max_points");
        }
        if self.max_monoid == 0 {
            return bad("max_monoid");
        }
        if self.count == 0 {
            return bad("count");
        }
        Ok(())
    }

    fn build_groups(&self) -> Result<Vec<Group>, VerifyError> {
        Ok(self.groups.iter().map(GroupInput::build).collect::<Result<_, _>>()?)
    }
}

fn draw_subgroup(group: &Group, pool: &[Subgroup], rng: &mut ChaCha8Rng) -> Subgroup {
    if !pool.is_empty() {
        return pool[rng.gen_range(0..pool.len())].clone();
    }
    let gens: Vec<usize> = (0..rng.gen_range(0..=2))
        .map(|_| rng.gen_range(0..group.order()))
        .collect();
    group.generated(&gens).expect("elements are in range")
}

fn draw_gset(spec: &CorpusSpec, groups: &[Group], i: usize) -> Result<GSet, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64);
    for _ in 0..MAX_DRAWS {
        let group = &groups[rng.gen_range(0..groups.len())];
        let pool: Vec<Subgroup> = spec
            .subgroups
            .iter()
            .flatten()
            .filter_map(|pick| pick.resolve(group))
            .collect();
        let subgroups: Vec<Subgroup> = (0..rng.gen_range(1..=4))
            .map(|_| draw_subgroup(group, &pool, &mut rng))
            .collect();
        let points: usize = subgroups.iter().map(|h| group.order() / h.len()).sum();
        if points > spec.max_points {
            continue;
        }
        let x = GSet::from_cosets(group.clone(), &subgroups).expect("generated subgroups are subgroups");
        if endo::count_endos(&x) > spec.max_monoid as u128 {
            continue;
        }
        return Ok(x);
    }
    Err(VerifyError::InvalidCorpus(format!(
        "no G-set within the bounds after {MAX_DRAWS} draws"
    )))
}

/// The `i`-th G-set of the corpus: a disjoint union of one to four coset
/// spaces, redrawn until it fits the point and monoid bounds. Deterministic
/// in `(seed, i)`.
pub fn random_gset(spec: &CorpusSpec, i: usize) -> Result<GSet, VerifyError> {
    spec.validate()?;
    if i >= spec.count {
        return Err(VerifyError::InvalidCorpus(format!(
            "index {i} outside a corpus of {}",
            spec.count
        )));
    }
    draw_gset(spec, &spec.build_groups()?, i)
}

/// Reports ordered by `(gset index, check id)`.
pub fn run_corpus(spec: &CorpusSpec, which: &[CheckId], opts: &RunOptions) -> Result<Vec<CheckReport>, VerifyError> {
    spec.validate()?;
    let groups = spec.build_groups()?;
    let per_gset = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let x = draw_gset(spec, &groups, i)?;
            let mut reports = run_checks(&x, which, opts)?;
            for r in &mut reports {
                r.gset = i;
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    Ok(per_gset.into_iter().flatten().collect())
}

/// Re-verifies a counterexample from its serialized G-set, independently of
/// the engine's Green structure.
pub fn replay(cex: &Counterexample) -> Result<Verdict, VerifyError> {
    let x = cex.gset.build()?;
    let m = monoid_for(&x, DEFAULT_CAP)?;
    let id = |w: &str| -> Result<usize, VerifyError> {
        let word = io::parse_word(&x, w)?;
        m.id_of(&word)
            .ok_or_else(|| VerifyError::Replay(format!("{w} is not an equivariant map")))
    };
    if cex.elements.len() > 2 {
        return Err(VerifyError::Replay("at most two elements per instance".into()));
    }
    if let Some(&p) = cex.points.iter().find(|&&p| p >= x.n_points()) {
        return Err(VerifyError::Replay(format!("point {p} out of range")));
    }
    let part = parts(cex.check_id)
        .iter()
        .find(|p| p.name == cex.part)
        .ok_or_else(|| VerifyError::Replay(format!("{} has no part {:?}", cex.check_id, cex.part)))?;

    let oracle = Ctx::replay(&x, &m, HashMap::new());
    let mut record = HashMap::new();
    for answer in &cex.engine_answers {
        let q: Query = answer.relation.parse()?;
        let (a, b) = (id(&answer.a)?, id(&answer.b)?);
        let actual = oracle.oracle(q, a, b);
        if actual != answer.holds {
            return Ok(Verdict::EngineFault {
                relation: answer.relation.clone(),
                a: answer.a.clone(),
                b: answer.b.clone(),
                recorded: answer.holds,
                actual,
            });
        }
        record.insert((q, a, b), answer.holds);
    }

    let mut inst = Inst::at(cex.points.clone());
    for (i, w) in cex.elements.iter().enumerate() {
        inst.elems[i] = id(w)?;
    }
    inst.n_elems = cex.elements.len();
    let ctx = Ctx::replay(&x, &m, record);
    Ok(match (part.holds)(&ctx, &inst) {
        Ok(()) => Verdict::NotReproduced,
        Err(_) => Verdict::Reproduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::group::GroupSpec;

    fn spec(groups: &[GroupSpec], count: usize) -> CorpusSpec {
        CorpusSpec {
            seed: 7,
            groups: groups.iter().map(GroupInput::named).collect(),
            max_points: 10,
            max_monoid: 2000,
            count,
            subgroups: None,
        }
    }

    #[test]
    fn check_ids_parse() {
        assert_eq!(CheckId::parse_list("all").unwrap().len(), 23);
        assert_eq!(
            CheckId::parse_list("P7, p1,P7").unwrap(),
            vec![CheckId::P1, CheckId::P7]
        );
        assert!(matches!(CheckId::parse_list("P1,P99"), Err(VerifyError::UnknownCheck(_))));
        assert_eq!(CheckId::P13.to_string(), "P13");
    }

    #[test]
    fn example_one_passes_everything() {
        let reports = run_checks(&example1(), &CheckId::ALL, &RunOptions::default()).unwrap();
        for r in &reports {
            assert_eq!(r.status, Status::Pass, "{} {:?}", r.check_id, r.counterexample);
        }
    }

    #[test]
    fn existentials_are_pinned_to_the_fixture() {
        let g = Group::named(&GroupSpec::Cyclic(3)).unwrap();
        let x = GSet::from_cosets(g, &[Subgroup::trivial()]).unwrap();
        let which = [CheckId::P8, CheckId::P18];
        let auto = run_checks(&x, &which, &RunOptions::default()).unwrap();
        assert!(auto.iter().all(|r| r.status != Status::Fail));
        let forced = RunOptions {
            existentials: Some(true),
            ..RunOptions::default()
        };
        let reports = run_checks(&x, &which, &forced).unwrap();
        assert!(reports.iter().all(|r| r.status == Status::Fail));
        let cex = reports[0].counterexample.as_ref().unwrap();
        assert_eq!(cex.part, "same-image-not-r");
        assert_eq!(replay(cex).unwrap(), Verdict::Reproduced);
    }

    #[test]
    fn mutated_l_is_caught_by_p7() {
        let opts = RunOptions {
            mutation: Some(Mutation::LByImage),
            ..RunOptions::default()
        };
        let reports = run_checks(&example1(), &[CheckId::P7], &opts).unwrap();
        assert_eq!(reports[0].status, Status::Fail);
        let cex = reports[0].counterexample.as_ref().unwrap();
        assert_eq!(cex.elements.len(), 2);
        let verdict = replay(cex).unwrap();
        assert!(matches!(
            verdict,
            Verdict::EngineFault { ref relation, recorded, actual, .. } if relation == "L" && recorded != actual
        ));

        let json = serde_json::to_string(cex).unwrap();
        let back: Counterexample = serde_json::from_str(&json).unwrap();
        assert_eq!(replay(&back).unwrap(), verdict);
    }

    #[test]
    fn forged_counterexamples_do_not_reproduce() {
        let x = example1();
        let cex = Counterexample {
            check_id: CheckId::P10,
            part: "retarget".into(),
            gset: GSetInput::from_gset(&x),
            elements: vec![],
            points: vec![1, 0, 3],
            engine_answers: vec![],
            message: "forged".into(),
        };
        assert_eq!(replay(&cex).unwrap(), Verdict::NotReproduced);
        let wrong_part = Counterexample {
            part: "nope".into(),
            ..cex
        };
        assert!(matches!(replay(&wrong_part), Err(VerifyError::Replay(_))));
    }

    #[test]
    fn monoid_cap_is_enforced() {
        let opts = RunOptions {
            cap: 10,
            ..RunOptions::default()
        };
        assert!(matches!(
            run_checks(&example1(), &[CheckId::P1], &opts),
            Err(VerifyError::MonoidTooLarge { count: 16, cap: 10 })
        ));
    }

    #[test]
    fn random_gsets_are_deterministic_and_bounded() {
        let s = spec(&[GroupSpec::Cyclic(2), GroupSpec::Symmetric(3)], 6);
        for i in 0..6 {
            let a = random_gset(&s, i).unwrap();
            assert_eq!(a, random_gset(&s, i).unwrap());
            assert!(a.n_points() <= s.max_points);
            assert!(endo::count_endos(&a) <= s.max_monoid as u128);
        }
        assert!(random_gset(&s, 6).is_err());
    }

    #[test]
    fn whole_group_pool_gives_fixed_points() {
        let mut s = spec(&[GroupSpec::Symmetric(3)], 3);
        s.subgroups = Some(vec![SubgroupPick::Keyword(SubgroupKeyword::Whole)]);
        for i in 0..3 {
            let x = random_gset(&s, i).unwrap();
            assert!(x.orbits().iter().all(|o| o.points.len() == 1));
        }
    }

    #[test]
    fn corpus_spec_json() {
        let text = r#"{"seed": 1, "groups": [{"kind":"named","family":"cyclic","n":2}],
            "max_points": 6, "max_monoid": 100, "count": 2, "subgroups": ["trivial", ["a"]]}"#;
        let s = CorpusSpec::parse(text).unwrap();
        assert_eq!(
            s.subgroups.as_deref(),
            Some(&[
                SubgroupPick::Keyword(SubgroupKeyword::Trivial),
                SubgroupPick::Generators(vec!["a".into()])
            ][..])
        );
        assert!(CorpusSpec::parse(&text.replace("\"count\": 2", "\"count\": 0")).is_err());
    }

    #[test]
    fn small_corpus_passes() {
        let s = spec(&[GroupSpec::Cyclic(2), GroupSpec::Symmetric(3)], 5);
        let reports = run_corpus(&s, &CheckId::ALL, &RunOptions::default()).unwrap();
        assert_eq!(reports.len(), 5 * 23);
        for r in &reports {
            assert_ne!(r.status, Status::Fail, "gset {} {}: {:?}", r.gset, r.check_id, r.counterexample);
        }
        let order: Vec<(usize, CheckId)> = reports.iter().map(|r| (r.gset, r.check_id)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }
}
