//! Green's relations on a fully enumerated `End_G(X)`.
//!
//! L is read off kernels; R, J and the oracle L come from principal ideals
//! stored as bitsets over element ids. Element ids follow word order, and
//! every class list is ordered by least member.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::endo::{self, EndoError, EquivMap};
use crate::gset::GSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GreenError {
    #[error("unsupported output format {0:?} (expected json, ascii or dot)")]
    UnsupportedFormat(String),
}

/// The enumerated monoid together with an O(#orbits) product.
///
/// An element is determined by the targets of the orbit representatives, so
/// its id is a mixed-radix number over the positions of those targets in
/// their admissible-target lists.
#[derive(Debug, Clone)]
pub struct MonoidTable {
    gset: GSet,
    elements: Vec<EquivMap>,
    reps: Vec<usize>,
    target_pos: Vec<Vec<u32>>,
    strides: Vec<usize>,
    identity: usize,
}

const NOT_A_TARGET: u32 = u32::MAX;

impl MonoidTable {
    pub fn new(x: &GSet, cap: u128) -> Result<MonoidTable, EndoError> {
        let elements = endo::enumerate_endos(x, cap)?;
        let reps: Vec<usize> = x.orbits().iter().map(|o| o.representative).collect();
        let mut target_pos = Vec::with_capacity(reps.len());
        let mut radices = Vec::with_capacity(reps.len());
        for &r in &reps {
            let mut pos = vec![NOT_A_TARGET; x.n_points()];
            let targets = endo::valid_targets(x, r);
            for (i, &t) in targets.iter().enumerate() {
                pos[t] = i as u32;
            }
            target_pos.push(pos);
            radices.push(targets.len());
        }
        let mut strides = vec![1; reps.len()];
        for k in (0..reps.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * radices[k + 1];
        }
        let mut table = MonoidTable {
            gset: x.clone(),
            elements,
            reps,
            target_pos,
            strides,
            identity: 0,
        };
        table.identity = table
            .id_of(EquivMap::identity(x).word())
            .expect("identity is equivariant");
        Ok(table)
    }

    pub fn gset(&self) -> &GSet {
        &self.gset
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[EquivMap] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &EquivMap {
        &self.elements[id]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn id_of(&self, word: &[usize]) -> Option<usize> {
        if word.len() != self.gset.n_points() {
            return None;
        }
        let mut id = 0;
        for (k, &r) in self.reps.iter().enumerate() {
            let p = *self.target_pos[k].get(word[r])?;
            if p == NOT_A_TARGET {
                return None;
            }
            id += p as usize * self.strides[k];
        }
        (self.elements[id].word() == word).then_some(id)
    }

    /// Id of `f ∘ g`.
    #[inline]
    pub fn product(&self, f: usize, g: usize) -> usize {
        let (fw, gw) = (self.elements[f].word(), self.elements[g].word());
        self.reps
            .iter()
            .enumerate()
            .map(|(k, &r)| self.target_pos[k][fw[gw[r]]] as usize * self.strides[k])
            .sum()
    }

    pub fn word_string(&self, id: usize) -> String {
        self.elements[id].display(&self.gset).to_string()
    }
}

/// `Sf = { s ∘ f }`.
pub fn principal_left_ideal(m: &MonoidTable, f: usize) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(m.len());
    for s in 0..m.len() {
        set.insert(m.product(s, f));
    }
    set
}

/// `fS = { f ∘ s }`.
pub fn principal_right_ideal(m: &MonoidTable, f: usize) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(m.len());
    for s in 0..m.len() {
        set.insert(m.product(f, s));
    }
    set
}

/// `SfS`, by closing `{f}` under left and right multiplication.
pub fn two_sided_ideal(m: &MonoidTable, f: usize) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(m.len());
    set.insert(f);
    let mut stack = vec![f];
    while let Some(a) = stack.pop() {
        for s in 0..m.len() {
            for b in [m.product(s, a), m.product(a, s)] {
                if !set.put(b) {
                    stack.push(b);
                }
            }
        }
    }
    set
}

/// L by the kernel criterion.
pub fn l_related(m: &MonoidTable, f: usize, g: usize) -> bool {
    m.element(f).kernel() == m.element(g).kernel()
}

/// L by comparing principal left ideals.
pub fn l_related_by_ideals(m: &MonoidTable, f: usize, g: usize) -> bool {
    principal_left_ideal(m, f) == principal_left_ideal(m, g)
}

pub fn r_related(m: &MonoidTable, f: usize, g: usize) -> bool {
    principal_right_ideal(m, f) == principal_right_ideal(m, g)
}

pub fn h_related(m: &MonoidTable, f: usize, g: usize) -> bool {
    l_related(m, f, g) && r_related(m, f, g)
}

/// Some `c` with `f L c` and `c R g`.
pub fn d_related(m: &MonoidTable, f: usize, g: usize) -> bool {
    let fk = m.element(f).kernel();
    let gr = principal_right_ideal(m, g);
    (0..m.len()).any(|c| m.element(c).kernel() == fk && principal_right_ideal(m, c) == gr)
}

pub fn j_related(m: &MonoidTable, f: usize, g: usize) -> bool {
    two_sided_ideal(m, f) == two_sided_ideal(m, g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EggboxBlock {
    pub d_class: usize,
    /// R-class ids, one per row.
    pub rows: Vec<usize>,
    /// L-class ids, one per column.
    pub cols: Vec<usize>,
    /// H-class id at (row, column).
    pub cells: Vec<Vec<Option<usize>>>,
}

/// All five Green partitions of a monoid plus per-D-class eggbox grids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenStructure {
    pub l_classes: Vec<Vec<usize>>,
    pub r_classes: Vec<Vec<usize>>,
    pub h_classes: Vec<Vec<usize>>,
    pub d_classes: Vec<Vec<usize>>,
    pub j_classes: Vec<Vec<usize>>,
    pub l_of: Vec<usize>,
    pub r_of: Vec<usize>,
    pub h_of: Vec<usize>,
    pub d_of: Vec<usize>,
    pub j_of: Vec<usize>,
    pub eggbox: Vec<EggboxBlock>,
}

/// Numbers the distinct keys in order of first appearance.
pub(crate) fn label_by<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Vec<usize> {
    let mut seen: HashMap<K, usize> = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = seen.len();
            *seen.entry(k).or_insert(next)
        })
        .collect()
}

fn classes_of(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut classes = vec![Vec::new(); count];
    for (e, &l) in labels.iter().enumerate() {
        classes[l].push(e);
    }
    classes
}

/// Kernel-based L labels.
pub fn l_labels(m: &MonoidTable) -> Vec<usize> {
    label_by(m.elements().iter().map(|f| f.kernel()))
}

/// L labels from principal left ideals (oracle route).
pub fn l_labels_by_ideals(m: &MonoidTable) -> Vec<usize> {
    let ideals: Vec<FixedBitSet> = (0..m.len())
        .into_par_iter()
        .map(|f| principal_left_ideal(m, f))
        .collect();
    label_by(ideals)
}

pub fn r_labels(m: &MonoidTable) -> Vec<usize> {
    let ideals: Vec<FixedBitSet> = (0..m.len())
        .into_par_iter()
        .map(|f| principal_right_ideal(m, f))
        .collect();
    label_by(ideals)
}

/// J labels: strongly connected components of the graph with edges
/// `a -> s∘a` and `a -> a∘s`, since the set reachable from `a` is `SaS`.
pub fn j_labels(m: &MonoidTable) -> Vec<usize> {
    let n = m.len();
    let neighbor = |a: usize, i: usize| if i < n { m.product(i, a) } else { m.product(a, i - n) };
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut n_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        let mut calls: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(top) = calls.last_mut() {
            let v = top.0;
            if top.1 < 2 * n {
                let w = neighbor(v, top.1);
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(u, _)) = calls.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    // Renumber by least member.
    label_by(comp)
}

/// Joins L and R classes: D = L ∘ R.
fn d_labels(l_of: &[usize], r_of: &[usize]) -> Vec<usize> {
    let n_l = l_of.iter().max().map_or(0, |m| m + 1);
    let n_r = r_of.iter().max().map_or(0, |m| m + 1);
    let mut parent: Vec<usize> = (0..n_l + n_r).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (&l, &r) in l_of.iter().zip(r_of) {
        let (a, b) = (find(&mut parent, l), find(&mut parent, n_l + r));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    label_by(l_of.iter().map(|&l| find(&mut parent, l)).collect::<Vec<_>>())
}

impl GreenStructure {
    pub fn compute(m: &MonoidTable) -> GreenStructure {
        let l_of = l_labels(m);
        let r_of = r_labels(m);
        Self::from_labels(m, l_of, r_of)
    }

    /// Builds the structure from given L and R labelings; H, D and the
    /// eggbox follow from them, J is computed independently.
    pub fn from_labels(m: &MonoidTable, l_of: Vec<usize>, r_of: Vec<usize>) -> GreenStructure {
        let h_of = label_by(l_of.iter().zip(&r_of).map(|(&l, &r)| (l, r)));
        let d_of = d_labels(&l_of, &r_of);
        let j_of = j_labels(m);
        let l_classes = classes_of(&l_of);
        let r_classes = classes_of(&r_of);
        let h_classes = classes_of(&h_of);
        let d_classes = classes_of(&d_of);
        let j_classes = classes_of(&j_of);

        let eggbox = d_classes
            .iter()
            .enumerate()
            .map(|(d, members)| {
                let mut rows: Vec<usize> = members.iter().map(|&e| r_of[e]).collect();
                rows.sort_unstable();
                rows.dedup();
                let mut cols: Vec<usize> = members.iter().map(|&e| l_of[e]).collect();
                cols.sort_unstable();
                cols.dedup();
                let mut cells = vec![vec![None; cols.len()]; rows.len()];
                for &e in members {
                    let row = rows.binary_search(&r_of[e]).unwrap();
                    let col = cols.binary_search(&l_of[e]).unwrap();
                    let cell: &mut Option<usize> = &mut cells[row][col];
                    assert!(
                        cell.is_none() || *cell == Some(h_of[e]),
                        "an eggbox cell holds a single H-class"
                    );
                    *cell = Some(h_of[e]);
                }
                EggboxBlock {
                    d_class: d,
                    rows,
                    cols,
                    cells,
                }
            })
            .collect();

        GreenStructure {
            l_classes,
            r_classes,
            h_classes,
            d_classes,
            j_classes,
            l_of,
            r_of,
            h_of,
            d_of,
            j_of,
            eggbox,
        }
    }
}

pub fn green_structure(m: &MonoidTable) -> GreenStructure {
    GreenStructure::compute(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Ascii,
    Dot,
}

impl FromStr for Format {
    type Err = GreenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "ascii" => Ok(Format::Ascii),
            "dot" => Ok(Format::Dot),
            other => Err(GreenError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Serialize)]
struct GreenReport<'a> {
    elements: Vec<String>,
    #[serde(rename = "L")]
    l: &'a [Vec<usize>],
    #[serde(rename = "R")]
    r: &'a [Vec<usize>],
    #[serde(rename = "H")]
    h: &'a [Vec<usize>],
    #[serde(rename = "D")]
    d: &'a [Vec<usize>],
    #[serde(rename = "J")]
    j: &'a [Vec<usize>],
    eggbox: &'a [EggboxBlock],
}

pub fn emit_eggbox(m: &MonoidTable, gs: &GreenStructure, format: Format) -> String {
    match format {
        Format::Json => {
            let report = GreenReport {
                elements: (0..m.len()).map(|e| m.word_string(e)).collect(),
                l: &gs.l_classes,
                r: &gs.r_classes,
                h: &gs.h_classes,
                d: &gs.d_classes,
                j: &gs.j_classes,
                eggbox: &gs.eggbox,
            };
            serde_json::to_string_pretty(&report).expect("serializable report") + "\n"
        }
        Format::Ascii => emit_ascii(m, gs),
        Format::Dot => emit_dot(m, gs),
    }
}

fn cell_label(m: &MonoidTable, gs: &GreenStructure, cell: Option<usize>) -> String {
    match cell {
        Some(h) => gs.h_classes[h]
            .iter()
            .map(|&e| m.word_string(e))
            .collect::<Vec<_>>()
            .join(" "),
        None => String::new(),
    }
}

fn emit_ascii(m: &MonoidTable, gs: &GreenStructure) -> String {
    let mut out = String::new();
    for block in &gs.eggbox {
        let labels: Vec<Vec<String>> = block
            .cells
            .iter()
            .map(|row| row.iter().map(|&c| cell_label(m, gs, c)).collect())
            .collect();
        let widths: Vec<usize> = (0..block.cols.len())
            .map(|c| labels.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let rule: String = widths.iter().fold("+".to_string(), |mut s, &w| {
            s.push_str(&"-".repeat(w + 2));
            s.push('+');
            s
        });
        let _ = writeln!(
            out,
            "D{} ({} R x {} L)",
            block.d_class,
            block.rows.len(),
            block.cols.len()
        );
        let _ = writeln!(out, "{rule}");
        for row in &labels {
            let mut line = "|".to_string();
            for (c, label) in row.iter().enumerate() {
                let _ = write!(line, " {label:<width$} |", width = widths[c]);
            }
            let _ = writeln!(out, "{line}");
            let _ = writeln!(out, "{rule}");
        }
        out.push('\n');
    }
    out
}

fn emit_dot(m: &MonoidTable, gs: &GreenStructure) -> String {
    let mut out = String::from("digraph green {\n  node [shape=box];\n");
    for block in &gs.eggbox {
        let k = block.d_class;
        let _ = writeln!(out, "  subgraph cluster_D{k} {{");
        let _ = writeln!(out, "    label=\"D{k}\";");
        for (r, row) in block.cells.iter().enumerate() {
            for (c, &cell) in row.iter().enumerate() {
                if cell.is_some() {
                    let label = cell_label(m, gs, cell).replace('\\', "\\\\").replace('"', "\\\"");
                    let _ = writeln!(out, "    H{k}_{r}_{c} [label=\"{label}\"];");
                }
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
