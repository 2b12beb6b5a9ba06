//! Multistage interconnection networks.
//!
//! A signature `i_1, ..., i_m` induces a layered network of `m + 1` copies of
//! `S^n`, where stage `t` connects each vertex to the `s` vertices differing
//! from it only in component `i_t`. A program of that signature picks one of
//! those edges per vertex, i.e. a routing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linmod::MatrixMod;
use crate::program::{format_signature, Alphabet, Assignment, InSituProgram, Mapping, Payload};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Min {
    alphabet: Alphabet,
    signature: Vec<usize>,
}

impl Min {
    /// `signature` holds zero-based components.
    pub fn new(alphabet: Alphabet, signature: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = signature.iter().find(|&&i| i >= alphabet.n()) {
            return Err(Error::BadSignature(format!(
                "component {} out of range 1..={}",
                bad + 1,
                alphabet.n()
            )));
        }
        Ok(Min { alphabet, signature })
    }

    /// `B`: components `n, ..., 1`.
    pub fn butterfly(alphabet: Alphabet) -> Self {
        let signature = (0..alphabet.n()).rev().collect();
        Min { alphabet, signature }
    }

    /// `B^{-1}`: components `1, ..., n`.
    pub fn reversed_butterfly(alphabet: Alphabet) -> Self {
        let signature = (0..alphabet.n()).collect();
        Min { alphabet, signature }
    }

    /// Components `1, ..., n, ..., 1`.
    pub fn benes(alphabet: Alphabet) -> Self {
        let signature = crate::benes::benes_signature(alphabet.n());
        Min { alphabet, signature }
    }

    pub fn concat(&self, next: &Min) -> Result<Min> {
        if self.alphabet != next.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let mut signature = self.signature.clone();
        signature.extend_from_slice(&next.signature);
        Ok(Min { alphabet: self.alphabet.clone(), signature })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn signature(&self) -> &[usize] {
        &self.signature
    }

    /// Number of vertex copies, `m + 1`.
    pub fn stages(&self) -> usize {
        self.signature.len() + 1
    }

    /// Successors of vertex `v` between stage `t` and `t + 1`, in increasing
    /// order of the new digit.
    pub fn successors(&self, t: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
        let comp = self.signature[t];
        (0..self.alphabet.s()).map(move |d| self.alphabet.with_digit(v, comp, d))
    }
}

/// One chosen outgoing edge per vertex and stage, stored as the assignment
/// whose value is the new digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    min: Min,
    rules: Vec<Assignment>,
}

impl Routing {
    pub fn new(min: Min, rules: Vec<Assignment>) -> Result<Self> {
        if rules.len() != min.signature.len() {
            return Err(Error::BadSignature(format!(
                "{} rules for {} stages of edges",
                rules.len(),
                min.signature.len()
            )));
        }
        for (t, (rule, &comp)) in rules.iter().zip(&min.signature).enumerate() {
            if rule.target() != comp {
                return Err(Error::BadSignature(format!(
                    "rule {} sets component {} on a stage of component {}",
                    t + 1,
                    rule.target() + 1,
                    comp + 1
                )));
            }
            rule.validate(&min.alphabet)?;
        }
        Ok(Routing { min, rules })
    }

    pub fn min(&self) -> &Min {
        &self.min
    }

    pub fn rules(&self) -> &[Assignment] {
        &self.rules
    }

    /// Endpoint of the chosen edge leaving `v` at stage `t`.
    #[inline]
    pub fn next(&self, t: usize, v: usize) -> usize {
        self.rules[t].apply(&self.min.alphabet, v)
    }

    pub fn path(&self, x: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.min.stages());
        path.push(x);
        let mut v = x;
        for t in 0..self.rules.len() {
            v = self.next(t, v);
            path.push(v);
        }
        path
    }
}

pub fn routing_of(p: &InSituProgram) -> Routing {
    let min = Min { alphabet: p.alphabet().clone(), signature: p.signature() };
    Routing { min, rules: p.assignments().to_vec() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    /// Every input's path ends at its image.
    pub performs: bool,
    /// No two input paths share a vertex at any stage.
    pub vertex_disjoint: bool,
    /// `merge_profile[t]`: paths coalescing between stage `t` and `t + 1`.
    pub merge_profile: Vec<usize>,
    /// Reversing the chosen edges, the tree hanging from each image reaches
    /// exactly its preimage class at stage 0, and trees share no edge.
    pub multicast_inverse: bool,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.performs && self.multicast_inverse
    }
}

pub fn verify(r: &Routing, e: &Mapping) -> Result<Report> {
    let a = &r.min.alphabet;
    if a != e.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let size = a.size();
    let mut positions: Vec<usize> = a.indices().collect();
    let mut distinct = vec![size];
    let mut seen = vec![false; size];
    for t in 0..r.rules.len() {
        positions.par_iter_mut().for_each(|v| *v = r.next(t, *v));
        seen.iter_mut().for_each(|b| *b = false);
        let mut count = 0;
        for &v in &positions {
            if !seen[v] {
                seen[v] = true;
                count += 1;
            }
        }
        distinct.push(count);
    }
    let performs = positions.as_slice() == e.images();
    let vertex_disjoint = distinct.iter().all(|&d| d == size);
    let merge_profile = distinct.windows(2).map(|w| w[0] - w[1]).collect();
    Ok(Report { performs, vertex_disjoint, merge_profile, multicast_inverse: multicast_inverse(r, e) })
}

// Backward reading: reversing the chosen edges, the tree hanging from an
// image y at stage t is the set of vertices whose forward path ends at y.
// Sweeping from the last stage labels every vertex with its tree; a vertex
// has one chosen edge, so it carries exactly one label and trees never share
// an edge. The trees read E^{-1} iff stage 0 carries the preimage classes.
fn multicast_inverse(r: &Routing, e: &Mapping) -> bool {
    const NONE: usize = usize::MAX;
    let a = &r.min.alphabet;
    let mut image = vec![false; a.size()];
    for &y in e.images() {
        image[y] = true;
    }
    let mut label: Vec<usize> = a.indices().map(|w| if image[w] { w } else { NONE }).collect();
    for t in (0..r.rules.len()).rev() {
        label = a.indices().into_par_iter().map(|v| label[r.next(t, v)]).collect();
    }
    label.as_slice() == e.images()
}

/// Exact check that a routing of linear rules computes `x -> Mx`: the
/// composite of linear maps is linear, so tracing the unit vectors suffices.
pub fn verify_linear(r: &Routing, m: &MatrixMod) -> Result<bool> {
    let a = &r.min.alphabet;
    if a.n() != m.n() || a.s() as u64 != m.ring().s() {
        return Err(Error::AlphabetMismatch);
    }
    if r.rules.iter().any(|rule| !matches!(rule.payload(), Payload::Linear(_))) {
        return Ok(false);
    }
    if r.path(0).last() != Some(&0) {
        return Ok(false);
    }
    for j in 0..a.n() {
        let out = *r.path(a.pow(j)).last().expect("non-empty path");
        let column: Vec<usize> = (0..a.n()).map(|i| m.get(i, j) as usize).collect();
        if out != a.index_of(&column)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DotLabels {
    #[default]
    Index,
    /// Digits most significant first, `x_n ... x_1`.
    Digits,
}

fn label(a: &Alphabet, v: usize, labels: DotLabels) -> String {
    match labels {
        DotLabels::Index => v.to_string(),
        DotLabels::Digits => {
            let digits = (0..a.n()).rev().map(|k| a.digit(v, k).to_string());
            if a.s() <= 10 {
                digits.collect()
            } else {
                digits.collect::<Vec<_>>().join(".")
            }
        }
    }
}

/// Layered Graphviz digraph: one rank per stage, every network edge drawn,
/// chosen edges bold and the rest dotted grey.
pub fn export_dot(min: &Min, routing: Option<&Routing>, labels: DotLabels) -> String {
    let a = &min.alphabet;
    let mut out = String::new();
    let _ = writeln!(out, "digraph min {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box, fontsize=10];");
    let _ = writeln!(out, "  label=\"signature {}\";", format_signature(&min.signature));
    for t in 0..min.stages() {
        let _ = writeln!(out, "  subgraph stage{t} {{");
        let _ = writeln!(out, "    rank=same;");
        for v in a.indices() {
            let _ = writeln!(out, "    s{t}_{v} [label=\"{}\"];", label(a, v, labels));
        }
        let _ = writeln!(out, "  }}");
    }
    for t in 0..min.signature.len() {
        for v in a.indices() {
            let chosen = routing.map(|r| r.next(t, v));
            let targets: BTreeSet<usize> = min.successors(t, v).collect();
            for w in targets {
                let style = if chosen == Some(w) { "style=bold" } else { "style=dotted, color=gray" };
                let _ = writeln!(out, "  s{t}_{v} -> s{}_{w} [{style}];", t + 1);
            }
        }
    }
    out.push_str("}\n");
    out
}
