//! Brute-force ground truth.
//!
//! [`min_length_bfs`] finds the shortest program for a mapping by breadth-first
//! search over composed mappings, one assignment per level. [`exhaustive_suite`]
//! runs a compiler over every input (or a seeded sample) and checks it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;

use crate::benes::{benes_signature, route_bijection};
use crate::blockseq::compile_4n_flexible;
use crate::error::{Error, Result};
use crate::factor::{compile_4n_sorted, compile_5n, signature_4n, signature_5n};
use crate::linmod::{decompose, linear_signature, to_in_situ, MatrixMod, ModRing};
use crate::minsim::{routing_of, verify, verify_linear};
use crate::program::{Alphabet, Assignment, InSituProgram, Mapping};
use crate::random::{random_bijection, random_mapping, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Longest program searched for.
    pub max_len: usize,
    /// Most distinct mappings kept before giving up.
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_len: 12, max_states: 2_000_000 }
    }
}

/// Which assignments a search step may use.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Universe {
    /// Every table on every component: `n * s^(s^n)` assignments.
    #[default]
    Full,
    /// Only assignments that are bijections of `S^n`. Exact for bijective
    /// targets, since every step of a program computing a bijection is
    /// itself a bijection.
    Invertible,
    Custom(Vec<Assignment>),
}

pub fn assignment_universe(alphabet: &Alphabet, universe: &Universe) -> Result<Vec<Assignment>> {
    let (s, n, size) = (alphabet.s(), alphabet.n(), alphabet.size());
    match universe {
        Universe::Custom(list) => {
            for a in list {
                a.validate(alphabet)?;
            }
            Ok(list.clone())
        }
        Universe::Full => {
            let count = (s as u64)
                .checked_pow(size as u32)
                .filter(|&c| c <= 1 << 20)
                .ok_or(Error::BudgetExceeded(usize::MAX))?;
            let mut out = Vec::new();
            for k in 0..n {
                for code in 0..count {
                    let table = (0..size).map(|x| (code / (s as u64).pow(x as u32) % s as u64) as usize).collect();
                    out.push(Assignment::table(k, table));
                }
            }
            Ok(out)
        }
        Universe::Invertible => {
            // one permutation of S per fibre {x : x_j fixed for j != k}
            let fibres = size / s;
            let perms: Vec<Vec<usize>> = (0..s).permutations(s).collect();
            let count = (perms.len() as u64)
                .checked_pow(fibres as u32)
                .filter(|&c| c <= 1 << 20)
                .ok_or(Error::BudgetExceeded(usize::MAX))?;
            let mut out = Vec::new();
            for k in 0..n {
                let fibre_of = |x: usize| {
                    let high = x / alphabet.pow(k + 1);
                    let low = x % alphabet.pow(k);
                    high * alphabet.pow(k) + low
                };
                for code in 0..count {
                    let table = (0..size)
                        .map(|x| {
                            let choice = (code / (perms.len() as u64).pow(fibre_of(x) as u32)) % perms.len() as u64;
                            perms[choice as usize][alphabet.digit(x, k)]
                        })
                        .collect();
                    out.push(Assignment::table(k, table));
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub length: usize,
    pub witness: InSituProgram,
    /// Distinct mappings discovered.
    pub states: usize,
}

type State = Box<[u32]>;

struct Search {
    universe: Vec<Assignment>,
    // state -> (parent state, assignment index)
    parents: HashMap<State, Option<(State, u32)>>,
}

impl Search {
    fn new(alphabet: &Alphabet, universe: &Universe) -> Result<(Self, State)> {
        let universe = assignment_universe(alphabet, universe)?;
        let start: State = alphabet.indices().map(|x| x as u32).collect();
        let mut parents = HashMap::new();
        parents.insert(start.clone(), None);
        Ok((Search { universe, parents }, start))
    }

    /// Next BFS level, in deterministic order.
    fn expand(&mut self, alphabet: &Alphabet, frontier: &[State], budget: &Budget) -> Result<Vec<State>> {
        let universe = &self.universe;
        let candidates: Vec<Vec<(State, u32)>> = frontier
            .par_iter()
            .map(|st| {
                universe
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (st.iter().map(|&v| a.apply(alphabet, v as usize) as u32).collect(), i as u32))
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (parent, succ) in frontier.iter().zip(candidates) {
            for (st, i) in succ {
                if !self.parents.contains_key(&st) {
                    self.parents.insert(st.clone(), Some((parent.clone(), i)));
                    next.push(st);
                    if self.parents.len() > budget.max_states {
                        return Err(Error::BudgetExceeded(self.parents.len()));
                    }
                }
            }
        }
        Ok(next)
    }

    fn witness(&self, alphabet: &Alphabet, mut st: State) -> InSituProgram {
        let mut rev = Vec::new();
        while let Some(Some((parent, i))) = self.parents.get(&st) {
            rev.push(self.universe[*i as usize].clone());
            st = parent.clone();
        }
        rev.reverse();
        InSituProgram::new(alphabet.clone(), rev).expect("universe validated")
    }
}

/// Exact minimal program length for `e` over the given universe.
pub fn min_length_bfs(e: &Mapping, budget: &Budget, universe: &Universe) -> Result<SearchResult> {
    let a = e.alphabet();
    let target: State = e.images().iter().map(|&v| v as u32).collect();
    let (mut search, start) = Search::new(a, universe)?;
    let mut frontier = vec![start];
    for depth in 0..=budget.max_len {
        if let Some(hit) = frontier.iter().find(|st| **st == target) {
            let witness = search.witness(a, hit.clone());
            return Ok(SearchResult { length: depth, witness, states: search.parents.len() });
        }
        if depth == budget.max_len || frontier.is_empty() {
            break;
        }
        frontier = search.expand(a, &frontier, budget)?;
    }
    Err(Error::NotFound(budget.max_len))
}

/// Minimal length of every mapping reachable within the budget, keyed by
/// image list.
pub fn distance_table(alphabet: &Alphabet, budget: &Budget, universe: &Universe) -> Result<BTreeMap<Vec<usize>, usize>> {
    let (mut search, start) = Search::new(alphabet, universe)?;
    let mut table = BTreeMap::new();
    let mut frontier = vec![start];
    let mut depth = 0;
    while !frontier.is_empty() && depth <= budget.max_len {
        for st in &frontier {
            table.insert(st.iter().map(|&v| v as usize).collect(), depth);
        }
        if depth == budget.max_len {
            break;
        }
        frontier = search.expand(alphabet, &frontier, budget)?;
        depth += 1;
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compiler {
    Benes,
    General5,
    General4Sorted,
    General4Flex,
    Linear,
}

impl Compiler {
    pub const ALL: [Compiler; 5] =
        [Compiler::Benes, Compiler::General5, Compiler::General4Sorted, Compiler::General4Flex, Compiler::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Compiler::Benes => "benes",
            Compiler::General5 => "general5",
            Compiler::General4Sorted => "general4-sorted",
            Compiler::General4Flex => "general4-flex",
            Compiler::Linear => "linear",
        }
    }

    /// Length bound and exact signature for `n` components.
    pub fn signature(self, n: usize) -> Vec<usize> {
        match self {
            Compiler::Benes => benes_signature(n),
            Compiler::General5 => signature_5n(n),
            Compiler::General4Sorted | Compiler::General4Flex => signature_4n(n),
            Compiler::Linear => linear_signature(n),
        }
    }

    /// Compiles a mapping; not for [`Compiler::Linear`].
    pub fn compile(self, e: &Mapping) -> Result<InSituProgram> {
        match self {
            Compiler::Benes => route_bijection(e),
            Compiler::General5 => compile_5n(e),
            Compiler::General4Sorted => compile_4n_sorted(e),
            Compiler::General4Flex => compile_4n_flexible(e, None),
            Compiler::Linear => Err(Error::InvalidMapping("the linear compiler takes a matrix".into())),
        }
    }
}

impl fmt::Display for Compiler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Compiler {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Compiler::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}, expected one of benes, general5, general4-sorted, general4-flex, linear"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    /// Every mapping (bijection for `benes`, matrix for `linear`).
    All,
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub case: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub compiler: Compiler,
    pub s: usize,
    pub n: usize,
    pub cases: usize,
    pub failures: Vec<Failure>,
    /// Program length -> number of cases.
    pub lengths: BTreeMap<usize, usize>,
}

impl SuiteReport {
    pub fn max_length(&self) -> usize {
        self.lengths.keys().next_back().copied().unwrap_or(0)
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `key=value` lines; `failure=` lines are capped at 20.
impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "compiler={}", self.compiler)?;
        writeln!(f, "s={}", self.s)?;
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "cases={}", self.cases)?;
        writeln!(f, "failures={}", self.failures.len())?;
        writeln!(f, "max_length={}", self.max_length())?;
        let hist = self.lengths.iter().map(|(l, c)| format!("{l}:{c}")).join(",");
        writeln!(f, "lengths={hist}")?;
        for fail in self.failures.iter().take(20) {
            writeln!(f, "failure={} {}", fail.case, fail.reason)?;
        }
        Ok(())
    }
}

enum Case {
    Map(Mapping),
    Matrix(MatrixMod),
}

fn decode(base: u64, digits: usize, mut code: u64) -> Vec<u64> {
    (0..digits)
        .map(|_| {
            let d = code % base;
            code /= base;
            d
        })
        .collect()
}

fn cases(alphabet: &Alphabet, compiler: Compiler, sample: Sample) -> Result<Vec<Case>> {
    let (s, n, size) = (alphabet.s(), alphabet.n(), alphabet.size());
    let ring = || ModRing::new(s as u64);
    let matrix = |entries: Vec<u64>| -> Result<MatrixMod> {
        MatrixMod::new(ring()?, entries.chunks(n).map(<[u64]>::to_vec).collect())
    };
    match sample {
        Sample::All => match compiler {
            Compiler::Benes => Ok((0..size)
                .permutations(size)
                .map(|p| Case::Map(Mapping::new(alphabet.clone(), p).expect("permutation")))
                .collect()),
            Compiler::Linear => {
                let total = (s as u64).checked_pow((n * n) as u32).ok_or(Error::IndexOverflow { s, n })?;
                (0..total).map(|c| matrix(decode(s as u64, n * n, c)).map(Case::Matrix)).collect()
            }
            _ => {
                let total = (size as u64).checked_pow(size as u32).ok_or(Error::IndexOverflow { s, n })?;
                Ok((0..total)
                    .map(|c| {
                        let images = decode(size as u64, size, c).into_iter().map(|v| v as usize).collect();
                        Case::Map(Mapping::new(alphabet.clone(), images).expect("digits in range"))
                    })
                    .collect())
            }
        },
        Sample::Random { count, seed } => {
            let mut r = rng(seed);
            (0..count)
                .map(|_| match compiler {
                    Compiler::Benes => Ok(Case::Map(random_bijection(alphabet, &mut r))),
                    Compiler::Linear => matrix((0..n * n).map(|_| r.random_range(0..s as u64)).collect()).map(Case::Matrix),
                    _ => Ok(Case::Map(random_mapping(alphabet, &mut r))),
                })
                .collect()
        }
    }
}

/// Exhaustive checks of one compiled mapping. Returns the program length.
pub fn check_mapping(compiler: Compiler, e: &Mapping) -> std::result::Result<usize, String> {
    let n = e.alphabet().n();
    let p = compiler.compile(e).map_err(|err| format!("compile error: {err}"))?;
    let sig = compiler.signature(n);
    if p.len() > sig.len() {
        return Err(format!("length {} exceeds {}", p.len(), sig.len()));
    }
    if p.signature() != sig {
        return Err(format!("signature {:?}, expected {:?}", p.signature(), sig));
    }
    if &p.execute_all() != e {
        return Err("execution differs".into());
    }
    let rep = verify(&routing_of(&p), e).map_err(|err| err.to_string())?;
    if !rep.ok() {
        return Err("routing does not perform the mapping".into());
    }
    if e.is_bijective() && !rep.vertex_disjoint {
        return Err("bijection routed with shared vertices".into());
    }
    Ok(p.len())
}

/// Spaces up to this size are traced exhaustively by the suite.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// Checks of one decomposed matrix: factor product, exact linear tracing of
/// the routing, and exhaustive routing verification when `s^n` is at most
/// `exhaustive_limit`.
pub fn check_matrix(m: &MatrixMod, exhaustive_limit: usize) -> std::result::Result<usize, String> {
    let n = m.n();
    let p = decompose(m);
    if p.len() > 2 * n - 1 || p.signature() != linear_signature(n) {
        return Err(format!("signature {:?}", p.signature()));
    }
    if &p.matrix() != m {
        return Err("factor product differs".into());
    }
    let prog = to_in_situ(&p).map_err(|err| err.to_string())?;
    let r = routing_of(&prog);
    if !verify_linear(&r, m).map_err(|err| err.to_string())? {
        return Err("linear routing differs".into());
    }
    let a = prog.alphabet();
    if a.size() <= exhaustive_limit {
        let e = Mapping::from_fn(a.clone(), |x| {
            let v: Vec<u64> = a.vector_of(x).expect("in range").into_iter().map(|d| d as u64).collect();
            let y: Vec<usize> = m.apply(&v).into_iter().map(|d| d as usize).collect();
            a.index_of(&y).expect("reduced")
        })
        .map_err(|err| err.to_string())?;
        let rep = verify(&r, &e).map_err(|err| err.to_string())?;
        if !rep.ok() {
            return Err("routing does not perform the matrix".into());
        }
    }
    Ok(p.len())
}

pub fn exhaustive_suite(alphabet: &Alphabet, compiler: Compiler, sample: Sample) -> Result<SuiteReport> {
    let cases = cases(alphabet, compiler, sample)?;
    let results: Vec<std::result::Result<usize, String>> = cases
        .par_iter()
        .map(|c| match c {
            Case::Map(e) => check_mapping(compiler, e),
            Case::Matrix(m) => check_matrix(m, EXHAUSTIVE_LIMIT),
        })
        .collect();
    let mut failures = Vec::new();
    let mut lengths = BTreeMap::new();
    for (case, res) in results.into_iter().enumerate() {
        match res {
            Ok(len) => *lengths.entry(len).or_insert(0) += 1,
            Err(reason) => failures.push(Failure { case, reason }),
        }
    }
    Ok(SuiteReport { compiler, s: alphabet.s(), n: alphabet.n(), cases: cases.len(), failures, lengths })
}
