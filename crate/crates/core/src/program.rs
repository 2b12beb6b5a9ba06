//! Alphabets, mappings and in-situ programs.
//!
//! A vector `(x_1, ..., x_n)` over `S = {0, ..., s-1}` is stored as its index
//! `x_1 + s*x_2 + ... + s^(n-1)*x_n`, so component 0 is the least significant
//! digit. Mappings are dense image tables over that index space, and an
//! assignment `x_i := psi(x_1, ..., x_n)` is either a dense table of `psi` or a
//! row of linear coefficients over `Z/sZ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// The pair `(s, n)` describing `S^n` with `|S| = s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    s: usize,
    n: usize,
    // pows[k] = s^k for k in 0..=n
    pows: Vec<usize>,
}

impl Alphabet {
    pub fn new(s: usize, n: usize) -> Result<Self> {
        if s < 2 || n < 1 {
            return Err(Error::InvalidAlphabet { s, n });
        }
        let mut pows = Vec::with_capacity(n + 1);
        let mut p: u64 = 1;
        pows.push(1usize);
        for _ in 0..n {
            p = p.checked_mul(s as u64).ok_or(Error::IndexOverflow { s, n })?;
            let as_usize = usize::try_from(p).map_err(|_| Error::IndexOverflow { s, n })?;
            pows.push(as_usize);
        }
        Ok(Alphabet { s, n, pows })
    }

    pub fn boolean(n: usize) -> Result<Self> {
        Alphabet::new(2, n)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of vectors, `s^n`.
    pub fn size(&self) -> usize {
        self.pows[self.n]
    }

    pub fn indices(&self) -> Range<usize> {
        0..self.size()
    }

    /// `s^k` for `k <= n`.
    pub fn pow(&self, k: usize) -> usize {
        self.pows[k]
    }

    /// Value of component `comp` (zero-based) of the vector with index `index`.
    #[inline]
    pub fn digit(&self, index: usize, comp: usize) -> usize {
        (index / self.pows[comp]) % self.s
    }

    /// Index of the vector obtained by overwriting component `comp` with `value`.
    #[inline]
    pub fn with_digit(&self, index: usize, comp: usize, value: usize) -> usize {
        let p = self.pows[comp];
        let old = (index / p) % self.s;
        index - old * p + value * p
    }

    pub fn index_of(&self, v: &[usize]) -> Result<usize> {
        if v.len() != self.n {
            return Err(Error::InvalidVector(format!(
                "expected {} components, got {}",
                self.n,
                v.len()
            )));
        }
        let mut index = 0;
        for (k, &x) in v.iter().enumerate() {
            if x >= self.s {
                return Err(Error::InvalidVector(format!(
                    "component {} has value {} >= {}",
                    k + 1,
                    x,
                    self.s
                )));
            }
            index += x * self.pows[k];
        }
        Ok(index)
    }

    pub fn vector_of(&self, index: usize) -> Result<Vec<usize>> {
        self.check_index(index)?;
        Ok((0..self.n).map(|k| self.digit(index, k)).collect())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.size() {
            return Err(Error::IndexOutOfRange { index, size: self.size() });
        }
        Ok(())
    }

    /// Index of the vector with its components listed in reverse order.
    pub fn reverse_index(&self, index: usize) -> usize {
        (0..self.n).fold(0, |acc, k| acc + self.digit(index, k) * self.pows[self.n - 1 - k])
    }
}

/// A mapping `E : S^n -> S^n` as the dense list of image indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    alphabet: Alphabet,
    images: Vec<usize>,
}

impl Mapping {
    pub fn new(alphabet: Alphabet, images: Vec<usize>) -> Result<Self> {
        if images.len() != alphabet.size() {
            return Err(Error::InvalidMapping(format!(
                "expected {} images, got {}",
                alphabet.size(),
                images.len()
            )));
        }
        if let Some((i, &y)) = images.iter().enumerate().find(|(_, &y)| y >= alphabet.size()) {
            return Err(Error::InvalidMapping(format!("image {y} of input {i} out of range")));
        }
        Ok(Mapping { alphabet, images })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let images = alphabet.indices().collect();
        Mapping { alphabet, images }
    }

    pub fn from_fn(alphabet: Alphabet, f: impl Fn(usize) -> usize) -> Result<Self> {
        let images = alphabet.indices().map(f).collect();
        Mapping::new(alphabet, images)
    }

    /// Permutation of variables: output component `i` is input component `perm[i]`.
    pub fn from_component_permutation(alphabet: Alphabet, perm: &[usize]) -> Result<Self> {
        if perm.len() != alphabet.n() || !is_permutation(perm) {
            return Err(Error::InvalidMapping(format!(
                "{perm:?} is not a permutation of {} components",
                alphabet.n()
            )));
        }
        let images = alphabet
            .indices()
            .map(|x| {
                perm.iter()
                    .enumerate()
                    .map(|(i, &src)| alphabet.digit(x, src) * alphabet.pow(i))
                    .sum()
            })
            .collect();
        Ok(Mapping { alphabet, images })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    #[inline]
    pub fn apply(&self, index: usize) -> usize {
        self.images[index]
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Mapping) -> Result<Mapping> {
        if self.alphabet != inner.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let images = inner.images.iter().map(|&y| self.images[y]).collect();
        Ok(Mapping { alphabet: self.alphabet.clone(), images })
    }

    pub fn is_bijective(&self) -> bool {
        is_permutation(&self.images)
    }

    pub fn inverse(&self) -> Result<Mapping> {
        if !self.is_bijective() {
            return Err(Error::NotBijective);
        }
        let mut images = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            images[y] = x;
        }
        Ok(Mapping { alphabet: self.alphabet.clone(), images })
    }

    /// Pre-image classes keyed by image index, each class in increasing order.
    pub fn preimage_classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (x, &y) in self.images.iter().enumerate() {
            classes.entry(y).or_default().push(x);
        }
        classes
    }

    /// Conjugate by component reversal: the same mapping seen on reversed vectors.
    pub fn reverse_components(&self) -> Mapping {
        let a = &self.alphabet;
        let images = a
            .indices()
            .map(|x| a.reverse_index(self.images[a.reverse_index(x)]))
            .collect();
        Mapping { alphabet: a.clone(), images }
    }
}

pub(crate) fn is_permutation(values: &[usize]) -> bool {
    let mut seen = vec![false; values.len()];
    for &v in values {
        if v >= values.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// What an assignment computes for the new value of its target component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    /// `table[x]` is the new value for the input vector of index `x`.
    Table(Vec<usize>),
    /// `x_target := sum_j coeffs[j] * x_j mod s`.
    Linear(Vec<u64>),
}

/// One elementary operation `x_target := psi(x_1, ..., x_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    target: usize,
    payload: Payload,
}

impl Assignment {
    pub fn table(target: usize, table: Vec<usize>) -> Self {
        Assignment { target, payload: Payload::Table(table) }
    }

    pub fn linear(target: usize, coeffs: Vec<u64>) -> Self {
        Assignment { target, payload: Payload::Linear(coeffs) }
    }

    /// The assignment that leaves component `target` unchanged.
    pub fn identity(alphabet: &Alphabet, target: usize) -> Self {
        let table = alphabet.indices().map(|x| alphabet.digit(x, target)).collect();
        Assignment::table(target, table)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// New value of the target component on input `index`.
    #[inline]
    pub fn value(&self, alphabet: &Alphabet, index: usize) -> usize {
        match &self.payload {
            Payload::Table(t) => t[index],
            Payload::Linear(c) => {
                let s = alphabet.s() as u128;
                let acc = c.iter().enumerate().fold(0u128, |acc, (j, &a)| {
                    (acc + a as u128 * alphabet.digit(index, j) as u128) % s
                });
                acc as usize
            }
        }
    }

    /// Index of the vector after performing the assignment on `index`.
    #[inline]
    pub fn apply(&self, alphabet: &Alphabet, index: usize) -> usize {
        alphabet.with_digit(index, self.target, self.value(alphabet, index))
    }

    pub fn to_table(&self, alphabet: &Alphabet) -> Vec<usize> {
        match &self.payload {
            Payload::Table(t) => t.clone(),
            Payload::Linear(_) => alphabet.indices().map(|x| self.value(alphabet, x)).collect(),
        }
    }

    pub fn into_table(self, alphabet: &Alphabet) -> Assignment {
        match self.payload {
            Payload::Table(_) => self,
            Payload::Linear(_) => Assignment::table(self.target, self.to_table(alphabet)),
        }
    }

    pub fn is_identity(&self, alphabet: &Alphabet) -> bool {
        match &self.payload {
            Payload::Linear(c) => c
                .iter()
                .enumerate()
                .all(|(j, &a)| a as usize % alphabet.s() == usize::from(j == self.target)),
            Payload::Table(t) => t
                .iter()
                .enumerate()
                .all(|(x, &v)| v == alphabet.digit(x, self.target)),
        }
    }

    pub(crate) fn validate(&self, alphabet: &Alphabet) -> Result<()> {
        if self.target >= alphabet.n() {
            return Err(Error::InvalidAssignment(format!(
                "target component {} out of range 1..={}",
                self.target + 1,
                alphabet.n()
            )));
        }
        match &self.payload {
            Payload::Table(t) => {
                if t.len() != alphabet.size() {
                    return Err(Error::InvalidAssignment(format!(
                        "table has {} entries, expected {}",
                        t.len(),
                        alphabet.size()
                    )));
                }
                if let Some(v) = t.iter().find(|&&v| v >= alphabet.s()) {
                    return Err(Error::InvalidAssignment(format!("table value {v} >= s")));
                }
            }
            Payload::Linear(c) => {
                if c.len() != alphabet.n() {
                    return Err(Error::InvalidAssignment(format!(
                        "linear row has {} coefficients, expected {}",
                        c.len(),
                        alphabet.n()
                    )));
                }
                if let Some(a) = c.iter().find(|&&a| a as usize >= alphabet.s()) {
                    return Err(Error::InvalidAssignment(format!("coefficient {a} >= s")));
                }
            }
        }
        Ok(())
    }

    /// Single assignment equivalent to `self` followed by `next` (same target).
    fn then(&self, next: &Assignment, alphabet: &Alphabet) -> Assignment {
        debug_assert_eq!(self.target, next.target);
        let t = self.target;
        match (&self.payload, &next.payload) {
            (Payload::Linear(first), Payload::Linear(second)) => {
                let s = alphabet.s() as u128;
                let d = second[t] as u128;
                let coeffs = (0..first.len())
                    .map(|j| {
                        let via = d * first[j] as u128 % s;
                        let direct = if j == t { 0 } else { second[j] as u128 };
                        ((via + direct) % s) as u64
                    })
                    .collect();
                Assignment::linear(t, coeffs)
            }
            _ => {
                let table = alphabet
                    .indices()
                    .map(|x| next.value(alphabet, self.apply(alphabet, x)))
                    .collect();
                Assignment::table(t, table)
            }
        }
    }
}

/// A sequence of assignments over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InSituProgram {
    alphabet: Alphabet,
    assignments: Vec<Assignment>,
}

impl InSituProgram {
    pub fn new(alphabet: Alphabet, assignments: Vec<Assignment>) -> Result<Self> {
        for a in &assignments {
            a.validate(&alphabet)?;
        }
        Ok(InSituProgram { alphabet, assignments })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        InSituProgram { alphabet, assignments: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn into_assignments(self) -> Vec<Assignment> {
        self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Zero-based targets of the successive assignments.
    pub fn signature(&self) -> Vec<usize> {
        self.assignments.iter().map(Assignment::target).collect()
    }

    pub fn push(&mut self, a: Assignment) -> Result<()> {
        a.validate(&self.alphabet)?;
        self.assignments.push(a);
        Ok(())
    }

    /// `self` followed by `next`.
    pub fn concat(&self, next: &InSituProgram) -> Result<InSituProgram> {
        if self.alphabet != next.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let mut assignments = self.assignments.clone();
        assignments.extend(next.assignments.iter().cloned());
        Ok(InSituProgram { alphabet: self.alphabet.clone(), assignments })
    }

    /// Sub-program made of the assignments in `range`.
    pub fn slice(&self, range: Range<usize>) -> InSituProgram {
        InSituProgram {
            alphabet: self.alphabet.clone(),
            assignments: self.assignments[range].to_vec(),
        }
    }

    pub fn execute(&self, x: &[usize]) -> Result<Vec<usize>> {
        let index = self.alphabet.index_of(x)?;
        self.alphabet.vector_of(self.execute_index(index))
    }

    pub fn execute_index(&self, index: usize) -> usize {
        self.assignments
            .iter()
            .fold(index, |cur, a| a.apply(&self.alphabet, cur))
    }

    /// States `X_0, ..., X_m` visited on input `index`.
    pub fn trace(&self, index: usize) -> Vec<usize> {
        let mut states = Vec::with_capacity(self.len() + 1);
        let mut cur = index;
        states.push(cur);
        for a in &self.assignments {
            cur = a.apply(&self.alphabet, cur);
            states.push(cur);
        }
        states
    }

    /// The mapping computed by the program.
    pub fn execute_all(&self) -> Mapping {
        let a = &self.alphabet;
        let mut states: Vec<usize> = a.indices().collect();
        for asg in &self.assignments {
            match &asg.payload {
                Payload::Table(t) => {
                    for st in states.iter_mut() {
                        *st = a.with_digit(*st, asg.target, t[*st]);
                    }
                }
                Payload::Linear(_) => {
                    for st in states.iter_mut() {
                        *st = asg.apply(a, *st);
                    }
                }
            }
        }
        Mapping { alphabet: a.clone(), images: states }
    }

    /// Same program with every payload materialized as a dense table.
    pub fn to_tables(&self) -> InSituProgram {
        InSituProgram {
            alphabet: self.alphabet.clone(),
            assignments: self
                .assignments
                .iter()
                .cloned()
                .map(|a| a.into_table(&self.alphabet))
                .collect(),
        }
    }

    /// Composes runs of consecutive assignments with the same target into one.
    pub fn merge_adjacent(&self) -> InSituProgram {
        let mut merged: Vec<Assignment> = Vec::with_capacity(self.len());
        for a in &self.assignments {
            match merged.last_mut() {
                Some(last) if last.target == a.target => {
                    *last = last.then(a, &self.alphabet);
                }
                _ => merged.push(a.clone()),
            }
        }
        InSituProgram { alphabet: self.alphabet.clone(), assignments: merged }
    }

    /// The program acting on reversed vectors: component `i` becomes `n-1-i`.
    ///
    /// If `self` computes `E`, the result computes `E.reverse_components()`.
    pub fn reverse_components(&self) -> InSituProgram {
        let a = &self.alphabet;
        let n = a.n();
        let assignments = self
            .assignments
            .iter()
            .map(|asg| {
                let target = n - 1 - asg.target;
                match &asg.payload {
                    Payload::Linear(c) => Assignment::linear(target, c.iter().rev().copied().collect()),
                    Payload::Table(t) => {
                        Assignment::table(target, a.indices().map(|x| t[a.reverse_index(x)]).collect())
                    }
                }
            })
            .collect();
        InSituProgram { alphabet: a.clone(), assignments }
    }

    /// The reversed assignment sequence of a boolean program computing a
    /// bijection, which computes the inverse bijection.
    pub fn reverse_boolean_bijection(&self) -> Result<InSituProgram> {
        if self.alphabet.s() != 2 {
            return Err(Error::NotBoolean(self.alphabet.s()));
        }
        if !self.execute_all().is_bijective() {
            return Err(Error::NotBijective);
        }
        let assignments = self.assignments.iter().rev().cloned().collect();
        Ok(InSituProgram { alphabet: self.alphabet.clone(), assignments })
    }

    /// Regroups a boolean program on `m*n` components into a program on `n`
    /// registers over `S = {0,1}^m`.
    ///
    /// Register `r` holds components `r*m .. r*m+m`, low component in the low
    /// bit, so indices are shared between both alphabets. Each maximal run of
    /// assignments inside one register becomes one assignment. The signature
    /// must walk the components: consecutive targets are equal or adjacent.
    pub fn regroup(&self, m: usize) -> Result<InSituProgram> {
        let a = &self.alphabet;
        if a.s() != 2 {
            return Err(Error::NotBoolean(a.s()));
        }
        if m == 0 || a.n() % m != 0 {
            return Err(Error::SignatureNotGroupable(m));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let walks = self
            .assignments
            .windows(2)
            .all(|w| w[0].target.abs_diff(w[1].target) <= 1);
        if !walks {
            return Err(Error::SignatureNotGroupable(m));
        }
        let width = 1usize
            .checked_shl(m as u32)
            .filter(|&w| w > 1)
            .ok_or(Error::SignatureNotGroupable(m))?;
        let grouped = Alphabet::new(width, a.n() / m)?;
        debug_assert_eq!(grouped.size(), a.size());

        let mut assignments = Vec::new();
        let mut start = 0;
        while start < self.len() {
            let register = self.assignments[start].target / m;
            let mut end = start + 1;
            while end < self.len() && self.assignments[end].target / m == register {
                end += 1;
            }
            let run = &self.assignments[start..end];
            let table = a
                .indices()
                .map(|x| {
                    let y = run.iter().fold(x, |cur, asg| asg.apply(a, cur));
                    grouped.digit(y, register)
                })
                .collect();
            assignments.push(Assignment::table(register, table));
            start = end;
        }
        Ok(InSituProgram { alphabet: grouped, assignments })
    }
}

/// Signature rendered with one-based component labels, e.g. `1,2,3,2,1`.
pub fn format_signature(signature: &[usize]) -> String {
    signature
        .iter()
        .map(|t| (t + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for InSituProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "in-situ program over s={}, n={}, length {} [{}]",
            self.alphabet.s(),
            self.alphabet.n(),
            self.len(),
            format_signature(&self.signature())
        )
    }
}

/// Linear program rotating `(x_1, ..., x_k)` to `(x_2, ..., x_k, x_1)` in
/// `k + 1` assignments over the group `Z/sZ`; components beyond `k` are fixed.
pub fn cycle_program(alphabet: &Alphabet, k: usize) -> Result<InSituProgram> {
    let n = alphabet.n();
    if k < 2 || k > n {
        return Err(Error::CycleOutOfRange { k, n });
    }
    let minus_one = (alphabet.s() - 1) as u64;
    let sum: Vec<u64> = (0..n).map(|j| u64::from(j < k)).collect();
    // x_1 - x_2 - ... - x_k
    let diff: Vec<u64> = (0..n)
        .map(|j| match j {
            0 => 1,
            j if j < k => minus_one,
            _ => 0,
        })
        .collect();

    let mut assignments = vec![Assignment::linear(0, sum)];
    for target in (1..k).rev() {
        assignments.push(Assignment::linear(target, diff.clone()));
    }
    assignments.push(Assignment::linear(0, diff));
    InSituProgram::new(alphabet.clone(), assignments)
}

/// Lower bound `n - f + c` on the length of any program computing a
/// permutation of variables, `f` being the fixed points and `c` the cycles of
/// length at least two.
///
/// Panics if `perm` is not a permutation of `0..perm.len()`.
pub fn permutation_length_bound(perm: &[usize]) -> usize {
    assert!(is_permutation(perm), "{perm:?} is not a permutation");
    let n = perm.len();
    let mut seen = vec![false; n];
    let (mut fixed, mut cycles) = (0, 0);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len == 1 {
            fixed += 1;
        } else {
            cycles += 1;
        }
    }
    n - fixed + cycles
}
