//! General mappings through a factorisation `E = F ∘ I ∘ G`.
//!
//! `G` and `F` are bijections and `I` collapses consecutive blocks of vectors
//! onto `X_0, X_1, ...`. Mappings that never stretch the distance between
//! consecutive indices are computed by one forward butterfly pass (signature
//! `1..n`), which gives a `5n-4` compiler for any class ordering and a `4n-3`
//! compiler when classes are sorted by image.

use std::ops::RangeInclusive;

use crate::benes::{route_bijection, route_bijection_reversed};
use crate::error::{Error, Result};
use crate::program::{Alphabet, Assignment, InSituProgram, Mapping};

/// Ordered sequence of (possibly empty) sets of vector indices whose
/// non-empty members partition `S^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSequence {
    alphabet: Alphabet,
    parts: Vec<Vec<usize>>,
}

impl PartitionSequence {
    pub fn new(alphabet: Alphabet, parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; alphabet.size()];
        for part in &parts {
            for &x in part {
                alphabet.check_index(x)?;
                if seen[x] {
                    return Err(Error::InvalidMapping(format!("vector {x} appears in two parts")));
                }
                seen[x] = true;
            }
        }
        let covered = seen.iter().filter(|&&b| b).count();
        if covered != alphabet.size() {
            return Err(Error::SizesDoNotSum { got: covered, expected: alphabet.size() });
        }
        Ok(PartitionSequence { alphabet, parts })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    /// The collapsing mapping `I_P`.
    pub fn collapse(&self) -> Result<Mapping> {
        i_of_sizes(&self.alphabet, &self.sizes())
    }
}

/// `I_P` for parts of the given sizes: the first `sizes[0]` vectors go to
/// `X_0`, the next `sizes[1]` to `X_1`, and so on.
pub fn i_of_sizes(alphabet: &Alphabet, sizes: &[usize]) -> Result<Mapping> {
    let total: usize = sizes.iter().sum();
    if total != alphabet.size() {
        return Err(Error::SizesDoNotSum { got: total, expected: alphabet.size() });
    }
    let mut images = Vec::with_capacity(total);
    for (slot, &len) in sizes.iter().enumerate() {
        if len > 0 && slot >= alphabet.size() {
            return Err(Error::TooManyParts(slot));
        }
        images.extend(std::iter::repeat_n(slot, len));
    }
    Mapping::new(alphabet.clone(), images)
}

/// Images of consecutive vectors are at distance at most one.
pub fn is_distance_compatible(i: &Mapping) -> bool {
    i.images().windows(2).all(|w| w[0].abs_diff(w[1]) <= 1)
}

/// The only possible program of signature `1..n` for `target`: step `k` sets
/// component `k` to its final value given the already-final components before
/// it and the untouched ones after it. Unreached table entries leave the
/// component unchanged. Returns `None` when two inputs demand different values
/// from the same state.
pub fn prefix_program(target: &Mapping) -> Option<InSituProgram> {
    let a = target.alphabet();
    let mut states: Vec<usize> = a.indices().collect();
    let mut assignments = Vec::with_capacity(a.n());
    for k in 0..a.n() {
        let mut table: Vec<usize> = a.indices().map(|z| a.digit(z, k)).collect();
        let mut fixed = vec![false; a.size()];
        for (x, z) in states.iter_mut().enumerate() {
            let want = a.digit(target.apply(x), k);
            if fixed[*z] && table[*z] != want {
                return None;
            }
            table[*z] = want;
            fixed[*z] = true;
            *z = a.with_digit(*z, k, want);
        }
        assignments.push(Assignment::table(k, table));
    }
    InSituProgram::new(a.clone(), assignments).ok()
}

/// Program of signature `1..n` computing a distance-compatible mapping.
pub fn forward_program(i: &Mapping) -> Result<InSituProgram> {
    if !is_distance_compatible(i) {
        return Err(Error::NotDistanceCompatible);
    }
    prefix_program(i).ok_or(Error::NotDistanceCompatible)
}

/// Program of signature `n..1` sending each `X_j`, `j` in `range`, to `i(X_j)`,
/// provided `i` is strictly increasing on `range`.
///
/// The inverse of the restriction is completed into a distance-compatible
/// mapping `J`, whose forward program is then run backwards: step `k` undoes
/// the forward step on component `k`, tabulated on the states reached from
/// the image points and left unchanged elsewhere.
pub fn backward_restricted_program(i: &Mapping, range: RangeInclusive<usize>) -> Result<InSituProgram> {
    let a = i.alphabet();
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi || hi >= a.size() {
        return Err(Error::NotOrderPreserving);
    }
    let points: Vec<usize> = (lo..=hi).map(|j| i.apply(j)).collect();
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NotOrderPreserving);
    }

    // J(a) = largest j with i(X_j) <= a, clamped to lo below the first point.
    let mut inverse = Vec::with_capacity(a.size());
    let mut j = 0;
    for idx in a.indices() {
        while j + 1 < points.len() && points[j + 1] <= idx {
            j += 1;
        }
        inverse.push(lo + j);
    }
    let inverse = Mapping::new(a.clone(), inverse)?;
    let forward = forward_program(&inverse)?;

    let traces: Vec<Vec<usize>> = points.iter().map(|&p| forward.trace(p)).collect();
    let mut assignments = Vec::with_capacity(a.n());
    for k in (0..a.n()).rev() {
        let mut table: Vec<usize> = a.indices().map(|z| a.digit(z, k)).collect();
        for trace in &traces {
            let (before, after) = (trace[k], trace[k + 1]);
            table[after] = a.digit(before, k);
        }
        assignments.push(Assignment::table(k, table));
    }
    InSituProgram::new(a.clone(), assignments)
}

/// How pre-image classes are laid out in the partition-sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassOrder {
    /// One slot per image, in increasing image index.
    ByImage,
    /// Slot `t` holds the class of image `slots[t]`, or nothing.
    Slots(Vec<Option<usize>>),
}

/// `E = F ∘ I ∘ G` with `G`, `F` bijective and `I` a collapsing mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PFactorisation {
    pub f: Mapping,
    pub i: Mapping,
    pub g: Mapping,
    /// Image whose class occupies each slot.
    pub slots: Vec<Option<usize>>,
}

impl PFactorisation {
    pub fn sizes(&self, e: &Mapping) -> Vec<usize> {
        let classes = e.preimage_classes();
        self.slots
            .iter()
            .map(|s| s.map_or(0, |y| classes[&y].len()))
            .collect()
    }
}

/// Factorises `e` along the given class order. Classes are placed in
/// increasing index order inside their block; `F` sends unused positions to
/// unused images in increasing order.
pub fn p_factorise(e: &Mapping, order: &ClassOrder) -> Result<PFactorisation> {
    let a = e.alphabet();
    let classes = e.preimage_classes();
    let slots = match order {
        ClassOrder::ByImage => classes.keys().copied().map(Some).collect(),
        ClassOrder::Slots(slots) => {
            if slots.len() > a.size() {
                return Err(Error::InvalidOrdering(format!(
                    "{} slots for {} vectors",
                    slots.len(),
                    a.size()
                )));
            }
            let mut used = vec![false; a.size()];
            for y in slots.iter().flatten() {
                if !classes.contains_key(y) {
                    return Err(Error::InvalidOrdering(format!("{y} is not an image")));
                }
                if std::mem::replace(&mut used[*y], true) {
                    return Err(Error::InvalidOrdering(format!("image {y} placed twice")));
                }
            }
            if let Some(y) = classes.keys().find(|y| !used[**y]) {
                return Err(Error::InvalidOrdering(format!("image {y} has no slot")));
            }
            slots.clone()
        }
    };

    let sizes: Vec<usize> = slots.iter().map(|s| s.map_or(0, |y| classes[&y].len())).collect();
    let i = i_of_sizes(a, &sizes)?;

    let mut g = vec![0; a.size()];
    let mut offset = 0;
    for y in slots.iter().flatten() {
        for (k, &x) in classes[y].iter().enumerate() {
            g[x] = offset + k;
        }
        offset += classes[y].len();
    }

    let mut f: Vec<Option<usize>> = vec![None; a.size()];
    let mut image_used = vec![false; a.size()];
    for (t, y) in slots.iter().enumerate() {
        if let Some(y) = *y {
            f[t] = Some(y);
            image_used[y] = true;
        }
    }
    let mut spare = (0..a.size()).filter(|&y| !image_used[y]);
    let f = f
        .into_iter()
        .map(|v| v.unwrap_or_else(|| spare.next().expect("as many spare images as free slots")))
        .collect();

    Ok(PFactorisation {
        f: Mapping::new(a.clone(), f)?,
        i,
        g: Mapping::new(a.clone(), g)?,
        slots,
    })
}

/// `5n-4` compiler with classes sorted by image.
pub fn compile_5n(e: &Mapping) -> Result<InSituProgram> {
    compile_5n_with(e, &ClassOrder::ByImage)
}

/// `5n-4` compiler for any ordering without empty slots: `G` in `1..n..1`,
/// `I` in `1..n`, `F` in `n..1..n`, then adjacent assignments are merged.
pub fn compile_5n_with(e: &Mapping, order: &ClassOrder) -> Result<InSituProgram> {
    let fact = p_factorise(e, order)?;
    if fact.slots.iter().any(Option::is_none) {
        return Err(Error::InvalidOrdering("empty slot in a 5n-4 factorisation".into()));
    }
    let g = route_bijection(&fact.g)?;
    let i = forward_program(&fact.i)?;
    let f = route_bijection_reversed(&fact.f)?;
    Ok(g.concat(&i)?.concat(&f)?.merge_adjacent())
}

/// `4n-3` compiler: classes sorted by image so that `F`, restricted to the
/// collapsed vectors `X_0..X_k`, is increasing and fits in one `n..1` pass.
pub fn compile_4n_sorted(e: &Mapping) -> Result<InSituProgram> {
    let fact = p_factorise(e, &ClassOrder::ByImage)?;
    let g = route_bijection(&fact.g)?;
    let i = forward_program(&fact.i)?;
    let last = fact.slots.len() - 1;
    let f = backward_restricted_program(&fact.f, 0..=last)?;
    Ok(g.concat(&i)?.concat(&f)?.merge_adjacent())
}

/// Signature `1..n..1..n..1..n` (zero-based) of the merged `5n-4` program.
pub fn signature_5n(n: usize) -> Vec<usize> {
    let up: Vec<usize> = (0..n).collect();
    let down: Vec<usize> = (0..n).rev().collect();
    let mut sig = up.clone();
    for leg in [&down, &up, &down, &up] {
        extend_merged(&mut sig, leg);
    }
    sig
}

/// Signature `1..n..1..n..1` (zero-based) of the merged `4n-3` programs.
pub fn signature_4n(n: usize) -> Vec<usize> {
    let up: Vec<usize> = (0..n).collect();
    let down: Vec<usize> = (0..n).rev().collect();
    let mut sig = up.clone();
    for leg in [&down, &up, &down] {
        extend_merged(&mut sig, leg);
    }
    sig
}

fn extend_merged(sig: &mut Vec<usize>, leg: &[usize]) {
    for &t in leg {
        if sig.last() != Some(&t) {
            sig.push(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_mapping, rng};

    fn alpha(s: usize, n: usize) -> Alphabet {
        Alphabet::new(s, n).unwrap()
    }

    /// Rows printed most significant component first, e.g. "011" = (1,1,0).
    fn rows(bits: &[&str]) -> Vec<usize> {
        bits.iter().map(|b| usize::from_str_radix(b, 2).unwrap()).collect()
    }

    #[test]
    fn collapse_examples() {
        let a = alpha(2, 3);
        assert_eq!(i_of_sizes(&a, &[2, 1, 3, 2]).unwrap().images(), &[0, 0, 1, 2, 2, 2, 3, 3]);
        assert_eq!(i_of_sizes(&a, &[1, 3, 2, 2]).unwrap().images(), &[0, 1, 1, 1, 2, 2, 3, 3]);
        assert_eq!(i_of_sizes(&a, &[1; 8]).unwrap(), Mapping::identity(a.clone()));
        assert_eq!(
            i_of_sizes(&a, &[2, 2]),
            Err(Error::SizesDoNotSum { got: 4, expected: 8 })
        );
    }

    #[test]
    fn partition_sequence_validation() {
        let a = alpha(2, 2);
        let p = PartitionSequence::new(a.clone(), vec![vec![3], vec![], vec![0, 2, 1]]).unwrap();
        assert_eq!(p.sizes(), vec![1, 0, 3]);
        assert_eq!(p.collapse().unwrap().images(), &[0, 2, 2, 2]);
        assert!(PartitionSequence::new(a.clone(), vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(PartitionSequence::new(a, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn distance_compatibility() {
        let a = alpha(2, 3);
        assert!(is_distance_compatible(&i_of_sizes(&a, &[2, 1, 3, 2]).unwrap()));
        assert!(is_distance_compatible(&Mapping::identity(a.clone())));
        let gap = Mapping::new(a, vec![0, 2, 2, 2, 2, 2, 2, 2]).unwrap();
        assert!(!is_distance_compatible(&gap));
        assert_eq!(forward_program(&gap), Err(Error::NotDistanceCompatible));
    }

    #[test]
    fn forward_program_reproduces_printed_tables() {
        let a = alpha(2, 3);
        let i = i_of_sizes(&a, &[2, 1, 3, 2]).unwrap();
        let p = forward_program(&i).unwrap();
        assert_eq!(p.signature(), vec![0, 1, 2]);
        let printed = [
            rows(&["000", "000", "011", "010", "100", "100", "111", "111"]),
            rows(&["000", "000", "001", "010", "110", "110", "111", "111"]),
            rows(&["000", "000", "001", "010", "010", "010", "011", "011"]),
        ];
        for (k, expected) in printed.iter().enumerate() {
            let states: Vec<usize> = a.indices().map(|x| p.trace(x)[k + 1]).collect();
            assert_eq!(&states, expected, "after p_{}", k + 1);
        }
    }

    #[test]
    fn forward_program_identity_leaves_components() {
        let a = alpha(3, 2);
        let p = forward_program(&Mapping::identity(a.clone())).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.assignments().iter().all(|asg| asg.is_identity(&a)));
    }

    #[test]
    fn forward_program_block_sizes() {
        let a = alpha(2, 3);
        let i = i_of_sizes(&a, &[1, 3, 2, 2]).unwrap();
        assert_eq!(forward_program(&i).unwrap().execute_all(), i);
    }

    #[test]
    fn backward_restricted_examples() {
        let a = alpha(2, 3);
        let i = Mapping::new(a.clone(), vec![1, 3, 4, 7, 0, 0, 0, 0]).unwrap();
        let p = backward_restricted_program(&i, 0..=3).unwrap();
        assert_eq!(p.signature(), vec![2, 1, 0]);
        for j in 0..=3 {
            assert_eq!(p.execute_index(j), i.apply(j));
        }
        let id = Mapping::identity(a.clone());
        let p = backward_restricted_program(&id, 0..=7).unwrap();
        assert_eq!(p.execute_all(), id);
    }

    #[test]
    fn backward_restricted_rejects_disorder() {
        let a = alpha(2, 2);
        let i = Mapping::new(a, vec![2, 1, 3, 3]).unwrap();
        assert_eq!(backward_restricted_program(&i, 0..=2), Err(Error::NotOrderPreserving));
        assert_eq!(backward_restricted_program(&i, 2..=3), Err(Error::NotOrderPreserving));
        assert!(backward_restricted_program(&i, 1..=2).is_ok());
    }

    #[test]
    fn backward_restricted_random_ranges() {
        let mut r = rng(8);
        use rand::Rng;
        for (s, n) in [(2, 4), (3, 3), (5, 2)] {
            let a = alpha(s, n);
            for _ in 0..50 {
                let lo = r.random_range(0..a.size());
                let hi = r.random_range(lo..a.size());
                let mut pts: Vec<usize> = (0..a.size()).collect();
                use rand::seq::SliceRandom;
                pts.shuffle(&mut r);
                let mut chosen = pts[..hi - lo + 1].to_vec();
                chosen.sort_unstable();
                let mut images = vec![0; a.size()];
                for (k, j) in (lo..=hi).enumerate() {
                    images[j] = chosen[k];
                }
                let i = Mapping::new(a.clone(), images).unwrap();
                let p = backward_restricted_program(&i, lo..=hi).unwrap();
                for j in lo..=hi {
                    assert_eq!(p.execute_index(j), i.apply(j));
                }
            }
        }
    }

    #[test]
    fn factorisation_of_bijection_has_identity_collapse() {
        let a = alpha(3, 2);
        let e = crate::random::random_bijection(&a, &mut rng(2));
        let fact = p_factorise(&e, &ClassOrder::ByImage).unwrap();
        assert_eq!(fact.i, Mapping::identity(a));
        assert_eq!(fact.f.compose(&fact.g).unwrap(), e);
    }

    #[test]
    fn factorisation_of_constant() {
        let a = alpha(2, 2);
        let e = Mapping::new(a, vec![2; 4]).unwrap();
        let fact = p_factorise(&e, &ClassOrder::ByImage).unwrap();
        assert_eq!(fact.sizes(&e), vec![4]);
        assert_eq!(fact.f.apply(0), 2);
        assert!(fact.f.is_bijective() && fact.g.is_bijective());
    }

    #[test]
    fn factorisation_composes_back() {
        let a = alpha(2, 3);
        let mut r = rng(4);
        for _ in 0..100 {
            let e = random_mapping(&a, &mut r);
            let fact = p_factorise(&e, &ClassOrder::ByImage).unwrap();
            let back = fact.f.compose(&fact.i).unwrap().compose(&fact.g).unwrap();
            assert_eq!(back, e);
        }
    }

    #[test]
    fn factorisation_with_explicit_slots() {
        let a = alpha(2, 2);
        let e = Mapping::new(a, vec![3, 1, 3, 3]).unwrap();
        let fact = p_factorise(&e, &ClassOrder::Slots(vec![Some(3), None, Some(1)])).unwrap();
        assert_eq!(fact.i.images(), &[0, 0, 0, 2]);
        assert_eq!(fact.f.compose(&fact.i).unwrap().compose(&fact.g).unwrap(), e);
        let bad = [
            vec![Some(3)],
            vec![Some(3), Some(3), Some(1)],
            vec![Some(3), Some(0), Some(1)],
            vec![None, None, None, Some(3), Some(1)],
        ];
        for slots in bad {
            assert!(matches!(p_factorise(&e, &ClassOrder::Slots(slots)), Err(Error::InvalidOrdering(_))));
        }
        assert!(matches!(
            compile_5n_with(&e, &ClassOrder::Slots(vec![Some(3), None, Some(1)])),
            Err(Error::InvalidOrdering(_))
        ));
    }

    fn check(p: &InSituProgram, e: &Mapping, bound: usize, sig: &[usize]) {
        assert_eq!(&p.execute_all(), e);
        assert!(p.len() <= bound, "length {} > {bound}", p.len());
        assert_eq!(p.signature(), sig);
    }

    #[test]
    fn compilers_on_identity() {
        for (s, n) in [(2, 1), (2, 3), (3, 2)] {
            let a = alpha(s, n);
            let e = Mapping::identity(a);
            check(&compile_5n(&e).unwrap(), &e, 5 * n - 4, &signature_5n(n));
            check(&compile_4n_sorted(&e).unwrap(), &e, 4 * n - 3, &signature_4n(n));
        }
    }

    #[test]
    fn compilers_on_all_two_bit_mappings() {
        let a = alpha(2, 2);
        for code in 0..256usize {
            let images = (0..4).map(|k| (code >> (2 * k)) & 3).collect();
            let e = Mapping::new(a.clone(), images).unwrap();
            check(&compile_5n(&e).unwrap(), &e, 6, &signature_5n(2));
            check(&compile_4n_sorted(&e).unwrap(), &e, 5, &signature_4n(2));
        }
    }

    #[test]
    fn compilers_on_random_ternary() {
        let a = alpha(3, 2);
        let mut r = rng(6);
        for _ in 0..200 {
            let e = random_mapping(&a, &mut r);
            check(&compile_5n(&e).unwrap(), &e, 6, &signature_5n(2));
            check(&compile_4n_sorted(&e).unwrap(), &e, 5, &signature_4n(2));
        }
    }

    #[test]
    fn sorted_compiler_on_given_class_sizes() {
        let a = alpha(2, 3);
        let e = Mapping::new(a, vec![4, 1, 6, 4, 3, 1, 6, 4]).unwrap();
        let fact = p_factorise(&e, &ClassOrder::ByImage).unwrap();
        assert_eq!(fact.sizes(&e), vec![2, 1, 3, 2]);
        check(&compile_4n_sorted(&e).unwrap(), &e, 9, &signature_4n(3));
    }

    #[test]
    fn signatures() {
        assert_eq!(signature_5n(1), vec![0]);
        assert_eq!(signature_4n(1), vec![0]);
        assert_eq!(signature_5n(2).len(), 6);
        assert_eq!(signature_4n(3), vec![0, 1, 2, 1, 0, 1, 2, 1, 0]);
        for n in 1..8 {
            assert_eq!(signature_5n(n).len(), 5 * n - 4);
            assert_eq!(signature_4n(n).len(), 4 * n - 3);
        }
    }
}
