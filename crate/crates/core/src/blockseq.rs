//! The flexible boolean method: block-sequences and suffix-compatible collapses.
//!
//! When the class sizes of a partition-sequence form a block-sequence, the
//! collapse `I_P` preserves suffixes, and such a mapping composes with any
//! program of signature `1..n` into another program of signature `1..n`. This
//! absorbs the first half of `F` into the collapse step and brings a general
//! boolean mapping down to `4n-3` assignments while leaving a lot of freedom
//! in the order of the classes.

use crate::benes::route_bijection;
use crate::error::{Error, Result};
use crate::factor::{p_factorise, prefix_program, ClassOrder, PFactorisation};
use crate::program::{InSituProgram, Mapping};

/// Every aligned block of size `2^i` sums to a multiple of `2^i`.
pub fn is_block_sequence(values: &[u64]) -> Result<bool> {
    let n = log2_exact(values.len())?;
    for level in 0..=n {
        let width = 1usize << level;
        for block in values.chunks(width) {
            if block.iter().sum::<u64>() % width as u64 != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::BadLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// A validated block-sequence with its implicit binary block tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSequence {
    values: Vec<u64>,
}

impl BlockSequence {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if !is_block_sequence(&values)? {
            return Err(Error::InvalidOrdering(format!("{values:?} is not a block-sequence")));
        }
        Ok(BlockSequence { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    /// Block values per level: level `i` lists `sum(block) / 2^i` for each
    /// aligned block of size `2^i`.
    pub fn levels(&self) -> Vec<Vec<u64>> {
        (0..=self.n())
            .map(|level| {
                let width = 1usize << level;
                self.values
                    .chunks(width)
                    .map(|b| b.iter().sum::<u64>() / width as u64)
                    .collect()
            })
            .collect()
    }
}

/// A reordering result: `sequence.values()[l] == input[perm[l]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reordered {
    pub sequence: BlockSequence,
    pub perm: Vec<usize>,
}

struct Block {
    value: u64,
    leaves: Vec<usize>,
}

/// Reorders `2^n` non-negative integers summing to `2^n` into a block-sequence.
///
/// Blocks are merged level by level. At each level the blocks of each parity
/// are sorted by value (ties by position) and paired consecutively, smaller
/// first; the merged block has value `(v + v') / 2` and new blocks are laid
/// out by their leftmost original position.
pub fn make_block_sequence(values: &[u64]) -> Result<Reordered> {
    log2_exact(values.len())?;
    let total: u64 = values.iter().sum();
    if total != values.len() as u64 {
        return Err(Error::BadSum { got: total, expected: values.len() as u64 });
    }
    let mut blocks: Vec<Block> = values
        .iter()
        .enumerate()
        .map(|(pos, &value)| Block { value, leaves: vec![pos] })
        .collect();

    while blocks.len() > 1 {
        let (mut even, mut odd): (Vec<Block>, Vec<Block>) = blocks.into_iter().partition(|b| b.value % 2 == 0);
        let mut next = Vec::with_capacity((even.len() + odd.len()) / 2);
        for class in [&mut even, &mut odd] {
            // the level sum is even, so each parity class has even size
            debug_assert_eq!(class.len() % 2, 0);
            class.sort_by_key(|b| (b.value, *b.leaves.iter().min().unwrap()));
            let mut it = class.drain(..);
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                let mut leaves = a.leaves;
                leaves.extend(b.leaves);
                next.push(Block { value: (a.value + b.value) / 2, leaves });
            }
        }
        next.sort_by_key(|b| *b.leaves.iter().min().unwrap());
        blocks = next;
    }

    let perm = blocks.pop().map(|b| b.leaves).unwrap_or_default();
    let sequence = BlockSequence::new(perm.iter().map(|&p| values[p]).collect())?;
    Ok(Reordered { sequence, perm })
}

/// Swaps children in the block tree. `swaps` has one flag per internal node
/// in heap order: root first, then each level left to right.
pub fn permute_block_tree(b: &BlockSequence, swaps: &[bool]) -> Result<Reordered> {
    let leaves = b.values.len();
    if swaps.len() != leaves - 1 {
        return Err(Error::BadChoice { got: swaps.len(), expected: leaves - 1 });
    }
    fn walk(node: usize, lo: usize, len: usize, swaps: &[bool], out: &mut Vec<usize>) {
        if len == 1 {
            out.push(lo);
            return;
        }
        let half = len / 2;
        let (first, second) = if swaps[node] { ((2 * node + 2, lo + half), (2 * node + 1, lo)) } else { ((2 * node + 1, lo), (2 * node + 2, lo + half)) };
        walk(first.0, first.1, half, swaps, out);
        walk(second.0, second.1, half, swaps, out);
    }
    let mut perm = Vec::with_capacity(leaves);
    walk(0, 0, leaves, swaps, &mut perm);
    let sequence = BlockSequence::new(perm.iter().map(|&p| b.values[p]).collect())?;
    Ok(Reordered { sequence, perm })
}

/// Two inputs sharing their suffix `(x_k, ..., x_n)` whose images do not,
/// reported as `(x, x', k)` with `k` one-based.
pub fn suffix_witness(i: &Mapping) -> Result<Option<(usize, usize, usize)>> {
    let a = i.alphabet();
    if a.s() != 2 {
        return Err(Error::NotBoolean(a.s()));
    }
    for k in 1..=a.n() {
        let shift = k - 1;
        let mut seen: Vec<Option<usize>> = vec![None; a.size() >> shift];
        for x in a.indices() {
            match seen[x >> shift] {
                None => seen[x >> shift] = Some(x),
                Some(first) if (i.apply(first) >> shift) != (i.apply(x) >> shift) => {
                    return Ok(Some((first, x, k)));
                }
                Some(_) => {}
            }
        }
    }
    Ok(None)
}

pub fn is_suffix_compatible(i: &Mapping) -> Result<bool> {
    Ok(suffix_witness(i)?.is_none())
}

/// Program of signature `1..n` computing `B ∘ I`, where `B` is computed by the
/// signature-`1..n` program `b` and `I` is suffix-compatible.
pub fn compose_forward_program(i: &Mapping, b: &InSituProgram) -> Result<InSituProgram> {
    if b.alphabet() != i.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let n = i.alphabet().n();
    if b.signature() != (0..n).collect::<Vec<_>>() {
        return Err(Error::BadSignature(format!(
            "expected 1..{n}, got {}",
            crate::program::format_signature(&b.signature())
        )));
    }
    if !is_suffix_compatible(i)? {
        return Err(Error::NotSuffixCompatible);
    }
    let target = b.execute_all().compose(i)?;
    prefix_program(&target).ok_or(Error::NotSuffixCompatible)
}

/// Factorisation whose slot sizes form a block-sequence. Classes of equal
/// size fill the slots of that size in increasing image order.
pub fn flexible_factorisation(e: &Mapping, swaps: Option<&[bool]>) -> Result<PFactorisation> {
    let a = e.alphabet();
    if a.s() != 2 {
        return Err(Error::NotBoolean(a.s()));
    }
    let classes = e.preimage_classes();
    let mut sizes: Vec<u64> = classes.values().map(|c| c.len() as u64).collect();
    sizes.resize(a.size(), 0);
    let mut sequence = make_block_sequence(&sizes)?.sequence;
    if let Some(swaps) = swaps {
        sequence = permute_block_tree(&sequence, swaps)?.sequence;
    }

    let mut by_size: std::collections::BTreeMap<u64, std::collections::VecDeque<usize>> = Default::default();
    for (&y, class) in &classes {
        by_size.entry(class.len() as u64).or_default().push_back(y);
    }
    let slots = sequence
        .values()
        .iter()
        .map(|&v| {
            if v == 0 {
                None
            } else {
                by_size.get_mut(&v).and_then(|q| q.pop_front())
            }
        })
        .collect();
    p_factorise(e, &ClassOrder::Slots(slots))
}

/// Flexible `4n-3` compiler for boolean mappings: `G` in `1..n..1`, then
/// `B ∘ I` in `1..n` where `B` is the first half of the program of `F`, then
/// the remaining `n-1..1` half of `F`.
pub fn compile_4n_flexible(e: &Mapping, swaps: Option<&[bool]>) -> Result<InSituProgram> {
    let fact = flexible_factorisation(e, swaps)?;
    let n = e.alphabet().n();
    let g = route_bijection(&fact.g)?;
    let f = route_bijection(&fact.f)?;
    let b = f.slice(0..n);
    let rest = f.slice(n..f.len());
    let bi = compose_forward_program(&fact.i, &b)?;
    Ok(g.concat(&bi)?.concat(&rest)?.merge_adjacent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{i_of_sizes, signature_4n};
    use crate::program::Alphabet;
    use crate::random::{random_mapping, rng};
    use rand::Rng;

    const EXAMPLE_SORTED: [u64; 16] = [4, 0, 0, 0, 1, 1, 1, 1, 1, 1, 3, 3, 0, 0, 0, 0];

    fn rows(bits: &[&str]) -> Vec<usize> {
        bits.iter().map(|b| usize::from_str_radix(b, 2).unwrap()).collect()
    }

    #[test]
    fn block_sequence_verdicts() {
        assert!(is_block_sequence(&[1, 3, 2, 2]).unwrap());
        assert!(!is_block_sequence(&[2, 1, 3, 2]).unwrap());
        assert!(is_block_sequence(&EXAMPLE_SORTED).unwrap());
        for n in 0..6 {
            assert!(is_block_sequence(&vec![1; 1 << n]).unwrap());
        }
        assert_eq!(is_block_sequence(&[1, 1, 1]), Err(Error::BadLength(3)));
        assert_eq!(is_block_sequence(&[]), Err(Error::BadLength(0)));
    }

    #[test]
    fn make_block_sequence_from_example_multiset() {
        let input = [4, 1, 1, 1, 1, 1, 1, 3, 3, 0, 0, 0, 0, 0, 0, 0];
        let r = make_block_sequence(&input).unwrap();
        assert!(is_block_sequence(r.sequence.values()).unwrap());
        let mut got = r.sequence.values().to_vec();
        let mut want = input.to_vec();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
        for (l, &p) in r.perm.iter().enumerate() {
            assert_eq!(r.sequence.values()[l], input[p]);
        }
    }

    #[test]
    fn make_block_sequence_single_heavy_value() {
        let r = make_block_sequence(&[8, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        assert!(is_block_sequence(r.sequence.values()).unwrap());
        // the 8 is paired last, behind a 0
        assert_eq!(r.sequence.values(), &[0, 0, 0, 0, 0, 0, 0, 8]);
    }

    #[test]
    fn make_block_sequence_errors() {
        assert_eq!(make_block_sequence(&[1, 2, 1]), Err(Error::BadLength(3)));
        assert_eq!(make_block_sequence(&[1, 2, 0, 0]), Err(Error::BadSum { got: 3, expected: 4 }));
    }

    #[test]
    fn swapping_root_children() {
        let b = BlockSequence::new(EXAMPLE_SORTED.to_vec()).unwrap();
        let mut swaps = vec![false; 15];
        swaps[0] = true;
        let r = permute_block_tree(&b, &swaps).unwrap();
        assert_eq!(r.sequence.values(), &[1, 1, 3, 3, 0, 0, 0, 0, 4, 0, 0, 0, 1, 1, 1, 1]);
        let unchanged = permute_block_tree(&b, &[false; 15]).unwrap();
        assert_eq!(unchanged.sequence, b);
        assert_eq!(permute_block_tree(&b, &[false; 3]), Err(Error::BadChoice { got: 3, expected: 15 }));
    }

    #[test]
    fn levels_of_example() {
        let b = BlockSequence::new(EXAMPLE_SORTED.to_vec()).unwrap();
        let levels = b.levels();
        assert_eq!(levels[2], vec![1, 1, 2, 0]);
        assert_eq!(levels[3], vec![1, 1]);
        assert_eq!(levels[4], vec![1]);
    }

    #[test]
    fn every_tree_choice_keeps_block_property() {
        let mut r = rng(1);
        for n in 1..=3usize {
            let len = 1usize << n;
            for _ in 0..10 {
                let values = random_composition(len, &mut r);
                let b = make_block_sequence(&values).unwrap().sequence;
                for mask in 0u32..(1 << (len - 1)) {
                    let swaps: Vec<bool> = (0..len - 1).map(|k| mask >> k & 1 == 1).collect();
                    let p = permute_block_tree(&b, &swaps).unwrap();
                    assert!(is_block_sequence(p.sequence.values()).unwrap());
                }
            }
        }
    }

    fn random_composition(len: usize, r: &mut impl Rng) -> Vec<u64> {
        let mut v = vec![0u64; len];
        for _ in 0..len {
            v[r.random_range(0..len)] += 1;
        }
        v
    }

    #[test]
    fn suffix_compatibility_examples() {
        let a = Alphabet::boolean(3).unwrap();
        assert!(is_suffix_compatible(&i_of_sizes(&a, &[1, 3, 2, 2]).unwrap()).unwrap());
        let bad = i_of_sizes(&a, &[2, 1, 3, 2]).unwrap();
        assert!(!is_suffix_compatible(&bad).unwrap());
        // (0,1,0) has index 2 and (1,1,0) index 3
        assert_eq!(suffix_witness(&bad).unwrap(), Some((2, 3, 2)));
        assert!(is_suffix_compatible(&Mapping::identity(a)).unwrap());
        let t = Mapping::identity(Alphabet::new(3, 2).unwrap());
        assert_eq!(is_suffix_compatible(&t), Err(Error::NotBoolean(3)));
    }

    #[test]
    fn block_sizes_give_suffix_compatible_collapse() {
        let mut r = rng(2);
        for n in 1..=4usize {
            let a = Alphabet::boolean(n).unwrap();
            for _ in 0..50 {
                let values = random_composition(a.size(), &mut r);
                let seq = make_block_sequence(&values).unwrap().sequence;
                let sizes: Vec<usize> = seq.values().iter().map(|&v| v as usize).collect();
                let i = i_of_sizes(&a, &sizes).unwrap();
                assert!(is_suffix_compatible(&i).unwrap());
            }
        }
    }

    #[test]
    fn composed_program_reproduces_printed_tables() {
        let a = Alphabet::boolean(3).unwrap();
        let i = i_of_sizes(&a, &[1, 3, 2, 2]).unwrap();
        let b_map = Mapping::new(a.clone(), vec![0, 5, 3, 6, 2, 1, 4, 7]).unwrap();
        let b = prefix_program(&b_map).unwrap();
        assert_eq!(b.execute_all(), b_map);
        let p = compose_forward_program(&i, &b).unwrap();
        assert_eq!(p.signature(), vec![0, 1, 2]);
        assert_eq!(p.execute_all().images(), &[0, 5, 5, 5, 3, 3, 6, 6]);
        let printed = [
            rows(&["000", "001", "011", "011", "101", "101", "110", "110"]),
            rows(&["000", "001", "001", "001", "111", "111", "110", "110"]),
            rows(&["000", "101", "101", "101", "011", "011", "110", "110"]),
        ];
        for (k, expected) in printed.iter().enumerate() {
            let states: Vec<usize> = a.indices().map(|x| p.trace(x)[k + 1]).collect();
            assert_eq!(&states, expected, "after p_{}", k + 1);
        }
    }

    #[test]
    fn compose_with_identity_collapse() {
        let a = Alphabet::boolean(3).unwrap();
        let mut r = rng(12);
        let f = route_bijection(&crate::random::random_bijection(&a, &mut r)).unwrap();
        let b = f.slice(0..3);
        let p = compose_forward_program(&Mapping::identity(a), &b).unwrap();
        assert_eq!(p.execute_all(), b.execute_all());
    }

    #[test]
    fn compose_preconditions() {
        let a = Alphabet::boolean(3).unwrap();
        let f = route_bijection(&Mapping::identity(a.clone())).unwrap();
        let good = i_of_sizes(&a, &[1, 3, 2, 2]).unwrap();
        assert!(matches!(compose_forward_program(&good, &f), Err(Error::BadSignature(_))));
        let bad = i_of_sizes(&a, &[2, 1, 3, 2]).unwrap();
        assert_eq!(compose_forward_program(&bad, &f.slice(0..3)), Err(Error::NotSuffixCompatible));
    }

    #[test]
    fn random_suffix_compatible_compositions() {
        let mut r = rng(13);
        for n in 1..=4usize {
            let a = Alphabet::boolean(n).unwrap();
            for _ in 0..30 {
                let seq = make_block_sequence(&random_composition(a.size(), &mut r)).unwrap().sequence;
                let sizes: Vec<usize> = seq.values().iter().map(|&v| v as usize).collect();
                let i = i_of_sizes(&a, &sizes).unwrap();
                // any signature-1..n program, not only bijective ones
                let b = InSituProgram::new(
                    a.clone(),
                    (0..n)
                        .map(|k| {
                            let t = a.indices().map(|_| r.random_range(0..2)).collect();
                            crate::program::Assignment::table(k, t)
                        })
                        .collect(),
                )
                .unwrap();
                let p = compose_forward_program(&i, &b).unwrap();
                assert_eq!(p.execute_all(), b.execute_all().compose(&i).unwrap());
            }
        }
    }

    fn check(e: &Mapping, swaps: Option<&[bool]>) {
        let n = e.alphabet().n();
        let p = compile_4n_flexible(e, swaps).unwrap();
        assert_eq!(&p.execute_all(), e);
        assert!(p.len() <= 4 * n - 3);
        assert_eq!(p.signature(), signature_4n(n));
    }

    #[test]
    fn flexible_on_identity_and_all_two_bit_mappings() {
        for n in 1..=4 {
            check(&Mapping::identity(Alphabet::boolean(n).unwrap()), None);
        }
        let a = Alphabet::boolean(2).unwrap();
        for code in 0..256usize {
            let images = (0..4).map(|k| (code >> (2 * k)) & 3).collect();
            check(&Mapping::new(a.clone(), images).unwrap(), None);
        }
    }

    #[test]
    fn flexible_under_two_tree_choices() {
        let a = Alphabet::boolean(3).unwrap();
        // class sizes 1, 3, 2, 2 for images 0, 2, 5, 7
        let e = Mapping::new(a, vec![0, 2, 2, 2, 5, 5, 7, 7]).unwrap();
        let plain = flexible_factorisation(&e, None).unwrap();
        let mut swaps = vec![false; 7];
        swaps[0] = true;
        swaps[1] = true;
        let swapped = flexible_factorisation(&e, Some(&swaps)).unwrap();
        assert_ne!(plain.slots, swapped.slots);
        check(&e, None);
        check(&e, Some(&swaps));
    }

    #[test]
    fn flexible_rejects_non_boolean() {
        let e = Mapping::identity(Alphabet::new(3, 2).unwrap());
        assert_eq!(compile_4n_flexible(&e, None), Err(Error::NotBoolean(3)));
    }

    #[test]
    fn flexible_on_random_mappings() {
        let mut r = rng(14);
        for n in 2..=5 {
            let a = Alphabet::boolean(n).unwrap();
            for _ in 0..40 {
                check(&random_mapping(&a, &mut r), None);
            }
        }
    }
}
