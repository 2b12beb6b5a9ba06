//! Bijections as in-situ programs of length `2n-1` with signature `1..n..1`,
//! i.e. routings of the Beneš network.
//!
//! The construction peels off component 1. Inputs and outputs are grouped by
//! their suffix `(x_2, ..., x_n)`, which gives an `s`-regular bipartite
//! multigraph with one edge per input. A proper `s`-edge-colouring of that
//! graph assigns every input a colour: the first assignment writes the colour
//! into `x_1`, each colour class is a bijection on the suffixes routed
//! recursively on components `2..n`, and the last assignment writes the final
//! `y_1`, which is determined by the colour and the output suffix.

use crate::error::{Error, Result};
use crate::program::{Assignment, InSituProgram, Mapping};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    /// Index of the input vector the edge stands for.
    pub input: usize,
}

/// Bipartite multigraph between input suffix classes and output suffix classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixGraph {
    degree: usize,
    vertices: usize,
    edges: Vec<Edge>,
}

impl SuffixGraph {
    /// Graph with `vertices` vertices on each side; edge ids are positions in `edges`.
    pub fn new(degree: usize, vertices: usize, edges: Vec<Edge>) -> Self {
        SuffixGraph { degree, vertices, edges }
    }

    /// Suffix graph of a mapping: input `x` joins `x / s` to `e(x) / s`.
    pub fn of_mapping(e: &Mapping) -> Self {
        let s = e.alphabet().s();
        let edges = e
            .images()
            .iter()
            .enumerate()
            .map(|(x, &y)| Edge { left: x / s, right: y / s, input: x })
            .collect();
        SuffixGraph::new(s, e.alphabet().size() / s, edges)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn adjacency(&self) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
        let mut left = vec![Vec::with_capacity(self.degree); self.vertices];
        let mut right = vec![Vec::with_capacity(self.degree); self.vertices];
        for (id, e) in self.edges.iter().enumerate() {
            if e.left >= self.vertices || e.right >= self.vertices {
                return Err(Error::NotRegular(self.degree));
            }
            left[e.left].push(id);
            right[e.right].push(id);
        }
        let regular = left.iter().chain(right.iter()).all(|adj| adj.len() == self.degree);
        if self.degree == 0 || !regular {
            return Err(Error::NotRegular(self.degree));
        }
        Ok((left, right))
    }
}

/// Proper edge colouring with `degree` colours: every colour class is a
/// perfect matching. Degree 2 uses an Euler partition into alternating
/// cycles; other degrees extract perfect matchings one by one with
/// augmenting paths. Vertices and edges are scanned in increasing id order.
pub fn edge_color(g: &SuffixGraph) -> Result<Vec<usize>> {
    if g.degree == 2 {
        euler_two_coloring(g)
    } else {
        matching_coloring(g)
    }
}

fn euler_two_coloring(g: &SuffixGraph) -> Result<Vec<usize>> {
    let (left, right) = g.adjacency()?;
    let mut color: Vec<Option<usize>> = vec![None; g.edges.len()];
    for start in 0..g.edges.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        let (mut cur, mut at_right) = (start, true);
        loop {
            let adj = if at_right {
                &right[g.edges[cur].right]
            } else {
                &left[g.edges[cur].left]
            };
            let next = if adj[0] == cur { adj[1] } else { adj[0] };
            if color[next].is_some() {
                break;
            }
            color[next] = color[cur].map(|c| 1 - c);
            cur = next;
            at_right = !at_right;
        }
    }
    Ok(color.into_iter().map(|c| c.expect("every edge lies on a cycle")).collect())
}

pub(crate) fn matching_coloring(g: &SuffixGraph) -> Result<Vec<usize>> {
    let (left, _) = g.adjacency()?;
    let mut color: Vec<Option<usize>> = vec![None; g.edges.len()];
    for c in 0..g.degree {
        let matching = perfect_matching(g, &left, &color);
        for (u, e) in matching.into_iter().enumerate() {
            let e = e.unwrap_or_else(|| panic!("regular bipartite graph lacks a match for {u}"));
            color[e] = Some(c);
        }
    }
    Ok(color.into_iter().map(|c| c.expect("all edges coloured")).collect())
}

/// Perfect matching among the uncoloured edges (Kuhn's algorithm, iterative).
fn perfect_matching(g: &SuffixGraph, left: &[Vec<usize>], color: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut match_left: Vec<Option<usize>> = vec![None; g.vertices];
    let mut match_right: Vec<Option<usize>> = vec![None; g.vertices];
    let mut visited = vec![false; g.vertices];
    for root in 0..g.vertices {
        visited.iter_mut().for_each(|v| *v = false);
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut path: Vec<usize> = Vec::new();
        while let Some(frame) = stack.last_mut() {
            let (u, pos) = (frame.0, frame.1);
            if pos == left[u].len() {
                stack.pop();
                path.pop();
                continue;
            }
            frame.1 += 1;
            let e = left[u][pos];
            let v = g.edges[e].right;
            if color[e].is_some() || visited[v] {
                continue;
            }
            visited[v] = true;
            path.push(e);
            match match_right[v] {
                None => {
                    for &pe in &path {
                        match_right[g.edges[pe].right] = Some(pe);
                        match_left[g.edges[pe].left] = Some(pe);
                    }
                    break;
                }
                Some(me) => stack.push((g.edges[me].left, 0)),
            }
        }
    }
    match_left
}

/// Signature `1, 2, ..., n, n-1, ..., 1` (zero-based).
pub fn benes_signature(n: usize) -> Vec<usize> {
    (0..n).chain((0..n.saturating_sub(1)).rev()).collect()
}

/// Program of length `2n-1` and signature `1..n..1` computing the bijection `e`.
///
/// Identity assignments are kept so the signature is always exact.
pub fn route_bijection(e: &Mapping) -> Result<InSituProgram> {
    if !e.is_bijective() {
        return Err(Error::NotBijective);
    }
    let a = e.alphabet();
    let tables = route(a.s(), a.n(), e.images())?;
    let assignments = benes_signature(a.n())
        .into_iter()
        .zip(tables)
        .map(|(t, table)| Assignment::table(t, table))
        .collect();
    InSituProgram::new(a.clone(), assignments)
}

/// Program of length `2n-1` with signature `n..1..n` computing the bijection `e`.
pub fn route_bijection_reversed(e: &Mapping) -> Result<InSituProgram> {
    Ok(route_bijection(&e.reverse_components())?.reverse_components())
}

fn route(s: usize, n: usize, perm: &[usize]) -> Result<Vec<Vec<usize>>> {
    if n == 1 {
        return Ok(vec![perm.to_vec()]);
    }
    let size = perm.len();
    let sub = size / s;
    let edges = perm
        .iter()
        .enumerate()
        .map(|(x, &y)| Edge { left: x / s, right: y / s, input: x })
        .collect();
    let colors = edge_color(&SuffixGraph::new(s, sub, edges))?;

    let mut first = vec![0; size];
    let mut last = vec![0; size];
    let mut classes = vec![vec![0; sub]; s];
    for x in 0..size {
        let (c, from, to) = (colors[x], x / s, perm[x] / s);
        first[x] = c;
        classes[c][from] = to;
        // after the middle stages the state is (c, output suffix)
        last[c + s * to] = perm[x] % s;
    }

    let routed = classes
        .iter()
        .map(|sigma| route(s, n - 1, sigma))
        .collect::<Result<Vec<_>>>()?;
    let mut tables = Vec::with_capacity(2 * n - 1);
    tables.push(first);
    for k in 0..2 * (n - 1) - 1 {
        let table = (0..size).map(|z| routed[z % s][k][z / s]).collect();
        tables.push(table);
    }
    tables.push(last);
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Alphabet;
    use crate::random::{random_bijection, rng};
    use itertools::Itertools;
    use rand::seq::SliceRandom;

    fn assert_proper(g: &SuffixGraph, colors: &[usize]) {
        for c in 0..g.degree() {
            let mut left = vec![0; g.vertices()];
            let mut right = vec![0; g.vertices()];
            for (e, &col) in g.edges().iter().zip(colors) {
                if col == c {
                    left[e.left] += 1;
                    right[e.right] += 1;
                }
            }
            assert!(left.iter().chain(right.iter()).all(|&d| d == 1), "colour {c} is not a perfect matching");
        }
    }

    fn edge(left: usize, right: usize, input: usize) -> Edge {
        Edge { left, right, input }
    }

    #[test]
    fn degree_one_graph() {
        let g = SuffixGraph::new(1, 3, vec![edge(0, 2, 0), edge(1, 0, 1), edge(2, 1, 2)]);
        assert_eq!(edge_color(&g).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn four_cycle_alternates() {
        let g = SuffixGraph::new(2, 2, vec![edge(0, 0, 0), edge(0, 1, 1), edge(1, 1, 2), edge(1, 0, 3)]);
        let colors = edge_color(&g).unwrap();
        assert_eq!(colors, vec![0, 1, 0, 1]);
        assert_eq!(matching_coloring(&g).map(|c| c.len()), Ok(4));
    }

    #[test]
    fn parallel_edges() {
        let g = SuffixGraph::new(2, 2, vec![edge(0, 1, 0), edge(1, 0, 1), edge(0, 1, 2), edge(1, 0, 3)]);
        let colors = edge_color(&g).unwrap();
        assert_proper(&g, &colors);
    }

    fn random_regular(degree: usize, vertices: usize, seed: u64) -> SuffixGraph {
        let mut r = rng(seed);
        let mut edges = Vec::new();
        for _ in 0..degree {
            let mut perm: Vec<usize> = (0..vertices).collect();
            perm.shuffle(&mut r);
            for (u, &v) in perm.iter().enumerate() {
                edges.push(edge(u, v, edges.len()));
            }
        }
        edges.shuffle(&mut r);
        SuffixGraph::new(degree, vertices, edges)
    }

    #[test]
    fn random_three_regular_nine_by_nine() {
        for seed in 0..50 {
            let g = random_regular(3, 9, seed);
            let colors = edge_color(&g).unwrap();
            assert!(colors.iter().all(|&c| c < 3));
            assert_proper(&g, &colors);
        }
    }

    #[test]
    fn both_colourings_are_proper() {
        for seed in 0..50 {
            let g = random_regular(2, 16, seed);
            assert_proper(&g, &euler_two_coloring(&g).unwrap());
            assert_proper(&g, &matching_coloring(&g).unwrap());
            let g = random_regular(5, 20, seed);
            assert_proper(&g, &edge_color(&g).unwrap());
        }
    }

    #[test]
    fn irregular_graph_rejected() {
        let g = SuffixGraph::new(2, 2, vec![edge(0, 0, 0), edge(0, 0, 1), edge(1, 1, 2), edge(0, 1, 3)]);
        assert_eq!(edge_color(&g), Err(Error::NotRegular(2)));
        let g = SuffixGraph::new(3, 2, vec![edge(0, 0, 0), edge(1, 1, 1)]);
        assert_eq!(edge_color(&g), Err(Error::NotRegular(3)));
    }

    fn check_routing(e: &Mapping) {
        let p = route_bijection(e).unwrap();
        let n = e.alphabet().n();
        assert_eq!(p.len(), 2 * n - 1);
        assert_eq!(p.signature(), benes_signature(n));
        assert_eq!(&p.execute_all(), e);
    }

    #[test]
    fn identity_routes() {
        for (s, n) in [(2, 1), (2, 3), (3, 2), (4, 3)] {
            check_routing(&Mapping::identity(Alphabet::new(s, n).unwrap()));
        }
    }

    #[test]
    fn all_bijections_of_two_bits() {
        let a = Alphabet::boolean(2).unwrap();
        let mut count = 0;
        for perm in (0..4).permutations(4) {
            check_routing(&Mapping::new(a.clone(), perm).unwrap());
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn random_bijections_small_alphabets() {
        let mut r = rng(11);
        for s in 2..=4 {
            for n in 1..=3 {
                let a = Alphabet::new(s, n).unwrap();
                for _ in 0..30 {
                    check_routing(&random_bijection(&a, &mut r));
                }
            }
        }
    }

    #[test]
    fn reversed_signature_variant() {
        let mut r = rng(5);
        let a = Alphabet::new(3, 3).unwrap();
        for _ in 0..20 {
            let e = random_bijection(&a, &mut r);
            let p = route_bijection_reversed(&e).unwrap();
            assert_eq!(p.signature(), vec![2, 1, 0, 1, 2]);
            assert_eq!(p.execute_all(), e);
        }
    }

    #[test]
    fn rejects_non_bijection() {
        let a = Alphabet::boolean(2).unwrap();
        let e = Mapping::new(a, vec![0, 0, 1, 2]).unwrap();
        assert_eq!(route_bijection(&e), Err(Error::NotBijective));
    }

    #[test]
    fn routing_is_deterministic() {
        let a = Alphabet::new(3, 3).unwrap();
        let e = random_bijection(&a, &mut rng(99));
        assert_eq!(route_bijection(&e).unwrap(), route_bijection(&e).unwrap());
    }

    #[test]
    fn boolean_reversal_inverts() {
        let a = Alphabet::boolean(3).unwrap();
        let mut r = rng(3);
        for _ in 0..50 {
            let e = random_bijection(&a, &mut r);
            let p = route_bijection(&e).unwrap();
            let back = p.reverse_boolean_bijection().unwrap();
            assert_eq!(back.execute_all(), e.inverse().unwrap());
            assert_eq!(p.concat(&back).unwrap().execute_all(), Mapping::identity(a.clone()));
        }
    }

    #[test]
    fn regroup_two_bit_registers() {
        let a = Alphabet::boolean(4).unwrap();
        let mut r = rng(21);
        for _ in 0..20 {
            let e = random_bijection(&a, &mut r);
            let p = route_bijection(&e).unwrap();
            let g = p.regroup(2).unwrap();
            assert_eq!(g.alphabet(), &Alphabet::new(4, 2).unwrap());
            assert_eq!(g.len(), 3);
            assert_eq!(g.signature(), vec![0, 1, 0]);
            assert_eq!(g.execute_all().images(), e.images());
        }
    }
}
