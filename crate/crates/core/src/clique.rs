//! Vertex-weighted undirected graphs and an exact maximum-weight clique solver.
//!
//! Ties are resolved toward the lexicographically smallest sorted list of
//! vertex ids, so the empty clique wins whenever no nonempty clique has a
//! positive weight. Weights within [`WEIGHT_TOLERANCE`] of each other are
//! treated as equal.

use std::fmt::{self, Write as _};

use thiserror::Error;

/// Two clique weights closer than this are considered tied.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Vertex-count guard for [`brute_force_clique`].
pub const BRUTE_FORCE_LIMIT: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliqueError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("brute force is limited to {BRUTE_FORCE_LIMIT} vertices, graph has {0}")]
    TooLarge(usize),
}

/// Dense bit row over vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn first(&self) -> Option<usize> {
        self.ones().next()
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    /// Clears every bit at or below `i`.
    fn clear_through(&mut self, i: usize) {
        let word = i / 64;
        for w in &mut self.0[..word] {
            *w = 0;
        }
        let bit = i % 64;
        self.0[word] &= if bit == 63 { 0 } else { !0u64 << (bit + 1) };
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Undirected graph with a real weight and an opaque label per vertex.
/// Vertex ids are insertion indices.
#[derive(Clone, Debug)]
pub struct WeightedGraph<L> {
    weights: Vec<f64>,
    labels: Vec<L>,
    adjacency: Vec<Bits>,
}

impl<L> Default for WeightedGraph<L> {
    fn default() -> Self {
        Self {
            weights: Vec::new(),
            labels: Vec::new(),
            adjacency: Vec::new(),
        }
    }
}

impl<L> WeightedGraph<L> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from labels, weights and an adjacency predicate that is
    /// evaluated once per unordered pair.
    pub fn from_fn(vertices: Vec<(f64, L)>, mut adjacent: impl FnMut(&L, &L) -> bool) -> Self {
        let n = vertices.len();
        let (weights, labels): (Vec<f64>, Vec<L>) = vertices.into_iter().unzip();
        let mut adjacency = vec![Bits::zeros(n); n];
        for a in 0..n {
            for b in (a + 1)..n {
                if adjacent(&labels[a], &labels[b]) {
                    adjacency[a].set(b);
                    adjacency[b].set(a);
                }
            }
        }
        Self {
            weights,
            labels,
            adjacency,
        }
    }

    pub fn add_vertex(&mut self, weight: f64, label: L) -> usize {
        let id = self.weights.len();
        self.weights.push(weight);
        self.labels.push(label);
        let n = id + 1;
        let words = n.div_ceil(64);
        for row in &mut self.adjacency {
            row.0.resize(words, 0);
        }
        self.adjacency.push(Bits::zeros(n));
        id
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), CliqueError> {
        let n = self.len();
        if a >= n {
            return Err(CliqueError::UnknownVertex(a));
        }
        if b >= n {
            return Err(CliqueError::UnknownVertex(b));
        }
        if a == b {
            return Err(CliqueError::SelfLoop(a));
        }
        self.adjacency[a].set(b);
        self.adjacency[b].set(a);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn label(&self, v: usize) -> &L {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adjacency[a].get(b)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.ones().count()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |a| self.adjacency[a].ones().filter(move |&b| b > a).map(move |b| (a, b)))
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(k, &a)| members[k + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Calls `visit` on every clique (including the empty one) in
    /// lexicographic order of sorted member lists.
    pub fn for_each_clique(&self, mut visit: impl FnMut(&[usize])) {
        let mut all = Bits::zeros(self.len());
        for v in 0..self.len() {
            all.set(v);
        }
        let mut stack = Vec::new();
        self.cliques_rec(&all, &mut stack, &mut visit);
    }

    fn cliques_rec(&self, cand: &Bits, stack: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        visit(stack);
        for v in cand.ones() {
            let mut next = cand.and(&self.adjacency[v]);
            next.clear_through(v);
            stack.push(v);
            self.cliques_rec(&next, stack, visit);
            stack.pop();
        }
    }

    /// Plain-text dump: one `v <id> <weight> <label>` line per vertex, then
    /// one `e <a> <b>` line per edge with `a < b`.
    pub fn to_edge_list(&self) -> String
    where
        L: fmt::Debug,
    {
        let mut out = String::new();
        for v in 0..self.len() {
            writeln!(out, "v {v} {} {:?}", self.weights[v], self.labels[v]).unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(out, "e {a} {b}").unwrap();
        }
        out
    }
}

/// A clique and its total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Clique {
    /// Vertex ids in increasing order.
    pub members: Vec<usize>,
    pub weight: f64,
}

impl Clique {
    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
            weight: 0.0,
        }
    }
}

struct Search<'g, L> {
    graph: &'g WeightedGraph<L>,
    positive: Bits,
    best: Clique,
    stack: Vec<usize>,
}

impl<L> Search<'_, L> {
    /// Sum over a greedy partition of the positive candidates into
    /// independent sets of each set's heaviest weight. A clique takes at most
    /// one vertex from each independent set.
    fn colour_bound(&self, cand: &Bits) -> f64 {
        let mut uncoloured = cand.and(&self.positive);
        let mut bound = 0.0;
        while !uncoloured.is_empty() {
            let mut class_max: f64 = 0.0;
            let mut available = uncoloured.clone();
            while let Some(v) = available.first() {
                class_max = class_max.max(self.graph.weights[v]);
                uncoloured.clear(v);
                available.clear(v);
                available.and_not_assign(&self.graph.adjacency[v]);
            }
            bound += class_max;
        }
        bound
    }

    // Pre-order DFS with children in increasing id order visits cliques in
    // lexicographic order, so the first clique reaching the optimum is the
    // lexicographically smallest one and later ties never replace it.
    fn expand(&mut self, weight: f64, cand: &Bits) {
        if weight > self.best.weight + WEIGHT_TOLERANCE {
            self.best = Clique {
                members: self.stack.clone(),
                weight,
            };
        }
        if weight + self.colour_bound(cand) <= self.best.weight + WEIGHT_TOLERANCE {
            return;
        }
        for v in cand.ones() {
            let mut next = cand.and(&self.graph.adjacency[v]);
            next.clear_through(v);
            self.stack.push(v);
            self.expand(weight + self.graph.weights[v], &next);
            self.stack.pop();
        }
    }
}

/// Exact branch-and-bound maximum-weight clique.
pub fn max_weight_clique<L>(graph: &WeightedGraph<L>) -> Clique {
    let n = graph.len();
    let mut all = Bits::zeros(n);
    let mut positive = Bits::zeros(n);
    for v in 0..n {
        all.set(v);
        if graph.weights[v] > 0.0 {
            positive.set(v);
        }
    }
    let mut search = Search {
        graph,
        positive,
        best: Clique::empty(),
        stack: Vec::new(),
    };
    search.expand(0.0, &all);
    search.best
}

/// Exhaustive reference: enumerates all `2^n` vertex subsets, keeps the
/// cliques, and scans them in lexicographic order.
pub fn brute_force_clique<L>(graph: &WeightedGraph<L>) -> Result<Clique, CliqueError> {
    let n = graph.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(CliqueError::TooLarge(n));
    }
    let mut cliques: Vec<Vec<usize>> = (0u32..(1u32 << n))
        .map(|mask| (0..n).filter(|&v| mask & (1 << v) != 0).collect::<Vec<_>>())
        .filter(|members| graph.is_clique(members))
        .collect();
    cliques.sort();
    let mut best = Clique::empty();
    for members in cliques {
        let weight: f64 = members.iter().map(|&v| graph.weights[v]).sum();
        if weight > best.weight + WEIGHT_TOLERANCE {
            best = Clique { members, weight };
        }
    }
    Ok(best)
}
