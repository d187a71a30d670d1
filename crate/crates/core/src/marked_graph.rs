//! Marked metric graphs: points of unprojectivized Outer space given by a
//! simplicial chart `F_N → π1(Γ, x)` and positive rational edge lengths.
//!
//! Graphs follow Serre's convention: every oriented edge `e` has an inverse
//! `e^{-1} ≠ e` with swapped endpoints, and an orientation picks one edge of
//! each pair as positive. The marking is stored in both directions: a loop
//! at the base vertex for every generator, and a word for every oriented
//! edge (trivial on a spanning tree). Construction checks that the two
//! directions are mutually inverse, which certifies the chart.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::words::{Automorphism, CyclicWord, Word};

pub type VertexId = usize;
/// Index of an oriented edge.
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
struct EdgeData {
    name: String,
    from: VertexId,
    to: VertexId,
    inverse: EdgeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerreGraph {
    vertices: Vec<String>,
    edges: Vec<EdgeData>,
    /// `E^+`, in input order.
    positive: Vec<EdgeId>,
    /// Position in `positive` of the positive edge of each pair.
    slot: Vec<usize>,
}

impl SerreGraph {
    /// `edges` lists `(name, from, to, inverse_name)` for every oriented
    /// edge. The first edge of each inverse pair to appear is positive.
    pub fn new(vertices: Vec<String>, edges: Vec<(String, VertexId, VertexId, String)>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGraph(m));
        let index: HashMap<&str, EdgeId> = edges.iter().enumerate().map(|(i, e)| (e.0.as_str(), i)).collect();
        if index.len() != edges.len() {
            return bad("duplicate edge ids".into());
        }
        let mut data = Vec::with_capacity(edges.len());
        for (name, from, to, inv) in &edges {
            if *from >= vertices.len() || *to >= vertices.len() {
                return bad(format!("edge {name} has an unknown endpoint"));
            }
            let Some(&inverse) = index.get(inv.as_str()) else {
                return bad(format!("edge {name} names a missing inverse {inv}"));
            };
            data.push(EdgeData { name: name.clone(), from: *from, to: *to, inverse });
        }
        for (i, e) in data.iter().enumerate() {
            let inv = &data[e.inverse];
            if e.inverse == i {
                return bad(format!("edge {} is its own inverse", e.name));
            }
            if inv.inverse != i {
                return bad(format!("inverse of edge {} is not an involution", e.name));
            }
            if inv.from != e.to || inv.to != e.from {
                return bad(format!("edge {} and its inverse have mismatched endpoints", e.name));
            }
        }
        let mut positive = Vec::new();
        let mut slot = vec![usize::MAX; data.len()];
        for i in 0..data.len() {
            if slot[i] == usize::MAX {
                slot[i] = positive.len();
                slot[data[i].inverse] = positive.len();
                positive.push(i);
            }
        }
        let graph = SerreGraph { vertices, edges: data, positive, slot };
        if graph.vertices.is_empty() {
            return bad("no vertices".into());
        }
        for v in 0..graph.vertices.len() {
            let valence = graph.edges.iter().filter(|e| e.from == v).count();
            if valence <= 1 {
                return bad(format!("vertex {} has valence {valence}", graph.vertices[v]));
            }
        }
        if !graph.is_connected() {
            return bad("graph is not connected".into());
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.from == v) {
                if !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e].name
    }

    pub fn origin(&self, e: EdgeId) -> VertexId {
        self.edges[e].from
    }

    pub fn terminus(&self, e: EdgeId) -> VertexId {
        self.edges[e].to
    }

    pub fn inverse(&self, e: EdgeId) -> EdgeId {
        self.edges[e].inverse
    }

    /// `E^+`.
    pub fn positive_edges(&self) -> &[EdgeId] {
        &self.positive
    }

    pub fn is_positive(&self, e: EdgeId) -> bool {
        self.positive[self.slot[e]] == e
    }

    /// Position of the edge pair of `e` within [`positive_edges`](Self::positive_edges).
    pub fn slot(&self, e: EdgeId) -> usize {
        self.slot[e]
    }

    /// First Betti number.
    pub fn betti_number(&self) -> usize {
        self.positive.len() + 1 - self.vertices.len()
    }

    pub fn path_inverse(&self, path: &[EdgeId]) -> Vec<EdgeId> {
        path.iter().rev().map(|&e| self.inverse(e)).collect()
    }

    pub fn is_reduced(&self, path: &[EdgeId]) -> bool {
        path.windows(2).all(|w| w[1] != self.inverse(w[0]))
    }

    pub fn is_path(&self, path: &[EdgeId]) -> bool {
        path.windows(2).all(|w| self.terminus(w[0]) == self.origin(w[1]))
    }

    /// Appends `edges` to `out`, cancelling backtracks.
    pub fn reduce_into(&self, out: &mut Vec<EdgeId>, edges: impl IntoIterator<Item = EdgeId>) {
        for e in edges {
            if out.last().map(|&l| self.inverse(l)) == Some(e) {
                out.pop();
            } else {
                out.push(e);
            }
        }
    }

    pub fn reduce_path(&self, path: &[EdgeId]) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(path.len());
        self.reduce_into(&mut out, path.iter().copied());
        out
    }

    /// Cyclic reduction of a reduced closed path.
    pub fn cyclically_reduce(&self, path: &[EdgeId]) -> Vec<EdgeId> {
        let n = path.len();
        let mut k = 0;
        while 2 * k + 1 < n && path[k] == self.inverse(path[n - 1 - k]) {
            k += 1;
        }
        path[k..n - k].to_vec()
    }

    /// All reduced edge paths with `k` edges, one representative of each
    /// `{v, v^{-1}}` pair (the lexicographically smaller edge-index
    /// sequence), sorted.
    pub fn reduced_paths_up_to_inversion(&self, k: usize) -> Vec<Vec<EdgeId>> {
        assert!(k >= 1);
        let mut level: Vec<Vec<EdgeId>> = (0..self.edges.len()).map(|e| vec![e]).collect();
        for _ in 1..k {
            let mut next = Vec::new();
            for p in &level {
                let last = *p.last().expect("nonempty");
                for e in 0..self.edges.len() {
                    if self.origin(e) == self.terminus(last) && e != self.inverse(last) {
                        let mut q = p.clone();
                        q.push(e);
                        next.push(q);
                    }
                }
            }
            level = next;
        }
        let mut out: Vec<Vec<EdgeId>> = level.into_iter().filter(|p| *p <= self.path_inverse(p)).collect();
        out.sort();
        out
    }

    pub fn format_path(&self, path: &[EdgeId]) -> String {
        let names: Vec<&str> = path.iter().map(|&e| self.edge_name(e)).collect();
        format!("[{}]", names.join(","))
    }
}

/// A sequence of oriented edges with matching endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgePath(pub Vec<EdgeId>);

impl EdgePath {
    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The chart `α: F_N → π1(Γ, x)` stored as a two-sided dictionary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    base: VertexId,
    generator_loops: Vec<Vec<EdgeId>>,
    edge_words: Vec<Word>,
    spanning_tree: Vec<EdgeId>,
}

impl Marking {
    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn rank(&self) -> usize {
        self.generator_loops.len()
    }

    pub fn generator_loop(&self, i: usize) -> &[EdgeId] {
        &self.generator_loops[i - 1]
    }

    pub fn edge_word(&self, e: EdgeId) -> &Word {
        &self.edge_words[e]
    }

    pub fn spanning_tree(&self) -> &[EdgeId] {
        &self.spanning_tree
    }
}

/// Tree path from the base vertex to every vertex.
fn tree_paths(graph: &SerreGraph, base: VertexId, tree: &[EdgeId]) -> Result<Vec<Vec<EdgeId>>> {
    let n = graph.vertex_count();
    if tree.len() + 1 != n {
        return Err(Error::InvalidMarking(format!(
            "spanning tree has {} edges, expected {}",
            tree.len(),
            n - 1
        )));
    }
    let mut in_tree = vec![false; graph.edge_count()];
    for &e in tree {
        in_tree[e] = true;
        in_tree[graph.inverse(e)] = true;
    }
    let mut paths: Vec<Option<Vec<EdgeId>>> = vec![None; n];
    paths[base] = Some(Vec::new());
    let mut queue = VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for e in 0..graph.edge_count() {
            if in_tree[e] && graph.origin(e) == v && paths[graph.terminus(e)].is_none() {
                let mut p = paths[v].clone().expect("visited");
                p.push(e);
                paths[graph.terminus(e)] = Some(p);
                queue.push_back(graph.terminus(e));
            }
        }
    }
    paths
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| Error::InvalidMarking(format!("spanning tree misses vertex {}", graph.vertex_name(v)))))
        .collect()
}

/// A point of `cv(F_N)`: a marked graph with positive rational edge
/// lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedMetricGraph {
    graph: SerreGraph,
    marking: Marking,
    lengths: Vec<Rational>,
}

impl MarkedMetricGraph {
    /// `edge_words` may omit tree edges (trivial) and one edge of each
    /// inverse pair (filled in by inversion).
    pub fn new(
        graph: SerreGraph,
        base: VertexId,
        generator_loops: Vec<Vec<EdgeId>>,
        edge_words: BTreeMap<EdgeId, Word>,
        spanning_tree: Vec<EdgeId>,
        lengths: Vec<Rational>,
    ) -> Result<Self> {
        let rank = generator_loops.len();
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        if graph.betti_number() != rank {
            return Err(Error::InvalidMarking(format!(
                "graph has rank {} but {} generator loops were given",
                graph.betti_number(),
                rank
            )));
        }
        if base >= graph.vertex_count() {
            return Err(Error::InvalidMarking("unknown base vertex".into()));
        }
        if lengths.len() != graph.edge_count() {
            return Err(Error::InvalidGraph("one length per oriented edge is required".into()));
        }
        for e in 0..graph.edge_count() {
            if !lengths[e].is_positive() {
                return Err(Error::NonPositiveLength(format!("{} has length {}", graph.edge_name(e), lengths[e])));
            }
            if lengths[e] != lengths[graph.inverse(e)] {
                return Err(Error::InvalidGraph(format!("{} and its inverse differ in length", graph.edge_name(e))));
            }
        }
        let mut words: Vec<Option<Word>> = vec![None; graph.edge_count()];
        for (&e, w) in &edge_words {
            if e >= graph.edge_count() {
                return Err(Error::InvalidMarking(format!("edge word for unknown edge {e}")));
            }
            w.check_rank(rank)?;
            let inv = graph.inverse(e);
            if let Some(other) = edge_words.get(&inv) {
                if *other != w.inverse() {
                    return Err(Error::InvalidMarking(format!(
                        "edge words of {} and its inverse are not inverse",
                        graph.edge_name(e)
                    )));
                }
            }
            words[e] = Some(w.clone());
            words[inv] = Some(w.inverse());
        }
        let edge_words: Vec<Word> = words.into_iter().map(Option::unwrap_or_default).collect();
        let mut loops = Vec::with_capacity(rank);
        for (i, p) in generator_loops.iter().enumerate() {
            if p.iter().any(|&e| e >= graph.edge_count()) {
                return Err(Error::InvalidMarking(format!("loop of a_{} uses an unknown edge", i + 1)));
            }
            let closed = match (p.first(), p.last()) {
                (Some(&f), Some(&l)) => graph.origin(f) == base && graph.terminus(l) == base,
                _ => false,
            };
            if !closed || !graph.is_path(p) {
                return Err(Error::InvalidMarking(format!("loop of a_{} is not a closed path at the base", i + 1)));
            }
            loops.push(graph.reduce_path(p));
        }
        let marking = Marking { base, generator_loops: loops, edge_words, spanning_tree };
        let m = MarkedMetricGraph { graph, marking, lengths };
        m.verify_marking()?;
        Ok(m)
    }

    /// Both dictionary round trips: every generator loop reads back its
    /// generator, and every edge word realizes the tree loop of its edge.
    fn verify_marking(&self) -> Result<()> {
        let g = &self.graph;
        let tree = tree_paths(g, self.marking.base, &self.marking.spanning_tree)?;
        for i in 1..=self.rank() {
            let w = self.path_to_word(self.marking.generator_loop(i));
            if w != Word::generator(i) {
                return Err(Error::InvalidMarking(format!("loop of a_{i} reads {w}")));
            }
        }
        for e in 0..g.edge_count() {
            let mut tree_loop = tree[g.origin(e)].clone();
            tree_loop.push(e);
            tree_loop.extend(g.path_inverse(&tree[g.terminus(e)]));
            let expected = g.reduce_path(&tree_loop);
            let got = self.word_to_path(self.marking.edge_word(e));
            if got.0 != expected {
                return Err(Error::InvalidMarking(format!(
                    "word {} of edge {} realizes {} instead of {}",
                    self.marking.edge_word(e),
                    g.edge_name(e),
                    g.format_path(&got.0),
                    g.format_path(&expected)
                )));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &SerreGraph {
        &self.graph
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn rank(&self) -> usize {
        self.marking.rank()
    }

    pub fn length(&self, e: EdgeId) -> &Rational {
        &self.lengths[e]
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    /// Sum of the lengths of the positive edges.
    pub fn volume(&self) -> Rational {
        self.graph.positive_edges().iter().map(|&e| self.lengths[e].clone()).sum()
    }

    /// Same chart, new lengths (one per oriented edge).
    pub fn with_lengths(&self, lengths: Vec<Rational>) -> Result<Self> {
        if lengths.len() != self.graph.edge_count() {
            return Err(Error::InvalidGraph("one length per oriented edge is required".into()));
        }
        for e in 0..lengths.len() {
            if !lengths[e].is_positive() {
                return Err(Error::NonPositiveLength(format!("{} has length {}", self.graph.edge_name(e), lengths[e])));
            }
            if lengths[e] != lengths[self.graph.inverse(e)] {
                return Err(Error::InvalidGraph("lengths must agree on inverse edges".into()));
            }
        }
        Ok(MarkedMetricGraph { lengths, ..self.clone() })
    }

    /// Same chart, lengths given on `E^+` in order.
    pub fn with_positive_lengths(&self, lengths: &[Rational]) -> Result<Self> {
        if lengths.len() != self.graph.positive_edges().len() {
            return Err(Error::InvalidGraph("one length per positive edge is required".into()));
        }
        let all = (0..self.graph.edge_count()).map(|e| lengths[self.graph.slot(e)].clone()).collect();
        self.with_lengths(all)
    }

    /// `c·T`: every length multiplied by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        self.with_lengths(self.lengths.iter().map(|l| l * c).collect())
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        w.check_rank(self.rank())
    }

    /// Reduced closed path at the base vertex representing `α(w)`.
    pub fn word_to_path(&self, w: &Word) -> EdgePath {
        let mut out = Vec::new();
        for &l in w.letters() {
            let p = self.marking.generator_loop(l.index());
            if l.is_positive() {
                self.graph.reduce_into(&mut out, p.iter().copied());
            } else {
                self.graph.reduce_into(&mut out, p.iter().rev().map(|&e| self.graph.inverse(e)));
            }
        }
        EdgePath(out)
    }

    pub fn path_to_word(&self, path: &[EdgeId]) -> Word {
        let mut acc = Word::identity();
        for &e in path {
            acc = acc.mul(self.marking.edge_word(e));
        }
        acc
    }

    /// Cyclically reduced edge loop of `w` (empty for the identity).
    pub fn cyclic_path(&self, w: &Word) -> Vec<EdgeId> {
        self.graph.cyclically_reduce(&self.word_to_path(w).0)
    }

    /// Crossing counts per positive edge, in `E^+` order.
    fn crossing_counts(&self, path: &[EdgeId]) -> Vec<u64> {
        let mut counts = vec![0u64; self.graph.positive_edges().len()];
        for &e in path {
            counts[self.graph.slot(e)] += 1;
        }
        counts
    }

    fn weighted(&self, counts: &[u64]) -> Rational {
        let mut total = Rational::zero();
        for (slot, &c) in counts.iter().enumerate() {
            if c > 0 {
                let e = self.graph.positive_edges()[slot];
                total += &self.lengths[e] * Rational::from_integer(c.into());
            }
        }
        total
    }

    /// `L`-length of an edge path.
    pub fn path_length(&self, path: &[EdgeId]) -> Rational {
        self.weighted(&self.crossing_counts(path))
    }

    /// `||w||_T`: length of the cyclically reduced loop of `w`.
    pub fn translation_length(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        Ok(self.path_length(&self.cyclic_path(w)))
    }

    pub fn cyclic_translation_length(&self, cw: &CyclicWord) -> Result<Rational> {
        self.translation_length(&cw.to_word())
    }

    /// `d_T(p, wp)` for `p` the base lift: length of the reduced (not
    /// cyclically reduced) path of `w`.
    pub fn base_displacement(&self, w: &Word) -> Result<Rational> {
        self.check_word(w)?;
        Ok(self.path_length(&self.word_to_path(w).0))
    }

    /// For every positive edge, how often the cyclic loop of `cw` crosses it
    /// in either direction.
    pub fn edge_crossings(&self, cw: &CyclicWord) -> Result<EdgeCrossings> {
        let w = cw.to_word();
        self.check_word(&w)?;
        Ok(EdgeCrossings { counts: self.crossing_counts(&self.cyclic_path(&w)) })
    }

    /// `Σ_{E^+} L(e) · count(e)`.
    pub fn crossing_length(&self, crossings: &EdgeCrossings) -> Rational {
        self.weighted(&crossings.counts)
    }

    /// `Σ_i d_T(p, a_i p)`, the bounded back-tracking bound at the base
    /// lift.
    pub fn bbt_upper_bound(&self) -> Rational {
        (1..=self.rank()).map(|i| self.path_length(self.marking.generator_loop(i))).sum()
    }

    /// `φ·T`, whose length function is `g ↦ ||φ̂^{-1}(g)||_T`. The chart is
    /// precomposed with `φ̂^{-1}`.
    pub fn act(&self, phi: &Automorphism) -> Result<Self> {
        if phi.rank() != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: phi.rank() });
        }
        let loops = phi.inverse_images().iter().map(|w| self.word_to_path(w).0).collect();
        let marking = Marking {
            base: self.marking.base,
            generator_loops: loops,
            edge_words: self.marking.edge_words.iter().map(|w| phi.apply(w)).collect(),
            spanning_tree: self.marking.spanning_tree.clone(),
        };
        let m = MarkedMetricGraph { graph: self.graph.clone(), marking, lengths: self.lengths.clone() };
        m.verify_marking()?;
        Ok(m)
    }

    /// Checks the four bounded back-tracking inequalities for `u = u_1⋯u_m`
    /// with constant `c`.
    pub fn lemma_ll_check(&self, pieces: &[Word], c: &Rational) -> Result<LemmaReport> {
        let bound = self.bbt_upper_bound();
        if *c < bound {
            return Err(Error::ConstantTooSmall { constant: Box::new(c.clone()), bound: Box::new(bound) });
        }
        if pieces.is_empty() {
            return Err(Error::NotReduced("empty decomposition".into()));
        }
        let mut letters = Vec::new();
        for u in pieces {
            self.check_word(u)?;
            letters.extend_from_slice(u.letters());
        }
        let u = Word::reduce(letters.iter().copied());
        if u.len() != letters.len() {
            return Err(Error::NotReduced("the product u_1⋯u_m cancels".into()));
        }
        let m = Rational::from_integer(pieces.len().into());
        let two = rational::int(2);
        let displacement = self.base_displacement(&u)?;
        let piece_displacements: Rational =
            pieces.iter().map(|p| self.base_displacement(p)).sum::<Result<Rational>>()?;
        let cyclic = u.is_cyclically_reduced();
        let translation = self.translation_length(&u)?;
        let one = if cyclic {
            Some(Slack::new((&translation - &displacement).abs(), &two * c))
        } else {
            None
        };
        let two_ = Slack::new((&displacement - &piece_displacements).abs(), &two * &m * c);
        let three = if cyclic {
            Some(Slack::new((&translation - &piece_displacements).abs(), rational::int(4) * &m * c))
        } else {
            None
        };
        let four = if cyclic && pieces.iter().all(|p| p.is_cyclically_reduced()) {
            let sum: Rational = pieces.iter().map(|p| self.translation_length(p)).sum::<Result<Rational>>()?;
            Some(Slack::new((&translation - sum).abs(), rational::int(6) * &m * c))
        } else {
            None
        };
        Ok(LemmaReport { m: pieces.len(), constant: c.clone(), cyclic_to_displacement: one, displacement_split: two_, cyclic_split: three, cyclic_pieces: four })
    }

    pub fn to_data(&self) -> GraphData {
        let g = &self.graph;
        GraphData {
            vertices: g.vertices.clone(),
            edges: (0..g.edge_count())
                .map(|e| EdgeJson {
                    id: g.edge_name(e).to_string(),
                    inverse: g.edge_name(g.inverse(e)).to_string(),
                    from: g.vertex_name(g.origin(e)).to_string(),
                    to: g.vertex_name(g.terminus(e)).to_string(),
                    length: self.lengths[e].clone(),
                })
                .collect(),
            marking: MarkingJson {
                base: g.vertex_name(self.marking.base).to_string(),
                generator_loops: self
                    .marking
                    .generator_loops
                    .iter()
                    .map(|p| p.iter().map(|&e| g.edge_name(e).to_string()).collect())
                    .collect(),
                edge_words: g
                    .positive_edges()
                    .iter()
                    .filter(|&&e| !self.marking.edge_word(e).is_identity())
                    .map(|&e| (g.edge_name(e).to_string(), self.marking.edge_word(e).clone()))
                    .collect(),
                spanning_tree: self.marking.spanning_tree.iter().map(|&e| g.edge_name(e).to_string()).collect(),
            },
        }
    }

    pub fn from_data(data: GraphData) -> Result<Self> {
        let vertex = |name: &str, vertices: &[String]| {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {name}")))
        };
        let mut edges = Vec::new();
        let mut lengths = Vec::new();
        for e in &data.edges {
            edges.push((e.id.clone(), vertex(&e.from, &data.vertices)?, vertex(&e.to, &data.vertices)?, e.inverse.clone()));
            lengths.push(e.length.clone());
        }
        let graph = SerreGraph::new(data.vertices.clone(), edges)?;
        let edge = |name: &str| graph.edge_id(name).ok_or_else(|| Error::InvalidMarking(format!("unknown edge {name}")));
        let loops = data
            .marking
            .generator_loops
            .iter()
            .map(|p| p.iter().map(|n| edge(n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let words = data
            .marking
            .edge_words
            .iter()
            .map(|(n, w)| Ok((edge(n)?, w.clone())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let tree = data.marking.spanning_tree.iter().map(|n| edge(n)).collect::<Result<Vec<_>>>()?;
        let base = vertex(&data.marking.base, &data.vertices)?;
        MarkedMetricGraph::new(graph, base, loops, words, tree, lengths)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_data(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("graph data serializes")
    }
}

/// Chart read off a spanning tree grown from `base`: the `i`-th positive
/// edge outside the tree becomes `a_i`. `lengths` is indexed by `E^+`.
pub fn standard_chart(graph: SerreGraph, base: VertexId, lengths: &[Rational]) -> Result<MarkedMetricGraph> {
    if base >= graph.vertex_count() {
        return Err(Error::InvalidMarking("unknown base vertex".into()));
    }
    let mut seen = vec![false; graph.vertex_count()];
    seen[base] = true;
    let mut tree = Vec::new();
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for e in 0..graph.edge_count() {
            if graph.origin(e) == v && !seen[graph.terminus(e)] {
                seen[graph.terminus(e)] = true;
                tree.push(graph.positive_edges()[graph.slot(e)]);
                queue.push_back(graph.terminus(e));
            }
        }
    }
    let paths = tree_paths(&graph, base, &tree)?;
    let mut loops = Vec::new();
    let mut words = BTreeMap::new();
    for &e in graph.positive_edges() {
        if tree.contains(&e) {
            continue;
        }
        let mut p = paths[graph.origin(e)].clone();
        p.push(e);
        p.extend(graph.path_inverse(&paths[graph.terminus(e)]));
        loops.push(p);
        words.insert(e, Word::generator(loops.len()));
    }
    if lengths.len() != graph.positive_edges().len() {
        return Err(Error::InvalidGraph("one length per positive edge is required".into()));
    }
    let all = (0..graph.edge_count()).map(|e| lengths[graph.slot(e)].clone()).collect();
    MarkedMetricGraph::new(graph, base, loops, words, tree, all)
}

fn rose_edge_names(i: usize) -> (String, String) {
    if i <= 26 {
        let c = (b'a' + (i - 1) as u8) as char;
        (c.to_string(), c.to_ascii_uppercase().to_string())
    } else {
        (format!("e{i}"), format!("e{i}^-1"))
    }
}

/// Rose with one petal per generator and the given petal lengths.
pub fn rose(lengths: &[Rational]) -> Result<MarkedMetricGraph> {
    let n = lengths.len();
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    let mut edges = Vec::new();
    for i in 1..=n {
        let (p, q) = rose_edge_names(i);
        edges.push((p.clone(), 0, 0, q.clone()));
        edges.push((q, 0, 0, p));
    }
    let graph = SerreGraph::new(vec!["x".into()], edges)?;
    let loops = (0..n).map(|i| vec![2 * i]).collect();
    let words = (0..n).map(|i| (2 * i, Word::generator(i + 1))).collect();
    let all = (0..2 * n).map(|e| lengths[e / 2].clone()).collect();
    MarkedMetricGraph::new(graph, 0, loops, words, Vec::new(), all)
}

/// The Cayley tree `T_A`: the rose with unit petals.
pub fn unit_rose(n: usize) -> Result<MarkedMetricGraph> {
    rose(&vec![Rational::one(); n])
}

/// Counts per positive edge, in `E^+` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCrossings {
    pub counts: Vec<u64>,
}

impl EdgeCrossings {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn by_name(&self, graph: &SerreGraph) -> BTreeMap<String, u64> {
        graph
            .positive_edges()
            .iter()
            .zip(&self.counts)
            .map(|(&e, &c)| (graph.edge_name(e).to_string(), c))
            .collect()
    }
}

/// One inequality: `lhs ≤ bound`, with `slack = bound − lhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slack {
    pub lhs: Rational,
    pub bound: Rational,
    pub slack: Rational,
}

impl Slack {
    fn new(lhs: Rational, bound: Rational) -> Self {
        let slack = &bound - &lhs;
        Slack { lhs, bound, slack }
    }

    pub fn holds(&self) -> bool {
        !self.slack.is_negative()
    }
}

/// Inequalities that do not apply (the word is not cyclically reduced)
/// are `None`.
#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub m: usize,
    pub constant: Rational,
    /// `| ||u||_T − d(p, up) | ≤ 2C`
    pub cyclic_to_displacement: Option<Slack>,
    /// `| d(p, up) − Σ d(p, u_i p) | ≤ 2mC`
    pub displacement_split: Slack,
    /// `| ||u||_T − Σ d(p, u_i p) | ≤ 4mC`
    pub cyclic_split: Option<Slack>,
    /// `| ||u||_T − Σ ||u_i||_T | ≤ 6mC`
    pub cyclic_pieces: Option<Slack>,
}

impl LemmaReport {
    pub fn slacks(&self) -> impl Iterator<Item = &Slack> {
        self.cyclic_to_displacement
            .iter()
            .chain(std::iter::once(&self.displacement_split))
            .chain(self.cyclic_split.iter())
            .chain(self.cyclic_pieces.iter())
    }

    pub fn min_slack(&self) -> Rational {
        self.slacks().map(|s| s.slack.clone()).min().expect("inequality (2) always applies")
    }

    pub fn all_hold(&self) -> bool {
        self.slacks().all(Slack::holds)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &Option<Slack>| s.as_ref().map_or("n/a".to_string(), |s| rational::format(&s.slack));
        write!(
            f,
            "m={} C={} slacks: (1) {} (2) {} (3) {} (4) {}",
            self.m,
            rational::format(&self.constant),
            show(&self.cyclic_to_displacement),
            rational::format(&self.displacement_split.slack),
            show(&self.cyclic_split),
            show(&self.cyclic_pieces)
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphData {
    #[serde(deserialize_with = "ids::many")]
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    pub marking: MarkingJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    #[serde(deserialize_with = "ids::one")]
    pub id: String,
    #[serde(deserialize_with = "ids::one")]
    pub inverse: String,
    #[serde(deserialize_with = "ids::one")]
    pub from: String,
    #[serde(deserialize_with = "ids::one")]
    pub to: String,
    #[serde(serialize_with = "rational::serialize", deserialize_with = "rational::deserialize")]
    pub length: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkingJson {
    #[serde(deserialize_with = "ids::one")]
    pub base: String,
    #[serde(deserialize_with = "ids::nested")]
    pub generator_loops: Vec<Vec<String>>,
    #[serde(default)]
    pub edge_words: BTreeMap<String, Word>,
    #[serde(default, deserialize_with = "ids::many")]
    pub spanning_tree: Vec<String>,
}

/// Vertex and edge ids may be JSON strings or integers.
pub(crate) mod ids {
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Str(String),
        Int(i64),
    }

    impl From<Id> for String {
        fn from(id: Id) -> String {
            match id {
                Id::Str(s) => s,
                Id::Int(i) => i.to_string(),
            }
        }
    }

    pub fn one<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
        Id::deserialize(d).map(String::from)
    }

    pub fn many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
        Ok(Vec::<Id>::deserialize(d)?.into_iter().map(String::from).collect())
    }

    pub fn nested<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<String>>, D::Error> {
        Ok(Vec::<Vec<Id>>::deserialize(d)?
            .into_iter()
            .map(|v| v.into_iter().map(String::from).collect())
            .collect())
    }
}
