//! Train-track representatives and the limit objects of an iwip: PF
//! eigenpairs, the train-track metric, and Cauchy-style diagnostics for
//! `λ^{-n} φ^{-n} T → T_-`, `λ^{-n} η_{φ^n(g)} → μ_+` and the pairing
//! `⟨T_-, μ_+⟩`.
//!
//! Nothing here claims to compute a limit. Every approximate quantity is
//! reported together with the sequence it came from and an error estimate
//! taken from successive differences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::currents::{FrequencyVector, RationalCurrent};
use crate::error::{Error, Result};
use crate::intersection::LengthFunction;
use crate::marked_graph::{EdgeId, GraphData, MarkedMetricGraph, VertexId};
use crate::rational::{self, Rational};
use crate::words::{Automorphism, Word};

/// Longest word the iterations below will build.
pub const DEFAULT_WORD_CAP: usize = 1_000_000;
/// Largest `n` the CLI uses unless told otherwise.
pub const DEFAULT_MAX_N: usize = 15;

/// A graph self-map `f: Γ → Γ` representing an outer automorphism through
/// the marking of `Γ`.
#[derive(Clone, Debug)]
pub struct GraphMap {
    graph: MarkedMetricGraph,
    vertex_map: Vec<VertexId>,
    edge_images: Vec<Vec<EdgeId>>,
    automorphism: Automorphism,
}

impl GraphMap {
    /// `edge_images` holds `f(e)` for every positive edge (images of
    /// negative edges are derived) or for every oriented edge.
    pub fn new(
        graph: MarkedMetricGraph,
        vertex_map: Vec<VertexId>,
        edge_images: BTreeMap<EdgeId, Vec<EdgeId>>,
        automorphism: Automorphism,
    ) -> Result<Self> {
        let g = graph.graph();
        let bad = |m: String| Err(Error::InvalidGraphMap(m));
        if automorphism.rank() != graph.rank() {
            return Err(Error::RankMismatch { expected: graph.rank(), found: automorphism.rank() });
        }
        if vertex_map.len() != g.vertex_count() || vertex_map.iter().any(|&v| v >= g.vertex_count()) {
            return bad("vertex map must send every vertex to a vertex".into());
        }
        let mut images: Vec<Option<Vec<EdgeId>>> = vec![None; g.edge_count()];
        for (&e, p) in &edge_images {
            if e >= g.edge_count() || p.iter().any(|&x| x >= g.edge_count()) {
                return bad(format!("edge image for {e} mentions an unknown edge"));
            }
            images[e] = Some(p.clone());
        }
        for e in 0..g.edge_count() {
            let inv = g.inverse(e);
            match (&images[e], &images[inv]) {
                (Some(p), Some(q)) => {
                    if *q != g.path_inverse(p) {
                        return bad(format!("f({}^-1) is not f({})^-1", g.edge_name(e), g.edge_name(e)));
                    }
                }
                (Some(p), None) => images[inv] = Some(g.path_inverse(p)),
                (None, Some(_)) => {}
                (None, None) => return bad(format!("no image for edge {}", g.edge_name(e))),
            }
        }
        let edge_images: Vec<Vec<EdgeId>> = images.into_iter().map(|p| p.expect("filled")).collect();
        for e in 0..g.edge_count() {
            let p = &edge_images[e];
            let name = g.edge_name(e);
            if p.is_empty() {
                return bad(format!("f({name}) is trivial"));
            }
            if !g.is_path(p) || !g.is_reduced(p) {
                return bad(format!("f({name}) is not a reduced edge path"));
            }
            if g.origin(p[0]) != vertex_map[g.origin(e)] || g.terminus(p[p.len() - 1]) != vertex_map[g.terminus(e)] {
                return bad(format!("f({name}) does not join the images of the endpoints"));
            }
        }
        let map = GraphMap { graph, vertex_map, edge_images, automorphism };
        map.verify_action()?;
        Ok(map)
    }

    /// The induced automorphism must agree with the given one up to an
    /// inner automorphism.
    fn verify_action(&self) -> Result<()> {
        let induced = self.induced_images();
        let phi = &self.automorphism;
        let rank = phi.rank();
        // θ = induced ∘ φ^{-1} must be inner
        let theta: Vec<Word> = phi.inverse_images().iter().map(|w| substitute(&induced, w)).collect();
        if inner_conjugator(&theta, rank).is_none() {
            let shown: Vec<String> = induced.iter().map(Word::to_string).collect();
            return Err(Error::InvalidGraphMap(format!(
                "induced map [{}] does not represent the given automorphism",
                shown.join(", ")
            )));
        }
        Ok(())
    }

    /// Images of the generators under `α^{-1} f_# α`, transported back to
    /// the base vertex along the spanning tree.
    pub fn induced_images(&self) -> Vec<Word> {
        let g = self.graph.graph();
        let base = self.graph.marking().base();
        let to_image = self.tree_path(base, self.vertex_map[base]);
        (1..=self.graph.rank())
            .map(|i| {
                let mut path = to_image.clone();
                path.extend(self.image_of_path(self.graph.marking().generator_loop(i)));
                path.extend(g.path_inverse(&to_image));
                self.graph.path_to_word(&g.reduce_path(&path))
            })
            .collect()
    }

    fn tree_path(&self, from: VertexId, to: VertexId) -> Vec<EdgeId> {
        let g = self.graph.graph();
        let tree = self.graph.marking().spanning_tree();
        // breadth-first search in the spanning tree
        let mut prev: Vec<Option<EdgeId>> = vec![None; g.vertex_count()];
        let mut seen = vec![false; g.vertex_count()];
        seen[from] = true;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &t in tree {
                for e in [t, g.inverse(t)] {
                    if g.origin(e) == v && !seen[g.terminus(e)] {
                        seen[g.terminus(e)] = true;
                        prev[g.terminus(e)] = Some(e);
                        queue.push_back(g.terminus(e));
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut v = to;
        while v != from {
            let e = prev[v].expect("spanning tree reaches every vertex");
            path.push(e);
            v = g.origin(e);
        }
        path.reverse();
        path
    }

    /// `f` applied to an edge path, reduced.
    pub fn image_of_path(&self, path: &[EdgeId]) -> Vec<EdgeId> {
        let g = self.graph.graph();
        let mut out = Vec::new();
        for &e in path {
            g.reduce_into(&mut out, self.edge_images[e].iter().copied());
        }
        out
    }

    pub fn graph(&self) -> &MarkedMetricGraph {
        &self.graph
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.automorphism
    }

    pub fn edge_image(&self, e: EdgeId) -> &[EdgeId] {
        &self.edge_images[e]
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_map[v]
    }

    /// `f ∘ f`, representing `φ²`.
    pub fn square(&self) -> Result<GraphMap> {
        self.compose(self)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GraphMap) -> Result<GraphMap> {
        let g = self.graph.graph();
        let images = g.positive_edges().iter().map(|&e| (e, self.image_of_path(&other.edge_images[e]))).collect();
        let vertex_map = other.vertex_map.iter().map(|&v| self.vertex_map[v]).collect();
        GraphMap::new(self.graph.clone(), vertex_map, images, self.automorphism.compose(&other.automorphism)?)
    }

    /// Whether `f^k(e)` is immersed for every edge and every `k ≤ depth`.
    pub fn images_stay_legal(&self, depth: usize) -> bool {
        let g = self.graph.graph();
        g.positive_edges().iter().all(|&e| {
            let mut path = vec![e];
            for _ in 0..depth {
                let raw: Vec<EdgeId> = path.iter().flat_map(|&x| self.edge_images[x].iter().copied()).collect();
                if !g.is_reduced(&raw) {
                    return false;
                }
                path = raw;
            }
            true
        })
    }

    /// Same map with the metric replaced.
    pub fn with_graph(&self, graph: MarkedMetricGraph) -> Result<GraphMap> {
        if graph.graph() != self.graph.graph() || graph.marking() != self.graph.marking() {
            return Err(Error::InvalidGraphMap("metric change must keep the chart".into()));
        }
        Ok(GraphMap { graph, ..self.clone() })
    }

    pub fn to_data(&self) -> GraphMapData {
        let g = self.graph.graph();
        GraphMapData {
            graph: self.graph.to_data(),
            vertex_map: (0..g.vertex_count())
                .map(|v| (g.vertex_name(v).to_string(), g.vertex_name(self.vertex_map[v]).to_string()))
                .collect(),
            edge_map: g
                .positive_edges()
                .iter()
                .map(|&e| {
                    (g.edge_name(e).to_string(), self.edge_images[e].iter().map(|&x| g.edge_name(x).to_string()).collect())
                })
                .collect(),
            automorphism: self.automorphism.clone(),
        }
    }

    pub fn from_data(data: GraphMapData) -> Result<Self> {
        let graph = MarkedMetricGraph::from_data(data.graph)?;
        let g = graph.graph();
        let vertex = |n: &str| g.vertex_id(n).ok_or_else(|| Error::InvalidGraphMap(format!("unknown vertex {n}")));
        let edge = |n: &str| g.edge_id(n).ok_or_else(|| Error::InvalidGraphMap(format!("unknown edge {n}")));
        let mut vertex_map: Vec<VertexId> = (0..g.vertex_count()).collect();
        for (from, to) in &data.vertex_map {
            vertex_map[vertex(from)?] = vertex(to)?;
        }
        let images = data
            .edge_map
            .iter()
            .map(|(e, p)| Ok((edge(e)?, p.iter().map(|x| edge(x)).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        GraphMap::new(graph, vertex_map, images, data.automorphism)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_data(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("graph map data serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphMapData {
    pub graph: GraphData,
    /// Vertices not listed are fixed.
    #[serde(default)]
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, Vec<String>>,
    pub automorphism: Automorphism,
}

fn substitute(images: &[Word], w: &Word) -> Word {
    let mut acc = Word::identity();
    for &l in w.letters() {
        let img = &images[l.index() - 1];
        acc = acc.mul(&if l.is_positive() { img.clone() } else { img.inverse() });
    }
    acc
}

/// `c` with `images[i] = c a_{i+1} c^{-1}` for every `i`, if one exists.
pub fn inner_conjugator(images: &[Word], rank: usize) -> Option<Word> {
    let a1 = Word::generator(1);
    let (core, conj) = images[0].cyclic_core();
    if core != a1 {
        return None;
    }
    // images[0] = u a_1 u^{-1}; c = u a_1^k for some k
    let u = conj.inverse();
    let y = u.inverse().mul(&images[1]).mul(&u);
    let lead = y.letters().iter().take_while(|l| l.index() == 1).count() as i64;
    let k = match y.letters().first() {
        Some(l) if l.index() == 1 && !l.is_positive() => -lead,
        _ => lead,
    };
    let c = u.mul(&a1.pow(k));
    (1..=rank).all(|i| images[i - 1] == Word::generator(i).conjugate_by(&c)).then_some(c)
}

/// Nonnegative integer matrix indexed by `E^+`; `entries[i][j]` counts
/// crossings of positive edge `i` (either direction) by `f(e_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn new(entries: Vec<Vec<u64>>) -> Self {
        assert!(entries.iter().all(|r| r.len() == entries.len()), "square matrix");
        TransitionMatrix { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.entries[i][k] * other.entries[k][j]).sum()).collect())
            .collect();
        TransitionMatrix { entries }
    }

    /// Some power `M^k`, `k ≤ (n−1)² + 1`, is entrywise positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return false;
        }
        let pattern: Vec<Vec<bool>> = self.entries.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
        let mut power = pattern.clone();
        for _ in 0..(n - 1) * (n - 1) + 1 {
            if power.iter().all(|r| r.iter().all(|&x| x)) {
                return true;
            }
            power = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|k| power[i][k] && pattern[k][j])).collect())
                .collect();
        }
        false
    }

    /// Recount from the map.
    pub fn matches(&self, f: &GraphMap) -> bool {
        *self == transition_matrix(f)
    }
}

pub fn transition_matrix(f: &GraphMap) -> TransitionMatrix {
    let g = f.graph().graph();
    let n = g.positive_edges().len();
    let mut entries = vec![vec![0u64; n]; n];
    for (j, &e) in g.positive_edges().iter().enumerate() {
        for &x in f.edge_image(e) {
            entries[g.slot(x)][j] += 1;
        }
    }
    TransitionMatrix { entries }
}

/// Perron-Frobenius data for the transposed matrix: `Mᵀ v = λ v`, so that
/// `v` assigns lengths with `L(f(e)) = λ L(e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PfResult {
    pub eigenvalue: f64,
    /// Half-width of the Collatz-Wielandt bracket around `eigenvalue`.
    pub eigenvalue_error: f64,
    /// Positive, sums to one.
    pub eigenvector: Vec<f64>,
    /// `‖Mᵀv − λv‖_∞`.
    pub residual: f64,
    pub iterations: usize,
}

pub const PF_ITERATION_CAP: usize = 100_000;

pub fn pf_eigenpair(m: &TransitionMatrix, tol: f64) -> Result<PfResult> {
    if !m.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let n = m.dim();
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..n).map(|j| (0..n).map(|i| m.entries[i][j] as f64 * v[i]).sum()).collect()
    };
    let mut v = vec![1.0 / n as f64; n];
    for it in 1..=PF_ITERATION_CAP {
        let w = apply(&v);
        let total: f64 = w.iter().sum();
        let next: Vec<f64> = w.iter().map(|x| x / total).collect();
        let step = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if step < tol {
            let mv = apply(&v);
            let ratios = mv.iter().zip(&v).map(|(a, b)| a / b);
            let lo = ratios.clone().fold(f64::INFINITY, f64::min);
            let hi = ratios.fold(f64::NEG_INFINITY, f64::max);
            let eigenvalue = 0.5 * (lo + hi);
            let residual = mv.iter().zip(&v).map(|(a, b)| (a - eigenvalue * b).abs()).fold(0.0, f64::max);
            return Ok(PfResult { eigenvalue, eigenvalue_error: 0.5 * (hi - lo), eigenvector: v, residual, iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: PF_ITERATION_CAP })
}

/// The train-track metric and how well it satisfies `L(f(e)) = λ L(e)`.
#[derive(Clone, Debug)]
pub struct PfMetric {
    pub graph: MarkedMetricGraph,
    pub pf: PfResult,
    /// `max_e | L(f(e)) − λ L(e) |` for the rational lengths.
    pub bound: f64,
}

/// Lengths from the PF eigenvector, rounded to rationals with denominator
/// about `1/tol` and rescaled to total volume exactly one.
pub fn metric_from_pf(f: &GraphMap, tol: f64) -> Result<PfMetric> {
    let m = transition_matrix(f);
    let pf = pf_eigenpair(&m, tol.min(1e-12))?;
    let denom = 10f64.powi((1.0 / tol).log10().ceil().max(1.0) as i32);
    let rounded: Vec<Rational> = pf
        .eigenvector
        .iter()
        .map(|&x| rational::ratio((x * denom).round().max(1.0) as i64, denom as i64))
        .collect();
    let volume: Rational = rounded.iter().sum();
    let lengths: Vec<Rational> = rounded.iter().map(|x| x / &volume).collect();
    let graph = f.graph().with_positive_lengths(&lengths)?;
    let g = graph.graph();
    let bound = g
        .positive_edges()
        .iter()
        .map(|&e| {
            let image = rational::to_f64(&graph.path_length(f.edge_image(e)));
            (image - pf.eigenvalue * rational::to_f64(graph.length(e))).abs()
        })
        .fold(0.0, f64::max);
    Ok(PfMetric { graph, pf, bound })
}

/// Cyclic cores of `φ^k(g)` for `k = 0..=n`.
pub fn iterate_class(phi: &Automorphism, g: &Word, n: usize, cap: usize) -> Result<Vec<Word>> {
    g.check_rank(phi.rank())?;
    let mut out = Vec::with_capacity(n + 1);
    let mut x = g.cyclic_core().0;
    out.push(x.clone());
    for _ in 0..n {
        let bound: usize = x.letters().iter().map(|l| phi.images()[l.index() - 1].len()).sum();
        if bound > cap {
            // the unreduced image is an upper bound; reduce before deciding
            let y = phi.apply(&x).cyclic_core().0;
            if y.len() > cap {
                return Err(Error::WordLengthCap { length: y.len(), cap });
            }
            x = y;
        } else {
            x = phi.apply(&x).cyclic_core().0;
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// `g ↦ λ^{-n} ||φ̂^n(g)||_T`, approximating `||g||_{T_-}` up to scale.
#[derive(Clone, Debug)]
pub struct StableLengthOracle {
    pub phi: Automorphism,
    pub graph: MarkedMetricGraph,
    pub lambda: f64,
    pub n: usize,
    pub cap: usize,
}

impl StableLengthOracle {
    pub fn new(phi: Automorphism, graph: MarkedMetricGraph, lambda: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse("n must be at least 1".into()));
        }
        if phi.rank() != graph.rank() {
            return Err(Error::RankMismatch { expected: graph.rank(), found: phi.rank() });
        }
        Ok(StableLengthOracle { phi, graph, lambda, n, cap: DEFAULT_WORD_CAP })
    }

    /// `λ^{-k} ||φ^k(g)||_T` for `k = 0..=n`.
    pub fn sequence(&self, g: &Word) -> Result<Vec<f64>> {
        let classes = iterate_class(&self.phi, g, self.n, self.cap)?;
        classes
            .iter()
            .enumerate()
            .map(|(k, x)| Ok(rational::to_f64(&self.graph.translation_length(x)?) / self.lambda.powi(k as i32)))
            .collect()
    }
}

impl LengthFunction for StableLengthOracle {
    fn rank(&self) -> usize {
        self.phi.rank()
    }

    fn evaluate(&self, w: &Word) -> Result<f64> {
        Ok(*self.sequence(w)?.last().expect("n + 1 values"))
    }

    /// `|value(n) − value(n−1)|`.
    fn error_bound(&self, w: &Word) -> Result<f64> {
        let s = self.sequence(w)?;
        Ok((s[self.n] - s[self.n - 1]).abs())
    }
}

pub fn stable_length_oracle(
    phi: &Automorphism,
    graph: &MarkedMetricGraph,
    lambda: f64,
    n: usize,
) -> Result<StableLengthOracle> {
    StableLengthOracle::new(phi.clone(), graph.clone(), lambda, n)
}

/// Aitken's Δ² estimate of the limit from the last three terms.
pub fn aitken_limit(seq: &[f64]) -> Option<f64> {
    let [a, b, c] = seq.get(seq.len().checked_sub(3)?..)? else {
        return None;
    };
    let denom = c - 2.0 * b + a;
    if denom == 0.0 {
        return Some(*c);
    }
    Some(c - (c - b) * (c - b) / denom)
}

/// Frequency vectors of `η_{φ^k(g)}` for `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct EigencurrentApprox {
    pub vectors: Vec<FrequencyVector>,
    /// `deltas[k]` is the sup-norm distance between steps `k` and `k+1`.
    pub deltas: Vec<f64>,
}

impl EigencurrentApprox {
    pub fn last(&self) -> &FrequencyVector {
        self.vectors.last().expect("n + 1 vectors")
    }
}

pub fn eigencurrent_approx(
    phi: &Automorphism,
    g: &Word,
    n: usize,
    graph: &MarkedMetricGraph,
    k: usize,
) -> Result<EigencurrentApprox> {
    if g.is_identity() {
        return Err(Error::IdentityInput);
    }
    let classes = iterate_class(phi, g, n, DEFAULT_WORD_CAP)?;
    let vectors = classes
        .iter()
        .map(|x| RationalCurrent::counting(phi.rank(), x)?.frequency_vector(graph, k))
        .collect::<Result<Vec<_>>>()?;
    let deltas = vectors.windows(2).map(|w| w[0].sup_distance(&w[1])).collect();
    Ok(EigencurrentApprox { vectors, deltas })
}

/// `λ^{-2j} ||φ^{2j}(g)||_T` for `j = 1..=n`.
#[derive(Clone, Debug)]
pub struct PairingEstimate {
    pub terms: Vec<f64>,
    /// `[min, max]` of the observed terms.
    pub window: (f64, f64),
}

impl PairingEstimate {
    pub fn value(&self) -> f64 {
        *self.terms.last().expect("n ≥ 1")
    }

    pub fn differences(&self) -> Vec<f64> {
        self.terms.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    /// `C` with every term in `[1/C, C]`.
    pub fn window_constant(&self) -> f64 {
        self.window.1.max(1.0 / self.window.0)
    }

    pub fn bounded_away_from_zero(&self) -> bool {
        self.window.0 > 0.0 && self.window.1.is_finite()
    }
}

pub fn pairing_estimate(
    phi: &Automorphism,
    graph: &MarkedMetricGraph,
    lambda: f64,
    g: &Word,
    n: usize,
) -> Result<PairingEstimate> {
    if g.is_identity() {
        return Err(Error::IdentityInput);
    }
    if n == 0 {
        return Err(Error::Parse("n must be at least 1".into()));
    }
    let classes = iterate_class(phi, g, 2 * n, DEFAULT_WORD_CAP)?;
    let terms: Vec<f64> = (1..=n)
        .map(|j| Ok(rational::to_f64(&graph.translation_length(&classes[2 * j])?) / lambda.powi(2 * j as i32)))
        .collect::<Result<_>>()?;
    let lo = terms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PairingEstimate { terms, window: (lo, hi) })
}

/// Total `L`-length of the image of each positive edge.
pub fn image_lengths(f: &GraphMap, graph: &MarkedMetricGraph) -> Vec<Rational> {
    let g = graph.graph();
    g.positive_edges().iter().map(|&e| graph.path_length(f.edge_image(e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::marked_graph::unit_rose;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn golden() -> f64 {
        // positive root of x² − x − 1 by bisection
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid - mid - 1.0 > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    #[test]
    fn fibonacci_transition_matrix() {
        let f = fixtures::fibonacci_map();
        let m = transition_matrix(&f);
        assert_eq!(m.entries, vec![vec![1, 1], vec![1, 0]]);
        assert!(m.matches(&f));
        // no cancellation in f∘f, so the matrix squares
        assert!(f.images_stay_legal(4));
        assert_eq!(transition_matrix(&f.square().unwrap()), m.mul(&m));
    }

    #[test]
    fn identity_map() {
        let r = unit_rose(2).unwrap();
        let images = r.graph().positive_edges().iter().map(|&e| (e, vec![e])).collect();
        let f = GraphMap::new(r, vec![0], images, Automorphism::identity(2).unwrap()).unwrap();
        let m = transition_matrix(&f);
        assert_eq!(m.entries, vec![vec![1, 0], vec![0, 1]]);
        assert!(matches!(pf_eigenpair(&m, 1e-10), Err(Error::NotPrimitive)));
    }

    #[test]
    fn rejects_wrong_automorphism() {
        let f = fixtures::fibonacci_map();
        let wrong = Automorphism::identity(2).unwrap();
        let err = GraphMap::new(
            f.graph().clone(),
            vec![0],
            f.graph().graph().positive_edges().iter().map(|&e| (e, f.edge_image(e).to_vec())).collect(),
            wrong,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGraphMap(_)));
    }

    #[test]
    fn accepts_inner_twist() {
        // a ↦ ab, b ↦ a composed with conjugation by b still represents φ
        let f = fixtures::fibonacci_map();
        let phi = f.automorphism();
        let b = w("b");
        let twisted = Automorphism::new(
            2,
            phi.images().iter().map(|x| x.conjugate_by(&b)).collect(),
            phi.inverse_images().iter().map(|x| phi.apply_inverse(&b).inverse().mul(x).mul(&phi.apply_inverse(&b))).collect(),
        )
        .unwrap();
        let images = f.graph().graph().positive_edges().iter().map(|&e| (e, f.edge_image(e).to_vec())).collect();
        GraphMap::new(f.graph().clone(), vec![0], images, twisted).unwrap();
    }

    #[test]
    fn inner_conjugator_examples() {
        let c = w("bAb");
        let imgs: Vec<Word> = (1..=3).map(|i| Word::generator(i).conjugate_by(&c)).collect();
        let found = inner_conjugator(&imgs, 3).unwrap();
        for i in 1..=3 {
            assert_eq!(Word::generator(i).conjugate_by(&found), imgs[i - 1]);
        }
        assert!(inner_conjugator(&[w("b"), w("a")], 2).is_none());
    }

    #[test]
    fn fibonacci_pf() {
        let m = transition_matrix(&fixtures::fibonacci_map());
        let pf = pf_eigenpair(&m, 1e-13).unwrap();
        assert!((pf.eigenvalue - golden()).abs() < 1e-9);
        assert!(pf.eigenvalue_error < 1e-9);
        assert!(pf.residual < 1e-9);
        assert!((pf.eigenvector[0] / pf.eigenvector[1] - golden()).abs() < 1e-8);
    }

    fn char_poly_root(m: &[Vec<u64>]) -> f64 {
        let a = |i: usize, j: usize| m[i][j] as f64;
        let tr = a(0, 0) + a(1, 1) + a(2, 2);
        let minors = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2)
            - a(1, 2) * a(2, 1);
        let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        let p = |x: f64| x * x * x - tr * x * x + minors * x - det;
        // walk down from above every root, then bisect the first sign change
        let mut hi = 1.0 + m.iter().flatten().sum::<u64>() as f64;
        let step = 1e-3;
        let mut lo = hi - step;
        while p(lo) > 0.0 {
            hi = lo;
            lo -= step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn pf_matches_characteristic_polynomial() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 50 {
            let entries: Vec<Vec<u64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(0..4)).collect()).collect();
            let m = TransitionMatrix::new(entries.clone());
            if !m.is_primitive() {
                assert!(matches!(pf_eigenpair(&m, 1e-12), Err(Error::NotPrimitive)));
                continue;
            }
            let pf = pf_eigenpair(&m, 1e-13).unwrap();
            assert!((pf.eigenvalue - char_poly_root(&entries)).abs() < 1e-8, "{entries:?}");
            checked += 1;
        }
        for f in [fixtures::tribonacci_map(), fixtures::plastic_map()] {
            let m = transition_matrix(&f);
            let pf = pf_eigenpair(&m, 1e-13).unwrap();
            assert!((pf.eigenvalue - char_poly_root(&m.entries)).abs() < 1e-8);
        }
    }

    #[test]
    fn primitivity() {
        assert!(TransitionMatrix::new(vec![vec![0, 1], vec![1, 1]]).is_primitive());
        // a permutation is irreducible but not primitive
        assert!(!TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]).is_primitive());
        assert!(!TransitionMatrix::new(vec![vec![1, 1], vec![0, 1]]).is_primitive());
    }

    #[test]
    fn fibonacci_metric() {
        let f = fixtures::fibonacci_map();
        let pm = metric_from_pf(&f, 1e-10).unwrap();
        let g = pm.graph.graph();
        let la = rational::to_f64(pm.graph.length(g.edge_id("a").unwrap()));
        let lb = rational::to_f64(pm.graph.length(g.edge_id("b").unwrap()));
        assert!((la / lb - golden()).abs() < 1e-8);
        assert_eq!(pm.graph.volume(), Rational::from_integer(1.into()));
        assert!(pm.bound < 1e-8);
        for (img, &e) in image_lengths(&f, &pm.graph).iter().zip(g.positive_edges()) {
            let defect = (rational::to_f64(img) - pm.pf.eigenvalue * rational::to_f64(pm.graph.length(e))).abs();
            assert!(defect <= pm.bound + 1e-15);
        }
    }

    #[test]
    fn stable_lengths_converge() {
        let f = fixtures::fibonacci_map();
        let lambda = golden();
        let oracle = stable_length_oracle(f.automorphism(), &unit_rose(2).unwrap(), lambda, 20).unwrap();
        let seq = oracle.sequence(&w("a")).unwrap();
        let diffs: Vec<f64> = seq.windows(2).map(|x| (x[1] - x[0]).abs()).collect();
        for d in diffs.windows(2) {
            assert!(d[1] < d[0]);
        }
        assert_eq!(oracle.evaluate(&Word::identity()).unwrap(), 0.0);
        let v = oracle.evaluate(&w("ab")).unwrap();
        assert!((oracle.evaluate(&w("abab")).unwrap() - 2.0 * v).abs() < 1e-9);
        assert!((oracle.evaluate(&w("Aaba")).unwrap() - oracle.evaluate(&w("ba")).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn stable_length_error_bound_covers_extrapolation() {
        let f = fixtures::fibonacci_map();
        let r = unit_rose(2).unwrap();
        let mu = RationalCurrent::counting(2, &w("a"))
            .unwrap()
            .add(&RationalCurrent::counting(2, &w("aBB")).unwrap())
            .unwrap();
        let long = stable_length_oracle(f.automorphism(), &r, golden(), 24).unwrap();
        let seq: Vec<f64> = (1..=24)
            .map(|n| {
                let o = stable_length_oracle(f.automorphism(), &r, golden(), n).unwrap();
                crate::intersection::intersect_oracle(&o, &mu).unwrap().value
            })
            .collect();
        let limit = aitken_limit(&seq).unwrap();
        for n in [8, 10, 12] {
            let o = stable_length_oracle(f.automorphism(), &r, golden(), n).unwrap();
            let est = crate::intersection::intersect_oracle(&o, &mu).unwrap();
            assert!((est.value - limit).abs() <= est.error_bound, "n = {n}");
        }
        assert!(crate::intersection::intersect_oracle(&long, &mu).unwrap().error_bound < 1e-6);
    }

    #[test]
    fn eigencurrent_examples() {
        let f = fixtures::fibonacci_map();
        let r = unit_rose(2).unwrap();
        let phi = f.automorphism();
        let zero = eigencurrent_approx(phi, &w("a"), 0, &r, 2).unwrap();
        let direct = RationalCurrent::counting(2, &w("a")).unwrap().frequency_vector(&r, 2).unwrap();
        assert_eq!(zero.last(), &direct);
        let single = eigencurrent_approx(phi, &w("ab"), 6, &r, 2).unwrap();
        let double = eigencurrent_approx(phi, &w("abab"), 6, &r, 2).unwrap();
        assert_eq!(single.last().values, double.last().values);
        let from_a = eigencurrent_approx(phi, &w("a"), 15, &r, 2).unwrap();
        let from_b = eigencurrent_approx(phi, &w("b"), 15, &r, 2).unwrap();
        assert!(from_a.last().sup_distance(from_b.last()) < 1e-4);
        assert!(matches!(eigencurrent_approx(phi, &Word::identity(), 3, &r, 2), Err(Error::IdentityInput)));
    }

    #[test]
    fn pairing_examples() {
        let f = fixtures::fibonacci_map();
        let r = unit_rose(2).unwrap();
        let phi = f.automorphism();
        let est = pairing_estimate(phi, &r, golden(), &w("a"), 10).unwrap();
        assert!(est.bounded_away_from_zero());
        let conj = pairing_estimate(phi, &r, golden(), &w("baB"), 10).unwrap();
        assert_eq!(est.terms, conj.terms);
        // the inverse is represented by the same rose with λ unchanged
        let inv = pairing_estimate(&phi.inverse(), &r, golden(), &w("a"), 8).unwrap();
        assert!(inv.bounded_away_from_zero());
    }

    #[test]
    fn word_cap() {
        let phi = fixtures::fibonacci_map().automorphism().clone();
        let err = iterate_class(&phi, &w("a"), 40, 1000).unwrap_err();
        assert!(matches!(err, Error::WordLengthCap { cap: 1000, .. }));
    }

    #[test]
    fn json_round_trip() {
        let f = fixtures::tribonacci_map();
        let back = GraphMap::from_json(&f.to_json()).unwrap();
        assert_eq!(transition_matrix(&back), transition_matrix(&f));
    }

    #[test]
    fn aitken_on_geometric_sequence() {
        let seq: Vec<f64> = (0..10).map(|k| 3.0 + 0.5f64.powi(k)).collect();
        assert!((aitken_limit(&seq).unwrap() - 3.0).abs() < 1e-12);
        assert!(aitken_limit(&seq[..2]).is_none());
    }
}
