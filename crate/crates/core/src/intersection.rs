//! The geometric intersection form `⟨T, μ⟩` between points of Outer space
//! and rational currents.
//!
//! On a marked metric graph the form is evaluated twice: once as
//! `Σ weight · ||root||_T` and once as `Σ_{e ∈ E^+} L(e) ⟨e, μ⟩_α`. Both are
//! exact, so any difference is reported as an error.

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::currents::RationalCurrent;
use crate::error::{Error, Result};
use crate::marked_graph::MarkedMetricGraph;
use crate::rational::{self, Rational};
use crate::words::{Automorphism, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intersection {
    pub value: Rational,
    /// `Σ weight · ||root||_T`
    pub route_a: Rational,
    /// `Σ_{E^+} L(e) ⟨e, μ⟩_α`
    pub route_b: Rational,
}

pub fn route_translation(graph: &MarkedMetricGraph, mu: &RationalCurrent) -> Result<Rational> {
    check_rank(graph, mu)?;
    let mut total = Rational::zero();
    for (root, c) in mu.terms() {
        total += c * graph.cyclic_translation_length(root)?;
    }
    Ok(total)
}

pub fn route_cylinders(graph: &MarkedMetricGraph, mu: &RationalCurrent) -> Result<Rational> {
    check_rank(graph, mu)?;
    let mut total = Rational::zero();
    for &e in graph.graph().positive_edges() {
        total += graph.length(e) * mu.cylinder_count(graph, &[e])?;
    }
    Ok(total)
}

fn check_rank(graph: &MarkedMetricGraph, mu: &RationalCurrent) -> Result<()> {
    if graph.rank() != mu.rank() {
        return Err(Error::RankMismatch { expected: graph.rank(), found: mu.rank() });
    }
    Ok(())
}

/// `⟨T, μ⟩` with the two-route self-check.
pub fn intersect(graph: &MarkedMetricGraph, mu: &RationalCurrent) -> Result<Intersection> {
    let route_a = route_translation(graph, mu)?;
    let route_b = route_cylinders(graph, mu)?;
    if route_a != route_b {
        return Err(Error::RouteDisagreement { route_a: Box::new(route_a), route_b: Box::new(route_b) });
    }
    Ok(Intersection { value: route_a.clone(), route_a, route_b })
}

/// A translation length function `g ↦ ||g||_T`, possibly approximate.
pub trait LengthFunction {
    fn rank(&self) -> usize;

    fn evaluate(&self, w: &Word) -> Result<f64>;

    fn is_exact(&self) -> bool {
        false
    }

    /// Error estimate for [`evaluate`](Self::evaluate) at `w`; zero for exact
    /// oracles.
    fn error_bound(&self, _w: &Word) -> Result<f64> {
        Ok(0.0)
    }
}

impl LengthFunction for MarkedMetricGraph {
    fn rank(&self) -> usize {
        MarkedMetricGraph::rank(self)
    }

    fn evaluate(&self, w: &Word) -> Result<f64> {
        Ok(rational::to_f64(&self.translation_length(w)?))
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `c · T` for any length function `T`.
pub struct Scaled<'a, T: ?Sized> {
    pub factor: f64,
    pub inner: &'a T,
}

impl<T: LengthFunction + ?Sized> LengthFunction for Scaled<'_, T> {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn evaluate(&self, w: &Word) -> Result<f64> {
        Ok(self.factor * self.inner.evaluate(w)?)
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn error_bound(&self, w: &Word) -> Result<f64> {
        Ok(self.factor.abs() * self.inner.error_bound(w)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleIntersection {
    pub value: f64,
    pub error_bound: f64,
}

/// `Σ weight · T(root)` for any length function.
pub fn intersect_oracle<T: LengthFunction + ?Sized>(oracle: &T, mu: &RationalCurrent) -> Result<OracleIntersection> {
    if oracle.rank() != mu.rank() {
        return Err(Error::RankMismatch { expected: oracle.rank(), found: mu.rank() });
    }
    let mut value = 0.0;
    let mut error_bound = 0.0;
    for (root, c) in mu.terms() {
        let w = root.to_word();
        let c = rational::to_f64(c);
        value += c * oracle.evaluate(&w)?;
        error_bound += c * oracle.error_bound(&w)?;
    }
    Ok(OracleIntersection { value, error_bound })
}

/// Worst violations of the length-function laws on a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OracleCheck {
    pub identity: f64,
    pub conjugacy: f64,
    pub homogeneity: f64,
}

impl OracleCheck {
    pub fn within(&self, tol: f64) -> bool {
        self.identity <= tol && self.conjugacy <= tol && self.homogeneity <= tol
    }
}

/// Spot-checks `T(1) = 0`, `T(a_1 g a_1^{-1}) = T(g)` and `T(g²) = 2T(g)`
/// relative to `max(1, T(g))`.
pub fn spot_check<T: LengthFunction + ?Sized>(oracle: &T, sample: &[Word]) -> Result<OracleCheck> {
    let mut check = OracleCheck { identity: oracle.evaluate(&Word::identity())?.abs(), ..Default::default() };
    let conj = Word::generator(1);
    for g in sample {
        let v = oracle.evaluate(g)?;
        let scale = v.abs().max(1.0);
        let c = oracle.evaluate(&g.conjugate_by(&conj))?;
        check.conjugacy = check.conjugacy.max((c - v).abs() / scale);
        let sq = oracle.evaluate(&g.pow(2))?;
        check.homogeneity = check.homogeneity.max((sq - 2.0 * v).abs() / scale);
    }
    Ok(check)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivarianceReport {
    /// `⟨T, μ⟩`
    pub original: Rational,
    /// `⟨φT, φμ⟩`
    pub moved: Rational,
}

impl EquivarianceReport {
    pub fn holds(&self) -> bool {
        self.original == self.moved
    }
}

pub fn equivariance_check(phi: &Automorphism, graph: &MarkedMetricGraph, mu: &RationalCurrent) -> Result<EquivarianceReport> {
    let original = intersect(graph, mu)?.value;
    let moved = intersect(&graph.act(phi)?, &mu.act(phi)?)?.value;
    Ok(EquivarianceReport { original, moved })
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    /// `max_w | ||w||_{T_1} − ||w||_{T_2} | / ||w||_A`
    pub empirical: Rational,
    /// `δ · max_w (edge crossings of w) / ||w||_A`
    pub a_priori: Rational,
    pub worst_word: Option<Word>,
    pub first: MarkedMetricGraph,
    pub second: MarkedMetricGraph,
}

impl ScalingReport {
    pub fn holds(&self) -> bool {
        self.empirical <= self.a_priori
    }
}

/// Builds `T_1, T_2` whose edge lengths differ from those of `graph` by
/// independent amounts in `[−δ/2, δ/2]` (so the two trees differ by at most
/// `δ` per edge), then measures the scaling modulus over `sample`.
pub fn scaling_modulus_experiment<R: Rng + ?Sized>(
    graph: &MarkedMetricGraph,
    delta: &Rational,
    sample: &[Word],
    rng: &mut R,
) -> Result<ScalingReport> {
    if delta.is_negative() {
        return Err(Error::NegativeScalar(Box::new(delta.clone())));
    }
    let half = delta / rational::int(2);
    let g = graph.graph();
    if let Some(&e) = g.positive_edges().iter().find(|&&e| *graph.length(e) <= half) {
        return Err(Error::NonPositiveLength(format!(
            "perturbing {} (length {}) by {} can make it nonpositive",
            g.edge_name(e),
            rational::format(graph.length(e)),
            rational::format(&half)
        )));
    }
    const STEPS: i64 = 1000;
    let mut perturbed = || -> Result<MarkedMetricGraph> {
        let lengths: Vec<Rational> = g
            .positive_edges()
            .iter()
            .map(|&e| {
                let k = rng.gen_range(0..=STEPS);
                graph.length(e) + delta * rational::ratio(k, STEPS) - &half
            })
            .collect();
        graph.with_positive_lengths(&lengths)
    };
    let first = perturbed()?;
    let second = perturbed()?;
    let mut empirical = Rational::zero();
    let mut max_crossings = Rational::zero();
    let mut worst_word = None;
    for w in sample {
        let a_len = w.cyclic_len();
        if a_len == 0 {
            continue;
        }
        let a_len = Rational::from_integer(a_len.into());
        let diff = (first.translation_length(w)? - second.translation_length(w)?).abs() / &a_len;
        if diff > empirical || worst_word.is_none() {
            empirical = diff.max(empirical);
            worst_word = Some(w.clone());
        }
        let cw = crate::words::CyclicWord::new(w).expect("nontrivial");
        let crossings = Rational::from_integer(graph.edge_crossings(&cw)?.total().into()) / &a_len;
        max_crossings = max_crossings.max(crossings);
    }
    Ok(ScalingReport { empirical, a_priori: delta * max_crossings, worst_word, first, second })
}
