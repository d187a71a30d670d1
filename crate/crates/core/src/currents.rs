//! Rational geodesic currents: finite nonnegative combinations of counting
//! currents `η_g`.
//!
//! A current is stored as a map from conjugacy classes to weights. Keys are
//! primitive (not proper powers) and flip-normalized: of `f` and `f^{-1}`
//! only the smaller canonical rotation is kept, so `η_g = η_{g^{-1}}` holds
//! by construction. Cylinder values `⟨v, μ⟩_α` are computed by counting
//! occurrences of `v` and `v^{-1}` in one period of each cyclic edge loop,
//! wrapping around the period boundary.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked_graph::{EdgeId, MarkedMetricGraph, SerreGraph};
use crate::rational::{self, Rational};
use crate::words::{Automorphism, CyclicWord, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCurrent {
    rank: usize,
    terms: BTreeMap<CyclicWord, Rational>,
}

/// Primitive root of `cw` with the flip normalization, and the exponent.
pub fn normalized_key(cw: &CyclicWord) -> (CyclicWord, usize) {
    let (root, m) = cw.primitive_root();
    let inv = root.inverse();
    (root.min(inv), m)
}

impl RationalCurrent {
    pub fn zero(rank: usize) -> Self {
        RationalCurrent { rank, terms: BTreeMap::new() }
    }

    /// `η_g = m·η_f` for `g = f^m` with `f` not a proper power.
    pub fn counting(rank: usize, w: &Word) -> Result<Self> {
        let cw = CyclicWord::new(w).ok_or(Error::IdentityInput)?;
        Self::counting_class(rank, &cw)
    }

    pub fn counting_class(rank: usize, cw: &CyclicWord) -> Result<Self> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        cw.to_word().check_rank(rank)?;
        let (key, m) = normalized_key(cw);
        Ok(RationalCurrent { rank, terms: BTreeMap::from([(key, Rational::from_integer(m.into()))]) })
    }

    /// `Σ c_i η_{g_i}`; terms may repeat and need not be primitive.
    pub fn from_terms(rank: usize, terms: impl IntoIterator<Item = (Word, Rational)>) -> Result<Self> {
        let mut acc = Self::zero(rank);
        for (w, c) in terms {
            acc = acc.add(&Self::counting(rank, &w)?.scale(&c)?)?;
        }
        Ok(acc)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(primitive root, weight)` pairs in key order.
    pub fn terms(&self) -> impl Iterator<Item = (&CyclicWord, &Rational)> {
        self.terms.iter()
    }

    pub fn weight(&self, cw: &CyclicWord) -> Rational {
        let (key, m) = normalized_key(cw);
        self.terms.get(&key).map_or_else(Rational::zero, |c| c * Rational::from_integer(m.into()))
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if self.rank != rank {
            Err(Error::RankMismatch { expected: rank, found: self.rank })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        other.check_rank(self.rank)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            *terms.entry(k.clone()).or_insert_with(Rational::zero) += c;
        }
        Ok(RationalCurrent { rank: self.rank, terms })
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        if lambda.is_negative() {
            return Err(Error::NegativeScalar(Box::new(lambda.clone())));
        }
        if lambda.is_zero() {
            return Ok(Self::zero(self.rank));
        }
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c * lambda)).collect();
        Ok(RationalCurrent { rank: self.rank, terms })
    }

    /// `Σ weight · ||root||_A`, which is `⟨T_A, μ⟩`.
    pub fn one_letter_mass(&self) -> Rational {
        self.terms.iter().map(|(k, c)| c * Rational::from_integer(k.len().into())).sum()
    }

    /// `φμ`, with `φ η_{[g]} = η_{φ[g]}`.
    pub fn act(&self, phi: &Automorphism) -> Result<Self> {
        self.check_rank(phi.rank())?;
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            // automorphisms send primitive roots to primitive roots
            let (key, m) = normalized_key(&phi.apply_cyclic(k));
            debug_assert_eq!(m, 1);
            *terms.entry(key).or_insert_with(Rational::zero) += c;
        }
        Ok(RationalCurrent { rank: self.rank, terms })
    }

    /// `⟨v, μ⟩_α`.
    pub fn cylinder_count(&self, graph: &MarkedMetricGraph, v: &[EdgeId]) -> Result<Rational> {
        self.check_rank(graph.rank())?;
        let g = graph.graph();
        if v.is_empty() || v.iter().any(|&e| e >= g.edge_count()) || !g.is_path(v) || !g.is_reduced(v) {
            return Err(Error::NotReduced(format!("{v:?} is not a nontrivial reduced edge path")));
        }
        let inv = g.path_inverse(v);
        let mut total = Rational::zero();
        for (root, c) in &self.terms {
            let period = graph.cyclic_path(&root.to_word());
            let n = cyclic_occurrences(&period, v) + cyclic_occurrences(&period, &inv);
            total += c * Rational::from_integer(n.into());
        }
        Ok(total)
    }

    /// Cylinder values of every reduced edge path of length `k` (one per
    /// inverse pair), divided by the one-letter mass.
    pub fn frequency_vector(&self, graph: &MarkedMetricGraph, k: usize) -> Result<FrequencyVector> {
        self.check_rank(graph.rank())?;
        if k == 0 {
            return Err(Error::Parse("depth must be at least 1".into()));
        }
        if self.is_zero() {
            return Err(Error::ZeroCurrent);
        }
        let g = graph.graph();
        let paths = g.reduced_paths_up_to_inversion(k);
        let mut totals: HashMap<Vec<EdgeId>, Rational> = HashMap::new();
        for (root, c) in &self.terms {
            let period = graph.cyclic_path(&root.to_word());
            for (window, n) in window_counts(g, &period, k) {
                *totals.entry(window).or_insert_with(Rational::zero) += c * Rational::from_integer(n.into());
            }
        }
        let mass = self.one_letter_mass();
        let counts: Vec<Rational> = paths.iter().map(|p| totals.get(p).cloned().unwrap_or_else(Rational::zero)).collect();
        let values = counts.iter().map(|x| x / &mass).collect();
        Ok(FrequencyVector { depth: k, paths, counts, values, mass })
    }

    pub fn to_data(&self) -> CurrentData {
        CurrentData {
            rank: self.rank,
            terms: self.terms.iter().map(|(k, c)| TermData { root: k.to_word(), weight: c.clone() }).collect(),
        }
    }

    pub fn from_data(data: CurrentData) -> Result<Self> {
        Self::from_terms(data.rank, data.terms.into_iter().map(|t| (t.root, t.weight)))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_data(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_data()).expect("current data serializes")
    }
}

/// Number of positions `i` in one period where `v` reads along `period`
/// starting at `i`, indices taken cyclically.
pub fn cyclic_occurrences(period: &[EdgeId], v: &[EdgeId]) -> u64 {
    let p = period.len();
    if p == 0 {
        return 0;
    }
    (0..p).filter(|&i| v.iter().enumerate().all(|(j, &e)| period[(i + j) % p] == e)).count() as u64
}

/// Counts of every length-`k` cyclic window, each folded to the smaller of
/// itself and its inverse.
fn window_counts(g: &SerreGraph, period: &[EdgeId], k: usize) -> HashMap<Vec<EdgeId>, u64> {
    let p = period.len();
    let mut out = HashMap::new();
    let mut window = Vec::with_capacity(k);
    for i in 0..p {
        window.clear();
        window.extend((0..k).map(|j| period[(i + j) % p]));
        let inv = g.path_inverse(&window);
        let key = if window <= inv { window.clone() } else { inv };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Normalized cylinder values at a fixed depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    pub depth: usize,
    /// One representative per inverse pair, sorted.
    pub paths: Vec<Vec<EdgeId>>,
    /// Unnormalized `⟨v, μ⟩_α`.
    pub counts: Vec<Rational>,
    /// `counts / mass`.
    pub values: Vec<Rational>,
    pub mass: Rational,
}

impl FrequencyVector {
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational::to_f64).collect()
    }

    /// Sup-norm distance; both vectors must come from the same graph and
    /// depth.
    pub fn sup_distance(&self, other: &FrequencyVector) -> f64 {
        assert_eq!(self.paths, other.paths, "frequency vectors over different paths");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| rational::to_f64(&(a - b).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn counting_current(rank: usize, w: &Word) -> Result<RationalCurrent> {
    RationalCurrent::counting(rank, w)
}

pub fn one_letter_mass(mu: &RationalCurrent) -> Rational {
    mu.one_letter_mass()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurrentData {
    pub rank: usize,
    pub terms: Vec<TermData>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermData {
    pub root: Word,
    #[serde(serialize_with = "rational::serialize", deserialize_with = "rational::deserialize")]
    pub weight: Rational,
}
