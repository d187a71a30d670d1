//! One-edge free splittings of `F_N` with trivial edge group, optionally
//! twisted by an automorphism, and the graphs built from them: the free
//! splitting graph 𝓕, the splitting graph 𝓢 that also allows loop edges,
//! the dual graph 𝓕*, the ellipticity graph 𝓩 and the intersection graph
//! 𝓘₀.
//!
//! A splitting is stored in an adapted basis: a separating splitting
//! `⟨a_i : i ∈ S⟩ ∗ ⟨a_i : i ∉ S⟩` or a loop splitting with stable letter
//! `a_t` over `⟨a_i : i ≠ t⟩`. A twist `φ` replaces the Bass-Serre tree `T`
//! by `φT`, whose length function is `g ↦ ||φ^{-1}(g)||_T`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::currents::{normalized_key, CurrentData, RationalCurrent};
use crate::error::{Error, Result};
use crate::marked_graph::MarkedMetricGraph;
use crate::rational::Rational;
use crate::words::{cyclic_words_up_to, Automorphism, CyclicWord, Word};

pub const DEFAULT_KEY_DEPTH: usize = 4;
pub const DEFAULT_SEARCH_LENGTH: usize = 3;
pub const DEFAULT_STATE_CAP: usize = 5_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplittingKind {
    /// Normalized so that `1 ∈ S`.
    Separating(BTreeSet<usize>),
    Loop(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeSplitting {
    rank: usize,
    kind: SplittingKind,
    twist: Automorphism,
}

impl FreeSplitting {
    /// `⟨a_i : i ∈ S⟩ ∗ ⟨rest⟩`; `S` and its complement give the same
    /// splitting.
    pub fn separating(rank: usize, subset: impl IntoIterator<Item = usize>) -> Result<Self> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        let mut s: BTreeSet<usize> = subset.into_iter().collect();
        if let Some(&i) = s.iter().find(|&&i| i == 0 || i > rank) {
            return Err(Error::LetterOutOfRange { index: i, rank });
        }
        if s.is_empty() || s.len() == rank {
            return Err(Error::InvalidSplitting("subset must be nonempty and proper".into()));
        }
        if !s.contains(&1) {
            s = (1..=rank).filter(|i| !s.contains(i)).collect();
        }
        Ok(FreeSplitting { rank, kind: SplittingKind::Separating(s), twist: Automorphism::identity(rank)? })
    }

    /// HNN splitting over `⟨a_i : i ≠ t⟩` with stable letter `a_t`.
    pub fn loop_at(rank: usize, stable: usize) -> Result<Self> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        if stable == 0 || stable > rank {
            return Err(Error::LetterOutOfRange { index: stable, rank });
        }
        Ok(FreeSplitting { rank, kind: SplittingKind::Loop(stable), twist: Automorphism::identity(rank)? })
    }

    pub fn with_twist(mut self, twist: Automorphism) -> Result<Self> {
        if twist.rank() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: twist.rank() });
        }
        self.twist = twist;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> &SplittingKind {
        &self.kind
    }

    pub fn twist(&self) -> &Automorphism {
        &self.twist
    }

    pub fn is_separating(&self) -> bool {
        matches!(self.kind, SplittingKind::Separating(_))
    }

    /// Same splitting with the twist forgotten.
    pub fn untwisted(&self) -> Self {
        FreeSplitting { twist: Automorphism::identity(self.rank).expect("rank ≥ 2"), ..self.clone() }
    }

    /// `φ · s`, the splitting whose tree is `φT`.
    pub fn act(&self, phi: &Automorphism) -> Result<Self> {
        Ok(FreeSplitting { twist: phi.compose(&self.twist)?, ..self.clone() })
    }

    /// Whether basis letter `a_i` lies in a vertex group of the untwisted
    /// splitting.
    pub fn letter_is_elliptic(&self, i: usize) -> bool {
        match &self.kind {
            SplittingKind::Separating(_) => true,
            SplittingKind::Loop(t) => i != *t,
        }
    }

    fn base_length(&self, g: &Word) -> u64 {
        let core = g.cyclic_core().0;
        match &self.kind {
            SplittingKind::Separating(s) => {
                let side: Vec<bool> = core.letters().iter().map(|l| s.contains(&l.index())).collect();
                let n = side.len();
                (0..n).filter(|&i| side[i] != side[(i + n - 1) % n]).count() as u64
            }
            SplittingKind::Loop(t) => core.letters().iter().filter(|l| l.index() == *t).count() as u64,
        }
    }

    /// Translation length on the Bass-Serre tree.
    pub fn length(&self, g: &Word) -> Result<u64> {
        g.check_rank(self.rank)?;
        Ok(self.base_length(&self.twist.apply_inverse(g)))
    }

    pub fn key(&self, depth: usize) -> GraphVertexKey {
        let words = cyclic_words_up_to(self.rank, depth);
        self.key_on(depth, &words)
    }

    fn key_on(&self, depth: usize, words: &[CyclicWord]) -> GraphVertexKey {
        let lengths = words.iter().map(|w| self.base_length(&self.twist.apply_inverse(&w.to_word()))).collect();
        GraphVertexKey { depth, lengths }
    }

    /// Every base splitting of the given rank: separating ones first, then
    /// loops.
    pub fn all_base(rank: usize, include_loops: bool) -> Vec<FreeSplitting> {
        let mut out = Vec::new();
        // subsets containing 1, as bit masks over a_2..a_N
        for mask in 0u64..(1 << (rank - 1)) - 1 {
            let subset = std::iter::once(1).chain((2..=rank).filter(|i| mask >> (i - 2) & 1 == 1));
            out.push(FreeSplitting::separating(rank, subset).expect("proper subset"));
        }
        if include_loops {
            out.extend((1..=rank).map(|t| FreeSplitting::loop_at(rank, t).expect("valid letter")));
        }
        out
    }

    pub fn to_data(&self) -> SplittingData {
        let (kind, subset, stable) = match &self.kind {
            SplittingKind::Separating(s) => ("sep", Some(s.iter().copied().collect()), None),
            SplittingKind::Loop(t) => ("loop", None, Some(*t)),
        };
        SplittingData {
            kind: kind.into(),
            rank: Some(self.rank),
            subset,
            stable,
            twist: (!self.twist.is_identity()).then(|| self.twist.clone()),
        }
    }

    /// `rank` is used when the data names neither a rank nor a twist.
    pub fn from_data(data: SplittingData, rank: Option<usize>) -> Result<Self> {
        let rank = data
            .rank
            .or(data.twist.as_ref().map(Automorphism::rank))
            .or(rank)
            .ok_or_else(|| Error::InvalidSplitting("rank is not determined".into()))?;
        let base = match (data.kind.as_str(), data.subset, data.stable) {
            ("sep", Some(s), None) => FreeSplitting::separating(rank, s)?,
            ("loop", None, Some(t)) => FreeSplitting::loop_at(rank, t)?,
            (k, _, _) => {
                return Err(Error::InvalidSplitting(format!(
                    "kind {k:?} needs exactly one of \"subset\" (sep) or \"stable\" (loop)"
                )))
            }
        };
        match data.twist {
            Some(phi) => base.with_twist(phi),
            None => Ok(base),
        }
    }

    pub fn from_json(s: &str, rank: Option<usize>) -> Result<Self> {
        Self::from_data(serde_json::from_str(s)?, rank)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_data()).expect("splitting data serializes")
    }
}

fn letters_of(set: impl IntoIterator<Item = usize>) -> String {
    set.into_iter().map(|i| Word::generator(i).to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FreeSplitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SplittingKind::Separating(s) => {
                let rest = (1..=self.rank).filter(|i| !s.contains(i));
                write!(f, "<{}>*<{}>", letters_of(s.iter().copied()), letters_of(rest))?
            }
            SplittingKind::Loop(t) => {
                let rest = (1..=self.rank).filter(|i| i != t);
                write!(f, "<{}>*<{}>", letters_of(rest), letters_of([*t]))?;
                write!(f, " (loop)")?
            }
        }
        if !self.twist.is_identity() {
            let images: Vec<String> = self.twist.images().iter().map(Word::to_string).collect();
            write!(f, " twisted by [{}]", images.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplittingData {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<usize>,
    #[serde(default)]
    pub twist: Option<Automorphism>,
}

/// Translation lengths on every cyclic word of length `≤ depth`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphVertexKey {
    pub depth: usize,
    pub lengths: Vec<u64>,
}

pub fn splitting_length(s: &FreeSplitting, g: &Word) -> Result<u64> {
    s.length(g)
}

pub fn is_elliptic(s: &FreeSplitting, g: &Word) -> Result<bool> {
    if g.is_identity() {
        return Err(Error::IdentityInput);
    }
    Ok(s.length(g)? == 0)
}

fn check_same_rank(s1: &FreeSplitting, s2: &FreeSplitting) -> Result<()> {
    if s1.rank != s2.rank {
        return Err(Error::RankMismatch { expected: s1.rank, found: s2.rank });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FstarVerdict {
    /// Nontrivial, elliptic in both.
    Yes(Word),
    /// No witness among the candidates tried; not a proof of
    /// non-adjacency.
    NoWithinBound,
}

impl FstarVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, FstarVerdict::Yes(_))
    }
}

/// Looks for a common elliptic element: basis letters and their images
/// under both twists first, then every cyclic word of length up to
/// `search_length`, shortest first.
pub fn fstar_adjacent(s1: &FreeSplitting, s2: &FreeSplitting, search_length: usize) -> Result<FstarVerdict> {
    check_same_rank(s1, s2)?;
    if s1.key(DEFAULT_KEY_DEPTH) == s2.key(DEFAULT_KEY_DEPTH) {
        return Err(Error::SameVertex);
    }
    let rank = s1.rank;
    let mut candidates: BTreeSet<(usize, Word)> = BTreeSet::new();
    for i in 1..=rank {
        let a = Word::generator(i);
        for w in [s1.twist.apply(&a), s2.twist.apply(&a), a] {
            candidates.insert((w.len(), w));
        }
    }
    for cw in cyclic_words_up_to(rank, search_length) {
        let w = cw.to_word();
        candidates.insert((w.len(), w));
    }
    for (_, w) in candidates {
        if is_elliptic(s1, &w)? && is_elliptic(s2, &w)? {
            return Ok(FstarVerdict::Yes(w));
        }
    }
    Ok(FstarVerdict::NoWithinBound)
}

/// Basis blocks of a two-edge refinement: collapsing one edge leaves
/// `C1 ∗ (C2 ∗ C3)`-type data for the first splitting, the other edge for
/// the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub c3: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementVerdict {
    Yes(Refinement),
    /// Same vertex.
    No,
    Unknown,
}

impl RefinementVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, RefinementVerdict::Yes(_))
    }
}

fn complement(rank: usize, s: &BTreeSet<usize>) -> BTreeSet<usize> {
    (1..=rank).filter(|i| !s.contains(i)).collect()
}

fn nested_refinement(rank: usize, s1: &BTreeSet<usize>, s2: &BTreeSet<usize>) -> Option<Refinement> {
    let sides1 = [s1.clone(), complement(rank, s1)];
    let sides2 = [s2.clone(), complement(rank, s2)];
    for x in &sides1 {
        for y in &sides2 {
            if x.len() < y.len() && x.is_subset(y) {
                return Some(Refinement {
                    c1: x.iter().copied().collect(),
                    c2: y.difference(x).copied().collect(),
                    c3: complement(rank, y).into_iter().collect(),
                });
            }
        }
    }
    None
}

/// 𝓕-adjacency for separating splittings written in a common basis: equal
/// twists and one side of the first splitting strictly inside one side of
/// the second. Anything else is `Unknown`.
pub fn refinement_adjacent(s1: &FreeSplitting, s2: &FreeSplitting) -> Result<RefinementVerdict> {
    check_same_rank(s1, s2)?;
    if !s1.is_separating() || !s2.is_separating() {
        return Err(Error::LoopKind);
    }
    s_adjacent(s1, s2)
}

/// 𝓢-adjacency, the same coordinate rule extended to loop edges: a loop
/// at `a_t` refines with every separating splitting and with every other
/// loop.
pub fn s_adjacent(s1: &FreeSplitting, s2: &FreeSplitting) -> Result<RefinementVerdict> {
    check_same_rank(s1, s2)?;
    if s1.key(DEFAULT_KEY_DEPTH) == s2.key(DEFAULT_KEY_DEPTH) {
        return Ok(RefinementVerdict::No);
    }
    if s1.twist != s2.twist {
        return Ok(RefinementVerdict::Unknown);
    }
    let rank = s1.rank;
    let loop_and_sep = |t: usize, s: &BTreeSet<usize>| {
        let without_t = if s.contains(&t) { complement(rank, s) } else { s.clone() };
        Refinement {
            c1: without_t.iter().copied().collect(),
            c2: (1..=rank).filter(|i| *i != t && !without_t.contains(i)).collect(),
            c3: vec![t],
        }
    };
    let found = match (&s1.kind, &s2.kind) {
        (SplittingKind::Separating(a), SplittingKind::Separating(b)) => nested_refinement(rank, a, b),
        (SplittingKind::Loop(t), SplittingKind::Separating(s)) | (SplittingKind::Separating(s), SplittingKind::Loop(t)) => {
            Some(loop_and_sep(*t, s))
        }
        (SplittingKind::Loop(t1), SplittingKind::Loop(t2)) => Some(Refinement {
            c1: vec![*t1],
            c2: vec![*t2],
            c3: (1..=rank).filter(|i| i != t1 && i != t2).collect(),
        }),
    };
    Ok(found.map_or(RefinementVerdict::Unknown, RefinementVerdict::Yes))
}

/// A tree side of the intersection graph.
#[derive(Clone, Copy, Debug)]
pub enum TreeRef<'a> {
    Splitting(&'a FreeSplitting),
    Graph(&'a MarkedMetricGraph),
}

/// `⟨T, μ⟩ = 0`, decided exactly.
pub fn intersection_graph_adjacent(t: TreeRef<'_>, mu: &RationalCurrent) -> Result<bool> {
    if mu.is_zero() {
        return Err(Error::ZeroCurrent);
    }
    match t {
        TreeRef::Graph(g) => {
            if g.rank() != mu.rank() {
                return Err(Error::RankMismatch { expected: g.rank(), found: mu.rank() });
            }
            // free simplicial actions pair positively with every nonzero current
            Ok(false)
        }
        TreeRef::Splitting(s) => {
            if s.rank != mu.rank() {
                return Err(Error::RankMismatch { expected: s.rank, found: mu.rank() });
            }
            Ok(pairing(s, mu)?.is_zero())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    /// Free splitting graph: separating splittings, refinement edges.
    F,
    /// Separating and loop splittings, refinement edges.
    S,
    /// Splittings joined when they share an elliptic element.
    Fstar,
    /// Splittings and conjugacy classes, joined when the class is elliptic.
    Z,
    /// Splittings and projective currents, joined when the pairing vanishes.
    I0,
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" => Ok(Flavor::F),
            "S" => Ok(Flavor::S),
            "Fstar" | "F*" => Ok(Flavor::Fstar),
            "Z" => Ok(Flavor::Z),
            "I0" | "I" => Ok(Flavor::I0),
            _ => Err(Error::Parse(format!("unknown flavor {s:?}; expected F, S, Fstar, Z or I0"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Vertex {
    Splitting(FreeSplitting),
    /// Conjugacy class of a nontrivial element, up to inversion.
    Class(CyclicWord),
    /// Projective class of a nonzero current.
    Current(RationalCurrent),
}

impl Vertex {
    /// For a class, the largest generator index it mentions.
    pub fn rank(&self) -> usize {
        match self {
            Vertex::Splitting(s) => s.rank,
            Vertex::Class(c) => c.max_index(),
            Vertex::Current(mu) => mu.rank(),
        }
    }

    pub fn act(&self, phi: &Automorphism) -> Result<Vertex> {
        Ok(match self {
            Vertex::Splitting(s) => Vertex::Splitting(s.act(phi)?),
            Vertex::Class(c) => Vertex::Class(class_of(&phi.apply(&c.to_word())).expect("automorphisms fix only 1")),
            Vertex::Current(mu) => Vertex::Current(mu.act(phi)?),
        })
    }

    pub fn from_data(data: VertexData, rank: Option<usize>) -> Result<Self> {
        match data {
            VertexData::Splitting(s) => Ok(Vertex::Splitting(FreeSplitting::from_data(s, rank)?)),
            VertexData::Current(c) => Ok(Vertex::Current(RationalCurrent::from_data(c)?)),
            VertexData::Class { class } => {
                Ok(Vertex::Class(class_of(&class.parse()?).ok_or(Error::IdentityInput)?))
            }
        }
    }

    pub fn from_json(s: &str, rank: Option<usize>) -> Result<Self> {
        Self::from_data(serde_json::from_str(s)?, rank)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Splitting(s) => write!(f, "{s}"),
            Vertex::Class(c) => write!(f, "[{}]", c.to_word()),
            Vertex::Current(mu) => {
                let terms: Vec<String> = mu
                    .terms()
                    .map(|(c, w)| format!("{}·η_{}", crate::rational::format(w), c.to_word()))
                    .collect();
                write!(f, "[{}]", terms.join(" + "))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexData {
    Splitting(SplittingData),
    Current(CurrentData),
    /// A word such as `"abA"`.
    Class { class: String },
}

/// Primitive root of the class of `w`, up to inversion.
pub fn class_of(w: &Word) -> Option<CyclicWord> {
    let (core, _) = w.cyclic_core();
    CyclicWord::new(&core).map(|c| normalized_key(&c).0)
}

/// `j: 𝓕 → 𝓕*`, the identity on vertex data.
pub fn map_j(s: &FreeSplitting) -> FreeSplitting {
    s.clone()
}

/// `q: 𝓕* → 𝓘₀`, the tree `[T]` as a vertex of the intersection graph.
pub fn map_q(s: &FreeSplitting) -> Vertex {
    Vertex::Splitting(s.clone())
}

#[derive(Clone, Debug)]
pub struct BfsOptions {
    pub key_depth: usize,
    pub search_length: usize,
    pub state_cap: usize,
}

impl Default for BfsOptions {
    fn default() -> Self {
        BfsOptions { key_depth: DEFAULT_KEY_DEPTH, search_length: DEFAULT_SEARCH_LENGTH, state_cap: DEFAULT_STATE_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Splitting(GraphVertexKey),
    Class(CyclicWord),
    Current(Vec<(CyclicWord, Rational)>),
}

struct Registry {
    depth: usize,
    words: Vec<CyclicWord>,
    deep_words: Option<Vec<CyclicWord>>,
    vertices: Vec<Vertex>,
    index: BTreeMap<Key, usize>,
    twists: Vec<Automorphism>,
}

impl Registry {
    fn new(rank: usize, depth: usize) -> Self {
        Registry {
            depth,
            words: cyclic_words_up_to(rank, depth),
            deep_words: None,
            vertices: Vec::new(),
            index: BTreeMap::new(),
            twists: vec![Automorphism::identity(rank).expect("rank ≥ 2")],
        }
    }

    fn key(&self, v: &Vertex) -> Key {
        match v {
            Vertex::Splitting(s) => Key::Splitting(s.key_on(self.depth, &self.words)),
            Vertex::Class(c) => Key::Class(c.clone()),
            Vertex::Current(mu) => {
                let mass = mu.terms().fold(Rational::zero(), |acc, (_, w)| acc + w);
                Key::Current(mu.terms().map(|(c, w)| (c.clone(), w / &mass)).collect())
            }
        }
    }

    /// Index of `v`, and whether it was new.
    fn insert(&mut self, v: Vertex) -> Result<(usize, bool)> {
        let key = self.key(&v);
        if let Some(&id) = self.index.get(&key) {
            if let (Vertex::Splitting(old), Vertex::Splitting(new)) = (&self.vertices[id], &v) {
                let deep = self.deep_words.get_or_insert_with(|| cyclic_words_up_to(new.rank, self.depth + 2));
                if old.key_on(self.depth + 2, deep) != new.key_on(self.depth + 2, deep) {
                    return Err(Error::KeyCollision(format!(
                        "{old} and {new} agree on words of length ≤ {} but not ≤ {}; raise the key depth",
                        self.depth,
                        self.depth + 2
                    )));
                }
            }
            return Ok((id, false));
        }
        if let Vertex::Splitting(s) = &v {
            if !self.twists.contains(&s.twist) {
                self.twists.push(s.twist.clone());
            }
        }
        self.vertices.push(v);
        self.index.insert(key, self.vertices.len() - 1);
        Ok((self.vertices.len() - 1, true))
    }
}

fn allowed(flavor: Flavor, v: &Vertex) -> bool {
    match (flavor, v) {
        (Flavor::F, Vertex::Splitting(s)) => s.is_separating(),
        (_, Vertex::Splitting(_)) => true,
        (Flavor::Z, Vertex::Class(_)) | (Flavor::I0, Vertex::Current(_)) => true,
        _ => false,
    }
}

/// Vertices proposed as neighbours of `v`; adjacency is decided
/// separately.
fn candidates(
    flavor: Flavor,
    rank: usize,
    v: &Vertex,
    moves: &[Automorphism],
    twists: &[Automorphism],
) -> Result<Vec<Vertex>> {
    let loops = flavor != Flavor::F;
    let mut out = Vec::new();
    match v {
        Vertex::Splitting(s) => match flavor {
            Flavor::F | Flavor::S | Flavor::Fstar => {
                for b in FreeSplitting::all_base(rank, loops) {
                    out.push(Vertex::Splitting(b.with_twist(s.twist.clone())?));
                }
            }
            Flavor::Z | Flavor::I0 => {
                for i in (1..=rank).filter(|&i| s.letter_is_elliptic(i)) {
                    let g = s.twist.apply(&Word::generator(i));
                    out.push(if flavor == Flavor::Z {
                        Vertex::Class(class_of(&g).expect("nontrivial"))
                    } else {
                        Vertex::Current(RationalCurrent::counting(rank, &g)?)
                    });
                }
            }
        },
        Vertex::Class(_) | Vertex::Current(_) => {
            for phi in twists {
                for b in FreeSplitting::all_base(rank, true) {
                    out.push(Vertex::Splitting(b.with_twist(phi.clone())?));
                }
            }
        }
    }
    for phi in moves {
        out.push(v.act(phi)?);
        out.push(v.act(&phi.inverse())?);
    }
    Ok(out)
}

fn adjacent(flavor: Flavor, u: &Vertex, v: &Vertex, opts: &BfsOptions) -> Result<bool> {
    Ok(match (flavor, u, v) {
        (Flavor::F, Vertex::Splitting(a), Vertex::Splitting(b)) => refinement_adjacent(a, b)?.is_yes(),
        (Flavor::S, Vertex::Splitting(a), Vertex::Splitting(b)) => s_adjacent(a, b)?.is_yes(),
        (Flavor::Fstar, Vertex::Splitting(a), Vertex::Splitting(b)) => fstar_adjacent(a, b, opts.search_length)?.is_yes(),
        (Flavor::Z, Vertex::Splitting(s), Vertex::Class(c)) | (Flavor::Z, Vertex::Class(c), Vertex::Splitting(s)) => {
            is_elliptic(s, &c.to_word())?
        }
        (Flavor::I0, Vertex::Splitting(s), Vertex::Current(mu)) | (Flavor::I0, Vertex::Current(mu), Vertex::Splitting(s)) => {
            intersection_graph_adjacent(TreeRef::Splitting(s), mu)?
        }
        _ => false,
    })
}

/// Distance from `v1` to `v2` in the subgraph spanned by the vertices
/// reachable from `v1` in at most `radius` generation steps. A step
/// proposes the base splittings in the current twist, the elliptic basis
/// classes or currents, and the images under each move and its inverse.
/// `None` means `v2` was not reached within `radius`.
pub fn bfs_distance(
    flavor: Flavor,
    v1: &Vertex,
    v2: &Vertex,
    radius: usize,
    moves: &[Automorphism],
    opts: &BfsOptions,
) -> Result<Option<usize>> {
    let rank = v1.rank().max(v2.rank());
    if rank < 3 {
        return Err(Error::RankTooSmall(rank));
    }
    for (v, name) in [(v1, "source"), (v2, "target")] {
        if !allowed(flavor, v) {
            return Err(Error::InvalidSplitting(format!("{name} {v} is not a vertex of the {flavor:?} graph")));
        }
        if let Vertex::Splitting(s) = v {
            if s.rank != rank {
                return Err(Error::RankMismatch { expected: rank, found: s.rank });
            }
        }
    }
    if let Some(phi) = moves.iter().find(|m| m.rank() != rank) {
        return Err(Error::RankMismatch { expected: rank, found: phi.rank() });
    }
    let mut reg = Registry::new(rank, opts.key_depth);
    let (start, _) = reg.insert(v1.clone())?;
    if reg.key(v1) == reg.key(v2) {
        return Ok(Some(0));
    }
    let mut frontier = vec![start];
    for _ in 0..radius {
        let mut next = Vec::new();
        for id in frontier {
            let proposed = candidates(flavor, rank, &reg.vertices[id], moves, &reg.twists.clone())?;
            for c in proposed.into_iter().filter(|c| allowed(flavor, c)) {
                let (nid, fresh) = reg.insert(c)?;
                if fresh {
                    if reg.vertices.len() > opts.state_cap {
                        return Err(Error::StateCap { cap: opts.state_cap, explored: reg.vertices.len() });
                    }
                    next.push(nid);
                }
            }
        }
        frontier = next;
    }
    let (target, _) = reg.insert(v2.clone())?;
    let n = reg.vertices.len();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued vertices have a distance");
        if d >= radius {
            continue;
        }
        #[allow(clippy::needless_range_loop)]
        for w in 0..n {
            if dist[w].is_none() && adjacent(flavor, &reg.vertices[u], &reg.vertices[w], opts)? {
                dist[w] = Some(d + 1);
                if w == target {
                    return Ok(Some(d + 1));
                }
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

/// `η_g` for a nontrivial `g`, the midpoint certifying
/// `d_𝓘(q s1, q s2) ≤ 2` when `g` is elliptic in both.
pub fn midpoint_current(s1: &FreeSplitting, s2: &FreeSplitting, g: &Word) -> Result<Option<RationalCurrent>> {
    let mu = RationalCurrent::counting(s1.rank, g)?;
    let both = intersection_graph_adjacent(TreeRef::Splitting(s1), &mu)?
        && intersection_graph_adjacent(TreeRef::Splitting(s2), &mu)?;
    Ok(both.then_some(mu))
}

/// `Σ weight · ||root||_T`, exact.
pub fn pairing(s: &FreeSplitting, mu: &RationalCurrent) -> Result<Rational> {
    let mut total = Rational::zero();
    for (root, weight) in mu.terms() {
        total += weight * Rational::from_integer(s.length(&root.to_word())?.into());
    }
    Ok(total)
}
