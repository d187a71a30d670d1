//! Free-group combinatorics over a fixed reference basis `a_1, …, a_N`.
//!
//! A [`Word`] is always freely reduced; the empty word is the identity.
//! A [`CyclicWord`] is a cyclically reduced word stored in its canonical
//! rotation, so two conjugacy classes are equal exactly when their
//! canonical letter sequences are. The letter order used for canonical
//! rotations is `a_1 < a_1^{-1} < a_2 < a_2^{-1} < …`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator `a_i` or its inverse, encoded as `±i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: usize, positive: bool) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        let i = index as i32;
        Letter(if positive { i } else { -i })
    }

    pub fn from_signed(value: i32) -> Result<Self> {
        if value == 0 {
            Err(Error::ZeroLetter)
        } else {
            Ok(Letter(value))
        }
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    fn order_key(self) -> u32 {
        2 * (self.0.unsigned_abs() - 1) + u32::from(self.0 < 0)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.index();
        if i <= 26 {
            let c = (b'a' + (i - 1) as u8) as char;
            if self.is_positive() {
                write!(f, "{c}")
            } else {
                write!(f, "{}", c.to_ascii_uppercase())
            }
        } else {
            write!(f, "[{}]", self.0)
        }
    }
}

/// Stack-based free reduction.
fn reduce_into(out: &mut Vec<Letter>, letters: impl IntoIterator<Item = Letter>) {
    for x in letters {
        if out.last() == Some(&x.inverse()) {
            out.pop();
        } else {
            out.push(x);
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        reduce_into(&mut out, letters);
        Word { letters: out }
    }

    pub fn generator(index: usize) -> Self {
        Word { letters: vec![Letter::new(index, true)] }
    }

    pub fn from_signed(values: &[i32]) -> Result<Self> {
        let letters = values
            .iter()
            .map(|&v| Letter::from_signed(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::reduce(letters))
    }

    pub fn to_signed(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.signed()).collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Freely reduced length `|w|_A`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn mul(&self, other: &Word) -> Self {
        let mut out = self.letters.clone();
        reduce_into(&mut out, other.letters.iter().copied());
        Word { letters: out }
    }

    pub fn pow(&self, m: i64) -> Self {
        let base = if m < 0 { self.inverse() } else { self.clone() };
        let mut out = Vec::new();
        for _ in 0..m.unsigned_abs() {
            reduce_into(&mut out, base.letters.iter().copied());
        }
        Word { letters: out }
    }

    pub fn conjugate_by(&self, u: &Word) -> Self {
        u.mul(self).mul(&u.inverse())
    }

    /// Largest generator index used, 0 for the identity.
    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        match self.max_index() {
            i if i > rank => Err(Error::LetterOutOfRange { index: i, rank }),
            _ => Ok(()),
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&first), Some(&last)) => self.letters.len() == 1 || first != last.inverse(),
            _ => true,
        }
    }

    /// Splits `w = c^{-1} · core · c` with `core` cyclically reduced
    /// (not rotated).
    pub fn cyclic_core(&self) -> (Word, Word) {
        let n = self.letters.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        let core = Word { letters: self.letters[k..n - k].to_vec() };
        let conjugator = Word { letters: self.letters[n - k..].to_vec() };
        (core, conjugator)
    }

    /// Cyclically reduced length `||w||_A`.
    pub fn cyclic_len(&self) -> usize {
        self.cyclic_core().0.len()
    }
}

impl TryFrom<Vec<i32>> for Word {
    type Error = Error;
    fn try_from(v: Vec<i32>) -> Result<Self> {
        Word::from_signed(&v)
    }
}

impl From<Word> for Vec<i32> {
    fn from(w: Word) -> Self {
        w.to_signed()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses `abA` (lowercase generators, uppercase inverses), `a b^-1`,
/// the JSON form `[1, 2, -1]`, or `1`/empty for the identity.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        if s.starts_with('[') {
            let v: Vec<i32> = serde_json::from_str(s)?;
            return Word::from_signed(&v);
        }
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_whitespace() || c == '*' || c == '.' {
                continue;
            }
            if !c.is_ascii_alphabetic() {
                return Err(Error::Parse(format!("unexpected {c:?} in word {s:?}")));
            }
            let index = (c.to_ascii_lowercase() as u8 - b'a') as usize + 1;
            let mut positive = c.is_ascii_lowercase();
            if chars.peek() == Some(&'^') {
                chars.next();
                let exp: String = std::iter::from_fn(|| chars.next_if(|d| *d == '-' || d.is_ascii_digit())).collect();
                match exp.as_str() {
                    "-1" => positive = !positive,
                    "1" => {}
                    _ => return Err(Error::Parse(format!("unsupported exponent {exp:?} in {s:?}"))),
                }
            }
            letters.push(Letter::new(index, positive));
        }
        Ok(Word::reduce(letters))
    }
}

/// Index of the lexicographically least rotation (two-pointer minimum
/// expression, linear time).
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        match a.cmp(&b) {
            Ordering::Equal => {
                k += 1;
                continue;
            }
            Ordering::Greater => i += k + 1,
            Ordering::Less => j += k + 1,
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// Smallest period of `s` that divides its length.
fn primitive_period(s: &[Letter]) -> usize {
    let n = s.len();
    let mut fail = vec![0usize; n];
    for q in 1..n {
        let mut k = fail[q - 1];
        while k > 0 && s[q] != s[k] {
            k = fail[k - 1];
        }
        if s[q] == s[k] {
            k += 1;
        }
        fail[q] = k;
    }
    let p = n - fail[n - 1];
    if n.is_multiple_of(p) {
        p
    } else {
        n
    }
}

/// A nontrivial conjugacy class, stored as its canonical cyclically
/// reduced rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// `None` for the identity.
    pub fn new(w: &Word) -> Option<Self> {
        let (core, _) = w.cyclic_core();
        Self::from_cyclically_reduced(core.letters)
    }

    fn from_cyclically_reduced(mut letters: Vec<Letter>) -> Option<Self> {
        if letters.is_empty() {
            return None;
        }
        let r = least_rotation(&letters);
        letters.rotate_left(r);
        Some(CyclicWord { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `||g||_A`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_word(&self) -> Word {
        Word { letters: self.letters.clone() }
    }

    pub fn inverse(&self) -> Self {
        let letters = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Self::from_cyclically_reduced(letters).expect("nonempty")
    }

    pub fn pow(&self, m: usize) -> Self {
        assert!(m >= 1, "power of a conjugacy class must be positive");
        CyclicWord { letters: self.letters.repeat(m) }
    }

    /// `g = f^m` with `f` not a proper power.
    pub fn primitive_root(&self) -> (CyclicWord, usize) {
        let p = primitive_period(&self.letters);
        let root = CyclicWord { letters: self.letters[..p].to_vec() };
        (root, self.letters.len() / p)
    }

    pub fn is_primitive_root(&self) -> bool {
        primitive_period(&self.letters) == self.letters.len()
    }

    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.index()).max().unwrap_or(0)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Result of [`cyclic_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyclicReduction {
    Identity,
    /// `conjugator^{-1} · root · conjugator = w`, with `root` read as the
    /// canonical rotation.
    Root { root: CyclicWord, conjugator: Word },
}

pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
    Word::reduce(letters)
}

pub fn cyclic_reduce(w: &Word) -> CyclicReduction {
    let (core, c) = w.cyclic_core();
    if core.is_identity() {
        return CyclicReduction::Identity;
    }
    let r = least_rotation(&core.letters);
    // core = x·y and the canonical rotation is y·x = x^{-1}·core·x
    let x = Word { letters: core.letters[..r].to_vec() };
    let mut letters = core.letters;
    letters.rotate_left(r);
    CyclicReduction::Root {
        root: CyclicWord { letters },
        conjugator: x.inverse().mul(&c),
    }
}

pub fn primitive_root(cw: &CyclicWord) -> (CyclicWord, usize) {
    cw.primitive_root()
}

pub fn word_length(w: &Word) -> usize {
    w.len()
}

pub fn cyclic_length(w: &Word) -> usize {
    w.cyclic_len()
}

/// An automorphism of `F_N` given by the images of the basis together with
/// the images under its inverse. Both directions are checked at
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AutomorphismData", into = "AutomorphismData")]
pub struct Automorphism {
    rank: usize,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

#[derive(Serialize, Deserialize)]
struct AutomorphismData {
    rank: usize,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
}

impl TryFrom<AutomorphismData> for Automorphism {
    type Error = Error;
    fn try_from(d: AutomorphismData) -> Result<Self> {
        Automorphism::new(d.rank, d.images, d.inverse_images)
    }
}

impl From<Automorphism> for AutomorphismData {
    fn from(a: Automorphism) -> Self {
        AutomorphismData { rank: a.rank, images: a.images, inverse_images: a.inverse_images }
    }
}

fn substitute(images: &[Word], w: &Word) -> Word {
    let mut out = Vec::new();
    for &l in w.letters() {
        let img = &images[l.index() - 1];
        if l.is_positive() {
            reduce_into(&mut out, img.letters.iter().copied());
        } else {
            reduce_into(&mut out, img.letters.iter().rev().map(|x| x.inverse()));
        }
    }
    Word { letters: out }
}

impl Automorphism {
    pub fn new(rank: usize, images: Vec<Word>, inverse_images: Vec<Word>) -> Result<Self> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        for list in [&images, &inverse_images] {
            if list.len() != rank {
                return Err(Error::RankMismatch { expected: rank, found: list.len() });
            }
            for w in list {
                w.check_rank(rank)?;
            }
        }
        for i in 1..=rank {
            let a = Word::generator(i);
            let there_and_back = substitute(&images, &substitute(&inverse_images, &a));
            if there_and_back != a {
                return Err(Error::NotInverse(format!("images(inverse_images(a_{i})) = {there_and_back}")));
            }
            let back_and_there = substitute(&inverse_images, &substitute(&images, &a));
            if back_and_there != a {
                return Err(Error::NotInverse(format!("inverse_images(images(a_{i})) = {back_and_there}")));
            }
        }
        Ok(Automorphism { rank, images, inverse_images })
    }

    /// Parses images written as words, e.g. `&["ab", "a"]`.
    pub fn parse(rank: usize, images: &[&str], inverse_images: &[&str]) -> Result<Self> {
        let p = |v: &[&str]| v.iter().map(|s| s.parse()).collect::<Result<Vec<Word>>>();
        Automorphism::new(rank, p(images)?, p(inverse_images)?)
    }

    pub fn identity(rank: usize) -> Result<Self> {
        let g: Vec<Word> = (1..=rank).map(Word::generator).collect();
        Automorphism::new(rank, g.clone(), g)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.inverse_images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == Word::generator(i + 1))
    }

    /// `φ̂(w)`: substitute and reduce.
    pub fn apply(&self, w: &Word) -> Word {
        debug_assert!(w.max_index() <= self.rank);
        substitute(&self.images, w)
    }

    pub fn apply_checked(&self, w: &Word) -> Result<Word> {
        w.check_rank(self.rank)?;
        Ok(self.apply(w))
    }

    pub fn apply_inverse(&self, w: &Word) -> Word {
        substitute(&self.inverse_images, w)
    }

    /// The outer class acts on conjugacy classes.
    pub fn apply_cyclic(&self, cw: &CyclicWord) -> CyclicWord {
        CyclicWord::new(&self.apply(&cw.to_word())).expect("automorphisms fix only the identity")
    }

    pub fn inverse(&self) -> Self {
        Automorphism { rank: self.rank, images: self.inverse_images.clone(), inverse_images: self.images.clone() }
    }

    /// `self ∘ other`, i.e. `w ↦ self(other(w))`.
    pub fn compose(&self, other: &Automorphism) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: other.rank });
        }
        let images = other.images.iter().map(|w| self.apply(w)).collect();
        let inverse_images = self.inverse_images.iter().map(|w| other.apply_inverse(w)).collect();
        Automorphism::new(self.rank, images, inverse_images)
    }

    /// `φ^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Automorphism::identity(self.rank)?;
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().chain(&self.inverse_images).map(Word::len).max().unwrap_or(0)
    }
}

pub fn apply_aut(phi: &Automorphism, w: &Word) -> Word {
    phi.apply(w)
}

pub fn compose(phi: &Automorphism, psi: &Automorphism) -> Result<Automorphism> {
    phi.compose(psi)
}

/// Elementary Nielsen automorphisms of rank `n`: `a_i ↦ a_i a_j^{±1}`,
/// `a_i ↦ a_j^{±1} a_i`, inversions and transpositions, each with its
/// inverse.
pub fn nielsen_generators(rank: usize) -> Result<Vec<Automorphism>> {
    let gen = |i: usize| Word::generator(i);
    let mut out = Vec::new();
    for i in 1..=rank {
        for j in 1..=rank {
            if i == j {
                continue;
            }
            for &s in &[1i64, -1] {
                let aj = gen(j).pow(s);
                let mut right = Vec::new();
                let mut right_inv = Vec::new();
                let mut left = Vec::new();
                let mut left_inv = Vec::new();
                for k in 1..=rank {
                    if k == i {
                        right.push(gen(i).mul(&aj));
                        right_inv.push(gen(i).mul(&aj.inverse()));
                        left.push(aj.mul(&gen(i)));
                        left_inv.push(aj.inverse().mul(&gen(i)));
                    } else {
                        for v in [&mut right, &mut right_inv, &mut left, &mut left_inv] {
                            v.push(gen(k));
                        }
                    }
                }
                out.push(Automorphism::new(rank, right, right_inv)?);
                out.push(Automorphism::new(rank, left, left_inv)?);
            }
        }
    }
    for i in 1..=rank {
        let imgs: Vec<Word> = (1..=rank).map(|k| if k == i { gen(k).inverse() } else { gen(k) }).collect();
        out.push(Automorphism::new(rank, imgs.clone(), imgs)?);
    }
    for i in 1..=rank {
        for j in i + 1..=rank {
            let imgs: Vec<Word> = (1..=rank)
                .map(|k| if k == i { gen(j) } else if k == j { gen(i) } else { gen(k) })
                .collect();
            out.push(Automorphism::new(rank, imgs.clone(), imgs)?);
        }
    }
    Ok(out)
}

/// All reduced words of length exactly `len` in rank `rank`, in a
/// deterministic order.
pub fn reduced_words(rank: usize, len: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (1..=rank).flat_map(|i| [Letter::new(i, true), Letter::new(i, false)]).collect();
    let mut level = vec![Vec::<Letter>::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &level {
            for &l in &letters {
                if w.last() != Some(&l.inverse()) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        level = next;
    }
    level.into_iter().map(|letters| Word { letters }).collect()
}

/// All conjugacy classes of cyclic length `1..=max_len`, sorted.
pub fn cyclic_words_up_to(rank: usize, max_len: usize) -> Vec<CyclicWord> {
    let mut set = std::collections::BTreeSet::new();
    for len in 1..=max_len {
        for w in reduced_words(rank, len) {
            if w.is_cyclically_reduced() {
                set.insert(CyclicWord::new(&w).expect("nonempty"));
            }
        }
    }
    set.into_iter().collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn fibonacci_automorphism() -> Automorphism {
        Automorphism::parse(2, &["ab", "a"], &["b", "Ba"]).unwrap()
    }

    fn naive_reduce(v: &[i32]) -> Vec<i32> {
        // repeatedly delete the first cancelling pair
        let mut v = v.to_vec();
        loop {
            match (0..v.len().saturating_sub(1)).find(|&i| v[i] == -v[i + 1]) {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    fn naive_min_rotation(v: &[Letter]) -> Vec<Letter> {
        (0..v.len())
            .map(|r| {
                let mut x = v.to_vec();
                x.rotate_left(r);
                x
            })
            .min()
            .unwrap()
    }

    fn naive_root_len(v: &[Letter]) -> usize {
        let n = v.len();
        (1..=n)
            .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| v[i] == v[i % d]))
            .unwrap()
    }

    pub(crate) fn word_strategy(rank: i32, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(prop_oneof![1..=rank, -rank..=-1], 0..max_len)
            .prop_map(|v| Word::from_signed(&v).unwrap())
    }

    #[test]
    fn reduce_examples() {
        let a = Letter::new(1, true);
        let b = Letter::new(2, true);
        assert!(reduce([a, a.inverse()]).is_identity());
        assert_eq!(reduce([a, b, b.inverse(), a]), w("aa"));
        assert_eq!(w("a b^-1 a^-1"), w("aBA"));
        assert_eq!(w("[1, -2]"), w("aB"));
        assert_eq!(w("1"), Word::identity());
        assert!("a^2".parse::<Word>().is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(
            cyclic_reduce(&w("abA")),
            CyclicReduction::Root { root: CyclicWord::new(&w("b")).unwrap(), conjugator: w("A") }
        );
        assert_eq!(
            cyclic_reduce(&w("ab")),
            CyclicReduction::Root { root: CyclicWord::new(&w("ab")).unwrap(), conjugator: Word::identity() }
        );
        assert_eq!(cyclic_reduce(&Word::identity()), CyclicReduction::Identity);
        assert_eq!(cyclic_reduce(&w("aA")), CyclicReduction::Identity);
    }

    #[test]
    fn canonical_rotation_order() {
        // a < A < b < B
        assert_eq!(CyclicWord::new(&w("ba")).unwrap().to_string(), "ab");
        assert_eq!(CyclicWord::new(&w("bA")).unwrap().to_string(), "Ab");
        assert_eq!(CyclicWord::new(&w("BBa")).unwrap().to_string(), "aBB");
    }

    #[test]
    fn primitive_root_examples() {
        let cw = CyclicWord::new(&w("abab")).unwrap();
        let (root, m) = primitive_root(&cw);
        assert_eq!((root.to_string().as_str(), m), ("ab", 2));
        let (root, m) = primitive_root(&CyclicWord::new(&w("ab")).unwrap());
        assert_eq!((root.to_string().as_str(), m), ("ab", 1));
        let (root, m) = primitive_root(&CyclicWord::new(&w("aaa")).unwrap());
        assert_eq!((root.to_string().as_str(), m), ("a", 3));
    }

    #[test]
    fn apply_examples() {
        let phi = fibonacci_automorphism();
        assert_eq!(phi.apply(&w("a")), w("ab"));
        assert_eq!(phi.apply(&w("b")), w("a"));
        assert_eq!(phi.apply_inverse(&w("ab")), w("a"));
    }

    #[test]
    fn fibonacci_growth() {
        // |φ^n(a)| = F(n+2), oracle by direct iteration of the recurrence
        let phi = fibonacci_automorphism();
        let mut fib = vec![0u64, 1, 1];
        for i in 3..=22 {
            let next = fib[i - 1] + fib[i - 2];
            fib.push(next);
        }
        let mut x = w("a");
        for n in 0..=20 {
            assert_eq!(x.len() as u64, fib[n + 2], "n = {n}");
            x = phi.apply(&x);
        }
    }

    #[test]
    fn automorphism_rejects_non_inverse() {
        let err = Automorphism::parse(2, &["ab", "a"], &["b", "a"]).unwrap_err();
        assert!(matches!(err, Error::NotInverse(_)));
        // a ↦ a^2 is not even surjective
        assert!(Automorphism::parse(2, &["aa", "b"], &["a", "b"]).is_err());
        assert!(matches!(Automorphism::identity(1), Err(Error::RankTooSmall(1))));
        assert!(matches!(
            Automorphism::parse(2, &["ab", "c"], &["a", "b"]),
            Err(Error::LetterOutOfRange { index: 3, rank: 2 })
        ));
    }

    #[test]
    fn compose_examples() {
        let phi = fibonacci_automorphism();
        let id = Automorphism::identity(2).unwrap();
        assert!(phi.compose(&phi.inverse()).unwrap().is_identity());
        assert_eq!(id.compose(&phi).unwrap(), phi);
        let three = Automorphism::identity(3).unwrap();
        assert!(matches!(phi.compose(&three), Err(Error::RankMismatch { .. })));
        assert_eq!(phi.pow(2).unwrap().apply(&w("a")), w("aba"));
        assert_eq!(phi.pow(-1).unwrap(), phi.inverse());
    }

    #[test]
    fn lengths() {
        assert_eq!(word_length(&w("abA")), 3);
        assert_eq!(cyclic_length(&w("abA")), 1);
        assert_eq!(word_length(&Word::identity()), 0);
        assert_eq!(cyclic_length(&Word::identity()), 0);
    }

    #[test]
    fn json_round_trip() {
        let phi = fibonacci_automorphism();
        let s = serde_json::to_string(&phi).unwrap();
        assert_eq!(s, r#"{"rank":2,"images":[[1,2],[1]],"inverse_images":[[2],[-2,1]]}"#);
        let back: Automorphism = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
        let bad = r#"{"rank":2,"images":[[1,2],[1]],"inverse_images":[[2],[1]]}"#;
        assert!(serde_json::from_str::<Automorphism>(bad).is_err());
    }

    #[test]
    fn nielsen_generators_are_automorphisms() {
        let gens = nielsen_generators(3).unwrap();
        assert_eq!(gens.len(), 3 * 2 * 2 * 2 + 3 + 3);
    }

    #[test]
    fn enumeration_counts() {
        // 2N(2N-1)^(L-1) reduced words of length L
        assert_eq!(reduced_words(2, 3).len(), 4 * 9);
        // cyclic words of length 1 in rank 2: a, A, b, B
        assert_eq!(cyclic_words_up_to(2, 1).len(), 4);
        // length 2: aa, AA, bb, BB, ab, aB, Ab, AB
        assert_eq!(cyclic_words_up_to(2, 2).len(), 12);
    }

    proptest! {
        #[test]
        fn reduce_matches_naive(v in prop::collection::vec(prop_oneof![1..=3i32, -3..=-1i32], 0..30)) {
            prop_assert_eq!(Word::from_signed(&v).unwrap().to_signed(), naive_reduce(&v));
        }

        #[test]
        fn inverse_cancels(x in word_strategy(3, 20)) {
            prop_assert!(x.mul(&x.inverse()).is_identity());
            prop_assert_eq!(Word::reduce(x.letters().iter().copied()), x.clone());
        }

        #[test]
        fn cyclic_reduce_conjugation(x in word_strategy(3, 16)) {
            match cyclic_reduce(&x) {
                CyclicReduction::Identity => prop_assert!(x.is_identity()),
                CyclicReduction::Root { root, conjugator } => {
                    prop_assert_eq!(conjugator.inverse().mul(&root.to_word()).mul(&conjugator), x.clone());
                    prop_assert!(root.to_word().is_cyclically_reduced());
                    prop_assert_eq!(root.letters().to_vec(), naive_min_rotation(root.letters()));
                }
            }
        }

        #[test]
        fn conjugacy_invariance(x in word_strategy(3, 12), u in word_strategy(3, 8)) {
            let conj = x.conjugate_by(&u);
            prop_assert_eq!(CyclicWord::new(&conj), CyclicWord::new(&x));
            prop_assert_eq!(conj.cyclic_len(), x.cyclic_len());
        }

        #[test]
        fn power_law(x in word_strategy(3, 12), m in -5i64..=5) {
            prop_assert_eq!(x.pow(m).cyclic_len(), m.unsigned_abs() as usize * x.cyclic_len());
        }

        #[test]
        fn root_matches_divisor_oracle(x in word_strategy(2, 8), m in 1usize..4) {
            if let Some(cw) = CyclicWord::new(&x) {
                let p = cw.pow(m);
                let (root, k) = p.primitive_root();
                prop_assert_eq!(root.len(), naive_root_len(p.letters()));
                prop_assert_eq!(root.len() * k, p.len());
                prop_assert_eq!(CyclicWord::new(&root.to_word().pow(k as i64)).unwrap(), p);
            }
        }

        #[test]
        fn homomorphism(u in word_strategy(2, 10), v in word_strategy(2, 10)) {
            let phi = fibonacci_automorphism();
            prop_assert_eq!(phi.apply(&u.mul(&v)), phi.apply(&u).mul(&phi.apply(&v)));
            prop_assert_eq!(phi.apply(&phi.apply_inverse(&u)), u.clone());
        }

        #[test]
        fn associativity(i in 0usize..30, j in 0usize..30, k in 0usize..30) {
            let g = nielsen_generators(3).unwrap();
            let (a, b, c) = (&g[i], &g[j], &g[k]);
            let left = a.compose(b).unwrap().compose(c).unwrap();
            let right = a.compose(&b.compose(c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
