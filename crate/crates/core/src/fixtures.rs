//! Small worked examples used by the tests, the CLI and the guide.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::currents::RationalCurrent;
use crate::dynamics::GraphMap;
use crate::marked_graph::{standard_chart, unit_rose, MarkedMetricGraph, SerreGraph};
use crate::rational::{int, ratio};
use crate::words::{nielsen_generators, Automorphism, Letter, Word};

fn word(s: &str) -> Word {
    s.parse().expect("fixture word")
}

/// `a ↦ ab, b ↦ a` on `F_2`.
pub fn fibonacci() -> Automorphism {
    Automorphism::parse(2, &["ab", "a"], &["b", "Ba"]).expect("fibonacci automorphism")
}

/// `a ↦ ab, b ↦ ac, c ↦ a` on `F_3`.
pub fn tribonacci() -> Automorphism {
    Automorphism::parse(3, &["ab", "ac", "a"], &["c", "Ca", "Cb"]).expect("tribonacci automorphism")
}

/// `a ↦ b, b ↦ c, c ↦ ab` on `F_3`.
pub fn plastic() -> Automorphism {
    Automorphism::parse(3, &["b", "c", "ab"], &["cA", "a", "b"]).expect("plastic automorphism")
}

/// Positive automorphism realized letter by letter on the unit rose.
pub fn rose_map(phi: &Automorphism) -> GraphMap {
    let rose = unit_rose(phi.rank()).expect("rank ≥ 2");
    let g = rose.graph();
    let edge = |i: usize, positive: bool| {
        let e = g.positive_edges()[i - 1];
        if positive {
            e
        } else {
            g.inverse(e)
        }
    };
    let images = (1..=phi.rank())
        .map(|i| {
            let path = phi.images()[i - 1].letters().iter().map(|l| edge(l.index(), l.is_positive())).collect();
            (g.positive_edges()[i - 1], path)
        })
        .collect();
    GraphMap::new(rose, vec![0], images, phi.clone()).expect("rose map")
}

pub fn fibonacci_map() -> GraphMap {
    rose_map(&fibonacci())
}

pub fn tribonacci_map() -> GraphMap {
    rose_map(&tribonacci())
}

pub fn plastic_map() -> GraphMap {
    rose_map(&plastic())
}

/// Theta graph: edges `p, q, r` from `x` to `y` of lengths 1, 2, 3, tree
/// `{p}`, with `a = p q̄` and `b = p r̄`.
pub fn theta() -> MarkedMetricGraph {
    let edges = vec![
        ("p".into(), 0, 1, "P".into()),
        ("q".into(), 0, 1, "Q".into()),
        ("r".into(), 0, 1, "R".into()),
        ("P".into(), 1, 0, "p".into()),
        ("Q".into(), 1, 0, "q".into()),
        ("R".into(), 1, 0, "r".into()),
    ];
    let g = SerreGraph::new(vec!["x".into(), "y".into()], edges).expect("theta graph");
    let loops = vec![vec![0, 4], vec![0, 5]];
    let words = BTreeMap::from([(1, word("A")), (2, word("B"))]);
    let lengths = vec![int(1), int(2), int(3), int(1), int(2), int(3)];
    MarkedMetricGraph::new(g, 0, loops, words, vec![0], lengths).expect("theta marking")
}

/// Uniform reduced word of the given length.
pub fn random_word<R: Rng + ?Sized>(rank: usize, len: usize, rng: &mut R) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::new(rng.gen_range(1..=rank), rng.gen());
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::reduce(letters)
}

/// Product of `steps` random elementary Nielsen automorphisms.
pub fn random_automorphism<R: Rng + ?Sized>(rank: usize, steps: usize, rng: &mut R) -> Automorphism {
    let gens = nielsen_generators(rank).expect("rank ≥ 2");
    let mut phi = Automorphism::identity(rank).expect("rank ≥ 2");
    for _ in 0..steps {
        phi = phi.compose(gens.choose(rng).expect("nonempty")).expect("same rank");
    }
    phi
}

/// Random connected graph of the given rank with no valence-one
/// vertices, rational lengths in `[1/4, 12]`, the standard chart, and then
/// a chart change by `twist_steps` Nielsen moves.
pub fn random_graph<R: Rng + ?Sized>(rank: usize, twist_steps: usize, rng: &mut R) -> MarkedMetricGraph {
    loop {
        let vertices = rng.gen_range(1..=2 * rank - 2);
        let mut ends: Vec<(usize, usize)> = (1..vertices).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..rank {
            ends.push((rng.gen_range(0..vertices), rng.gen_range(0..vertices)));
        }
        let mut edges = Vec::new();
        for (k, &(o, t)) in ends.iter().enumerate() {
            edges.push((format!("e{}", k + 1), o, t, format!("E{}", k + 1)));
        }
        for (k, &(o, t)) in ends.iter().enumerate() {
            edges.push((format!("E{}", k + 1), t, o, format!("e{}", k + 1)));
        }
        let names = (0..vertices).map(|v| format!("v{v}")).collect();
        let Ok(graph) = SerreGraph::new(names, edges) else {
            continue;
        };
        let lengths: Vec<_> = ends.iter().map(|_| ratio(rng.gen_range(1..=12), rng.gen_range(1..=4))).collect();
        let base = rng.gen_range(0..vertices);
        let chart = standard_chart(graph, base, &lengths).expect("standard chart");
        return chart.act(&random_automorphism(rank, twist_steps, rng)).expect("chart change");
    }
}

/// `Σ c_i η_{g_i}` with up to `terms` summands, words of length
/// `1..=max_len` and weights in `[1/6, 5]`.
pub fn random_current<R: Rng + ?Sized>(rank: usize, terms: usize, max_len: usize, rng: &mut R) -> RationalCurrent {
    let mut mu = RationalCurrent::zero(rank);
    for _ in 0..rng.gen_range(1..=terms) {
        let len = rng.gen_range(1..=max_len);
        let w = random_word(rank, len, rng);
        let c = ratio(rng.gen_range(1..=5), rng.gen_range(1..=6));
        let term = RationalCurrent::counting(rank, &w).expect("nontrivial").scale(&c).expect("positive");
        mu = mu.add(&term).expect("same rank");
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_graphs_are_valid_charts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for rank in 2..=4 {
            for _ in 0..20 {
                let g = random_graph(rank, 3, &mut rng);
                assert_eq!(g.rank(), rank);
                assert_eq!(g.graph().betti_number(), rank);
            }
        }
    }

    #[test]
    fn random_words_are_reduced() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for len in 0..12 {
            assert_eq!(random_word(3, len, &mut rng).len(), len);
        }
    }

    #[test]
    fn theta_is_the_standard_chart_of_its_graph() {
        let t = theta();
        let s = standard_chart(t.graph().clone(), 0, &[int(1), int(2), int(3)]).unwrap();
        for w in ["a", "b", "aB", "abAB"] {
            let w: Word = w.parse().unwrap();
            assert_eq!(s.translation_length(&w).unwrap(), t.translation_length(&w).unwrap());
        }
    }
}
