use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use oi_core::currents::RationalCurrent;
use oi_core::dynamics::{self, iterate_class, transition_matrix, DEFAULT_WORD_CAP};
use oi_core::fixtures::random_word;
use oi_core::intersection::{intersect, scaling_modulus_experiment};
use oi_core::marked_graph::Slack;
use oi_core::rational::{self, Rational};
use oi_core::splittings::{bfs_distance, BfsOptions, Flavor};
use oi_core::words::Word;

use crate::input;
use crate::output::{json, ExperimentConfig};
use crate::Command;

pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::Translen { graph, word } => translen(graph, word),
        Command::Intersect { graph, current } => intersect_cmd(graph, current),
        Command::CurrentFreq { graph, current, depth } => current_freq(graph, current, *depth),
        Command::Bbt { graph, pieces, constant } => bbt(graph, pieces, constant.as_deref()),
        Command::ScalingExp { graph, delta, samples, max_len, seed } => scaling(graph, delta, *samples, *max_len, *seed),
        Command::Iwip { map, seed, n, depth, graph, tol } => iwip(map, seed, *n, *depth, graph.as_deref(), *tol),
        Command::Pf { map, tol } => pf(map, *tol),
        Command::Graph { flavor, from, to, radius, moves, rank, key_depth, search_length, state_cap } => {
            let opts = BfsOptions { key_depth: *key_depth, search_length: *search_length, state_cap: *state_cap };
            graph_cmd(flavor, from, to, *radius, moves.as_deref(), *rank, &opts)
        }
    }
}

fn r(x: &Rational) -> String {
    rational::format(x)
}

/// Bare rational, so the output can be fed straight into other tools.
fn translen(graph: &str, word: &str) -> Result<String> {
    let g = input::graph(graph)?.value;
    let w: Word = word.parse()?;
    Ok(format!("{}\n", r(&g.translation_length(&w)?)))
}

#[derive(Serialize)]
struct IntersectOut {
    value: String,
    route_a: String,
    route_b: String,
}

fn intersect_cmd(graph: &str, current: &str) -> Result<String> {
    let g = input::graph(graph)?;
    let mu = input::current(current, g.value.rank())?;
    let config = ExperimentConfig::new("intersect", "none").input("graph", &g.source).input("current", &mu.source);
    let i = intersect(&g.value, &mu.value)?;
    Ok(json(&config, &IntersectOut { value: r(&i.value), route_a: r(&i.route_a), route_b: r(&i.route_b) }))
}

fn current_freq(graph: &str, current: &str, depth: usize) -> Result<String> {
    if depth == 0 {
        bail!("depth must be at least 1");
    }
    let g = input::graph(graph)?;
    let mu = input::current(current, g.value.rank())?;
    let config = ExperimentConfig::new("current-freq", "none")
        .input("graph", &g.source)
        .input("current", &mu.source)
        .param("depth", depth);
    let fv = mu.value.frequency_vector(&g.value, depth)?;
    let mut out = config.csv_header();
    out.push_str("path,count,frequency\n");
    for ((p, c), v) in fv.paths.iter().zip(&fv.counts).zip(&fv.values) {
        writeln!(out, "{},{},{}", g.value.graph().format_path(p), r(c), r(v))?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct SlackOut {
    lhs: String,
    bound: String,
    slack: String,
}

fn slack(s: &Slack) -> SlackOut {
    SlackOut { lhs: r(&s.lhs), bound: r(&s.bound), slack: r(&s.slack) }
}

#[derive(Serialize)]
struct LemmaOut {
    m: usize,
    constant: String,
    cyclic_to_displacement: Option<SlackOut>,
    displacement_split: SlackOut,
    cyclic_split: Option<SlackOut>,
    cyclic_pieces: Option<SlackOut>,
    min_slack: String,
    all_hold: bool,
}

#[derive(Serialize)]
struct BbtOut {
    bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma: Option<LemmaOut>,
}

fn bbt(graph: &str, pieces: &[String], constant: Option<&str>) -> Result<String> {
    let g = input::graph(graph)?;
    let mut config = ExperimentConfig::new("bbt", "none").input("graph", &g.source).param("pieces", pieces.join(","));
    if let Some(c) = constant {
        config = config.param("constant", c);
    }
    let bound = g.value.bbt_upper_bound();
    let lemma = if pieces.is_empty() {
        None
    } else {
        let words = pieces.iter().map(|p| p.parse()).collect::<oi_core::Result<Vec<Word>>>()?;
        let c = match constant {
            Some(c) => rational::parse(c)?,
            None => bound.clone(),
        };
        let rep = g.value.lemma_ll_check(&words, &c)?;
        Some(LemmaOut {
            m: rep.m,
            constant: r(&rep.constant),
            cyclic_to_displacement: rep.cyclic_to_displacement.as_ref().map(slack),
            displacement_split: slack(&rep.displacement_split),
            cyclic_split: rep.cyclic_split.as_ref().map(slack),
            cyclic_pieces: rep.cyclic_pieces.as_ref().map(slack),
            min_slack: r(&rep.min_slack()),
            all_hold: rep.all_hold(),
        })
    };
    Ok(json(&config, &BbtOut { bound: r(&bound), lemma }))
}

#[derive(Serialize)]
struct ScalingOut {
    delta: String,
    samples: usize,
    empirical: String,
    empirical_f64: f64,
    a_priori: String,
    holds: bool,
    worst_word: Option<String>,
}

fn scaling(graph: &str, delta: &str, samples: usize, max_len: usize, seed: u64) -> Result<String> {
    if max_len == 0 {
        bail!("max-len must be at least 1");
    }
    let g = input::graph(graph)?;
    let config = ExperimentConfig::new("scaling-exp", seed.to_string())
        .input("graph", &g.source)
        .param("delta", delta)
        .param("samples", samples)
        .param("max_len", max_len);
    let delta = rational::parse(delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rank = g.value.rank();
    let sample: Vec<Word> = (0..samples)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            random_word(rank, len, &mut rng)
        })
        .collect();
    let rep = scaling_modulus_experiment(&g.value, &delta, &sample, &mut rng)?;
    let out = ScalingOut {
        delta: r(&delta),
        samples,
        empirical: r(&rep.empirical),
        empirical_f64: rational::to_f64(&rep.empirical),
        a_priori: r(&rep.a_priori),
        holds: rep.holds(),
        worst_word: rep.worst_word.as_ref().map(Word::to_string),
    };
    Ok(json(&config, &out))
}

fn iwip(map: &str, seed: &str, n: usize, depth: usize, graph: Option<&str>, tol: f64) -> Result<String> {
    if depth == 0 {
        bail!("depth must be at least 1");
    }
    let f = input::map(map)?;
    let metric = match graph {
        Some(g) => Some(input::graph(g)?),
        None => None,
    };
    let mut config = ExperimentConfig::new("iwip", seed)
        .input("map", &f.source)
        .param("n", n)
        .param("depth", depth)
        .param("tol", tol);
    if let Some(m) = &metric {
        config = config.input("graph", &m.source);
    }
    let m = metric.map_or_else(|| f.value.graph().clone(), |m| m.value);
    let phi = f.value.automorphism();
    let g: Word = seed.parse()?;
    if g.is_identity() {
        bail!("seed word must be nontrivial");
    }
    let lambda = dynamics::pf_eigenpair(&transition_matrix(&f.value), tol)?.eigenvalue;

    // φ^k(g) for k ≤ 2n, stopping at the first cap breach
    let mut classes = vec![g.cyclic_core().0];
    let mut cap_error = None;
    for _ in 0..2 * n {
        match iterate_class(phi, classes.last().expect("nonempty"), 1, DEFAULT_WORD_CAP) {
            Ok(mut v) => classes.push(v.pop().expect("two terms")),
            Err(e) => {
                cap_error = Some(e.to_string());
                break;
            }
        }
    }
    let lengths: Vec<f64> = classes
        .par_iter()
        .map(|w| m.translation_length(w).map(|x| rational::to_f64(&x)))
        .collect::<oi_core::Result<_>>()?;
    let reach = classes.len().min(n + 1);
    let freqs = classes[..reach]
        .par_iter()
        .map(|w| RationalCurrent::counting(phi.rank(), w)?.frequency_vector(&m, depth))
        .collect::<oi_core::Result<Vec<_>>>()?;

    let mut out = config.csv_header();
    out.push_str("n,length_estimate,pairing_estimate,freq_delta\n");
    let missing = |what: &str| format!("error: {what} {}", cap_error.as_deref().unwrap_or("unavailable"));
    for k in 0..=n {
        let length = match lengths.get(k) {
            Some(l) => format!("{}", l / lambda.powi(k as i32)),
            None => missing("length"),
        };
        let pairing = match lengths.get(2 * k) {
            Some(l) => format!("{}", l / lambda.powi(2 * k as i32)),
            None => missing("pairing"),
        };
        let delta = match (k, freqs.get(k)) {
            (0, Some(_)) => "0".to_string(),
            (_, Some(v)) => format!("{}", v.sup_distance(&freqs[k - 1])),
            (_, None) => missing("frequency"),
        };
        writeln!(out, "{k},{length},{pairing},{delta}")?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct PfOut {
    eigenvalue: f64,
    eigenvalue_error: f64,
    eigenvector: BTreeMap<String, f64>,
    residual: f64,
    iterations: usize,
    lengths: BTreeMap<String, String>,
    bound: f64,
}

fn pf(map: &str, tol: f64) -> Result<String> {
    let f = input::map(map)?;
    let config = ExperimentConfig::new("pf", "none").input("map", &f.source).param("tol", tol);
    let pm = dynamics::metric_from_pf(&f.value, tol)?;
    let g = pm.graph.graph();
    let names = g.positive_edges().iter().map(|&e| g.edge_name(e).to_string());
    let out = PfOut {
        eigenvalue: pm.pf.eigenvalue,
        eigenvalue_error: pm.pf.eigenvalue_error,
        eigenvector: names.clone().zip(pm.pf.eigenvector.iter().copied()).collect(),
        residual: pm.pf.residual,
        iterations: pm.pf.iterations,
        lengths: names.zip(g.positive_edges().iter().map(|&e| r(pm.graph.length(e)))).collect(),
        bound: pm.bound,
    };
    Ok(json(&config, &out))
}

#[derive(Serialize)]
struct GraphOut {
    flavor: String,
    from: String,
    to: String,
    radius: usize,
    distance: Option<usize>,
}

fn graph_cmd(
    flavor: &str,
    from: &str,
    to: &str,
    radius: usize,
    moves: Option<&str>,
    rank: Option<usize>,
    opts: &BfsOptions,
) -> Result<String> {
    let fl: Flavor = flavor.parse()?;
    let v1 = input::vertex(from, rank)?;
    let v2 = input::vertex(to, rank)?;
    let mv = match moves {
        Some(m) => Some(input::moves(m)?),
        None => None,
    };
    let mut config = ExperimentConfig::new("graph", "none")
        .param("flavor", flavor)
        .param("radius", radius)
        .param("key_depth", opts.key_depth)
        .param("search_length", opts.search_length)
        .param("state_cap", opts.state_cap)
        .input("from", &v1.source)
        .input("to", &v2.source);
    if let Some(m) = &mv {
        config = config.input("moves", &m.source);
    }
    let moves = mv.map(|m| m.value).unwrap_or_default();
    let distance = bfs_distance(fl, &v1.value, &v2.value, radius, &moves, opts)?;
    let out = GraphOut {
        flavor: format!("{fl:?}"),
        from: v1.value.to_string(),
        to: v2.value.to_string(),
        radius,
        distance,
    };
    Ok(json(&config, &out))
}
