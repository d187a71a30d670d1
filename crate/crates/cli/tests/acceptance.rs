//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line, including its runtime against the
//! budget. Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oi_core::dynamics::{eigencurrent_approx, metric_from_pf, pairing_estimate, pf_eigenpair, transition_matrix};
use oi_core::fixtures::{self, random_automorphism, random_current, random_graph, random_word};
use oi_core::intersection::{equivariance_check, intersect, scaling_modulus_experiment};
use oi_core::marked_graph::{unit_rose, MarkedMetricGraph};
use oi_core::rational::{self, ratio, Rational};
use oi_core::splittings::{
    fstar_adjacent, map_j, map_q, midpoint_current, refinement_adjacent, FreeSplitting, FstarVerdict, SplittingKind,
    Vertex,
};
use oi_core::words::{cyclic_words_up_to, reduced_words, Word};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
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

fn two_route_equality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut nonzero = 0;
    for i in 0..500 {
        let rank = 2 + i % 3;
        let g = random_graph(rank, rng.gen_range(0..4), &mut rng);
        let mu = random_current(rank, 4, 10, &mut rng);
        let x = intersect(&g, &mu).map_err(|e| format!("pair {i}: {e}"))?;
        ensure(x.route_a == x.route_b, || format!("pair {i}: routes differ"))?;
        nonzero += usize::from(!x.value.is_zero());
    }
    Ok(format!("500 pairs in ranks 2-4, routes equal exactly ({nonzero} nonzero)"))
}

fn form_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..200 {
        let rank = 2 + i % 3;
        let g = random_graph(rank, rng.gen_range(0..3), &mut rng);
        let mu1 = random_current(rank, 3, 8, &mut rng);
        let mu2 = random_current(rank, 3, 8, &mut rng);
        let c = ratio(rng.gen_range(1..=9), rng.gen_range(1..=7));
        let base = intersect(&g, &mu1).map_err(|e| e.to_string())?.value;
        let scaled = intersect(&g.scaled(&c).map_err(|e| e.to_string())?, &mu1).map_err(|e| e.to_string())?.value;
        ensure(scaled == &c * &base, || format!("instance {i}: homogeneity"))?;
        let sum = mu1.add(&mu2).map_err(|e| e.to_string())?;
        let both = intersect(&g, &sum).map_err(|e| e.to_string())?.value;
        let other = intersect(&g, &mu2).map_err(|e| e.to_string())?.value;
        ensure(both == &base + &other, || format!("instance {i}: additivity"))?;
        let mu_c = mu1.scale(&c).map_err(|e| e.to_string())?;
        ensure(intersect(&g, &mu_c).map_err(|e| e.to_string())?.value == &c * &base, || format!("instance {i}: linearity"))?;
        let phi = loop {
            let phi = random_automorphism(rank, rng.gen_range(1..=4), &mut rng);
            if phi.max_image_len() <= 6 && phi.inverse().max_image_len() <= 6 {
                break phi;
            }
        };
        let eq = equivariance_check(&phi, &g, &mu1).map_err(|e| e.to_string())?;
        ensure(eq.holds(), || format!("instance {i}: equivariance {} vs {}", eq.original, eq.moved))?;
    }
    Ok("200 instances: homogeneity, linearity, equivariance exact".into())
}

fn length_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut graphs: Vec<MarkedMetricGraph> = vec![unit_rose(2).unwrap(), fixtures::theta()];
    graphs.extend((0..4).map(|_| random_graph(2, 2, &mut rng)));
    let conjugators: Vec<Word> = (1..=2).flat_map(|l| reduced_words(2, l)).collect();
    let words = cyclic_words_up_to(2, 5);
    let mut checks = 0usize;
    for g in &graphs {
        for cw in &words {
            let w = cw.to_word();
            let l = g.translation_length(&w).map_err(|e| e.to_string())?;
            ensure(l.is_positive(), || format!("||{w}|| = 0"))?;
            for u in &conjugators {
                ensure(g.translation_length(&w.conjugate_by(u)).unwrap() == l, || format!("conjugate of {w} by {u}"))?;
            }
            for m in [-3i64, -1, 2, 3] {
                let lm = g.translation_length(&w.pow(m)).unwrap();
                ensure(lm == Rational::from_integer(m.abs().into()) * &l, || format!("power {m} of {w}"))?;
            }
            checks += 1;
        }
    }
    let pool: Vec<MarkedMetricGraph> = (0..20).map(|_| random_graph(3, 3, &mut rng)).collect();
    for i in 0..10_000 {
        let g = &pool[i % pool.len()];
        let len = rng.gen_range(1..=10);
        let w = random_word(3, len, &mut rng);
        let u = random_word(3, rng.gen_range(0..=5), &mut rng);
        let m = rng.gen_range(-4i64..=4);
        let l = g.translation_length(&w).unwrap();
        ensure(l.is_positive(), || format!("||{w}|| = 0 in rank 3"))?;
        ensure(g.translation_length(&w.conjugate_by(&u)).unwrap() == l, || format!("rank 3 conjugacy {w} by {u}"))?;
        ensure(
            g.translation_length(&w.pow(m)).unwrap() == Rational::from_integer(m.abs().into()) * &l,
            || format!("rank 3 power {m} of {w}"),
        )?;
    }
    Ok(format!("{checks} rank-2 (graph, class) pairs of length <= 5, 10000 rank-3 cases"))
}

fn lemma_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_slack: Option<Rational> = None;
    let mut applied = [0usize; 4];
    for i in 0..1000 {
        let rank = 2 + i % 3;
        let g = random_graph(rank, rng.gen_range(0..3), &mut rng);
        let m = rng.gen_range(1..=6);
        let want_cyclic = i % 2 == 0;
        let u = loop {
            let len = rng.gen_range(m..=m + 14);
            let u = random_word(rank, len, &mut rng);
            if !want_cyclic || u.is_cyclically_reduced() {
                break u;
            }
        };
        let mut cuts: BTreeSet<usize> = BTreeSet::new();
        while cuts.len() < m - 1 {
            cuts.insert(rng.gen_range(1..u.len()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for end in cuts.into_iter().chain([u.len()]) {
            pieces.push(Word::reduce(u.letters()[start..end].iter().copied()));
            start = end;
        }
        let c = g.bbt_upper_bound();
        let rep = g.lemma_ll_check(&pieces, &c).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(rep.all_hold(), || format!("instance {i}: {rep}"))?;
        applied[0] += usize::from(rep.cyclic_to_displacement.is_some());
        applied[1] += 1;
        applied[2] += usize::from(rep.cyclic_split.is_some());
        applied[3] += usize::from(rep.cyclic_pieces.is_some());
        let s = rep.min_slack();
        if min_slack.as_ref().is_none_or(|old| s < *old) {
            min_slack = Some(s);
        }
    }
    let min_slack = min_slack.expect("instances ran");
    ensure(!min_slack.is_negative(), || format!("minimum slack {min_slack}"))?;
    Ok(format!(
        "1000 instances, m <= 6, inequalities applied {:?} times, minimum slack {}",
        applied,
        rational::format(&min_slack)
    ))
}

fn uniform_scaling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let delta = ratio(1, 10);
    let mut worst = Rational::zero();
    for rank in [2, 3] {
        let sample: Vec<Word> = (0..1000)
            .map(|_| {
                let len = rng.gen_range(1..=12);
                random_word(rank, len, &mut rng)
            })
            .collect();
        let rep = scaling_modulus_experiment(&unit_rose(rank).unwrap(), &delta, &sample, &mut rng)
            .map_err(|e| e.to_string())?;
        ensure(rep.empirical <= delta, || format!("rank {rank}: modulus {}", rational::format(&rep.empirical)))?;
        worst = worst.max(rep.empirical);
    }
    Ok(format!("1000 words per rank, worst modulus {} <= 1/10", rational::format(&worst)))
}

fn pf_check() -> Check {
    let f = fixtures::fibonacci_map();
    let pf = pf_eigenpair(&transition_matrix(&f), 1e-13).map_err(|e| e.to_string())?;
    let phi = golden();
    ensure((pf.eigenvalue - phi).abs() < 1e-9, || format!("λ = {}", pf.eigenvalue))?;
    let pm = metric_from_pf(&f, 1e-10).map_err(|e| e.to_string())?;
    let g = pm.graph.graph();
    let ratio_ab = rational::to_f64(pm.graph.length(g.edge_id("a").unwrap()))
        / rational::to_f64(pm.graph.length(g.edge_id("b").unwrap()));
    ensure((ratio_ab - pf.eigenvalue).abs() < 1e-8, || format!("L(a)/L(b) = {ratio_ab}"))?;
    Ok(format!(
        "λ = {:.12} (|λ − φ| = {:.1e}), L(a)/L(b) − λ = {:.1e}",
        pf.eigenvalue,
        (pf.eigenvalue - phi).abs(),
        (ratio_ab - pf.eigenvalue).abs()
    ))
}

fn pairing_window() -> Check {
    let f = fixtures::fibonacci_map();
    let lambda = pf_eigenpair(&transition_matrix(&f), 1e-13).map_err(|e| e.to_string())?.eigenvalue;
    let est = pairing_estimate(f.automorphism(), &unit_rose(2).unwrap(), lambda, &"a".parse().unwrap(), 10)
        .map_err(|e| e.to_string())?;
    let (lo, hi) = est.window;
    ensure(lo > 0.1 && hi < 10.0, || format!("window [{lo}, {hi}]"))?;
    // differences[j] compares terms n = j + 1 and n = j + 2
    let diffs = est.differences();
    for j in 3..diffs.len() {
        ensure(diffs[j] < diffs[j - 1], || format!("difference at n = {} does not shrink: {diffs:?}", j + 1))?;
    }
    Ok(format!("window [{lo:.6}, {hi:.6}], last term {:.9}, last difference {:.1e}", est.value(), diffs[diffs.len() - 1]))
}

fn north_south() -> Check {
    let f = fixtures::fibonacci_map();
    let r = unit_rose(2).unwrap();
    let a = eigencurrent_approx(f.automorphism(), &"a".parse().unwrap(), 12, &r, 2).map_err(|e| e.to_string())?;
    let b = eigencurrent_approx(f.automorphism(), &"b".parse().unwrap(), 12, &r, 2).map_err(|e| e.to_string())?;
    let gap = a.last().sup_distance(b.last());
    ensure(gap < 1e-3, || format!("gap {gap}"))?;
    Ok(format!("depth-2 gap at n = 12 is {gap:.2e}"))
}

/// `||g|| = max(0, d(x, g²x) − d(x, gx))`, with `d(x, hx)` read off the
/// normal form of `h` in the Bass-Serre tree.
fn coset_length(s: &FreeSplitting, g: &Word) -> u64 {
    let d = |h: &Word| -> u64 {
        match s.kind() {
            SplittingKind::Separating(set) => {
                let mut syllables: Vec<bool> = Vec::new();
                for l in h.letters() {
                    let side = set.contains(&l.index());
                    if syllables.last() != Some(&side) {
                        syllables.push(side);
                    }
                }
                if syllables.last() == Some(&true) {
                    syllables.pop();
                }
                match syllables.first() {
                    None => 0,
                    Some(&starts_in_a) => syllables.len() as u64 + u64::from(!starts_in_a),
                }
            }
            SplittingKind::Loop(t) => h.letters().iter().filter(|l| l.index() == *t).count() as u64,
        }
    };
    d(&g.pow(2)).saturating_sub(d(g))
}

fn splitting_oracle() -> Check {
    let mut count = 0usize;
    for rank in 2..=3 {
        let splittings = FreeSplitting::all_base(rank, true);
        for cw in cyclic_words_up_to(rank, 6) {
            let g = cw.to_word();
            for s in &splittings {
                let got = s.length(&g).map_err(|e| e.to_string())?;
                ensure(got == coset_length(s, &g), || format!("{s} on {g}: {got} vs {}", coset_length(s, &g)))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (splitting, class) pairs agree with the coset oracle"))
}

fn lipschitz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let seps = FreeSplitting::all_base(3, false);
    let all = FreeSplitting::all_base(3, true);
    let mut f_edges = 0;
    while f_edges < 100 {
        let phi = random_automorphism(3, rng.gen_range(0..4), &mut rng);
        let i = rng.gen_range(0..seps.len());
        let j = rng.gen_range(0..seps.len());
        if i == j {
            continue;
        }
        let s1 = seps[i].act(&phi).map_err(|e| e.to_string())?;
        let s2 = seps[j].act(&phi).map_err(|e| e.to_string())?;
        if !refinement_adjacent(&s1, &s2).map_err(|e| e.to_string())?.is_yes() {
            continue;
        }
        let FstarVerdict::Yes(g) = fstar_adjacent(&map_j(&s1), &map_j(&s2), 3).map_err(|e| e.to_string())? else {
            return Err(format!("j drops the edge {s1} -- {s2}"));
        };
        midpoint(&s1, &s2, &g)?;
        f_edges += 1;
    }
    let mut fstar_edges = 0;
    let mut attempts = 0;
    while fstar_edges < 100 {
        attempts += 1;
        ensure(attempts < 10_000, || "too few F*-edges found".into())?;
        let s1 = all[rng.gen_range(0..all.len())].act(&random_automorphism(3, rng.gen_range(0..3), &mut rng)).unwrap();
        let s2 = all[rng.gen_range(0..all.len())].act(&random_automorphism(3, rng.gen_range(0..3), &mut rng)).unwrap();
        if s1.key(4) == s2.key(4) {
            continue;
        }
        if let FstarVerdict::Yes(g) = fstar_adjacent(&s1, &s2, 3).map_err(|e| e.to_string())? {
            midpoint(&s1, &s2, &g)?;
            fstar_edges += 1;
        }
    }
    Ok(format!("{f_edges} F-edges kept by j, {fstar_edges} F*-edges with an η_g midpoint ({attempts} pairs tried)"))
}

fn midpoint(s1: &FreeSplitting, s2: &FreeSplitting, g: &Word) -> Result<(), String> {
    let q1 = map_q(s1);
    ensure(matches!(q1, Vertex::Splitting(_)), || format!("q moved {s1}"))?;
    midpoint_current(s1, s2, g)
        .map_err(|e| e.to_string())?
        .map(|_| ())
        .ok_or_else(|| format!("η_{g} is not adjacent to both {s1} and {s2}"))
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_oi"))
        .args(args)
        .current_dir(fixtures_dir())
        .env("OI_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn determinism() -> Check {
    let runs: [&[&str]; 5] = [
        &["iwip", "--map", "fibonacci_map.json", "--seed", "a", "--n", "10", "--depth", "2"],
        &["scaling-exp", "--graph", "rose3.json", "--samples", "300", "--seed", "7"],
        &["intersect", "--graph", "theta.json", "--current", "eta:aBab"],
        &["current-freq", "--graph", "rose2.json", "--current", "mu_rank2.json", "--depth", "3"],
        &["graph", "--flavor", "Fstar", "--from", "split_a_bc.json", "--to", "split_a_bc_tribonacci.json", "--radius", "2", "--moves", "moves_tribonacci.json", "--rank", "3"],
    ];
    for args in runs {
        let first = run_cli(args, "1")?;
        for threads in ["1", "4"] {
            ensure(run_cli(args, threads)? == first, || format!("{} differs on rerun with {threads} threads", args[0]))?;
        }
    }
    Ok(format!("{} commands byte-identical across 3 runs and thread counts 1, 4", runs.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("two-route intersection equality", Duration::from_secs(30), two_route_equality),
        ("intersection form axioms", Duration::from_secs(30), form_axioms),
        ("length-function laws", Duration::from_secs(60), length_laws),
        ("bounded back-tracking inequalities", Duration::from_secs(60), lemma_suite),
        ("uniform scaling modulus", Duration::from_secs(10), uniform_scaling),
        ("Perron-Frobenius data of a -> ab, b -> a", Duration::from_secs(1), pf_check),
        ("pairing window", Duration::from_secs(5), pairing_window),
        ("north-south frequency convergence", Duration::from_secs(5), north_south),
        ("splitting lengths vs coset oracle", Duration::from_secs(60), splitting_oracle),
        ("Lipschitz maps j and q", Duration::from_secs(30), lipschitz),
        ("CLI determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {budget:?} budget")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:>2} {name}: {detail} [{:.2}s / {}s]", i + 1, elapsed.as_secs_f64(), budget.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
