//! Loading graphs, currents, maps and vertices from files or short names.
//! Every loader also returns the bytes it read so the config hash covers
//! input contents, not just paths.

use anyhow::{bail, Context, Result};
use oi_core::currents::RationalCurrent;
use oi_core::dynamics::GraphMap;
use oi_core::fixtures;
use oi_core::marked_graph::{unit_rose, MarkedMetricGraph};
use oi_core::splittings::Vertex;
use oi_core::words::{Automorphism, Word};

pub struct Loaded<T> {
    pub value: T,
    pub source: String,
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
}

pub fn graph(arg: &str) -> Result<Loaded<MarkedMetricGraph>> {
    if let Some(n) = arg.strip_prefix("rose:") {
        let n: usize = n.parse().with_context(|| format!("bad rank in {arg:?}"))?;
        return Ok(Loaded { value: unit_rose(n)?, source: arg.into() });
    }
    if arg == "theta" {
        return Ok(Loaded { value: fixtures::theta(), source: arg.into() });
    }
    let text = read(arg)?;
    let value = MarkedMetricGraph::from_json(&text).with_context(|| format!("parsing graph {arg}"))?;
    Ok(Loaded { value, source: text })
}

pub fn current(arg: &str, rank: usize) -> Result<Loaded<RationalCurrent>> {
    if let Some(w) = arg.strip_prefix("eta:") {
        let w: Word = w.parse()?;
        return Ok(Loaded { value: RationalCurrent::counting(rank, &w)?, source: arg.into() });
    }
    let text = read(arg)?;
    let value = RationalCurrent::from_json(&text).with_context(|| format!("parsing current {arg}"))?;
    if value.rank() != rank {
        bail!("current has rank {} but the graph has rank {rank}", value.rank());
    }
    Ok(Loaded { value, source: text })
}

pub fn map(arg: &str) -> Result<Loaded<GraphMap>> {
    let value = match arg {
        "fibonacci" => fixtures::fibonacci_map(),
        "tribonacci" => fixtures::tribonacci_map(),
        "plastic" => fixtures::plastic_map(),
        path => {
            let text = read(path)?;
            let value = GraphMap::from_json(&text).with_context(|| format!("parsing graph map {path}"))?;
            return Ok(Loaded { value, source: text });
        }
    };
    Ok(Loaded { value, source: arg.into() })
}

pub fn vertex(arg: &str, rank: Option<usize>) -> Result<Loaded<Vertex>> {
    let text = read(arg)?;
    let value = Vertex::from_json(&text, rank).with_context(|| format!("parsing vertex {arg}"))?;
    Ok(Loaded { value, source: text })
}

pub fn moves(arg: &str) -> Result<Loaded<Vec<Automorphism>>> {
    let text = read(arg)?;
    let value = serde_json::from_str(&text).with_context(|| format!("parsing moves {arg}"))?;
    Ok(Loaded { value, source: text })
}
