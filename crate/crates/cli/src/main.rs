use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod input;
mod output;

#[derive(Parser)]
#[command(name = "oi", version, about = "Exact intersection form, currents, iwip dynamics and free splittings for F_N")]
struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Graph arguments take a JSON file, `rose:N` (unit rose of rank N) or
/// `theta`. Current arguments take a JSON file or `eta:<word>`. Map
/// arguments take a JSON file or one of `fibonacci`, `tribonacci`,
/// `plastic`.
#[derive(Subcommand)]
pub enum Command {
    /// Translation length ||w||_T of a word on a marked metric graph.
    Translen {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        word: String,
    },
    /// ⟨T, μ⟩ computed by both exact routes.
    Intersect {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        current: String,
    },
    /// Normalized frequencies ⟨v, μ⟩ of all reduced paths of length ≤ depth.
    CurrentFreq {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        current: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Bounded back-tracking bound, and optionally the four inequalities for
    /// a decomposition u = u_1⋯u_m.
    Bbt {
        #[arg(long)]
        graph: String,
        /// Comma-separated pieces u_1,…,u_m.
        #[arg(long, value_delimiter = ',')]
        pieces: Vec<String>,
        /// Constant C (defaults to the bound).
        #[arg(long)]
        constant: Option<String>,
    },
    /// Empirical scaling modulus between two δ-close perturbations.
    ScalingExp {
        #[arg(long, default_value = "rose:2")]
        graph: String,
        #[arg(long, default_value = "1/10")]
        delta: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CSV of n, λ^-n length, λ^-2n pairing and frequency change along φ^n(seed).
    Iwip {
        #[arg(long)]
        map: String,
        /// Seed word g.
        #[arg(long)]
        seed: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Metric used for lengths (defaults to the map's own graph).
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Perron-Frobenius data and the train-track metric of a graph map.
    Pf {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Bounded BFS distance in one of the splitting graphs.
    Graph {
        /// F, S, Fstar, Z or I0.
        #[arg(long)]
        flavor: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        radius: usize,
        /// JSON list of automorphisms.
        #[arg(long)]
        moves: Option<String>,
        /// Rank for splittings that do not state one.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = oi_core::splittings::DEFAULT_KEY_DEPTH)]
        key_depth: usize,
        #[arg(long, default_value_t = oi_core::splittings::DEFAULT_SEARCH_LENGTH)]
        search_length: usize,
        #[arg(long, default_value_t = oi_core::splittings::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("OI_THREADS") {
        let n: usize = v.parse().with_context(|| format!("OI_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    let text = commands::run(&cli.command)?;
    match cli.out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
