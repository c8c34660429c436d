//! `seba`: sparse eigenbasis approximation from the command line.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 a numerical
//! routine failed to converge, 3 the sparse-basis iteration hit its
//! iteration cap (outputs are still written).

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "seba", version, about = "Sparse eigenbasis approximation toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Output directory (also where inputs are looked up by default)
    #[arg(long, env = "SEBA_OUT", global = true)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel stages
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random choice
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Args, Clone, Default)]
pub struct IterArgs {
    /// Sparsity weight (default 0.99/sqrt(p), or 0.99/sqrt(sum of weights))
    #[arg(long)]
    pub mu: Option<f64>,
    /// Stop when the rotation moves less than this in the 2-norm
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Sparse basis of the leading r vectors of a basis
    Run {
        /// Basis matrix (CSV or SEBA1); default <out>/V.seba1
        #[arg(long)]
        input: Option<PathBuf>,
        /// Row weights (one value per row)
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Number of leading vectors to use (default: all)
        #[arg(long)]
        r: Option<usize>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Weyl-rescaled spectrum and its largest drops
    Eigengap {
        /// Eigenvalues, one per line; default <out>/eigenvalues.csv
        #[arg(long)]
        input: Option<PathBuf>,
        /// neumann, dirichlet or markov
        #[arg(long)]
        kind: Option<String>,
        /// Manifold dimension
        #[arg(long)]
        d: Option<usize>,
        /// Only consider the first r-max eigenvalues
        #[arg(long)]
        r_max: Option<usize>,
    },
    /// Cumulative minimum values for every r up to r-max
    Scan {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        r_max: Option<usize>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Hard feature labels from a sparse basis
    Threshold {
        /// Sparse basis; default <out>/S.seba1
        #[arg(long)]
        input: Option<PathBuf>,
        /// partition-unity, disjoint, maxlike, manual:<tau> or cheeger
        #[arg(long)]
        method: Option<String>,
        /// Levels per Cheeger sweep
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Cheeger-ratio level-set thresholds on a gridded sparse basis
    Cheeger {
        #[arg(long)]
        input: Option<PathBuf>,
        /// 1-based column (default: every column)
        #[arg(long)]
        column: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        /// Bilinear grid refinement factor
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Generate a fixture basis
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand)]
pub enum Demo {
    /// Bickley jet transfer operator on a box grid
    Bickley {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Final time in days
        #[arg(long)]
        t1: Option<f64>,
        /// RK4 step in days
        #[arg(long)]
        step: Option<f64>,
        /// Number of singular vectors to keep
        #[arg(long)]
        k: Option<usize>,
    },
    /// Graph Laplacian of a four-blob point cloud
    Graph {
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Nearly decoupled block Markov chain
    BlockMarkov {
        /// Comma-separated block sizes
        #[arg(long)]
        sizes: Option<String>,
        /// Mass leaking out of each block per step
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(cli) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::NotConverged) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e
                .chain()
                .filter_map(|c| c.downcast_ref::<seba_core::Error>())
                .any(|c| matches!(c, seba_core::Error::NoConvergence(_)));
            ExitCode::from(if numeric { 2 } else { 1 })
        }
    }
}
