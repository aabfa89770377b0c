//! Command-line surface: simulate / moments / estimate / oracle / check /
//! recover, sharing the --params/--input/--out/--seed/--mode/--n/--tol
//! flag vocabulary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "sbm-ident",
    version,
    about = "Moment estimators, mixture recovery and identifiability checks for random graph mixture models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a graph from a parameter file and write an edge list
    Simulate(SimulateArgs),
    /// Empirical motif moments of an observed edge list
    Moments(MomentsArgs),
    /// Recover affiliation parameters from moments or an edge list
    Estimate(EstimateArgs),
    /// Exact configuration table or closed-form moments
    Oracle(OracleArgs),
    /// Identifiability checks: ranks, degree sequences, bins
    Check(CheckArgs),
    /// Constructive recovery from weighted mixture components
    Recover(RecoverArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON parameter file
    #[arg(long)]
    pub params: PathBuf,
    /// Number of nodes
    #[arg(long)]
    pub n: usize,
    /// RNG seed (fixed seed gives byte-identical output)
    #[arg(long)]
    pub seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// "latent" additionally writes <out>.latent with the group draws
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    /// Edge-list input
    #[arg(long)]
    pub input: PathBuf,
    /// "k3" or "k4" (default: k4 when the graph has at least 4 nodes)
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Edge list or moments JSON
    #[arg(long)]
    pub input: PathBuf,
    /// "k3-q2" (default), "known-pi" or "uniform-q"
    #[arg(long)]
    pub mode: Option<String>,
    /// Parameter file supplying the priors for known-pi mode
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Uniformity threshold on |m2 - m1^2| for known-pi mode
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Node count for the configuration table
    #[arg(long)]
    pub n: Option<usize>,
    /// "table" (default) or "moments"
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// "base-case", "degrees", "kruskal-rank" or "bins"
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Degree file, matrix file or cutpoint file depending on the mode
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Node count m for base-case mode
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RecoverArgs {
    /// Mixture components JSON
    #[arg(long)]
    pub input: PathBuf,
    /// "k3" (default) or "affiliation"
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
