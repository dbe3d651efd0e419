use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lbsim_core::OmegaScope;

#[derive(Debug, Parser)]
#[command(
    name = "lbsim",
    version,
    about = "Simulate load-balancing criteria and search for optimal load-balancing scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one criterion or an explicit scenario and write its trace
    Simulate(RunArgs),
    /// Search for the cheapest scenario (or the N cheapest)
    Optimal(RunArgs),
    /// Score criteria against the optimal scenario
    Compare(RunArgs),
    /// Sweep one criterion parameter over a grid
    Sweep(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Optimal(_) => "optimal",
            Command::Compare(_) => "compare",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a) | Command::Optimal(a) | Command::Compare(a) | Command::Sweep(a) => a,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Catalog benchmark id, comma-separated ids, or `all`
    #[arg(long, value_name = "ID|all")]
    pub bench: Option<String>,
    /// Workload model as JSON: {"P", "gamma", "W0", "C", "omega", "iota", "omega_scope"}
    #[arg(long, value_name = "JSON")]
    pub inline: Option<String>,
    /// Criterion specs such as `menon`, `periodic:T=100`, `procassini:rho=19.43`
    #[arg(long = "criteria", visible_alias = "criterion", value_name = "SPEC[,SPEC...]")]
    pub criteria: Vec<String>,
    /// Explicit load-balancing iterations, e.g. "46;92" (empty for none)
    #[arg(long, value_name = "LIST")]
    pub scenario: Option<String>,
    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Number of cheapest scenarios to report
    #[arg(long, value_name = "N")]
    pub nth: Option<usize>,
    /// Check the search against exhaustive enumeration on a truncated model
    #[arg(long)]
    pub verify_brute: bool,
    /// Horizon used by --verify-brute [default: 20]
    #[arg(long, value_name = "N")]
    pub gamma_cap: Option<usize>,
    /// Override the number of iterations
    #[arg(long)]
    pub gamma: Option<usize>,
    /// Override the load-balancing cost
    #[arg(long)]
    pub cost: Option<f64>,
    /// How omega enters the model: `per_pe` or `total`
    #[arg(long)]
    pub omega_scope: Option<OmegaScope>,
    /// Swept parameter (T, xi, rho or phase)
    #[arg(long)]
    pub param: Option<String>,
    /// First grid value
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// Last grid value
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    pub steps: Option<usize>,
    /// Reserved and rejected: the model has no randomness
    #[arg(long)]
    pub seed_free: bool,
    /// Print the effective configuration as JSON and exit
    #[arg(long)]
    pub dump_config: bool,
}
