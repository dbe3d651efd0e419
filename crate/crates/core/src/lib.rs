//! Load-balancing decision laboratory.
//!
//! * [`model`]: discrete workload/imbalance model and parallel-time simulation.
//! * [`criteria`]: online load-balancing criteria and the closed-loop driver.
//! * [`optimal`]: optimal and n-best scenario search, plus an exhaustive oracle.
//! * [`bench`]: synthetic benchmark catalog, parameter sweeps, comparison
//!   reports and CSV/JSON export.
//! * [`expr`]: the formula language used by benchmark definitions.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod model;
pub mod optimal;

pub use bench::{BenchmarkDef, ComparisonReport, ReportRow, SweepResult};
pub use criteria::{menon_tau, rho_tau, run_criterion, Criterion, CriterionContext};
pub use error::{Error, Result};
pub use expr::Expr;
pub use model::{Decision, LoadProfile, OmegaScope, Scenario, SimTrace, TraceRow, WorkloadModel};
pub use optimal::{
    brute_force, search_nth_best, search_optimal, RankedScenario, SearchNode, SearchOutcome, SearchStats,
};
