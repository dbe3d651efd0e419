use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::{OmegaScope, WorkloadModel};

/// Number of cores of the reference machine.
pub const PROCESSORS: u64 = 10_649_600;
pub const GAMMA: usize = 600;
/// Average load per processing element at iteration 0, in time units.
pub const MEAN_LOAD: f64 = 52.0;

/// Catalog ids in canonical order.
pub const IDS: [&str; 8] = [
    "static-constant",
    "static-sublinear",
    "static-linear",
    "static-autocorrect",
    "irregular-constant",
    "irregular-sublinear",
    "irregular-linear",
    "irregular-autocorrect",
];

const IMBALANCE: [(&str, &str, &str); 4] = [
    ("constant", "0.1", "imbalance grows at a constant rate"),
    ("sublinear", "1/(0.4*t+1)", "imbalance growth slows down over time"),
    ("linear", "0.02*t", "imbalance growth rate increases linearly"),
    (
        "autocorrect",
        "-(0.1*(t%17))+0.8",
        "imbalance corrects itself every 17 iterations",
    ),
];

const WORKLOAD: [(&str, &str, &str); 2] = [
    ("static", "0", "static workload"),
    ("irregular", "sin(pi*t/180)", "sinusoidal workload"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkDef {
    pub id: String,
    pub model: WorkloadModel,
    pub description: String,
}

impl BenchmarkDef {
    /// Same benchmark with another load-balancing cost.
    pub fn with_cost(mut self, lb_cost: f64) -> Self {
        self.model.lb_cost = lb_cost;
        self
    }
}

/// `W0 = 52 P`.
pub fn initial_workload() -> f64 {
    MEAN_LOAD * PROCESSORS as f64
}

/// Cost used by the catalog: one hundred times the initial per-element load,
/// `(W0 / P) 10^2 = 5200`.
pub fn default_cost() -> f64 {
    initial_workload() / PROCESSORS as f64 * 1e2
}

/// The table's cost column read literally, `W0 P 10^2`.
pub fn literal_cost() -> f64 {
    initial_workload() * PROCESSORS as f64 * 1e2
}

/// The eight synthetic benchmarks, in canonical order.
pub fn catalog() -> Vec<BenchmarkDef> {
    let mut out = Vec::with_capacity(IDS.len());
    for (kind, omega, wdesc) in WORKLOAD {
        for (shape, iota, idesc) in IMBALANCE {
            out.push(BenchmarkDef {
                id: format!("{kind}-{shape}"),
                model: WorkloadModel {
                    processors: PROCESSORS,
                    gamma: GAMMA,
                    initial_workload: initial_workload(),
                    lb_cost: default_cost(),
                    omega: Expr::parse(omega).expect("catalog formula"),
                    iota: Expr::parse(iota).expect("catalog formula"),
                    omega_scope: OmegaScope::PerPe,
                },
                description: format!("{wdesc}, {idesc}"),
            });
        }
    }
    out
}

pub fn lookup(id: &str) -> Result<BenchmarkDef> {
    let wanted = id.trim().to_ascii_lowercase();
    catalog()
        .into_iter()
        .find(|b| b.id == wanted)
        .ok_or_else(|| Error::UnknownBenchmark(id.to_string()))
}

/// Resolves `all` or a comma-separated list of ids.
pub fn resolve(spec: &str) -> Result<Vec<BenchmarkDef>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(catalog());
    }
    let out: Vec<BenchmarkDef> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(lookup)
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::UnknownBenchmark(spec.to_string()));
    }
    Ok(out)
}
