//! Fixtures shared by the criterion benchmarks under `benches/`.

use lbsim_core::bench::lookup;
use lbsim_core::criteria::parse_list;
use lbsim_core::{Criterion, WorkloadModel};

/// Catalog benchmark `id` cut to `gamma` iterations.
pub fn model(id: &str, gamma: usize) -> WorkloadModel {
    lookup(id).expect("catalog id").model.truncated(gamma)
}

/// The six criteria of the standard comparison.
pub fn standard_criteria() -> Vec<Criterion> {
    parse_list("periodic:T=100,marquez:xi=1.5,procassini:rho=19.43,menon,zhai:phase=3,proposed")
        .expect("valid specs")
}
