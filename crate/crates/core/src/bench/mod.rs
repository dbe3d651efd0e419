//! Benchmark catalog, parameter sweeps, comparison reports and exporters.

pub mod catalog;
pub mod compare;
pub mod export;
pub mod sweep;

pub use catalog::{catalog, lookup, resolve, BenchmarkDef};
pub use compare::{compare, ComparisonReport, ReportRow};
pub use sweep::{sweep, SweepFamily, SweepPoint, SweepResult};
