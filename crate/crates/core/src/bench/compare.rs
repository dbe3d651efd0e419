use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::catalog::BenchmarkDef;
use crate::criteria::{run_on_profile, Criterion};
use crate::error::Result;
use crate::model::Scenario;
use crate::optimal::{search_profile, SearchStats};

/// Criterion id of the optimal scenario's row.
pub const OPTIMAL_ID: &str = "optimal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub benchmark_id: String,
    pub criterion_id: String,
    pub params: String,
    pub total_time: f64,
    /// `total_time / T(sigma*)`.
    pub relative: f64,
    pub num_lb: usize,
    pub scenario: Scenario,
    /// Criterion outside the core comparison set.
    pub supplementary: bool,
}

impl ReportRow {
    pub fn is_optimal(&self) -> bool {
        self.criterion_id == OPTIMAL_ID
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub benchmark_id: String,
    pub optimal_time: f64,
    pub stats: SearchStats,
}

/// One row per (benchmark, criterion), each benchmark led by its optimal row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub searches: Vec<BenchmarkSummary>,
}

impl ComparisonReport {
    /// Row for `benchmark` whose criterion id or full spec equals `criterion`.
    pub fn get(&self, benchmark: &str, criterion: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.benchmark_id == benchmark
                && (r.criterion_id == criterion || spec_of(r) == criterion)
        })
    }

    pub fn for_benchmark<'a>(&'a self, benchmark: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.benchmark_id == benchmark)
    }

    /// Specs of the supplementary rows, in first-seen order.
    pub fn supplementary(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.rows.iter().filter(|r| r.supplementary) {
            let s = spec_of(r);
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

fn spec_of(r: &ReportRow) -> String {
    if r.params.is_empty() {
        r.criterion_id.clone()
    } else {
        format!("{}:{}", r.criterion_id, r.params)
    }
}

/// Scores every criterion against the optimal scenario on every benchmark.
pub fn compare(benchmarks: &[BenchmarkDef], criteria: &[Criterion]) -> Result<ComparisonReport> {
    for c in criteria {
        c.validate()?;
    }
    let per_bench: Vec<(Vec<ReportRow>, BenchmarkSummary)> = benchmarks
        .par_iter()
        .map(|b| compare_one(b, criteria))
        .collect::<Result<_>>()?;
    let mut report = ComparisonReport::default();
    for (rows, summary) in per_bench {
        report.rows.extend(rows);
        report.searches.push(summary);
    }
    Ok(report)
}

fn compare_one(bench: &BenchmarkDef, criteria: &[Criterion]) -> Result<(Vec<ReportRow>, BenchmarkSummary)> {
    bench.model.validate()?;
    let profile = bench.model.profile()?;
    let outcome = search_profile(&profile, 1);
    let best = &outcome.results[0];
    let opt = best.total_time;

    let mut rows = Vec::with_capacity(criteria.len() + 1);
    rows.push(ReportRow {
        benchmark_id: bench.id.clone(),
        criterion_id: OPTIMAL_ID.into(),
        params: String::new(),
        total_time: opt,
        relative: 1.0,
        num_lb: best.scenario.len(),
        scenario: best.scenario.clone(),
        supplementary: false,
    });
    let scored: Vec<ReportRow> = criteria
        .par_iter()
        .map(|c| {
            let (scenario, trace) = run_on_profile(&profile, c);
            let total = trace.total_time();
            ReportRow {
                benchmark_id: bench.id.clone(),
                criterion_id: c.family().into(),
                params: c.params(),
                total_time: total,
                relative: total / opt,
                num_lb: scenario.len(),
                scenario,
                supplementary: c.is_supplementary(),
            }
        })
        .collect();
    rows.extend(scored);
    Ok((
        rows,
        BenchmarkSummary {
            benchmark_id: bench.id.clone(),
            optimal_time: opt,
            stats: outcome.stats,
        },
    ))
}
