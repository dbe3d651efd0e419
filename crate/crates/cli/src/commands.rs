use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use lbsim_core::bench::export::{
    to_file, write_json, write_ranked_csv, write_report_csv, write_sweep_csv, write_trace_csv,
};
use lbsim_core::bench::{compare, sweep, SweepPoint};
use lbsim_core::optimal::DEFAULT_BRUTE_FORCE_CAP;
use lbsim_core::{
    brute_force, run_criterion, search_nth_best, search_optimal, BenchmarkDef, ComparisonReport, Criterion,
    SearchStats, SimTrace,
};
use serde::Serialize;

use crate::config::{Failure, RunConfig};

type CmdResult = Result<(), Failure>;

fn prepare_out(dir: &Path) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

fn emit<F>(dir: &Path, name: &str, f: F) -> CmdResult
where
    F: FnOnce(&mut std::io::BufWriter<fs::File>) -> lbsim_core::Result<()>,
{
    let path = dir.join(name);
    to_file(&path, f)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("cannot write {}", path.display()))?;
    say!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary {
    benchmark_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    criterion: Option<String>,
    total_time: f64,
    num_lb: usize,
    scenario: Vec<usize>,
}

pub fn simulate(cfg: &RunConfig) -> CmdResult {
    let target = cfg.single_target("simulate")?;
    let scenario = cfg.scenario()?;
    let criteria = cfg.criteria()?;
    let (criterion, scenario, trace): (Option<&Criterion>, _, SimTrace) =
        match (criteria.as_slice(), scenario) {
            ([], Some(s)) => {
                s.validate(target.model.gamma)?;
                let (_, trace) = target.model.simulate(&s)?;
                (None, s, trace)
            }
            ([c], None) => {
                let (s, trace) = run_criterion(&target.model, c)?;
                (Some(c), s, trace)
            }
            ([], None) => return Err(Failure::usage("`simulate` needs --criterion or --scenario")),
            (_, Some(_)) => return Err(Failure::usage("give either --criterion or --scenario, not both")),
            _ => return Err(Failure::usage("`simulate` takes a single criterion")),
        };
    let summary = SimulateSummary {
        benchmark_id: target.id,
        criterion: criterion.map(Criterion::to_string),
        total_time: trace.total_time(),
        num_lb: scenario.len(),
        scenario: scenario.lb_iterations.clone(),
    };
    say!("total_time {}", summary.total_time);
    say!("num_lb {}", summary.num_lb);
    say!("scenario {scenario}");

    let dir = prepare_out(&cfg.out_dir())?;
    emit(&dir, "trace.csv", |w| write_trace_csv(w, &trace))?;
    emit(&dir, "summary.json", |w| write_json(w, &summary))
}

#[derive(Serialize)]
struct Ranked {
    rank: usize,
    total_time: f64,
    num_lb: usize,
    scenario: Vec<usize>,
}

#[derive(Serialize)]
struct Verification {
    gamma: usize,
    search_total: f64,
    brute_force_total: f64,
    matched: bool,
}

#[derive(Serialize)]
struct OptimalSummary {
    benchmark_id: String,
    total_time: f64,
    num_lb: usize,
    scenario: Vec<usize>,
    stats: SearchStats,
    state_bound: usize,
    ranked: Vec<Ranked>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

pub fn optimal(cfg: &RunConfig) -> CmdResult {
    let target = cfg.single_target("optimal")?;
    let n = cfg.nth.unwrap_or(1);
    if n == 0 {
        return Err(Failure::usage("--nth must be at least 1"));
    }
    let outcome = search_nth_best(&target.model, n)?;
    let best = &outcome.results[0];
    let ranked: Vec<Ranked> = outcome
        .results
        .iter()
        .enumerate()
        .map(|(k, r)| Ranked {
            rank: k + 1,
            total_time: r.total_time,
            num_lb: r.scenario.len(),
            scenario: r.scenario.lb_iterations.clone(),
        })
        .collect();
    say!("total_time {}", best.total_time);
    say!("num_lb {}", best.scenario.len());
    say!("scenario {}", best.scenario);
    say!(
        "nodes_expanded {} nodes_created {} queue_peak {}",
        outcome.stats.nodes_expanded, outcome.stats.nodes_created, outcome.stats.queue_peak
    );
    for r in ranked.iter().skip(1) {
        say!("rank {} total_time {} scenario {}", r.rank, r.total_time, outcome.results[r.rank - 1].scenario);
    }

    let verification = if cfg.verify_brute {
        let cap = cfg.gamma_cap.unwrap_or(DEFAULT_BRUTE_FORCE_CAP);
        let small = target.model.truncated(target.model.gamma.min(cap));
        let oracle = brute_force(&small, cap)?;
        let (_, found, _) = search_optimal(&small)?;
        let v = Verification {
            gamma: small.gamma,
            search_total: found,
            brute_force_total: oracle[0].total_time,
            matched: found == oracle[0].total_time,
        };
        let verdict = if v.matched { "MATCH" } else { "MISMATCH" };
        say!("{verdict} gamma={} search={} brute_force={}", v.gamma, v.search_total, v.brute_force_total);
        Some(v)
    } else {
        None
    };
    let mismatch = verification.as_ref().is_some_and(|v| !v.matched);

    let summary = OptimalSummary {
        benchmark_id: target.id,
        total_time: best.total_time,
        num_lb: best.scenario.len(),
        scenario: best.scenario.lb_iterations.clone(),
        stats: outcome.stats,
        state_bound: SearchStats::state_bound(target.model.gamma),
        ranked,
        verification,
    };
    let dir = prepare_out(&cfg.out_dir())?;
    emit(&dir, "optimal.json", |w| write_json(w, &summary))?;
    if cfg.nth.is_some() {
        emit(&dir, "ranked.csv", |w| write_ranked_csv(w, &outcome.results))?;
    }
    if mismatch {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "search and exhaustive enumeration disagree"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(flatten)]
    report: &'a ComparisonReport,
    supplementary: Vec<String>,
}

pub fn compare_cmd(cfg: &RunConfig) -> CmdResult {
    let targets = cfg.targets()?;
    let criteria = cfg.criteria()?;
    if criteria.is_empty() {
        return Err(Failure::usage("`compare` needs --criteria"));
    }
    let benches: Vec<_> = targets
        .into_iter()
        .map(|t| BenchmarkDef {
            id: t.id,
            model: t.model,
            description: String::new(),
        })
        .collect();
    let report = compare(&benches, &criteria)?;
    for r in &report.rows {
        let name = if r.params.is_empty() {
            r.criterion_id.clone()
        } else {
            format!("{}:{}", r.criterion_id, r.params)
        };
        say!(
            "{:<24} {:<24} relative {:.6} num_lb {:>3} total_time {}",
            r.benchmark_id, name, r.relative, r.num_lb, r.total_time
        );
    }
    let json = ReportJson {
        supplementary: report.supplementary(),
        report: &report,
    };
    let dir = prepare_out(&cfg.out_dir())?;
    emit(&dir, "report.csv", |w| write_report_csv(w, &report))?;
    emit(&dir, "report.json", |w| write_json(w, &json))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    benchmark_id: String,
    family: &'a str,
    param: &'a str,
    from: f64,
    to: f64,
    steps: usize,
    best: SweepPoint,
}

pub fn sweep_cmd(cfg: &RunConfig) -> CmdResult {
    let target = cfg.single_target("sweep")?;
    let family = match cfg.criteria.as_slice() {
        [c] => c.split(':').next().unwrap_or_default().trim().to_string(),
        [] => return Err(Failure::usage("`sweep` needs --criterion <family>")),
        _ => return Err(Failure::usage("`sweep` takes a single criterion family")),
    };
    let param = cfg.param.as_deref().ok_or_else(|| Failure::usage("`sweep` needs --param"))?;
    let (from, to, steps) = match (cfg.from, cfg.to, cfg.steps) {
        (Some(a), Some(b), Some(n)) => (a, b, n),
        _ => return Err(Failure::usage("`sweep` needs --from, --to and --steps")),
    };
    let result = sweep(&target.model, &family, param, from, to, steps)?;
    say!(
        "best {}={} total_time {} num_lb {}",
        param, result.best.value, result.best.total_time, result.best.num_lb
    );
    let summary = SweepSummary {
        benchmark_id: target.id,
        family: result.family.name(),
        param: result.family.param(),
        from,
        to,
        steps,
        best: result.best,
    };
    let dir = prepare_out(&cfg.out_dir())?;
    emit(&dir, "sweep.csv", |w| write_sweep_csv(w, &result))?;
    emit(&dir, "sweep.json", |w| write_json(w, &summary))
}
