//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lbsim_core::bench::{catalog, compare, lookup, sweep};
use lbsim_core::criteria::parse_list;
use lbsim_core::{
    brute_force, menon_tau, rho_tau, run_criterion, search_nth_best, search_optimal, Criterion, Expr,
    OmegaScope, Scenario, SearchStats, WorkloadModel,
};

type Outcome = Result<String, String>;
type Check = (&'static str, &'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || format!("{what} took {elapsed:.2?}, limit {limit:?}"))
}

fn lb_times(m: &WorkloadModel, c: &Criterion) -> Vec<usize> {
    run_criterion(m, c).unwrap().0.lb_iterations
}

fn intervals(lbs: &[usize]) -> Vec<usize> {
    let mut prev = 0;
    lbs.iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect()
}

/// Search against exhaustive enumeration on small horizons.
fn ac1() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for b in catalog() {
        for gamma in [8, 10, 12, 14] {
            let m = b.model.truncated(gamma);
            let oracle = brute_force(&m, 20).map_err(|e| e.to_string())?;
            let (_, best, _) = search_optimal(&m).map_err(|e| e.to_string())?;
            check(best == oracle[0].total_time, || {
                format!("{} gamma={gamma}: search {best} vs oracle {}", b.id, oracle[0].total_time)
            })?;
            let top = search_nth_best(&m, 5).map_err(|e| e.to_string())?.results;
            check(top.len() == 5, || format!("{} gamma={gamma}: {} results", b.id, top.len()))?;
            for (k, (got, want)) in top.iter().zip(&oracle).enumerate() {
                check(got.total_time == want.total_time, || {
                    format!("{} gamma={gamma} rank {}: {} vs {}", b.id, k + 1, got.total_time, want.total_time)
                })?;
                let (sim, _) = m.simulate(&got.scenario).map_err(|e| e.to_string())?;
                check(sim == got.total_time, || format!("{} rank {} cost mismatch", b.id, k + 1))?;
            }
            let mut distinct: Vec<&Scenario> = top.iter().map(|r| &r.scenario).collect();
            distinct.sort();
            distinct.dedup();
            check(distinct.len() == 5, || format!("{} gamma={gamma}: duplicate scenarios", b.id))?;
            cases += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10), "oracle comparison")?;
    Ok(format!("{cases} cases exact, {:.2?}", start.elapsed()))
}

/// Quadratic tree size at full horizon.
fn ac2() -> Outcome {
    let bound = SearchStats::state_bound(600);
    let mut worst = 0;
    let mut slowest = Duration::ZERO;
    for b in catalog() {
        let start = Instant::now();
        let (_, _, stats) = search_optimal(&b.model).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        check(stats.nodes_expanded <= bound, || {
            format!("{}: {} expansions > {bound}", b.id, stats.nodes_expanded)
        })?;
        within(took, Duration::from_secs(5), &b.id)?;
        worst = worst.max(stats.nodes_expanded);
        slowest = slowest.max(took);
    }
    Ok(format!("max expansions {worst} <= {bound}, slowest {slowest:.2?}"))
}

/// Menon's interval on constant imbalance growth.
fn ac3() -> Outcome {
    let m = lookup("static-constant").unwrap().model;
    // Independent recurrence for the first trigger: U(k) = 5.2 k (k+1) / 2
    // reaches C = 5200 after k = 44 observed iterations, so balance at 46.
    let mut u_cum = 0.0;
    let mut k = 0usize;
    while u_cum < 5200.0 {
        k += 1;
        let imbalance: f64 = (0..k).map(|_| 0.1).sum();
        u_cum += imbalance * 52.0;
    }
    let expected = k + 1;
    let lbs = lb_times(&m, &Criterion::Menon);
    let gaps = intervals(&lbs);
    check(!gaps.is_empty(), || "Menon never fired".into())?;
    check(gaps.iter().all(|&g| g == expected), || format!("intervals {gaps:?}, oracle {expected}"))?;
    check(expected == 46, || format!("oracle interval {expected}"))?;
    let tau = menon_tau(5200.0, 5.2).unwrap();
    check((tau - 44.72).abs() < 5e-3, || format!("tau {tau}"))?;
    check(expected as f64 - tau.ceil() <= 1.0 && tau.ceil() - expected as f64 <= 1.0, || {
        format!("{expected} not within 1 of ceil({tau})")
    })?;
    Ok(format!("{} calls, constant interval {expected}, sqrt(2C/alpha) = {tau:.2}", lbs.len()))
}

/// Proposed, Menon and Procassini with its matched threshold agree.
fn ac4() -> Outcome {
    let m = lookup("static-constant").unwrap().model;
    let menon = lb_times(&m, &Criterion::Menon);
    let ours = lb_times(&m, &Criterion::Proposed);
    let (gm, go) = (intervals(&menon), intervals(&ours));
    check(!gm.is_empty() && !go.is_empty(), || "no triggers".into())?;
    for (a, b) in gm.iter().zip(&go) {
        check(a.abs_diff(*b) <= 1, || format!("intervals {gm:?} vs {go:?}"))?;
    }
    check(menon[0].abs_diff(ours[0]) <= 1, || format!("first triggers {} vs {}", menon[0], ours[0]))?;
    let tau = menon_tau(5200.0, 5.2).unwrap();
    let rho = rho_tau(52.0, 5.2 * tau, 5200.0).unwrap();
    let proc = lb_times(&m, &Criterion::Procassini { rho });
    check(proc == menon, || format!("procassini {proc:?} vs menon {menon:?}"))?;
    Ok(format!(
        "menon interval {}, proposed interval {}, procassini rho_tau = {rho:.2} identical",
        gm[0], go[0]
    ))
}

/// Imbalance that corrects itself.
fn ac5() -> Outcome {
    // u climbs for 50 iterations, falls back to 0 by 100 and stays there.
    let m = WorkloadModel {
        processors: 1024,
        gamma: 150,
        initial_workload: 10.0 * 1024.0,
        lb_cost: 2400.0,
        omega: Expr::constant(0.0),
        iota: Expr::parse("0.1 - 0.2*floor(t/51)").unwrap(),
        omega_scope: OmegaScope::PerPe,
    };
    let menon = lb_times(&m, &Criterion::Menon);
    let ours = lb_times(&m, &Criterion::Proposed);
    check(!menon.is_empty(), || "Menon never fired".into())?;
    check(ours.is_empty(), || format!("Proposed fired at {ours:?}"))?;
    Ok(format!("menon fired at {menon:?}, proposed silent"))
}

fn standard_criteria() -> Vec<Criterion> {
    parse_list("periodic:T=100,marquez:xi=1.5,procassini:rho=19.43,menon,zhai:phase=3,proposed").unwrap()
}

/// No criterion beats the optimum.
fn ac6() -> Outcome {
    let report = compare(&catalog(), &standard_criteria()).map_err(|e| e.to_string())?;
    let scored: Vec<_> = report.rows.iter().filter(|r| !r.is_optimal()).collect();
    check(scored.len() == 48, || format!("{} rows", scored.len()))?;
    for r in &scored {
        check(r.relative >= 1.0, || {
            format!("{} {}: relative {}", r.benchmark_id, r.criterion_id, r.relative)
        })?;
    }
    let min = scored.iter().map(|r| r.relative).fold(f64::INFINITY, f64::min);
    Ok(format!("48 pairs, smallest relative {min:.6}"))
}

/// Expected orderings between Menon and the proposed rule.
fn ac7() -> Outcome {
    let benches: Vec<_> = ["static-linear", "static-autocorrect", "irregular-constant"]
        .iter()
        .map(|id| lookup(id).unwrap())
        .collect();
    let report = compare(&benches, &parse_list("menon,proposed").unwrap()).map_err(|e| e.to_string())?;
    let row = |b: &str, c: &str| report.get(b, c).unwrap();

    let (lm, lp) = (row("static-linear", "menon"), row("static-linear", "proposed"));
    check(lm.relative > lp.relative, || format!("static-linear menon {} <= proposed {}", lm.relative, lp.relative))?;
    check(lm.relative >= 1.05, || format!("static-linear menon {}", lm.relative))?;

    let (am, ap) = (row("static-autocorrect", "menon"), row("static-autocorrect", "proposed"));
    check(ap.num_lb < am.num_lb, || format!("autocorrect |proposed| {} >= |menon| {}", ap.num_lb, am.num_lb))?;

    let (im, ip) = (row("irregular-constant", "menon"), row("irregular-constant", "proposed"));
    let gap = (im.relative - ip.relative).abs();
    check(gap <= 0.10, || format!("irregular-constant gap {gap}"))?;

    Ok(format!(
        "linear {:.4} > {:.4}; autocorrect {} < {} calls; irregular gap {gap:.4}",
        lm.relative, lp.relative, ap.num_lb, am.num_lb
    ))
}

/// Procassini threshold sweep.
fn ac8() -> Outcome {
    let m = lookup("static-constant").unwrap().model;
    let start = Instant::now();
    let r = sweep(&m, "procassini", "rho", 0.5, 50.0, 5000).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(r.points.len() == 5000, || format!("{} points", r.points.len()))?;
    let rho = r.best.value;
    check((17.0..=21.0).contains(&rho), || format!("argmin rho = {rho}"))?;
    within(took, Duration::from_secs(60), "sweep")?;
    Ok(format!("argmin rho = {rho:.4} (T = {:.3}), {took:.2?}", r.best.total_time))
}

fn main() -> ExitCode {
    let suite: [Check; 8] = [
        ("AC1", "search equals exhaustive oracle", ac1),
        ("AC2", "tree size within quadratic bound", ac2),
        ("AC3", "menon interval", ac3),
        ("AC4", "criterion equivalence on linear growth", ac4),
        ("AC5", "self-correction detection", ac5),
        ("AC6", "optimality dominance", ac6),
        ("AC7", "menon vs proposed orderings", ac7),
        ("AC8", "rho sweep argmin", ac8),
    ];
    let mut failed = 0;
    for (id, name, f) in suite {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
