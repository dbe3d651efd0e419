//! Workload/imbalance recurrences and the parallel-time simulation of a
//! load-balancing scenario.
//!
//! Time is discrete. Iteration `t` costs `m(t)`, the load of the most loaded
//! processing element. Balancing before iteration `t` costs `C` and makes the
//! iteration perfectly balanced (`m(t) = mu(t)`); afterwards the imbalance
//! pattern restarts from offset zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Whether `omega` increments the total workload `W(t)` (then divided by the
/// number of processing elements) or the per-element average load directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaScope {
    Total,
    #[default]
    PerPe,
}

impl fmt::Display for OmegaScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmegaScope::Total => "total",
            OmegaScope::PerPe => "per_pe",
        })
    }
}

impl std::str::FromStr for OmegaScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "total" => Ok(OmegaScope::Total),
            "per_pe" | "per-pe" => Ok(OmegaScope::PerPe),
            _ => Err(Error::InvalidModel(format!(
                "omega_scope must be `total` or `per_pe`, got `{s}`"
            ))),
        }
    }
}

/// Full description of a synthetic iterative application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadModel {
    /// Number of processing elements.
    #[serde(rename = "P")]
    pub processors: u64,
    /// Number of iterations.
    pub gamma: usize,
    /// Initial total workload, in time units.
    #[serde(rename = "W0")]
    pub initial_workload: f64,
    /// Cost of one load-balancing call, in time units.
    #[serde(rename = "C")]
    pub lb_cost: f64,
    /// Workload increment between two iterations, over the iteration index.
    pub omega: Expr,
    /// Imbalance increment, over the offset since the last load balancing.
    pub iota: Expr,
    #[serde(default)]
    pub omega_scope: OmegaScope,
}

impl WorkloadModel {
    /// Checks the scalar invariants. Load positivity is checked when the
    /// model is compiled into a [`LoadProfile`].
    pub fn validate(&self) -> Result<()> {
        if self.processors == 0 {
            return Err(Error::InvalidModel("P must be at least 1".into()));
        }
        if self.gamma == 0 {
            return Err(Error::InvalidModel("gamma must be at least 1".into()));
        }
        if !(self.initial_workload >= 0.0 && self.initial_workload.is_finite()) {
            return Err(Error::InvalidModel("W0 must be a finite nonnegative number".into()));
        }
        if !(self.lb_cost >= 0.0 && self.lb_cost.is_finite()) {
            return Err(Error::InvalidModel("C must be a finite nonnegative number".into()));
        }
        Ok(())
    }

    /// Same model with a different number of iterations.
    pub fn truncated(&self, gamma: usize) -> Self {
        Self {
            gamma,
            ..self.clone()
        }
    }

    fn max_imbalance(&self) -> f64 {
        (self.processors - 1) as f64
    }

    /// Average loads `mu(0..len)`, accumulated in ascending order.
    fn average_loads(&self, len: usize) -> Result<Vec<f64>> {
        let p = self.processors as f64;
        let mut increments = 0.0;
        let mut out = Vec::with_capacity(len);
        for t in 0..len {
            if t >= 1 {
                increments += self.omega.eval(t as f64)?;
            }
            let mu = match self.omega_scope {
                OmegaScope::Total => (self.initial_workload + increments) / p,
                OmegaScope::PerPe => self.initial_workload / p + increments,
            };
            if !(mu > 0.0) {
                return Err(Error::NonPositiveLoad { t, value: mu });
            }
            out.push(mu);
        }
        Ok(out)
    }

    /// Percent imbalance by offset since the last load balancing,
    /// `I[k] = clamp(sum_{x=1..k} iota(x), 0, P-1)` for `k` in `0..len`.
    fn imbalance_by_offset(&self, len: usize) -> Result<Vec<f64>> {
        let upper = self.max_imbalance();
        let mut raw = 0.0;
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            if k >= 1 {
                raw += self.iota.eval(k as f64)?;
            }
            out.push(raw.clamp(0.0, upper));
        }
        Ok(out)
    }

    /// Average load `mu(t)`.
    pub fn average_load(&self, t: usize) -> Result<f64> {
        self.validate()?;
        self.check_iteration(t)?;
        Ok(*self.average_loads(t + 1)?.last().expect("t + 1 >= 1 entries"))
    }

    /// Percent imbalance `I(t)` when the most recent load balancing happened
    /// at `last_lb`.
    pub fn imbalance(&self, t: usize, last_lb: usize) -> Result<f64> {
        self.validate()?;
        self.check_iteration(t)?;
        if last_lb > t {
            return Err(Error::Domain(format!("last_lb = {last_lb} is after t = {t}")));
        }
        Ok(*self
            .imbalance_by_offset(t - last_lb + 1)?
            .last()
            .expect("at least one offset"))
    }

    /// Maximum load `m(t) = (1 + I(t)) mu(t)`.
    pub fn max_load(&self, t: usize, last_lb: usize) -> Result<f64> {
        let mu = self.average_load(t)?;
        let imbalance = self.imbalance(t, last_lb)?;
        Ok((1.0 + imbalance) * mu)
    }

    fn check_iteration(&self, t: usize) -> Result<()> {
        if t >= self.gamma {
            return Err(Error::Domain(format!(
                "iteration {t} outside [0, {})",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Evaluates the formulas once for every iteration.
    pub fn profile(&self) -> Result<LoadProfile> {
        self.validate()?;
        Ok(LoadProfile {
            mu: self.average_loads(self.gamma)?,
            imbalance: self.imbalance_by_offset(self.gamma)?,
            lb_cost: self.lb_cost,
        })
    }

    /// Simulates `scenario` and returns its total parallel time and trace.
    pub fn simulate(&self, scenario: &Scenario) -> Result<(f64, SimTrace)> {
        let profile = self.profile()?;
        profile.simulate(scenario)
    }
}

/// Tabulated `mu(t)` and `I(offset)` of a model.
///
/// Every cost in the crate goes through [`LoadProfile::step_cost`], so the
/// simulation, the closed-loop criteria runs and the tree search add up the
/// same floating-point numbers in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    mu: Vec<f64>,
    imbalance: Vec<f64>,
    lb_cost: f64,
}

impl LoadProfile {
    pub fn gamma(&self) -> usize {
        self.mu.len()
    }

    pub fn lb_cost(&self) -> f64 {
        self.lb_cost
    }

    pub fn average_loads(&self) -> &[f64] {
        &self.mu
    }

    #[inline]
    pub fn average_load(&self, t: usize) -> f64 {
        self.mu[t]
    }

    #[inline]
    pub fn imbalance(&self, t: usize, last_lb: usize) -> f64 {
        debug_assert!(last_lb <= t);
        self.imbalance[t - last_lb]
    }

    #[inline]
    pub fn max_load(&self, t: usize, last_lb: usize) -> f64 {
        (1.0 + self.imbalance(t, last_lb)) * self.mu[t]
    }

    /// Time spent on iteration `t`. When `balance` is set the load balancing
    /// happens first, so the iteration runs balanced and `C` is added.
    #[inline]
    pub fn step_cost(&self, t: usize, last_lb: usize, balance: bool) -> f64 {
        if balance {
            self.lb_cost + self.max_load(t, t)
        } else {
            self.max_load(t, last_lb)
        }
    }

    pub fn simulate(&self, scenario: &Scenario) -> Result<(f64, SimTrace)> {
        scenario.validate(self.gamma())?;
        let mut stepper = Stepper::new(self);
        let mut next = scenario.lb_iterations.iter().peekable();
        for t in 0..self.gamma() {
            let balance = next.next_if_eq(&&t).is_some();
            stepper.advance(balance);
        }
        let trace = stepper.into_trace();
        Ok((trace.total_time(), trace))
    }

    /// Total time of `scenario` without building a trace. Same arithmetic as
    /// [`LoadProfile::simulate`].
    pub fn total_time(&self, lb_iterations: &[usize]) -> f64 {
        let mut total = 0.0;
        let mut last_lb = 0;
        let mut next = lb_iterations.iter().peekable();
        for t in 0..self.gamma() {
            let balance = next.next_if_eq(&&t).is_some();
            total += self.step_cost(t, last_lb, balance);
            if balance {
                last_lb = t;
            }
        }
        total
    }
}

/// Iteration-by-iteration driver shared by [`LoadProfile::simulate`] and the
/// criteria closed loop.
#[derive(Debug)]
pub struct Stepper<'a> {
    profile: &'a LoadProfile,
    last_lb: usize,
    rows: Vec<TraceRow>,
}

impl<'a> Stepper<'a> {
    pub fn new(profile: &'a LoadProfile) -> Self {
        Self {
            profile,
            last_lb: 0,
            rows: Vec::with_capacity(profile.gamma()),
        }
    }

    /// Next iteration to run.
    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn last_lb(&self) -> usize {
        self.last_lb
    }

    pub fn is_done(&self) -> bool {
        self.t() >= self.profile.gamma()
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    /// Rows from the last load balancing up to the last completed iteration.
    pub fn rows_since_lb(&self) -> &[TraceRow] {
        &self.rows[self.last_lb.min(self.rows.len())..]
    }

    /// Runs the next iteration, balancing first if `balance` is set.
    ///
    /// # Panics
    /// If all iterations have run, or when balancing iteration 0.
    pub fn advance(&mut self, balance: bool) -> &TraceRow {
        let t = self.t();
        assert!(t < self.profile.gamma(), "simulation already finished");
        assert!(!(balance && t == 0), "iteration 0 starts balanced");
        let cost = self.profile.step_cost(t, self.last_lb, balance);
        if balance {
            self.last_lb = t;
        }
        let mu = self.profile.average_load(t);
        let m = self.profile.max_load(t, self.last_lb);
        let u = m - mu;
        let (u_cum, t_acc) = match self.rows.last() {
            Some(prev) if !balance => (prev.u_cum + u, prev.t_acc + cost),
            Some(prev) => (0.0, prev.t_acc + cost),
            None => (0.0, cost),
        };
        self.rows.push(TraceRow {
            t,
            decision: if balance { Decision::Lb } else { Decision::None },
            mu,
            m,
            u,
            imbalance: self.profile.imbalance(t, self.last_lb),
            u_cum,
            t_acc,
        });
        self.rows.last().expect("just pushed")
    }

    pub fn into_trace(self) -> SimTrace {
        SimTrace { rows: self.rows }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Lb,
    None,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Lb => "lb",
            Decision::None => "none",
        })
    }
}

/// One simulated iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub decision: Decision,
    pub mu: f64,
    pub m: f64,
    /// `m - mu`, the time lost waiting for the slowest element.
    pub u: f64,
    #[serde(rename = "I")]
    pub imbalance: f64,
    /// Running sum of `u` since the last load balancing.
    #[serde(rename = "U_cum")]
    pub u_cum: f64,
    /// Accumulated parallel time including this iteration.
    #[serde(rename = "T_acc")]
    pub t_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
}

impl SimTrace {
    pub fn total_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t_acc)
    }

    pub fn lb_iterations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.decision == Decision::Lb)
            .map(|r| r.t)
            .collect()
    }
}

/// Set of iterations at which load balancing is applied.
///
/// Iteration 0 starts balanced for free and never appears.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Scenario {
    pub lb_iterations: Vec<usize>,
}

impl Scenario {
    pub fn new(lb_iterations: Vec<usize>) -> Self {
        Self { lb_iterations }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.lb_iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lb_iterations.is_empty()
    }

    /// Checks that the iterations are strictly increasing and inside
    /// `[1, gamma - 1]`.
    pub fn validate(&self, gamma: usize) -> Result<()> {
        for (k, &t) in self.lb_iterations.iter().enumerate() {
            if t == 0 || t >= gamma {
                return Err(Error::InvalidScenario(format!(
                    "iteration {t} outside [1, {}]",
                    gamma.saturating_sub(1)
                )));
            }
            if k > 0 && self.lb_iterations[k - 1] >= t {
                return Err(Error::InvalidScenario(format!(
                    "iterations must be strictly increasing ({} then {t})",
                    self.lb_iterations[k - 1]
                )));
            }
        }
        Ok(())
    }

    /// Parses a comma- or semicolon-separated list of iterations. The empty
    /// string is the empty scenario.
    pub fn parse_list(text: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in text.split([',', ';']).map(str::trim).filter(|p| !p.is_empty()) {
            out.push(part.parse::<usize>().map_err(|_| {
                Error::InvalidScenario(format!("`{part}` is not an iteration index"))
            })?);
        }
        Ok(Self::new(out))
    }
}

impl fmt::Display for Scenario {
    /// Semicolon-joined iterations.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.lb_iterations.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
