//! Online load-balancing criteria.
//!
//! A criterion looks at the iterations completed since the last load
//! balancing and decides whether to balance before the next one. Criteria
//! never look ahead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{LoadProfile, Scenario, SimTrace, Stepper, TraceRow, WorkloadModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Balance every `period` iterations.
    Periodic { period: usize },
    /// Balance when the percent imbalance leaves the tolerance band `xi`.
    ///
    /// Only the upper bound is checked: the model tracks the maximum and the
    /// average load, not the per-element loads the lower bound needs.
    Marquez { xi: f64 },
    /// Balance when `T_withLB + C < rho * T_withoutLB`, assuming balancing is
    /// perfect so `T_withLB` is the average load.
    Procassini { rho: f64 },
    /// Balance when the cumulative imbalance time reaches `C`.
    Menon,
    /// Balance when the cumulative degradation of the median time per
    /// iteration, relative to the mean over the first `phase_len` iterations
    /// after the last balancing, reaches `C`.
    Zhai { phase_len: usize },
    /// Balance when the area above the imbalance curve, `k u(k) - sum u`,
    /// reaches `C`.
    Proposed,
}

impl Criterion {
    pub const DEFAULT_ZHAI_PHASE: usize = 3;

    pub fn family(&self) -> &'static str {
        match self {
            Criterion::Periodic { .. } => "periodic",
            Criterion::Marquez { .. } => "marquez",
            Criterion::Procassini { .. } => "procassini",
            Criterion::Menon => "menon",
            Criterion::Zhai { .. } => "zhai",
            Criterion::Proposed => "proposed",
        }
    }

    /// Parameter assignment as written in a criterion spec (`T=100`), empty
    /// for parameterless criteria.
    pub fn params(&self) -> String {
        match self {
            Criterion::Periodic { period } => format!("T={period}"),
            Criterion::Marquez { xi } => format!("xi={xi}"),
            Criterion::Procassini { rho } => format!("rho={rho}"),
            Criterion::Zhai { phase_len } => format!("phase={phase_len}"),
            Criterion::Menon | Criterion::Proposed => String::new(),
        }
    }

    /// Marquez and Zhai, reported as supplementary to the core comparison.
    pub fn is_supplementary(&self) -> bool {
        matches!(self, Criterion::Marquez { .. } | Criterion::Zhai { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let reason = match *self {
            Criterion::Periodic { period: 0 } => "period T must be at least 1",
            Criterion::Marquez { xi } if !(xi > 0.0 && xi.is_finite()) => "xi must be positive",
            Criterion::Procassini { rho } if !(rho > 0.0 && rho.is_finite()) => "rho must be positive",
            Criterion::Zhai { phase_len: 0 } => "phase must be at least 1",
            _ => return Ok(()),
        };
        Err(Error::InvalidCriterion {
            spec: self.to_string(),
            reason: reason.into(),
        })
    }

    /// Whether to balance before iteration `ctx.t`.
    ///
    /// Criteria that need more history than is available return `false`.
    /// Menon, Zhai and the proposed rule never fire on a zero value, so an
    /// imbalance-free run is never balanced even when `C = 0`.
    pub fn decide(&self, ctx: &CriterionContext<'_>) -> bool {
        let Some(last) = ctx.rows.last() else {
            return false;
        };
        if ctx.t == 0 {
            return false;
        }
        let c = ctx.lb_cost;
        match *self {
            Criterion::Periodic { period } => ctx.t % period == 0,
            Criterion::Marquez { xi } => last.imbalance > xi,
            Criterion::Procassini { rho } => last.mu + c < rho * last.m,
            Criterion::Menon => reaches(last.u_cum, c),
            Criterion::Proposed => {
                let elapsed = (ctx.t - 1 - ctx.last_lb) as f64;
                reaches(elapsed * last.u - last.u_cum, c)
            }
            Criterion::Zhai { phase_len } => {
                zhai_degradation(ctx.rows, phase_len).is_some_and(|d| reaches(d, c))
            }
        }
    }
}

fn reaches(value: f64, cost: f64) -> bool {
    value > 0.0 && value >= cost
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Sum over the window of `median(m[i-2..=i]) - mean(m[phase])`, or `None`
/// during warm-up.
fn zhai_degradation(rows: &[TraceRow], phase_len: usize) -> Option<f64> {
    if rows.len() < phase_len.max(3) {
        return None;
    }
    let t_avg = rows[..phase_len].iter().map(|r| r.m).sum::<f64>() / phase_len as f64;
    Some(
        rows.windows(3)
            .map(|w| median3(w[0].m, w[1].m, w[2].m) - t_avg)
            .sum(),
    )
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            f.write_str(self.family())
        } else {
            write!(f, "{}:{params}", self.family())
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    /// Parses `periodic:T=100`, `marquez:xi=1.5`, `procassini:rho=19.43`,
    /// `menon`, `zhai:phase=3` (phase defaults to 3) or `proposed`. Names and
    /// keys are case-insensitive.
    fn from_str(spec: &str) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidCriterion {
            spec: spec.to_string(),
            reason,
        };
        let (name, rest) = match spec.trim().split_once(':') {
            Some((n, r)) => (n.trim(), Some(r.trim())),
            None => (spec.trim(), None),
        };
        let param = match rest {
            None | Some("") => None,
            Some(r) => {
                let (k, v) = r
                    .split_once('=')
                    .ok_or_else(|| invalid(format!("expected key=value, got `{r}`")))?;
                let v = v.trim();
                let value: f64 = v
                    .parse()
                    .map_err(|_| invalid(format!("`{v}` is not a decimal number")))?;
                Some((k.trim().to_ascii_lowercase(), value))
            }
        };
        let family = name.to_ascii_lowercase();
        let take = |key: &str| -> Result<Option<f64>> {
            match &param {
                None => Ok(None),
                Some((k, v)) if k == key => Ok(Some(*v)),
                Some((k, _)) => Err(invalid(format!("unknown parameter `{k}` for `{family}`"))),
            }
        };
        let need = |key: &str| -> Result<f64> {
            take(key)?.ok_or_else(|| invalid(format!("`{family}` requires `{key}=<value>`")))
        };
        let criterion = match family.as_str() {
            "periodic" => Criterion::Periodic {
                period: to_count(need("t")?).ok_or_else(|| invalid("T must be a positive integer".into()))?,
            },
            "marquez" => Criterion::Marquez { xi: need("xi")? },
            "procassini" => Criterion::Procassini { rho: need("rho")? },
            "menon" => {
                take("")?;
                Criterion::Menon
            }
            "proposed" => {
                take("")?;
                Criterion::Proposed
            }
            "zhai" => Criterion::Zhai {
                phase_len: match take("phase")? {
                    None => Self::DEFAULT_ZHAI_PHASE,
                    Some(v) => to_count(v).ok_or_else(|| invalid("phase must be a positive integer".into()))?,
                },
            },
            _ => return Err(invalid(format!("unknown criterion `{name}`"))),
        };
        criterion.validate().map_err(|_| invalid("parameter out of range".into()))?;
        Ok(criterion)
    }
}

fn to_count(v: f64) -> Option<usize> {
    (v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64).then_some(v as usize)
}

/// Parses a comma-separated list of criterion specs.
pub fn parse_list(text: &str) -> Result<Vec<Criterion>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

impl Serialize for Criterion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Criterion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// What a criterion may observe before iteration `t`.
#[derive(Debug, Clone, Copy)]
pub struct CriterionContext<'a> {
    /// Completed iterations `last_lb..t`.
    pub rows: &'a [TraceRow],
    pub last_lb: usize,
    pub t: usize,
    pub lb_cost: f64,
}

/// Load-balancing interval that minimises the parallel time when the
/// imbalance time grows linearly at rate `alpha`: `sqrt(2C / alpha)`.
pub fn menon_tau(lb_cost: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(lb_cost >= 0.0) {
        return Err(Error::Domain(format!("C must be nonnegative, got {lb_cost}")));
    }
    Ok((2.0 * lb_cost / alpha).sqrt())
}

/// Procassini threshold that makes the rule fire at interval `tau`:
/// `(mu(tau) + C) / (mu(tau) + u(tau))`.
pub fn rho_tau(mu_tau: f64, u_tau: f64, lb_cost: f64) -> Result<f64> {
    let denom = mu_tau + u_tau;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "mu(tau) + u(tau) must be positive, got {denom}"
        )));
    }
    Ok((mu_tau + lb_cost) / denom)
}

/// Runs the model under `criterion`, balancing whenever it fires.
///
/// The returned trace's total equals `model.simulate(&scenario)` bit for bit.
pub fn run_criterion(model: &WorkloadModel, criterion: &Criterion) -> Result<(Scenario, SimTrace)> {
    criterion.validate()?;
    Ok(run_on_profile(&model.profile()?, criterion))
}

/// [`run_criterion`] on an already tabulated model.
pub fn run_on_profile(profile: &LoadProfile, criterion: &Criterion) -> (Scenario, SimTrace) {
    let mut stepper = Stepper::new(profile);
    let mut scenario = Vec::new();
    while !stepper.is_done() {
        let t = stepper.t();
        let ctx = CriterionContext {
            rows: stepper.rows_since_lb(),
            last_lb: stepper.last_lb(),
            t,
            lb_cost: profile.lb_cost(),
        };
        let balance = t >= 1 && criterion.decide(&ctx);
        if balance {
            scenario.push(t);
        }
        stepper.advance(balance);
    }
    (Scenario::new(scenario), stepper.into_trace())
}
