use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{run_on_profile, Criterion};
use crate::error::{Error, Result};
use crate::model::WorkloadModel;

/// A criterion family with one free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepFamily {
    Periodic,
    Marquez,
    Procassini,
    Zhai,
}

impl SweepFamily {
    /// Looks up a family and checks that `param` is its parameter.
    pub fn new(family: &str, param: &str) -> Result<Self> {
        let f = family.trim().to_ascii_lowercase();
        let p = param.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownParameter {
            family: family.to_string(),
            param: param.to_string(),
        };
        let out = match f.as_str() {
            "periodic" => SweepFamily::Periodic,
            "marquez" => SweepFamily::Marquez,
            "procassini" => SweepFamily::Procassini,
            "zhai" => SweepFamily::Zhai,
            _ => return Err(unknown()),
        };
        if p != out.param() {
            return Err(unknown());
        }
        Ok(out)
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepFamily::Periodic => "periodic",
            SweepFamily::Marquez => "marquez",
            SweepFamily::Procassini => "procassini",
            SweepFamily::Zhai => "zhai",
        }
    }

    /// Lower-cased parameter key.
    pub fn param(self) -> &'static str {
        match self {
            SweepFamily::Periodic => "t",
            SweepFamily::Marquez => "xi",
            SweepFamily::Procassini => "rho",
            SweepFamily::Zhai => "phase",
        }
    }

    /// Criterion for one grid value; integer parameters are rounded.
    pub fn criterion(self, value: f64) -> Result<Criterion> {
        let count = || {
            let r = value.round();
            if r >= 1.0 {
                Ok(r as usize)
            } else {
                Err(Error::InvalidGrid(format!(
                    "{} needs values >= 1, got {value}",
                    self.param()
                )))
            }
        };
        let c = match self {
            SweepFamily::Periodic => Criterion::Periodic { period: count()? },
            SweepFamily::Zhai => Criterion::Zhai { phase_len: count()? },
            SweepFamily::Marquez => Criterion::Marquez { xi: value },
            SweepFamily::Procassini => Criterion::Procassini { rho: value },
        };
        c.validate()
            .map_err(|_| Error::InvalidGrid(format!("{} = {value} is out of range", self.param())))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub total_time: f64,
    pub num_lb: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub family: SweepFamily,
    pub points: Vec<SweepPoint>,
    /// First grid point with the smallest total time.
    pub best: SweepPoint,
}

/// `steps` evenly spaced values from `from` to `to`, both included.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 steps, got {steps}")));
    }
    if !(from < to) || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidGrid(format!("need from < to, got [{from}, {to}]")));
    }
    let span = to - from;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k == steps - 1 { to } else { from + span * k as f64 / last })
        .collect())
}

/// Runs `family` at every grid value on `model`.
pub fn sweep(
    model: &WorkloadModel,
    family: &str,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<SweepResult> {
    let family = SweepFamily::new(family, param)?;
    let values = grid(from, to, steps)?;
    let criteria: Vec<Criterion> = values
        .iter()
        .map(|&v| family.criterion(v))
        .collect::<Result<_>>()?;
    let profile = model.profile()?;
    let points: Vec<SweepPoint> = values
        .par_iter()
        .zip(criteria.par_iter())
        .map(|(&value, c)| {
            let (scenario, trace) = run_on_profile(&profile, c);
            SweepPoint {
                value,
                total_time: trace.total_time(),
                num_lb: scenario.len(),
            }
        })
        .collect();
    let best = points
        .iter()
        .copied()
        .reduce(|best, p| if p.total_time < best.total_time { p } else { best })
        .expect("grid has at least two points");
    Ok(SweepResult {
        family,
        points,
        best,
    })
}
