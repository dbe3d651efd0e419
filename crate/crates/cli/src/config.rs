use std::fmt;
use std::path::{Path, PathBuf};

use lbsim_core::bench::resolve;
use lbsim_core::criteria::parse_list;
use lbsim_core::{Criterion, Error, OmegaScope, Scenario, WorkloadModel};
use serde::{Deserialize, Serialize};

use crate::args::RunArgs;

pub const DEFAULT_OUT: &str = "out";

/// Why a command stopped; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration, exit 2.
    Usage(String),
    /// Everything else, exit 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Everything a command needs. Loaded from `--config`, then overridden by
/// flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog id, comma-separated ids or `all`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<WorkloadModel>,
    /// Horizon override.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    /// Load-balancing cost override.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_scope: Option<OmegaScope>,
    /// Criterion specs; `sweep` also accepts a bare family name.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<String>,
    /// Explicit load-balancing iterations, e.g. `"46;92"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nth: Option<usize>,
    pub verify_brute: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// Spec in canonical spelling when it parses, untouched otherwise.
fn canonical(spec: &str) -> String {
    spec.parse::<Criterion>()
        .map(|c| c.to_string())
        .unwrap_or_else(|_| spec.to_string())
}

/// A model to run, with the id it is reported under.
#[derive(Debug, Clone)]
pub struct Target {
    pub id: String,
    pub model: WorkloadModel,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Config file (if any) with the flags applied on top.
    pub fn from_args(args: &RunArgs) -> Result<Self, Failure> {
        let mut cfg = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(b) = &args.bench {
            cfg.bench = Some(b.clone());
            cfg.model = None;
        }
        if let Some(json) = &args.inline {
            let model: WorkloadModel = serde_json::from_str(json)
                .map_err(|e| Failure::usage(format!("invalid --inline model: {e}")))?;
            cfg.model = Some(model);
            if args.bench.is_none() {
                cfg.bench = None;
            }
        }
        if !args.criteria.is_empty() {
            cfg.criteria = args
                .criteria
                .iter()
                .flat_map(|a| a.split(','))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(canonical)
                .collect();
        }
        if let Some(s) = &args.scenario {
            cfg.scenario = Some(Scenario::parse_list(s)?.to_string());
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if args.$field.is_some() {
                    cfg.$field = args.$field.clone();
                }
            )*};
        }
        take!(gamma, cost, omega_scope, out, nth, gamma_cap, param, from, to, steps);
        cfg.verify_brute |= args.verify_brute;
        Ok(cfg)
    }

    pub fn criteria(&self) -> Result<Vec<Criterion>, Failure> {
        Ok(parse_list(&self.criteria.join(","))?)
    }

    pub fn scenario(&self) -> Result<Option<Scenario>, Failure> {
        Ok(self.scenario.as_deref().map(Scenario::parse_list).transpose()?)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Models named by the config with the overrides applied.
    pub fn targets(&self) -> Result<Vec<Target>, Failure> {
        let mut out = match (&self.bench, &self.model) {
            (Some(_), Some(_)) => return Err(Failure::usage("give either --bench or --inline, not both")),
            (None, None) => return Err(Failure::usage("no model: pass --bench <id|all> or --inline <json>")),
            (Some(spec), None) => resolve(spec)?
                .into_iter()
                .map(|b| Target { id: b.id, model: b.model })
                .collect(),
            (None, Some(m)) => vec![Target {
                id: "inline".into(),
                model: m.clone(),
            }],
        };
        for t in &mut out {
            if let Some(g) = self.gamma {
                t.model = t.model.truncated(g);
            }
            if let Some(c) = self.cost {
                t.model.lb_cost = c;
            }
            if let Some(scope) = self.omega_scope {
                t.model.omega_scope = scope;
            }
            t.model.validate()?;
        }
        Ok(out)
    }

    /// The single model of a command that does not take `all`.
    pub fn single_target(&self, command: &str) -> Result<Target, Failure> {
        let mut all = self.targets()?;
        if all.len() != 1 {
            return Err(Failure::usage(format!(
                "`{command}` runs on one benchmark, got {}",
                all.len()
            )));
        }
        Ok(all.remove(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            bench: Some("static-linear".into()),
            criteria: vec!["menon".into(), "procassini:rho=19.43".into()],
            scenario: Some("3;9".into()),
            gamma: Some(40),
            ..RunConfig::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(matches!(RunConfig::parse(r#"{"benchmark":"x"}"#), Err(Failure::Usage(_))));
    }

    #[test]
    fn exactly_one_model_source() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.targets(), Err(Failure::Usage(_))));
        cfg.bench = Some("all".into());
        assert_eq!(cfg.targets().unwrap().len(), 8);
        cfg.model = Some(cfg.targets().unwrap()[0].model.clone());
        assert!(matches!(cfg.targets(), Err(Failure::Usage(_))));
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig {
            bench: Some("irregular-linear".into()),
            gamma: Some(12),
            cost: Some(7.0),
            omega_scope: Some(OmegaScope::Total),
            ..RunConfig::default()
        };
        let t = cfg.single_target("optimal").unwrap();
        assert_eq!((t.model.gamma, t.model.lb_cost, t.model.omega_scope), (12, 7.0, OmegaScope::Total));
    }
}
