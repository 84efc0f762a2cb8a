//! Experiment configuration: a small TOML file with a system block, one
//! experiment block, a numeric block and an output block. Every default
//! is resolved at load time and echoed into `summary.json`, so a run is
//! reproducible from its own artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use nuelab_core::diagnostics::RecurrenceIndexing;
use nuelab_core::systems::{build_system, FamilyId, Params};
use nuelab_core::{DynamicalSystem, Observable, RegionSpec};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
struct RawConfig {
    system: Option<RawSystem>,
    experiment: Option<RawExperiment>,
    numeric: Option<RawNumeric>,
    output: Option<RawOutput>,
}

#[derive(Clone, Debug, Deserialize)]
struct RawSystem {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Option<String>,
    observable: Option<String>,
    threshold: Option<f64>,
    targets: Option<Vec<f64>>,
    omega: Option<f64>,
    gate_delta: Option<f64>,
    gate_epsilon: Option<f64>,
    region: Option<Vec<f64>>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    b: Option<f64>,
    indexing: Option<String>,
    bins: Option<usize>,
    burn_in: Option<usize>,
    tol: Option<f64>,
    basins: Option<bool>,
    model: Option<String>,
    c_values: Option<Vec<f64>>,
    grid: Option<usize>,
    ensemble: Option<usize>,
    eps: Option<f64>,
    ball_steps: Option<usize>,
    lyapunov_n: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
struct RawNumeric {
    n_grid: Option<Vec<usize>>,
    m: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
struct RawOutput {
    dir: Option<String>,
    formats: Option<Vec<String>>,
}

/// The experiment kinds, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Hyptimes,
    Measure,
    Deviate,
    Escape,
    Tail,
    Bound,
    RuelleCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Hyptimes => "hyptimes",
            ExperimentKind::Measure => "measure",
            ExperimentKind::Deviate => "deviate",
            ExperimentKind::Escape => "escape",
            ExperimentKind::Tail => "tail",
            ExperimentKind::Bound => "bound",
            ExperimentKind::RuelleCheck => "ruelle_check",
        }
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub kind: ExperimentKind,
    pub system: Option<DynamicalSystem>,
    pub system_family: Option<String>,
    pub system_params: Vec<(String, f64)>,
    pub experiment: Experiment,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: String,
    pub formats: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Experiment {
    pub observable: Option<String>,
    pub threshold: Option<f64>,
    pub targets: Option<Vec<f64>>,
    pub omega: Option<f64>,
    pub gate_delta: Option<f64>,
    pub gate_epsilon: Option<f64>,
    pub region: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub b: Option<f64>,
    pub indexing: Option<String>,
    pub bins: Option<usize>,
    pub burn_in: Option<usize>,
    pub tol: Option<f64>,
    pub basins: bool,
    pub model: Option<String>,
    pub c_values: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub ensemble: Option<usize>,
    pub eps: Option<f64>,
    pub ball_steps: Option<usize>,
    pub lyapunov_n: Option<usize>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn toml_number(key: &str, v: &toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(config_error(format!("parameter `{key}` must be a number"))),
    }
}

impl Config {
    /// Load and resolve a config file for the given subcommand. CLI
    /// flags override the file.
    pub fn load(
        path: &Path,
        kind: ExperimentKind,
        seed_flag: Option<u64>,
        workers_flag: Option<usize>,
        out_flag: Option<&str>,
    ) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read `{}`: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| config_error(format!("parse error in `{}`: {e}", path.display())))?;

        let exp = raw.experiment.unwrap_or_default();
        if let Some(k) = &exp.kind {
            if k != kind.name() {
                return Err(config_error(format!(
                    "config declares experiment kind `{k}` but the subcommand is `{}`",
                    kind.name()
                )));
            }
        }

        let numeric = raw
            .numeric
            .ok_or_else(|| config_error("missing [numeric] block"))?;
        let seed = seed_flag.or(numeric.seed).ok_or_else(|| {
            config_error("a seed is mandatory: set [numeric] seed or pass --seed")
        })?;
        let workers = workers_flag.or(numeric.workers).unwrap_or(1).max(1);
        let n_grid = numeric.n_grid.unwrap_or_default();
        let samples = numeric.m.unwrap_or(10_000);

        let needs_grid = matches!(
            kind,
            ExperimentKind::Deviate
                | ExperimentKind::Escape
                | ExperimentKind::Tail
                | ExperimentKind::Hyptimes
                | ExperimentKind::Simulate
        );
        if needs_grid {
            if n_grid.is_empty() {
                return Err(config_error("n_grid must not be empty"));
            }
            if n_grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config_error("n_grid must be strictly increasing"));
            }
        }

        let (system, system_family, system_params) = match raw.system {
            None => {
                if kind != ExperimentKind::Bound {
                    return Err(config_error("missing [system] block"));
                }
                (None, None, vec![])
            }
            Some(rs) => {
                let family: FamilyId = rs
                    .family
                    .parse()
                    .map_err(|e| config_error(format!("{e}")))?;
                let mut params = Params::new();
                for (k, v) in &rs.params {
                    params.insert(k.clone(), toml_number(k, v)?);
                }
                let sys = build_system(family, &params)
                    .map_err(|e| config_error(format!("cannot build system: {e}")))?;
                let echo = sys.params().to_vec();
                (Some(sys), Some(rs.family), echo)
            }
        };

        let output = raw.output.unwrap_or(RawOutput {
            dir: None,
            formats: None,
        });
        let out_dir = out_flag
            .map(str::to_string)
            .or(output.dir)
            .unwrap_or_else(|| "out".to_string());
        let formats = output
            .formats
            .unwrap_or_else(|| vec!["csv".into(), "json".into()]);
        for f in &formats {
            if !["csv", "json", "svg"].contains(&f.as_str()) {
                return Err(config_error(format!("unknown output format `{f}`")));
            }
        }

        Ok(Config {
            kind,
            system,
            system_family,
            system_params,
            experiment: Experiment {
                observable: exp.observable,
                threshold: exp.threshold,
                targets: exp.targets,
                omega: exp.omega,
                gate_delta: exp.gate_delta,
                gate_epsilon: exp.gate_epsilon,
                region: exp.region,
                delta: exp.delta,
                epsilon: exp.epsilon,
                sigma: exp.sigma,
                b: exp.b,
                indexing: exp.indexing,
                bins: exp.bins,
                burn_in: exp.burn_in,
                tol: exp.tol,
                basins: exp.basins.unwrap_or(false),
                model: exp.model,
                c_values: exp.c_values,
                grid: exp.grid,
                ensemble: exp.ensemble,
                eps: exp.eps,
                ball_steps: exp.ball_steps,
                lyapunov_n: exp.lyapunov_n,
            },
            n_grid,
            samples,
            seed,
            workers,
            out_dir,
            formats,
        })
    }

    pub fn observable(&self) -> Result<Observable, CliError> {
        let name = self.experiment.observable.as_deref().unwrap_or("x");
        parse_observable(name)
    }

    pub fn region(&self) -> Result<RegionSpec, CliError> {
        let r = self
            .experiment
            .region
            .as_ref()
            .ok_or_else(|| config_error("experiment needs a `region`"))?;
        match r.len() {
            2 => Ok(RegionSpec::Interval1 { lo: r[0], hi: r[1] }),
            4 => Ok(RegionSpec::Box2 {
                lo_x: r[0],
                hi_x: r[1],
                lo_y: r[2],
                hi_y: r[3],
            }),
            _ => Err(config_error(
                "region must be [lo, hi] or [lo_x, hi_x, lo_y, hi_y]",
            )),
        }
    }

    pub fn indexing(&self) -> Result<RecurrenceIndexing, CliError> {
        match self.experiment.indexing.as_deref() {
            None | Some("paper_literal") => Ok(RecurrenceIndexing::PaperLiteral),
            Some("reversed") => Ok(RecurrenceIndexing::Reversed),
            Some(other) => Err(config_error(format!(
                "unknown recurrence indexing `{other}`"
            ))),
        }
    }

    /// Echo the resolved configuration into the summary.
    pub fn echo_json(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment_kind": self.kind.name(),
            "system": self.system_family.as_ref().map(|fam| serde_json::json!({
                "family": fam,
                "params": self.system_params.iter().cloned().collect::<BTreeMap<String, f64>>(),
            })),
            "experiment": self.experiment,
            "numeric": {
                "n_grid": self.n_grid,
                "m": self.samples,
                "seed": self.seed,
                "workers": self.workers,
            },
            "output": {
                "dir": self.out_dir,
                "formats": self.formats,
            },
        })
    }
}

pub fn parse_observable(name: &str) -> Result<Observable, CliError> {
    if let Some(value) = name.strip_prefix("const:") {
        let c: f64 = value
            .parse()
            .map_err(|_| config_error(format!("bad constant observable `{name}`")))?;
        return Ok(Observable::Constant(c));
    }
    match name {
        "x" => Ok(Observable::Coordinate),
        "y" => Ok(Observable::SecondCoordinate),
        "digit" => Ok(Observable::FirstDigit),
        other => Err(config_error(format!("unknown observable `{other}`"))),
    }
}
