//! Flat `key = value` experiment configuration (TOML syntax).
//!
//! ```toml
//! schema_version = 1
//! preset = "paper-n50"        # optional starting point
//! scenario = "both"           # risk_prediction | recursive_scoring | both
//! n_clients = 50
//! horizon = 15
//! replications = 100
//! seed = 1
//! a = 1.0                     # scalar or one value per step t = 0..=T
//! b = 0.0
//! q = 0.0
//! r = 1.0
//! nu = 1.0
//! score_cap = 15.0
//! initial_var = 1.0
//! prior_mean = 7.5            # filter prior mean, default score_cap / 2
//! u = 0.0                     # scalar, per-step list, or per-client lists
//! population = "uniform"      # uniform | explicit (with `truths`)
//! truths = [1.0, 7.0, 14.0]
//! crlb_aggregation = "mean"   # mean | harmonic
//! opt_out = [0, 49]
//! ```
//!
//! Unknown keys are errors. A `[manifest]` table, as written next to run
//! outputs, is ignored so that a manifest can be fed back as a config.

use std::path::Path;

use toml::{Table, Value};

use super::{preset, ExperimentConfig};
use crate::error::{Error, Result};
use crate::model::Population;
use crate::params::{AttributeInputs, Schedule};
use crate::trajectory::Scenario;

pub const SCHEMA_VERSION: i64 = 1;

pub const CONFIG_KEYS: &[&str] = &[
    "schema_version",
    "preset",
    "scenario",
    "n_clients",
    "horizon",
    "replications",
    "seed",
    "a",
    "b",
    "q",
    "r",
    "nu",
    "score_cap",
    "initial_var",
    "prior_mean",
    "u",
    "population",
    "truths",
    "crlb_aggregation",
    "opt_out",
];

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut table: Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    table.remove("manifest");
    let mut cfg = match table.remove("preset") {
        Some(Value::String(name)) => preset(&name)?,
        Some(other) => return Err(type_error("preset", "a string", &other)),
        None => ExperimentConfig::default(),
    };
    // `population` before `truths` so an explicit list wins
    let mut keys: Vec<_> = table.into_iter().collect();
    keys.sort_by_key(|(k, _)| (k == "truths", k.clone()));
    for (key, value) in keys {
        apply_key(&mut cfg, &key, &value)?;
    }
    Ok(cfg)
}

/// Applies `key=value` overrides after file parsing. Values use TOML syntax;
/// bare words are taken as strings.
pub fn apply_overrides(cfg: &mut ExperimentConfig, overrides: &[(String, String)]) -> Result<()> {
    for (key, raw) in overrides {
        if key == "preset" {
            return Err(Error::Config("`preset` cannot be overridden; use --preset".into()));
        }
        let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.clone()),
        };
        apply_key(cfg, key, &value)?;
    }
    Ok(())
}

fn apply_key(cfg: &mut ExperimentConfig, key: &str, value: &Value) -> Result<()> {
    let p = &mut cfg.params;
    match key {
        "schema_version" => {
            let v = integer(key, value)?;
            if v != SCHEMA_VERSION {
                return Err(Error::param(
                    key,
                    format!("unsupported version {v} (expected {SCHEMA_VERSION})"),
                ));
            }
        }
        "scenario" => cfg.scenarios = scenarios(value)?,
        "n_clients" => p.n_clients = count(key, value)?,
        "horizon" => p.horizon = count(key, value)?,
        "replications" => cfg.replications = count(key, value)?,
        "seed" => cfg.master_seed = seed(value)?,
        "a" => p.a = schedule(key, value)?,
        "b" => p.b = schedule(key, value)?,
        "q" => p.q = schedule(key, value)?,
        "r" => p.r = schedule(key, value)?,
        "nu" => p.nu = number(key, value)?,
        "score_cap" => p.score_cap = number(key, value)?,
        "initial_var" => p.initial_var = number(key, value)?,
        "prior_mean" => p.prior_mean = Some(number(key, value)?),
        "u" => p.inputs = inputs(value)?,
        "population" => match value.as_str() {
            Some("uniform") => cfg.population = Population::Uniform,
            Some("explicit") => {
                if !matches!(cfg.population, Population::Explicit(_)) {
                    cfg.population = Population::Explicit(Vec::new());
                }
            }
            _ => return Err(type_error(key, "`uniform` or `explicit`", value)),
        },
        "truths" => cfg.population = Population::Explicit(numbers(key, value)?),
        "crlb_aggregation" => {
            let s = value.as_str().ok_or_else(|| type_error(key, "a string", value))?;
            cfg.crlb_aggregation = s.parse()?;
        }
        "opt_out" => {
            let items = value
                .as_array()
                .ok_or_else(|| type_error(key, "an array of client indices", value))?;
            cfg.opt_out = items.iter().map(|v| count(key, v)).collect::<Result<_>>()?;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown key `{other}` (known keys: {})",
                CONFIG_KEYS.join(", ")
            )))
        }
    }
    Ok(())
}

fn type_error(key: &str, expected: &str, got: &Value) -> Error {
    Error::param(key, format!("expected {expected}, got `{got}`"))
}

fn number(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(type_error(key, "a number", other)),
    }
}

fn numbers(key: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| type_error(key, "an array of numbers", v))?
        .iter()
        .map(|x| number(key, x))
        .collect()
}

fn integer(key: &str, v: &Value) -> Result<i64> {
    v.as_integer().ok_or_else(|| type_error(key, "an integer", v))
}

fn count(key: &str, v: &Value) -> Result<usize> {
    let i = integer(key, v)?;
    usize::try_from(i).map_err(|_| Error::param(key, format!("must be nonnegative, got {i}")))
}

fn seed(v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) => {
            u64::try_from(*i).map_err(|_| Error::param("seed", format!("must be nonnegative, got {i}")))
        }
        // seeds above i64::MAX are written as strings
        Value::String(s) => s
            .parse()
            .map_err(|_| Error::param("seed", format!("not a 64-bit unsigned integer: `{s}`"))),
        other => Err(type_error("seed", "an integer", other)),
    }
}

fn schedule(key: &str, v: &Value) -> Result<Schedule> {
    match v {
        Value::Array(_) => Ok(Schedule::PerStep(numbers(key, v)?)),
        _ => Ok(Schedule::Constant(number(key, v)?)),
    }
}

fn inputs(v: &Value) -> Result<AttributeInputs> {
    match v {
        Value::Array(items) if items.iter().all(Value::is_array) && !items.is_empty() => Ok(
            AttributeInputs::PerClient(items.iter().map(|row| numbers("u", row)).collect::<Result<_>>()?),
        ),
        Value::Array(_) => Ok(AttributeInputs::Shared(numbers("u", v)?)),
        _ => {
            let c = number("u", v)?;
            Ok(if c == 0.0 {
                AttributeInputs::Zero
            } else {
                AttributeInputs::Constant(c)
            })
        }
    }
}

fn scenarios(v: &Value) -> Result<Vec<Scenario>> {
    match v {
        Value::String(s) if s == "both" => Ok(Scenario::ALL.to_vec()),
        Value::String(s) => Ok(vec![s.parse()?]),
        Value::Array(items) => {
            let mut out = items
                .iter()
                .map(|x| x.as_str().ok_or_else(|| type_error("scenario", "a string", x))?.parse())
                .collect::<Result<Vec<Scenario>>>()?;
            out.sort();
            out.dedup();
            Ok(out)
        }
        other => Err(type_error("scenario", "a scenario name", other)),
    }
}

fn schedule_value(s: &Schedule) -> Value {
    match s {
        Schedule::Constant(c) => Value::Float(*c),
        Schedule::PerStep(v) => Value::Array(v.iter().map(|&x| Value::Float(x)).collect()),
    }
}

/// Full, explicit config as a TOML table (every key that affects results).
pub(crate) fn config_table(cfg: &ExperimentConfig) -> Table {
    let p = &cfg.params;
    let mut t = Table::new();
    t.insert("schema_version".into(), Value::Integer(SCHEMA_VERSION));
    let scenario = if cfg.scenarios.len() == Scenario::ALL.len() {
        "both".to_string()
    } else {
        cfg.scenarios[0].to_string()
    };
    t.insert("scenario".into(), Value::String(scenario));
    t.insert("n_clients".into(), Value::Integer(p.n_clients as i64));
    t.insert("horizon".into(), Value::Integer(p.horizon as i64));
    t.insert("replications".into(), Value::Integer(cfg.replications as i64));
    t.insert(
        "seed".into(),
        match i64::try_from(cfg.master_seed) {
            Ok(i) => Value::Integer(i),
            Err(_) => Value::String(cfg.master_seed.to_string()),
        },
    );
    t.insert("a".into(), schedule_value(&p.a));
    t.insert("b".into(), schedule_value(&p.b));
    t.insert("q".into(), schedule_value(&p.q));
    t.insert("r".into(), schedule_value(&p.r));
    t.insert("nu".into(), Value::Float(p.nu));
    t.insert("score_cap".into(), Value::Float(p.score_cap));
    t.insert("initial_var".into(), Value::Float(p.initial_var));
    t.insert("prior_mean".into(), Value::Float(p.prior_mean()));
    let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
    let u = match &p.inputs {
        AttributeInputs::Zero => Value::Float(0.0),
        AttributeInputs::Constant(c) => Value::Float(*c),
        AttributeInputs::Shared(v) => floats(v),
        AttributeInputs::PerClient(rows) => Value::Array(rows.iter().map(|r| floats(r)).collect()),
    };
    t.insert("u".into(), u);
    match &cfg.population {
        Population::Uniform => {
            t.insert("population".into(), Value::String("uniform".into()));
        }
        Population::Explicit(xs) => {
            t.insert("population".into(), Value::String("explicit".into()));
            t.insert("truths".into(), floats(xs));
        }
    }
    t.insert(
        "crlb_aggregation".into(),
        Value::String(cfg.crlb_aggregation.as_str().into()),
    );
    t.insert(
        "opt_out".into(),
        Value::Array(cfg.opt_out.iter().map(|&i| Value::Integer(i as i64)).collect()),
    );
    t
}
