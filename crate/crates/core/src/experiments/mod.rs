//! Scenario presets and the Monte Carlo driver.
//!
//! A run draws a fresh population per replication (sorted so that client `k`
//! is the `k`-th smallest true score), runs every requested estimator on the
//! same truths and random streams, and aggregates per `(client, t)`.

mod compare;
mod config_file;
mod output;

use std::collections::BTreeMap;
use std::path::Path;

pub use compare::{band_box, compare_n, BinComparison, Comparison};
pub use config_file::{apply_overrides, load_config, parse_config, CONFIG_KEYS, SCHEMA_VERSION};
pub use output::{format_number, read_trajectories, write_comparison, write_outputs, write_summary, Manifest};

use crate::error::{Error, Result};
use crate::exec::{map_replications, ExecMode};
use crate::filter::run_filter;
use crate::interaction::run_interaction_with_opt_out;
use crate::metrics::{aggregate, CrlbAggregation, McSummary};
use crate::model::{init_population, ClientTruth, Population};
use crate::params::ModelParams;
use crate::rng::{Purpose, Streams};
use crate::trajectory::{Scenario, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub scenarios: Vec<Scenario>,
    pub replications: usize,
    pub master_seed: u64,
    pub population: Population,
    pub crlb_aggregation: CrlbAggregation,
    /// Clients that skip the network correction in the recursive loop.
    pub opt_out: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            scenarios: Scenario::ALL.to_vec(),
            replications: 100,
            master_seed: 1,
            population: Population::Uniform,
            crlb_aggregation: CrlbAggregation::Mean,
            opt_out: Vec::new(),
        }
    }
}

/// A named parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub n_clients: usize,
}

pub const PRESETS: [Preset; 2] = [
    Preset {
        name: "paper-n50",
        description: "uniform truths on [0, 15], static scores (a=1, b=0, Q=0), 50 clients",
        n_clients: 50,
    },
    Preset {
        name: "paper-n100",
        description: "uniform truths on [0, 15], static scores (a=1, b=0, Q=0), 100 clients",
        n_clients: 100,
    },
];

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            params: ModelParams {
                n_clients: self.n_clients,
                horizon: 15,
                a: 1.0.into(),
                b: 0.0.into(),
                q: 0.0.into(),
                r: 1.0.into(),
                nu: 1.0,
                score_cap: 15.0,
                initial_var: 1.0,
                ..Default::default()
            },
            replications: 100,
            ..Default::default()
        }
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| {
            let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
            Error::param(
                "preset",
                format!("unknown preset `{name}` (known: {})", known.join(", ")),
            )
        })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        if self.scenarios.is_empty() {
            return Err(Error::param("scenario", "no estimator selected"));
        }
        if let Population::Explicit(xs) = &self.population {
            if xs.len() != self.params.n_clients {
                return Err(Error::param(
                    "truths",
                    format!("expected {} scores, got {}", self.params.n_clients, xs.len()),
                ));
            }
        }
        if let Some(&i) = self.opt_out.iter().find(|&&i| i >= self.params.n_clients) {
            return Err(Error::param(
                "opt_out",
                format!("client {i} out of range for {} clients", self.params.n_clients),
            ));
        }
        Ok(())
    }

    /// Truths of replication `rep`. Uniform populations are sorted ascending.
    pub fn truths(&self, rep: usize) -> Result<Vec<ClientTruth>> {
        let streams = Streams::new(self.master_seed).replication(rep as u64);
        let mut truths = init_population(&self.params, &self.population, &mut streams.shared(Purpose::Population))?;
        if self.population == Population::Uniform {
            truths.sort_by(|a, b| a.x.total_cmp(&b.x));
            let len = self.params.horizon + 1;
            for (i, c) in truths.iter_mut().enumerate() {
                c.inputs = self.params.inputs.for_client(i, len);
            }
        }
        Ok(truths)
    }

    /// Runs one replication of every requested estimator on shared truths.
    pub fn run_replication(&self, rep: usize) -> Result<Vec<Trajectory>> {
        let truths = self.truths(rep)?;
        let streams = Streams::new(self.master_seed).replication(rep as u64);
        self.scenarios
            .iter()
            .map(|scenario| match scenario {
                Scenario::RiskPrediction => run_filter(&self.params, &truths, &streams),
                Scenario::RecursiveScoring => {
                    run_interaction_with_opt_out(&self.params, &truths, &streams, &self.opt_out)
                }
            })
            .collect()
    }
}

/// Everything produced by a Monte Carlo run, before any I/O.
#[derive(Debug, Clone)]
pub struct MonteCarloRun {
    pub config: ExperimentConfig,
    pub trajectories: BTreeMap<Scenario, Vec<Trajectory>>,
    pub summaries: BTreeMap<Scenario, McSummary>,
}

pub fn run_monte_carlo(cfg: &ExperimentConfig, mode: ExecMode) -> Result<MonteCarloRun> {
    cfg.validate()?;
    let per_rep = map_replications(cfg.replications, mode, |rep| cfg.run_replication(rep))?;
    let mut trajectories: BTreeMap<Scenario, Vec<Trajectory>> = BTreeMap::new();
    for rep in per_rep {
        for traj in rep {
            trajectories.entry(traj.scenario).or_default().push(traj);
        }
    }
    let summaries = trajectories
        .iter()
        .map(|(&scenario, trajs)| Ok((scenario, aggregate(trajs, scenario, cfg.crlb_aggregation)?)))
        .collect::<Result<_>>()?;
    Ok(MonteCarloRun {
        config: cfg.clone(),
        trajectories,
        summaries,
    })
}

/// Runs the experiment and writes trajectories, summaries, bounds, the
/// network edge list and the manifest into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, mode: ExecMode) -> Result<(MonteCarloRun, Manifest)> {
    let run = run_monte_carlo(cfg, mode)?;
    let manifest = write_outputs(&run, out_dir)?;
    Ok((run, manifest))
}
