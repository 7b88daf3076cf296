use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::model::GaussianBelief;
use crate::network::NetworkSnapshot;

/// Which estimation scheme produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Filter over published noisy scores plus network links.
    RiskPrediction,
    /// Publish / form network / correct loop.
    RecursiveScoring,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::RiskPrediction, Scenario::RecursiveScoring];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::RiskPrediction => "risk_prediction",
            Scenario::RecursiveScoring => "recursive_scoring",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "risk_prediction" => Ok(Scenario::RiskPrediction),
            "recursive_scoring" => Ok(Scenario::RecursiveScoring),
            other => Err(Error::param(
                "scenario",
                format!("unknown scenario `{other}` (expected risk_prediction, recursive_scoring or both)"),
            )),
        }
    }
}

/// Gains applied by one filter update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// Weight on the client's own observation innovation.
    pub k: f64,
    /// Weight on each neighbor's innovation.
    pub h: f64,
}

/// One client at one time step.
///
/// For the filter `prior` is the one-step prediction and `posterior` the
/// update; for the interaction loop `prior` is the published score and
/// `posterior` the corrected one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientStep {
    pub x_true: f64,
    /// Individual noisy observation `y_i(t)` (filter only).
    pub observation: Option<f64>,
    pub prior: GaussianBelief,
    pub posterior: GaussianBelief,
    pub gains: Option<Gains>,
    pub degree: usize,
}

/// A full run: `steps[t][i]` for `t = 0..=T`. Step 0 holds the initial
/// beliefs; `networks[t - 1]` is the snapshot used at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub steps: Vec<Vec<ClientStep>>,
    pub networks: Vec<NetworkSnapshot>,
}

impl Trajectory {
    pub fn n_clients(&self) -> usize {
        self.steps.first().map_or(0, Vec::len)
    }

    pub fn horizon(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn at(&self, t: usize, client: usize) -> &ClientStep {
        &self.steps[t][client]
    }

    /// Time series of one client.
    pub fn client(&self, client: usize) -> impl Iterator<Item = &ClientStep> + '_ {
        self.steps.iter().map(move |row| &row[client])
    }

    pub fn network(&self, t: usize) -> Option<&NetworkSnapshot> {
        t.checked_sub(1).and_then(|k| self.networks.get(k))
    }
}
