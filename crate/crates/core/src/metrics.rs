//! Fisher information, Cramér-Rao bounds and Monte Carlo error summaries.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trajectory::{Scenario, Trajectory};

/// Fisher information of a client's score carried by `n` unit-kernel links:
/// the log-likelihood `-Σ (x - s_j)² / 2` has constant curvature `-n`.
pub fn fisher_information(n: usize) -> f64 {
    n as f64
}

/// `1/n`, or `+inf` without links.
pub fn crlb(n: usize) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        1.0 / fisher_information(n)
    }
}

/// How per-replication CRLBs are combined at a fixed `(client, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrlbAggregation {
    /// Mean of `1/n` over replications (infinite if any replication had no
    /// links).
    #[default]
    Mean,
    /// `1 / mean(n)`.
    Harmonic,
}

impl CrlbAggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrlbAggregation::Mean => "mean",
            CrlbAggregation::Harmonic => "harmonic",
        }
    }

    pub fn combine(&self, degrees: &[usize]) -> f64 {
        if degrees.is_empty() {
            return f64::INFINITY;
        }
        let k = degrees.len() as f64;
        match self {
            CrlbAggregation::Mean => degrees.iter().map(|&n| crlb(n)).sum::<f64>() / k,
            CrlbAggregation::Harmonic => {
                let mean_n = degrees.iter().sum::<usize>() as f64 / k;
                if mean_n == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / mean_n
                }
            }
        }
    }
}

impl FromStr for CrlbAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(CrlbAggregation::Mean),
            "harmonic" => Ok(CrlbAggregation::Harmonic),
            other => Err(Error::param(
                "crlb_aggregation",
                format!("expected `mean` or `harmonic`, got `{other}`"),
            )),
        }
    }
}

/// Box-plot statistics with 1.5×IQR whiskers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q25 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q75 = quantile_sorted(&sorted, 0.75);
        let fence = 1.5 * (q75 - q25);
        let (lo, hi) = (q25 - fence, q75 + fence);
        let outliers = sorted.iter().copied().filter(|&e| e < lo || e > hi).collect();
        Self {
            median,
            q25,
            q75,
            outliers,
        }
    }
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    }
}

/// Moments of an error sample `e = x̂ - x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub bias: f64,
    /// Spread of the error around its mean, normalized by the sample count so
    /// that `mse = variance + bias²`.
    pub variance: f64,
    pub mse: f64,
    pub boxplot: BoxStats,
}

pub fn error_stats(errors: &[f64]) -> ErrorStats {
    let k = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / k;
    let variance = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / k;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / k;
    ErrorStats {
        bias,
        variance,
        mse,
        boxplot: BoxStats::from_samples(errors),
    }
}

/// One `(client, t)` cell aggregated over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub client: usize,
    pub t: usize,
    /// Mean true score over replications.
    pub x_true: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub crlb: f64,
    pub boxplot: BoxStats,
}

/// Aggregated table for one estimator, rows ordered by `(t, client)` for
/// `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub estimator: Scenario,
    pub n_clients: usize,
    pub horizon: usize,
    pub replications: usize,
    pub rows: Vec<SummaryRow>,
}

impl McSummary {
    pub fn row(&self, client: usize, t: usize) -> &SummaryRow {
        assert!(t >= 1 && t <= self.horizon && client < self.n_clients);
        &self.rows[(t - 1) * self.n_clients + client]
    }

    /// All clients at time `t`.
    pub fn slice(&self, t: usize) -> &[SummaryRow] {
        assert!(t >= 1 && t <= self.horizon);
        &self.rows[(t - 1) * self.n_clients..t * self.n_clients]
    }
}

/// Aggregates replicated trajectories of one estimator.
pub fn aggregate(trajectories: &[Trajectory], estimator: Scenario, crlb_mode: CrlbAggregation) -> Result<McSummary> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::param("replications", "need at least one trajectory"))?;
    let (n, horizon) = (first.n_clients(), first.horizon());
    for traj in trajectories {
        if traj.n_clients() != n || traj.horizon() != horizon || traj.steps.iter().any(|row| row.len() != n) {
            return Err(Error::LengthMismatch {
                what: "trajectory shapes",
                expected: n * (horizon + 1),
                actual: traj.steps.iter().map(Vec::len).sum(),
            });
        }
        if traj.scenario != estimator {
            return Err(Error::param(
                "estimator",
                format!("trajectory of {} mixed into {estimator} summary", traj.scenario),
            ));
        }
    }

    let reps = trajectories.len();
    let mut rows = Vec::with_capacity(n * horizon);
    let mut errors = Vec::with_capacity(reps);
    let mut degrees = Vec::with_capacity(reps);
    for t in 1..=horizon {
        for client in 0..n {
            errors.clear();
            degrees.clear();
            let mut x_sum = 0.0;
            for traj in trajectories {
                let s = traj.at(t, client);
                errors.push(s.posterior.mean - s.x_true);
                degrees.push(s.degree);
                x_sum += s.x_true;
            }
            let stats = error_stats(&errors);
            rows.push(SummaryRow {
                client,
                t,
                x_true: x_sum / reps as f64,
                bias: stats.bias,
                variance: stats.variance,
                mse: stats.mse,
                crlb: crlb_mode.combine(&degrees),
                boxplot: stats.boxplot,
            });
        }
    }
    Ok(McSummary {
        estimator,
        n_clients: n,
        horizon,
        replications: reps,
        rows,
    })
}
