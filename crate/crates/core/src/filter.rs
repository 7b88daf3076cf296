//! Risk-prediction filter.
//!
//! A scalar recursive Bayesian filter whose measurement at time `t` is the
//! client's own noisy score `y_i(t)` plus the published scores `y_j(t)` of
//! every neighbor it linked to. Each link contributes a unit-variance Gaussian
//! pseudo-observation centered at `y_j(t)`, so the posterior stays Gaussian
//! and the update reduces to two gains:
//!
//! ```text
//! D = R + P + n·R·P
//! K = P / D            (own innovation)
//! H = P·R / D          (each neighbor innovation)
//! P(t|t) = (1 - K - n·H) · P(t|t-1)
//! ```
//!
//! Observed non-links carry information too, but the likelihood only keeps
//! connected neighbors.

use crate::error::{Error, Result};
use crate::model::{observe, step_truth, ClientTruth, GaussianBelief};
use crate::network::sample_network_by_row;
use crate::params::{check_variance, ModelParams};
use crate::rng::{Purpose, ReplicationStreams};
use crate::trajectory::{ClientStep, Gains, Scenario, Trajectory};

/// Belief and bookkeeping after one predict/update cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub predicted: GaussianBelief,
    pub posterior: GaussianBelief,
    pub gains: Gains,
    pub degree: usize,
}

/// Time update: `(a·m + b·u, a²·P + q)`.
pub fn predict(prev: GaussianBelief, a: f64, b: f64, u: f64, q: f64) -> Result<GaussianBelief> {
    check_variance("variance", prev.variance, false)?;
    check_variance("q", q, true)?;
    Ok(GaussianBelief {
        mean: a * prev.mean + b * u,
        variance: a * a * prev.variance + q,
    })
}

pub fn gains(p_pred: f64, r: f64, n: usize) -> Result<Gains> {
    check_variance("variance", p_pred, false)?;
    check_variance("r", r, false)?;
    let denom = r + p_pred + n as f64 * r * p_pred;
    Ok(Gains {
        k: p_pred / denom,
        h: p_pred * r / denom,
    })
}

/// Measurement update with the client's own observation `y_i` and the
/// current published scores of its neighbors.
pub fn update(predicted: GaussianBelief, y_i: f64, neighbor_scores: &[f64], r: f64) -> Result<FilterState> {
    let n = neighbor_scores.len();
    let g = gains(predicted.variance, r, n)?;
    let m = predicted.mean;
    let pull: f64 = neighbor_scores.iter().map(|&y| y - m).sum();
    let mean = m + g.k * (y_i - m) + g.h * pull;
    let variance = (1.0 - g.k - n as f64 * g.h) * predicted.variance;
    Ok(FilterState {
        predicted,
        posterior: GaussianBelief { mean, variance },
        gains: g,
        degree: n,
    })
}

/// Product of Gaussian densities: precisions add, the mean is the
/// precision-weighted average. Serves as the reference for both closed-form
/// updates.
pub fn fuse_gaussians(prior: GaussianBelief, terms: &[GaussianBelief]) -> GaussianBelief {
    if terms.is_empty() {
        return prior;
    }
    let (mut precision, mut weighted) = (prior.precision(), prior.precision() * prior.mean);
    for term in terms {
        precision += term.precision();
        weighted += term.precision() * term.mean;
    }
    GaussianBelief {
        mean: weighted / precision,
        variance: 1.0 / precision,
    }
}

/// Runs the filter over `t = 1..=T` for every client.
///
/// All clients start from the common prior `(prior_mean, initial_var)`. At
/// each step the truths evolve, every client is observed with noise `R_t`,
/// links form between true scores and the observed scores of others, and each
/// client's belief is predicted and updated.
pub fn run_filter(params: &ModelParams, truths: &[ClientTruth], streams: &ReplicationStreams) -> Result<Trajectory> {
    params.validate()?;
    let n = params.n_clients;
    if truths.len() != n {
        return Err(Error::LengthMismatch {
            what: "truths vs n_clients",
            expected: n,
            actual: truths.len(),
        });
    }
    let init = GaussianBelief::new(params.prior_mean(), params.initial_var)?;
    let mut x: Vec<f64> = truths.iter().map(|c| c.x).collect();
    let mut steps = Vec::with_capacity(params.horizon + 1);
    let mut networks = Vec::with_capacity(params.horizon);
    steps.push(
        x.iter()
            .map(|&x_true| ClientStep {
                x_true,
                observation: None,
                prior: init,
                posterior: init,
                gains: None,
                degree: 0,
            })
            .collect::<Vec<_>>(),
    );

    for t in 1..=params.horizon {
        let (a, b, q, r) = (
            params.a.at(t - 1),
            params.b.at(t - 1),
            params.q.at(t - 1),
            params.r.at(t),
        );
        for (i, xi) in x.iter_mut().enumerate() {
            let mut rng = streams.stream(Purpose::Process, i, t);
            *xi = step_truth(*xi, truths[i].input(t - 1), a, b, q, &mut rng)?;
        }
        let y = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| observe(xi, r, &mut streams.stream(Purpose::Observation, i, t)))
            .collect::<Result<Vec<_>>>()?;
        let snap = sample_network_by_row(&x, &y, params.nu, t, |i| streams.stream(Purpose::Network, i, t))?;

        let prev = &steps[t - 1];
        let mut row = Vec::with_capacity(n);
        let mut neighbor_scores = Vec::new();
        for i in 0..n {
            let predicted = predict(prev[i].posterior, a, b, truths[i].input(t - 1), q)?;
            neighbor_scores.clear();
            neighbor_scores.extend(snap.neighbors(i)?.iter().map(|&j| y[j]));
            let state = update(predicted, y[i], &neighbor_scores, r)?;
            row.push(ClientStep {
                x_true: x[i],
                observation: Some(y[i]),
                prior: state.predicted,
                posterior: state.posterior,
                gains: Some(state.gains),
                degree: state.degree,
            });
        }
        steps.push(row);
        networks.push(snap);
    }

    Ok(Trajectory {
        scenario: Scenario::RiskPrediction,
        steps,
        networks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;
    use proptest::prelude::*;

    fn belief(mean: f64, variance: f64) -> GaussianBelief {
        GaussianBelief { mean, variance }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(belief(3.0, 1.0), 1.0, 0.0, 0.0, 0.0).unwrap(), belief(3.0, 1.0));
        let p = predict(belief(3.0, 1.0), 0.5, 2.0, 1.0, 0.75).unwrap();
        assert!(close(p.mean, 3.5, 1e-15) && close(p.variance, 1.0, 1e-15));
        assert_eq!(
            predict(belief(0.0, 2.0), 1.0, 1.0, -1.0, 0.0).unwrap(),
            belief(-1.0, 2.0)
        );
        assert!(predict(belief(0.0, 0.0), 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gain_examples() {
        let g = gains(1.0, 1.0, 1).unwrap();
        assert!(close(g.k, 1.0 / 3.0, 1e-15) && close(g.h, 1.0 / 3.0, 1e-15));

        let g = gains(1.0, 1.0, 0).unwrap();
        assert!(close(g.k, 0.5, 1e-15) && close(g.h, 0.5, 1e-15));

        let g = gains(2.0, 0.5, 3).unwrap();
        assert!(close(g.k, 2.0 / 5.5, 1e-15), "{}", g.k);
        assert!(close(g.h, 1.0 / 5.5, 1e-15), "{}", g.h);

        assert!(gains(0.0, 1.0, 1).is_err());
        assert!(gains(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn update_examples() {
        let s = update(belief(0.0, 1.0), 2.0, &[4.0], 1.0).unwrap();
        assert!(close(s.posterior.mean, 2.0, 1e-14));
        assert!(close(s.posterior.variance, 1.0 / 3.0, 1e-14));
        assert_eq!(s.degree, 1);

        let s = update(belief(5.0, 1.0), 5.0, &[], 1.0).unwrap();
        assert!(close(s.posterior.mean, 5.0, 1e-15));
        assert!(close(s.posterior.variance, 0.5, 1e-15));

        let s = update(belief(2.0, 0.5), 2.0, &[1.0, 3.0], 0.5).unwrap();
        assert!(close(s.posterior.mean, 2.0, 1e-14));
        assert!(close(s.posterior.variance, 1.0 / 6.0, 1e-14));
    }

    #[test]
    fn fuse_examples() {
        let f = fuse_gaussians(belief(0.0, 1.0), &[belief(2.0, 1.0), belief(4.0, 1.0)]);
        assert!(close(f.mean, 2.0, 1e-15) && close(f.variance, 1.0 / 3.0, 1e-15));
        assert_eq!(fuse_gaussians(belief(1.3, 0.7), &[]), belief(1.3, 0.7));
        let f = fuse_gaussians(belief(1.0, 1.0), &[belief(1.0, 1.0)]);
        assert!(close(f.mean, 1.0, 1e-15) && close(f.variance, 0.5, 1e-15));
    }

    #[test]
    fn single_client_is_a_scalar_kalman_filter() {
        let params = ModelParams {
            n_clients: 1,
            horizon: 20,
            ..Default::default()
        };
        let traj = run_filter(&params, &[ClientTruth::new(4.0)], &Streams::new(3).replication(0)).unwrap();
        for (t, step) in traj.client(0).enumerate() {
            assert_eq!(step.x_true, 4.0);
            assert!(close(step.posterior.variance, 1.0 / (t as f64 + 1.0), 1e-12), "t={t}");
            if t > 0 {
                assert_eq!(step.degree, 0);
            }
        }
    }

    #[test]
    fn replay_is_identical() {
        let params = ModelParams {
            n_clients: 8,
            horizon: 5,
            q: 0.1.into(),
            ..Default::default()
        };
        let truths: Vec<_> = (0..8).map(|i| ClientTruth::new(i as f64 * 1.5)).collect();
        let s = Streams::new(11).replication(2);
        assert_eq!(
            run_filter(&params, &truths, &s).unwrap(),
            run_filter(&params, &truths, &s).unwrap()
        );
    }

    proptest! {
        #[test]
        fn closed_form_matches_fusion(
            mean in -20.0f64..20.0,
            var in 1e-3f64..50.0,
            y in -20.0f64..20.0,
            r in 1e-3f64..50.0,
            neighbors in proptest::collection::vec(-20.0f64..20.0, 0..12),
        ) {
            let prior = belief(mean, var);
            let s = update(prior, y, &neighbors, r).unwrap();
            let mut terms = vec![belief(y, r)];
            terms.extend(neighbors.iter().map(|&m| belief(m, 1.0)));
            let oracle = fuse_gaussians(prior, &terms);
            prop_assert!(close(s.posterior.mean, oracle.mean, 1e-10));
            prop_assert!(close(s.posterior.variance, oracle.variance, 1e-10));

            let n = neighbors.len() as f64;
            let additive = 1.0 / (1.0 / var + 1.0 / r + n);
            prop_assert!(close(s.posterior.variance, additive, 1e-12));
            prop_assert!(s.posterior.variance < r);
            prop_assert!(s.posterior.variance < var);
        }
    }
}
