//! Recursive scoring loop.
//!
//! Each period runs four steps in order:
//!
//! 1. true scores evolve;
//! 2. the lender publishes `x̄_i(t) = a·x̂_i(t-1) + b·u_i(t-1)`;
//! 3. every client links to others by comparing its true score with their
//!    published scores;
//! 4. the lender corrects each published score with the published scores of
//!    the client's neighbors.
//!
//! With the published belief as prior and a unit-variance Gaussian kernel per
//! link, the correction under quadratic loss is the posterior mean
//!
//! ```text
//! P̂ = P̄ / (1 + P̄·n)
//! x̂ = x̄ + P̂ · Σ_j (x̄_j - x̄)
//! ```
//!
//! Since `1/P̂ = 1/P̄ + n` while the Fisher information of the links is `n`,
//! `P̂` always sits strictly below the Cramér-Rao bound `1/n`.

use crate::error::{Error, Result};
use crate::model::{init_belief, step_truth, ClientTruth, GaussianBelief};
use crate::network::sample_network_by_row;
use crate::params::{check_variance, ModelParams};
use crate::rng::{Purpose, ReplicationStreams};
use crate::trajectory::{ClientStep, Scenario, Trajectory};

/// Published and corrected beliefs of one client in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionState {
    pub published: GaussianBelief,
    pub corrected: GaussianBelief,
    pub degree: usize,
}

pub fn publish(prev_corrected: GaussianBelief, a: f64, b: f64, u: f64, q: f64) -> Result<GaussianBelief> {
    check_variance("variance", prev_corrected.variance, false)?;
    check_variance("q", q, true)?;
    Ok(GaussianBelief {
        mean: a * prev_corrected.mean + b * u,
        variance: a * a * prev_corrected.variance + q,
    })
}

pub fn correct(published: GaussianBelief, neighbor_published: &[f64]) -> Result<GaussianBelief> {
    check_variance("variance", published.variance, false)?;
    let n = neighbor_published.len() as f64;
    let p_hat = published.variance / (1.0 + published.variance * n);
    let pull: f64 = neighbor_published.iter().map(|&s| s - published.mean).sum();
    Ok(GaussianBelief {
        mean: published.mean + p_hat * pull,
        variance: p_hat,
    })
}

/// Runs the loop over `t = 1..=T`.
pub fn run_interaction(
    params: &ModelParams,
    truths: &[ClientTruth],
    streams: &ReplicationStreams,
) -> Result<Trajectory> {
    run_interaction_with_opt_out(params, truths, streams, &[])
}

/// Like [`run_interaction`], but clients listed in `opt_out` keep their
/// published score (attribute-only scoring). They still form links and still
/// serve as neighbors of others.
pub fn run_interaction_with_opt_out(
    params: &ModelParams,
    truths: &[ClientTruth],
    streams: &ReplicationStreams,
    opt_out: &[usize],
) -> Result<Trajectory> {
    params.validate()?;
    let n = params.n_clients;
    if truths.len() != n {
        return Err(Error::LengthMismatch {
            what: "truths vs n_clients",
            expected: n,
            actual: truths.len(),
        });
    }
    let mut skip = vec![false; n];
    for &i in opt_out {
        *skip.get_mut(i).ok_or(Error::IndexOutOfRange { index: i, n })? = true;
    }

    let mut x: Vec<f64> = truths.iter().map(|c| c.x).collect();
    let mut steps = Vec::with_capacity(params.horizon + 1);
    let mut networks = Vec::with_capacity(params.horizon);
    let initial = truths
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let b = init_belief(c, params.initial_var, &mut streams.stream(Purpose::InitialBelief, i, 0))?;
            Ok(ClientStep {
                x_true: c.x,
                observation: None,
                prior: b,
                posterior: b,
                gains: None,
                degree: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    steps.push(initial);

    for t in 1..=params.horizon {
        let (a, b, q) = (params.a.at(t - 1), params.b.at(t - 1), params.q.at(t - 1));
        for (i, xi) in x.iter_mut().enumerate() {
            let mut rng = streams.stream(Purpose::Process, i, t);
            *xi = step_truth(*xi, truths[i].input(t - 1), a, b, q, &mut rng)?;
        }
        let published = steps[t - 1]
            .iter()
            .enumerate()
            .map(|(i, s)| publish(s.posterior, a, b, truths[i].input(t - 1), q))
            .collect::<Result<Vec<_>>>()?;
        let means: Vec<f64> = published.iter().map(|p| p.mean).collect();
        let snap = sample_network_by_row(&x, &means, params.nu, t, |i| streams.stream(Purpose::Network, i, t))?;

        let mut row = Vec::with_capacity(n);
        let mut neighbor_scores = Vec::new();
        for i in 0..n {
            neighbor_scores.clear();
            neighbor_scores.extend(snap.neighbors(i)?.iter().map(|&j| means[j]));
            let corrected = if skip[i] {
                published[i]
            } else {
                correct(published[i], &neighbor_scores)?
            };
            row.push(ClientStep {
                x_true: x[i],
                observation: None,
                prior: published[i],
                posterior: corrected,
                gains: None,
                degree: neighbor_scores.len(),
            });
        }
        steps.push(row);
        networks.push(snap);
    }

    Ok(Trajectory {
        scenario: Scenario::RecursiveScoring,
        steps,
        networks,
    })
}

/// Upper bound on `|x̄_i(t)|` when every `a(k) < 1`:
///
/// `M0·Π_{k<t} a(k) + Σ_{k<t} (Π_{k<l<t} a(l))·|b(k)u(k)|`
///
/// `m0` bounds the initial estimates and `bu[k]` bounds `|b(k)·u_i(k)|` over
/// clients. Both schedules must cover `k = 0..t`.
pub fn prediction_bound(m0: f64, a: &[f64], bu: &[f64], t: usize) -> Result<f64> {
    if a.len() < t || bu.len() < t {
        return Err(Error::LengthMismatch {
            what: "bound schedules vs t",
            expected: t,
            actual: a.len().min(bu.len()),
        });
    }
    if let Some(k) = a[..t].iter().position(|&ak| !(ak > 0.0 && ak < 1.0)) {
        return Err(Error::BoundNotApplicable(format!(
            "prediction bound needs 0 < a(k) < 1, got a({k}) = {}",
            a[k]
        )));
    }
    // Horner form: bound_{k+1} = a(k)·bound_k + |bu(k)|
    Ok((0..t).fold(m0.abs(), |acc, k| a[k] * acc + bu[k].abs()))
}

/// Lower and upper bounds on `P̂_i(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionBounds {
    /// `(1/q_l + N)^-1`; zero when `q_l = 0`.
    pub lower: f64,
    pub upper: f64,
    /// `q_l = 0`: the lower bound carries no information.
    pub lower_degenerate: bool,
}

/// Bounds on the corrected variance at time `t = degrees.len()`.
///
/// `q_l ≤ Q_k ≤ q_u` for all `k`, `a` covers `k = 0..t` and `degrees[k]` is
/// `n_i(k + 1)`. The upper bound is
///
/// `(m0^t / P̂(0) + Σ_{k<t} m0^k · n_i(t - k))^-1`,
/// `m0 = 1 / (ā² + (1/q_l + N)·q_u)`, `ā = max a(k)`.
///
/// With `q_u = 0` the process-noise term vanishes and `m0 = 1/ā²`. The upper
/// bound requires `P̂(0) ≥ (1/q_l + N)^-1`.
pub fn precision_bounds(
    q_l: f64,
    q_u: f64,
    n_clients: usize,
    a: &[f64],
    p0: f64,
    degrees: &[usize],
) -> Result<PrecisionBounds> {
    check_variance("initial_var", p0, false)?;
    check_variance("q_u", q_u, true)?;
    if !(q_l.is_finite() && q_l <= q_u) {
        return Err(Error::param(
            "q_l",
            format!("must satisfy q_l <= q_u, got {q_l} > {q_u}"),
        ));
    }
    let t = degrees.len();
    if a.len() < t {
        return Err(Error::LengthMismatch {
            what: "a schedule vs t",
            expected: t,
            actual: a.len(),
        });
    }
    let n = n_clients as f64;
    let lower_degenerate = q_l <= 0.0;
    let (lower, cap) = if lower_degenerate {
        (0.0, f64::INFINITY)
    } else {
        let cap = 1.0 / q_l + n;
        (1.0 / cap, cap)
    };
    if 1.0 / p0 > cap {
        return Err(Error::BoundNotApplicable(format!(
            "initial variance {p0} is below the lower bound {lower}"
        )));
    }
    let a_max = a[..t].iter().copied().fold(0.0, f64::max);
    let m0 = if q_u == 0.0 {
        1.0 / (a_max * a_max)
    } else {
        1.0 / (a_max * a_max + cap * q_u)
    };
    let mut information = m0.powi(t as i32) / p0;
    let mut weight = 1.0;
    for k in 0..t {
        information += weight * degrees[t - 1 - k] as f64;
        weight *= m0;
    }
    Ok(PrecisionBounds {
        lower,
        upper: 1.0 / information,
        lower_degenerate,
    })
}
