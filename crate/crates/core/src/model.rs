//! Ground-truth credit dynamics and the noisy observation process.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::params::{check_variance, ModelParams};

/// A Gaussian belief about one client's score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianBelief {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        check_variance("variance", variance, false)?;
        Ok(Self { mean, variance })
    }

    pub fn precision(&self) -> f64 {
        1.0 / self.variance
    }
}

/// True state of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientTruth {
    /// Score at `t = 0`.
    pub x: f64,
    /// `u_i(t)` for `t = 0..`; missing entries are zero.
    pub inputs: Vec<f64>,
}

impl ClientTruth {
    pub fn new(x: f64) -> Self {
        Self { x, inputs: Vec::new() }
    }

    pub fn input(&self, t: usize) -> f64 {
        self.inputs.get(t).copied().unwrap_or(0.0)
    }
}

/// How the initial population of true scores is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Population {
    /// i.i.d. draws from `Uniform[0, score_cap]`.
    Uniform,
    Explicit(Vec<f64>),
}

/// `a·x + b·u + w`, `w ~ N(0, q)`.
pub fn step_truth<R: Rng + ?Sized>(x_prev: f64, u_prev: f64, a: f64, b: f64, q: f64, rng: &mut R) -> Result<f64> {
    check_variance("q", q, true)?;
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::param("a", format!("must be in (0, 1], got {a}")));
    }
    let drift = a * x_prev + b * u_prev;
    if q == 0.0 {
        return Ok(drift);
    }
    Ok(drift + gaussian(q, rng))
}

/// `x + v`, `v ~ N(0, r)`.
pub fn observe<R: Rng + ?Sized>(x: f64, r: f64, rng: &mut R) -> Result<f64> {
    check_variance("r", r, false)?;
    Ok(x + gaussian(r, rng))
}

pub fn init_population<R: Rng + ?Sized>(
    params: &ModelParams,
    mode: &Population,
    rng: &mut R,
) -> Result<Vec<ClientTruth>> {
    let cap = params.score_cap;
    let scores = match mode {
        Population::Uniform => {
            let dist = Uniform::new_inclusive(0.0, cap).map_err(|e| Error::param("score_cap", e.to_string()))?;
            (0..params.n_clients).map(|_| dist.sample(rng)).collect::<Vec<_>>()
        }
        Population::Explicit(scores) => {
            if scores.len() != params.n_clients {
                return Err(Error::LengthMismatch {
                    what: "explicit truths vs n_clients",
                    expected: params.n_clients,
                    actual: scores.len(),
                });
            }
            if let Some(bad) = scores.iter().find(|&&x| !(0.0..=cap).contains(&x)) {
                return Err(Error::param("truths", format!("score {bad} is outside [0, {cap}]")));
            }
            scores.clone()
        }
    };
    let horizon = params.horizon + 1;
    Ok(scores
        .into_iter()
        .enumerate()
        .map(|(i, x)| ClientTruth {
            x,
            inputs: params.inputs.for_client(i, horizon),
        })
        .collect())
}

/// Initial estimate: mean drawn from `N(x, p0)`, variance `p0`.
pub fn init_belief<R: Rng + ?Sized>(truth: &ClientTruth, p0: f64, rng: &mut R) -> Result<GaussianBelief> {
    check_variance("initial_var", p0, false)?;
    Ok(GaussianBelief {
        mean: truth.x + gaussian(p0, rng),
        variance: p0,
    })
}

fn gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> f64 {
    // variance has been validated finite and nonnegative
    Normal::new(0.0, variance.sqrt()).expect("finite std dev").sample(rng)
}
