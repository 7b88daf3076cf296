//! Scalar model constants and per-step schedules.

use crate::error::{Error, Result};

/// A per-step value indexed by time `t = 0, 1, ..`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// Explicit values; `values[t]` is the value at step `t`. Must cover the
    /// whole horizon (`t = 0..=T`).
    PerStep(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerStep(values) => values[t.min(values.len() - 1)],
        }
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len).map(|t| self.at(t)).collect()
    }

    fn check(&self, name: &str, horizon: usize, valid: impl Fn(f64) -> bool, range: &str) -> Result<()> {
        let values: &[f64] = match self {
            Schedule::Constant(v) => std::slice::from_ref(v),
            Schedule::PerStep(values) => {
                if values.len() < horizon + 1 {
                    return Err(Error::param(
                        name,
                        format!(
                            "schedule needs {} entries (t = 0..={horizon}), got {}",
                            horizon + 1,
                            values.len()
                        ),
                    ));
                }
                values
            }
        };
        for (t, &v) in values.iter().enumerate() {
            if !v.is_finite() || !valid(v) {
                return Err(Error::param(name, format!("must be in {range}, got {v} at t = {t}")));
            }
        }
        Ok(())
    }

    /// Smallest and largest value over `t = 0..len`.
    pub fn range(&self, len: usize) -> (f64, f64) {
        (0..len.max(1))
            .map(|t| self.at(t))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

impl From<f64> for Schedule {
    fn from(v: f64) -> Self {
        Schedule::Constant(v)
    }
}

/// Attribute-change inputs `u_i(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AttributeInputs {
    #[default]
    Zero,
    /// The same value for every client and step.
    Constant(f64),
    /// One schedule shared by all clients.
    Shared(Vec<f64>),
    /// `per_client[i][t]`.
    PerClient(Vec<Vec<f64>>),
}

impl AttributeInputs {
    pub fn at(&self, client: usize, t: usize) -> f64 {
        match self {
            AttributeInputs::Zero => 0.0,
            AttributeInputs::Constant(v) => *v,
            AttributeInputs::Shared(values) => values.get(t).copied().unwrap_or(0.0),
            AttributeInputs::PerClient(rows) => rows[client].get(t).copied().unwrap_or(0.0),
        }
    }

    /// The schedule of client `i` over `t = 0..len`.
    pub fn for_client(&self, client: usize, len: usize) -> Vec<f64> {
        (0..len).map(|t| self.at(client, t)).collect()
    }
}

/// All scalar model constants and schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// History weight `a(t)`, each in (0, 1].
    pub a: Schedule,
    /// Attribute weight `b(t)`, nonnegative.
    pub b: Schedule,
    /// Process-noise variance `Q_t`, nonnegative.
    pub q: Schedule,
    /// Observation-noise variance `R_t`, positive.
    pub r: Schedule,
    /// Meeting probability.
    pub nu: f64,
    /// Scores are nominally in `[0, score_cap]`.
    pub score_cap: f64,
    pub n_clients: usize,
    /// Last time index `T`; runs cover `t = 1..=T`.
    pub horizon: usize,
    /// Variance of the initial estimate.
    pub initial_var: f64,
    /// Common prior mean of the risk-prediction filter. `None` means
    /// `score_cap / 2`.
    pub prior_mean: Option<f64>,
    pub inputs: AttributeInputs,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: Schedule::Constant(1.0),
            b: Schedule::Constant(0.0),
            q: Schedule::Constant(0.0),
            r: Schedule::Constant(1.0),
            nu: 1.0,
            score_cap: 15.0,
            n_clients: 50,
            horizon: 15,
            initial_var: 1.0,
            prior_mean: None,
            inputs: AttributeInputs::Zero,
        }
    }
}

impl ModelParams {
    pub fn prior_mean(&self) -> f64 {
        self.prior_mean.unwrap_or(self.score_cap / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clients == 0 {
            return Err(Error::param("n_clients", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        let len = self.horizon;
        self.a.check("a", len, |v| v > 0.0 && v <= 1.0, "(0, 1]")?;
        self.b.check("b", len, |v| v >= 0.0, "[0, inf)")?;
        self.q.check("q", len, |v| v >= 0.0, "[0, inf)")?;
        self.r.check("r", len, |v| v > 0.0, "(0, inf)")?;
        check_probability("nu", self.nu)?;
        if !(self.score_cap.is_finite() && self.score_cap > 0.0) {
            return Err(Error::param(
                "score_cap",
                format!("must be in (0, inf), got {}", self.score_cap),
            ));
        }
        if !(self.initial_var.is_finite() && self.initial_var > 0.0) {
            return Err(Error::param(
                "initial_var",
                format!("must be in (0, inf), got {}", self.initial_var),
            ));
        }
        if let Some(m) = self.prior_mean {
            if !m.is_finite() {
                return Err(Error::param("prior_mean", "must be finite"));
            }
        }
        match &self.inputs {
            AttributeInputs::Constant(v) if !v.is_finite() => {
                return Err(Error::param("u", "must be finite"));
            }
            AttributeInputs::Shared(values) if values.iter().any(|v| !v.is_finite()) => {
                return Err(Error::param("u", "must be finite"));
            }
            AttributeInputs::PerClient(rows) => {
                if rows.len() != self.n_clients {
                    return Err(Error::param(
                        "u",
                        format!("per-client inputs need {} rows, got {}", self.n_clients, rows.len()),
                    ));
                }
                if rows.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::param("u", "must be finite"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &str, nu: f64) -> Result<()> {
    if nu > 0.0 && nu <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be in (0, 1], got {nu}")))
    }
}

pub(crate) fn check_variance(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0, inf)" } else { "(0, inf)" };
        Err(Error::param(name, format!("must be in {range}, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_values() {
        let cases: Vec<(&str, ModelParams)> = vec![
            (
                "a",
                ModelParams {
                    a: 1.5.into(),
                    ..Default::default()
                },
            ),
            (
                "a",
                ModelParams {
                    a: 0.0.into(),
                    ..Default::default()
                },
            ),
            (
                "q",
                ModelParams {
                    q: (-0.1).into(),
                    ..Default::default()
                },
            ),
            (
                "r",
                ModelParams {
                    r: 0.0.into(),
                    ..Default::default()
                },
            ),
            (
                "nu",
                ModelParams {
                    nu: 1.5,
                    ..Default::default()
                },
            ),
            (
                "nu",
                ModelParams {
                    nu: 0.0,
                    ..Default::default()
                },
            ),
            (
                "score_cap",
                ModelParams {
                    score_cap: 0.0,
                    ..Default::default()
                },
            ),
            (
                "initial_var",
                ModelParams {
                    initial_var: 0.0,
                    ..Default::default()
                },
            ),
            (
                "n_clients",
                ModelParams {
                    n_clients: 0,
                    ..Default::default()
                },
            ),
        ];
        for (key, p) in cases {
            match p.validate() {
                Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, key),
                other => panic!("{key}: expected invalid parameter, got {other:?}"),
            }
        }
    }

    #[test]
    fn short_schedule_is_rejected() {
        let p = ModelParams {
            horizon: 3,
            a: Schedule::PerStep(vec![1.0, 1.0]),
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = ModelParams {
            horizon: 3,
            a: Schedule::PerStep(vec![1.0, 0.9, 0.8, 0.7]),
            ..Default::default()
        };
        p.validate().unwrap();
        assert_eq!(p.a.at(2), 0.8);
        assert_eq!(p.a.range(4), (0.7, 1.0));
    }

    #[test]
    fn prior_mean_defaults_to_mid_scale() {
        assert_eq!(ModelParams::default().prior_mean(), 7.5);
    }
}
