//! Error-spread comparison between two runs (typically two network sizes).

use crate::error::{Error, Result};
use crate::metrics::{quantile_sorted, BoxStats};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct BinComparison {
    pub lo: f64,
    pub hi: f64,
    /// Bin lies inside the middle band.
    pub middle: bool,
    pub count_a: usize,
    pub count_b: usize,
    pub iqr_a: f64,
    pub iqr_b: f64,
    /// `iqr_b / iqr_a`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub t: usize,
    pub bins: Vec<BinComparison>,
    /// Share of populated middle bins where run `b` has the smaller IQR.
    pub fraction_b_smaller: f64,
}

fn errors_by_bin(trajs: &[Trajectory], t: usize, edges: &[f64]) -> Vec<Vec<f64>> {
    let mut bins = vec![Vec::new(); edges.len() - 1];
    for traj in trajs {
        for s in &traj.steps[t] {
            // half-open bins, last one closed
            let k = edges.partition_point(|&e| e <= s.x_true);
            let k = if k == edges.len() && s.x_true == edges[edges.len() - 1] {
                k - 1
            } else {
                k
            };
            if k >= 1 && k < edges.len() {
                bins[k - 1].push(s.posterior.mean - s.x_true);
            }
        }
    }
    bins
}

fn iqr(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    quantile_sorted(&xs, 0.75) - quantile_sorted(&xs, 0.25)
}

/// Bins the estimation errors at step `t` by true score (bins of
/// `bin_width` on `[0, score_cap]`) and compares their interquartile ranges.
/// A bin counts as middle when it lies inside `middle`.
pub fn compare_n(
    a: &[Trajectory],
    b: &[Trajectory],
    t: usize,
    score_cap: f64,
    bin_width: f64,
    middle: (f64, f64),
) -> Result<Comparison> {
    let (ha, hb) = (a.first().map(Trajectory::horizon), b.first().map(Trajectory::horizon));
    match (ha, hb) {
        (Some(x), Some(y)) if x == y && a.iter().chain(b).all(|tr| tr.horizon() == x) => {
            if t == 0 || t > x {
                return Err(Error::param("t", format!("must be in 1..={x}, got {t}")));
            }
        }
        (Some(_), Some(_)) => {
            return Err(Error::LengthMismatch {
                what: "compared horizons",
                expected: ha.unwrap_or(0),
                actual: hb.unwrap_or(0),
            })
        }
        _ => return Err(Error::param("replications", "both runs need trajectories")),
    }
    if !(bin_width > 0.0 && score_cap > 0.0) {
        return Err(Error::param("bin_width", "must be positive"));
    }

    let n_bins = (score_cap / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=n_bins).map(|k| (k as f64 * bin_width).min(score_cap)).collect();
    let (ea, eb) = (errors_by_bin(a, t, &edges), errors_by_bin(b, t, &edges));

    let mut bins = Vec::with_capacity(n_bins);
    let (mut middle_total, mut b_smaller) = (0usize, 0usize);
    for (k, (xa, xb)) in ea.into_iter().zip(eb).enumerate() {
        let (lo, hi) = (edges[k], edges[k + 1]);
        let is_middle = lo >= middle.0 && hi <= middle.1;
        let (count_a, count_b) = (xa.len(), xb.len());
        let (iqr_a, iqr_b) = if count_a > 0 && count_b > 0 {
            (iqr(xa), iqr(xb))
        } else {
            (f64::NAN, f64::NAN)
        };
        let ratio = iqr_b / iqr_a;
        if is_middle && count_a > 0 && count_b > 0 {
            middle_total += 1;
            if iqr_b < iqr_a {
                b_smaller += 1;
            }
        }
        bins.push(BinComparison {
            lo,
            hi,
            middle: is_middle,
            count_a,
            count_b,
            iqr_a,
            iqr_b,
            ratio,
        });
    }
    let fraction_b_smaller = if middle_total == 0 {
        f64::NAN
    } else {
        b_smaller as f64 / middle_total as f64
    };
    Ok(Comparison {
        t,
        bins,
        fraction_b_smaller,
    })
}

/// Box statistics of errors at step `t` for clients whose true score falls in
/// `[lo, hi)`.
pub fn band_box(trajs: &[Trajectory], t: usize, lo: f64, hi: f64) -> BoxStats {
    let errors: Vec<f64> = trajs
        .iter()
        .flat_map(|tr| tr.steps[t].iter())
        .filter(|s| s.x_true >= lo && s.x_true < hi)
        .map(|s| s.posterior.mean - s.x_true)
        .collect();
    BoxStats::from_samples(&errors)
}
