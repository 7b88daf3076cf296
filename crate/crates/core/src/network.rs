//! Directed homophily networks.
//!
//! Client `i` links to `j` when the pair meets (probability `nu`) and a
//! Rayleigh match threshold with unit scale exceeds `|x_i - s_j|`, where
//! `x_i` is `i`'s true score and `s_j` is the score of `j` that `i` can see.
//! The two events are independent, which gives the Gaussian-kernel edge
//! probability `nu * exp(-(x_i - s_j)^2 / 2)`.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::params::check_probability;

/// Edge probability for one ordered pair.
pub fn connection_probability(x_i: f64, s_j: f64, nu: f64) -> Result<f64> {
    check_probability("nu", nu)?;
    let d = x_i - s_j;
    Ok(nu * (-0.5 * d * d).exp())
}

/// One period's directed adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSnapshot {
    n: usize,
    time_index: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl NetworkSnapshot {
    /// Builds a snapshot from a row-major `n × n` adjacency. The diagonal is
    /// ignored.
    pub fn from_adjacency(n: usize, time_index: usize, mut adjacency: Vec<bool>) -> Result<Self> {
        if adjacency.len() != n * n {
            return Err(Error::LengthMismatch {
                what: "adjacency entries",
                expected: n * n,
                actual: adjacency.len(),
            });
        }
        for i in 0..n {
            adjacency[i * n + i] = false;
        }
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[i * n + j]).collect())
            .collect();
        Ok(Self {
            n,
            time_index,
            adjacency,
            neighbors,
        })
    }

    pub fn empty(n: usize, time_index: usize) -> Self {
        Self {
            n,
            time_index,
            adjacency: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn n_clients(&self) -> usize {
        self.n
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// `{ j : g_ij = 1 }` in increasing order.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.neighbors
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange { index: i, n: self.n })
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        self.neighbors(i).map(<[usize]>::len)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }

    /// Writes `t,i,j` rows (no header).
    pub fn write_edges<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{},{},{}", self.time_index, i, j)?;
        }
        Ok(())
    }
}

fn check_lengths(truths: &[f64], published: &[f64]) -> Result<()> {
    if truths.len() != published.len() {
        return Err(Error::LengthMismatch {
            what: "truths vs published scores",
            expected: truths.len(),
            actual: published.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::param("n_clients", "must be at least 1"));
    }
    Ok(())
}

fn sample_row<R: Rng + ?Sized>(i: usize, truths: &[f64], published: &[f64], nu: f64, rng: &mut R, row: &mut [bool]) {
    let x = truths[i];
    for (j, (slot, &s)) in row.iter_mut().zip(published).enumerate() {
        // one uniform per ordered pair, including the skipped diagonal, so
        // row streams stay aligned with column indices
        let u: f64 = rng.random();
        if j != i {
            let d = x - s;
            *slot = u < nu * (-0.5 * d * d).exp();
        }
    }
}

/// Samples every ordered pair from one stream, row by row.
pub fn sample_network<R: Rng + ?Sized>(
    truths: &[f64],
    published: &[f64],
    nu: f64,
    t: usize,
    rng: &mut R,
) -> Result<NetworkSnapshot> {
    check_probability("nu", nu)?;
    check_lengths(truths, published)?;
    let n = truths.len();
    let mut adjacency = vec![false; n * n];
    for (i, row) in adjacency.chunks_mut(n).enumerate() {
        sample_row(i, truths, published, nu, rng, row);
    }
    NetworkSnapshot::from_adjacency(n, t, adjacency)
}

/// Same as [`sample_network`] but row `i` draws from `row_rng(i)`, so rows
/// are independent streams.
pub fn sample_network_by_row<R, F>(
    truths: &[f64],
    published: &[f64],
    nu: f64,
    t: usize,
    mut row_rng: F,
) -> Result<NetworkSnapshot>
where
    R: Rng,
    F: FnMut(usize) -> R,
{
    check_probability("nu", nu)?;
    check_lengths(truths, published)?;
    let n = truths.len();
    let mut adjacency = vec![false; n * n];
    for (i, row) in adjacency.chunks_mut(n).enumerate() {
        let mut rng = row_rng(i);
        sample_row(i, truths, published, nu, &mut rng, row);
    }
    NetworkSnapshot::from_adjacency(n, t, adjacency)
}
