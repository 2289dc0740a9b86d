//! Trajectory data matrices and their de-bias/normalize preprocessing.
//!
//! Multi-agent position records are arranged as a signals-by-timesteps matrix
//! (agent-major rows: row `d*i + j` holds dimension `j` of agent `i`). Before
//! spectral analysis each row is centered and scaled by `sqrt(N) * s` where
//! `s` is the row's population standard deviation, which makes every retained
//! row unit-norm and drives the singular values of pure-noise data towards 1.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default floor (on the population std) below which a row is considered
/// constant and dropped.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-12;

/// Raw signal matrix: one row per scalar signal, one column per timestep.
#[derive(Debug, Clone)]
pub struct SignalMatrix {
    pub values: DMatrix<f64>,
    /// One label per row, e.g. `a3.x` for agent 3's x coordinate or `c17`
    /// for cell 17 of an automaton trace.
    pub row_labels: Vec<String>,
    pub n_agents: usize,
    pub n_steps: usize,
}

impl SignalMatrix {
    /// Build from explicit rows. Each row is one signal; rows must be equal
    /// length and nonempty. Generic loaded data counts every row as its own
    /// agent.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n_steps = rows[0].len();
        if n_steps < 2 {
            return Err(Error::TooFewSteps { found: n_steps });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_steps {
                return Err(Error::LengthMismatch {
                    agent: i,
                    expected: n_steps,
                    found: r.len(),
                });
            }
        }
        let m = rows.len();
        let values = DMatrix::from_fn(m, n_steps, |r, c| rows[r][c]);
        let row_labels =
            labels.unwrap_or_else(|| (0..m).map(|i| format!("s{i}")).collect());
        Ok(SignalMatrix {
            values,
            row_labels,
            n_agents: m,
            n_steps,
        })
    }

    pub fn n_signals(&self) -> usize {
        self.values.nrows()
    }
}

fn dim_tag(d: usize) -> String {
    match d {
        0 => "x".to_string(),
        1 => "y".to_string(),
        2 => "z".to_string(),
        _ => format!("d{d}"),
    }
}

/// Arrange per-agent time series of `D`-dimensional points into a
/// `D*n_agents x N` matrix with agent-major row order.
pub fn assemble_trajectory<const D: usize>(agents: &[Vec<[f64; D]>]) -> Result<SignalMatrix> {
    if agents.is_empty() || D == 0 {
        return Err(Error::EmptyInput);
    }
    let n_steps = agents[0].len();
    if n_steps < 2 {
        return Err(Error::TooFewSteps { found: n_steps });
    }
    for (i, series) in agents.iter().enumerate() {
        if series.len() != n_steps {
            return Err(Error::LengthMismatch {
                agent: i,
                expected: n_steps,
                found: series.len(),
            });
        }
    }
    let n_agents = agents.len();
    let values = DMatrix::from_fn(D * n_agents, n_steps, |r, c| agents[r / D][c][r % D]);
    let row_labels = (0..D * n_agents)
        .map(|r| format!("a{}.{}", r / D, dim_tag(r % D)))
        .collect();
    Ok(SignalMatrix {
        values,
        row_labels,
        n_agents,
        n_steps,
    })
}

/// Centered and row-normalized matrix, ready for singular-value analysis.
///
/// Every retained row has zero mean and unit Euclidean norm, so the squared
/// Frobenius norm (= sum of squared singular values) equals the number of
/// retained rows.
#[derive(Debug, Clone)]
pub struct PreprocessedMatrix {
    pub values: DMatrix<f64>,
    /// Indices (into the source matrix) of retained rows.
    pub kept_rows: Vec<usize>,
    /// Indices of rows dropped for having population std <= the floor.
    pub dropped_rows: Vec<usize>,
    /// Mean removed from each retained row, parallel to `kept_rows`.
    pub row_means: Vec<f64>,
    /// Population std used to scale each retained row, parallel to `kept_rows`.
    pub row_stds: Vec<f64>,
}

/// Center each row and divide by `sqrt(N) * s` with `s` the population
/// (divide-by-N) standard deviation. Rows with `s <= variance_floor` are
/// dropped and reported.
pub fn preprocess(x: &SignalMatrix, variance_floor: f64) -> Result<PreprocessedMatrix> {
    let (m, n) = (x.values.nrows(), x.values.ncols());
    if n < 2 {
        return Err(Error::TooFewSteps { found: n });
    }
    let mut kept_rows = Vec::new();
    let mut dropped_rows = Vec::new();
    let mut row_means = Vec::new();
    let mut row_stds = Vec::new();
    for i in 0..m {
        let row = x.values.row(i);
        let mean = row.sum() / n as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std <= variance_floor {
            dropped_rows.push(i);
        } else {
            kept_rows.push(i);
            row_means.push(mean);
            row_stds.push(std);
        }
    }
    if kept_rows.is_empty() {
        return Err(Error::DegenerateMatrix {
            dropped: dropped_rows.len(),
            floor: variance_floor,
        });
    }
    let sqrt_n = (n as f64).sqrt();
    let values = DMatrix::from_fn(kept_rows.len(), n, |r, c| {
        (x.values[(kept_rows[r], c)] - row_means[r]) / (sqrt_n * row_stds[r])
    });
    Ok(PreprocessedMatrix {
        values,
        kept_rows,
        dropped_rows,
        row_means,
        row_stds,
    })
}
