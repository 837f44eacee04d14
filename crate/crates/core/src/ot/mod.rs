//! Optimal transport between empirical distributions.
//!
//! [`emd`] solves the discrete transport linear program exactly with a
//! transportation simplex; [`sinkhorn`] gives an entropic approximation for
//! problems above the exact solver's size cap. [`level_distance`] applies
//! either to the state-action samples of two levels.

mod distance;
mod sample;
mod simplex;
mod sinkhorn;

pub use distance::{level_distance, DistanceConfig};
pub use sample::SampleSet;
pub use simplex::{emd, emd_with, EmdOptions};
pub use sinkhorn::{sinkhorn, SinkhornConfig, SinkhornOutput};

use crate::error::{Error, Result};

/// Euclidean distance.
pub fn ground_cost(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pairwise ground costs raised to `exponent`, row-major `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub metric: &'static str,
    pub exponent: f64,
}

impl CostMatrix {
    pub fn between(p: &SampleSet, q: &SampleSet, exponent: f64) -> Result<CostMatrix> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: q.dim(),
            });
        }
        let mut data = Vec::with_capacity(p.len() * q.len());
        for a in p.points() {
            for b in q.points() {
                let d = euclidean(a, b);
                data.push(if exponent == 1.0 { d } else { d.powf(exponent) });
            }
        }
        Ok(CostMatrix {
            rows: p.len(),
            cols: q.len(),
            data,
            metric: "euclidean",
            exponent,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn median(&self) -> f64 {
        let mut v = self.data.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            0.0
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// A coupling between two weight vectors, row-major `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            out.iter_mut().zip(row).for_each(|(o, x)| *o += x);
        }
        out
    }

    pub fn transpose(&self) -> TransportPlan {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        TransportPlan {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `sum_ij plan_ij * cost_ij`.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        self.data.iter().zip(&cost.data).map(|(p, c)| p * c).sum()
    }

    /// Largest absolute marginal violation against the given weights.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = self.row_sums().iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        r.max(c)
    }
}

/// Result of an exact transport solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    /// `W_p`, the optimal cost raised to `1/p`.
    pub distance: f64,
    pub plan: TransportPlan,
}
