use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Weighted point cloud: an empirical distribution over feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<SampleSet> {
        if points.is_empty() {
            return Err(Error::InvalidSampleSet("no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidSampleSet(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample point".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSampleSet("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() >= 1e-9 {
            return Err(Error::InvalidSampleSet(format!("weights sum to {total}, not 1")));
        }
        Ok(SampleSet { points, weights })
    }

    pub fn uniform(points: Vec<Vec<f64>>) -> Result<SampleSet> {
        let n = points.len();
        SampleSet::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Keeps at most `max` points, drawn uniformly without replacement, and
    /// renormalizes their weights. Original order is preserved.
    pub fn subsample<R: Rng + ?Sized>(&self, max: usize, rng: &mut R) -> SampleSet {
        if self.len() <= max || max == 0 {
            return self.clone();
        }
        let mut picked = index::sample(rng, self.len(), max).into_vec();
        picked.sort_unstable();
        let total: f64 = picked.iter().map(|&i| self.weights[i]).sum();
        let (points, weights) = if total > 0.0 {
            (
                picked.iter().map(|&i| self.points[i].clone()).collect(),
                picked.iter().map(|&i| self.weights[i] / total).collect(),
            )
        } else {
            (
                picked.iter().map(|&i| self.points[i].clone()).collect(),
                vec![1.0 / max as f64; max],
            )
        };
        SampleSet { points, weights }
    }

    /// Merges identical points, summing their weights. The distribution is
    /// unchanged; first-occurrence order is kept.
    pub fn compact(&self) -> SampleSet {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let key: Vec<u64> = p.iter().map(|x| canonical_bits(*x)).collect();
            match index.get(&key) {
                Some(&k) => weights[k] += w,
                None => {
                    index.insert(key, points.len());
                    points.push(p.clone());
                    weights.push(w);
                }
            }
        }
        SampleSet { points, weights }
    }

    pub fn scaled(&self, c: f64) -> SampleSet {
        SampleSet {
            points: self.points.iter().map(|p| p.iter().map(|x| x * c).collect()).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Content hash, independent of where the set came from.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.points.len().hash(&mut h);
        for (p, w) in self.points.iter().zip(&self.weights) {
            for x in p {
                canonical_bits(*x).hash(&mut h);
            }
            canonical_bits(*w).hash(&mut h);
        }
        h.finish()
    }

    /// Same weighted multiset of points, regardless of order.
    pub fn same_distribution(&self, other: &SampleSet) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.compact().sorted_atoms();
        let b = other.compact().sorted_atoms();
        a.len() == b.len()
            && a.iter().zip(&b).all(|((pa, wa), (pb, wb))| pa == pb && (wa - wb).abs() < 1e-12)
    }

    fn sorted_atoms(&self) -> Vec<(Vec<f64>, f64)> {
        let mut atoms: Vec<(Vec<f64>, f64)> = self.points.iter().cloned().zip(self.weights.iter().copied()).collect();
        atoms.sort_by(|a, b| cmp_points(&a.0, &b.0));
        atoms
    }

    /// Total order on sets used to make pairwise computations symmetric.
    pub(crate) fn canonical_cmp(&self, other: &SampleSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                for (a, b) in self.points.iter().zip(&other.points) {
                    match cmp_points(a, b) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                Ordering::Equal
            })
            .then_with(|| {
                for (a, b) in self.weights.iter().zip(&other.weights) {
                    match a.total_cmp(b) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn canonical_bits(x: f64) -> u64 {
    // -0.0 and 0.0 are the same point
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}
