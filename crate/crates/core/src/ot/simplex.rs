//! Exact discrete optimal transport via the transportation simplex.
//!
//! The basis is a spanning tree over `rows + cols` nodes. Each pivot prices
//! every non-basic cell with the dual potentials, adds the most negative one
//! and pushes flow around the cycle it closes in the tree. After a run of
//! degenerate pivots the solver switches to Bland's rule, which cannot cycle.

use std::collections::VecDeque;

use super::{CostMatrix, SampleSet, Transport, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmdOptions {
    /// Largest `rows * cols` accepted by the exact solver.
    pub max_cells: usize,
}

impl Default for EmdOptions {
    fn default() -> Self {
        EmdOptions { max_cells: 256 * 256 }
    }
}

/// Exact `W_p` between two sample sets under the Euclidean ground cost.
pub fn emd(p: &SampleSet, q: &SampleSet, exponent: f64) -> Result<Transport> {
    emd_with(p, q, exponent, &EmdOptions::default())
}

pub fn emd_with(p: &SampleSet, q: &SampleSet, exponent: f64, options: &EmdOptions) -> Result<Transport> {
    if !(exponent >= 1.0) || !exponent.is_finite() {
        return Err(Error::InvalidArgument(format!("wasserstein exponent {exponent} must be >= 1")));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if p.len() * q.len() > options.max_cells {
        return Err(Error::SizeCap {
            rows: p.len(),
            cols: q.len(),
            cap: options.max_cells,
        });
    }
    // Solve in a canonical orientation so that emd(p, q) and emd(q, p) run
    // the same arithmetic and agree bit for bit.
    if p.canonical_cmp(q).is_gt() {
        let t = solve(q, p, exponent)?;
        return Ok(Transport {
            distance: t.distance,
            plan: t.plan.transpose(),
        });
    }
    solve(p, q, exponent)
}

fn solve(p: &SampleSet, q: &SampleSet, exponent: f64) -> Result<Transport> {
    let cost = CostMatrix::between(p, q, exponent)?;
    let plan = transport_simplex(p.weights(), q.weights(), &cost)?;
    let total = plan.cost(&cost).max(0.0);
    let distance = if exponent == 1.0 { total } else { total.powf(1.0 / exponent) };
    Ok(Transport { distance, plan })
}

/// Minimum-cost coupling of `supply` and `demand` (each summing to the same
/// total) under `cost`.
pub(crate) fn transport_simplex(supply: &[f64], demand: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    let (n, m) = (supply.len(), demand.len());
    if n == 0 || m == 0 || cost.rows != n || cost.cols != m {
        return Err(Error::InvalidArgument("cost matrix does not match the marginals".into()));
    }
    let mass_gap = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    if mass_gap.abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("unbalanced marginals (mass gap {mass_gap:e})")));
    }
    let c = &cost.data;
    let mut tree = Basis::least_cost(supply, demand, c, n, m);
    let max_cost = c.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-12 * (1.0 + max_cost);
    let max_pivots = 50 * n * m + 1000;

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut degenerate_run = 0usize;
    let mut bland = false;
    for pivot in 0.. {
        if pivot > max_pivots {
            return Err(Error::SimplexStalled(pivot));
        }
        tree.rebuild_adjacency();
        tree.potentials(c, &mut u, &mut v);

        let mut entering = None;
        let mut best = -tol;
        'pricing: for i in 0..n {
            let row = &c[i * m..(i + 1) * m];
            for j in 0..m {
                let cell = i * m + j;
                if tree.basic[cell] {
                    continue;
                }
                let r = row[j] - u[i] - v[j];
                if bland {
                    if r < -tol {
                        entering = Some(cell);
                        break 'pricing;
                    }
                } else if r < best {
                    best = r;
                    entering = Some(cell);
                }
            }
        }
        let Some(entering) = entering else { break };

        let cycle = tree.cycle(entering / m, entering % m);
        // cycle[0] touches the entering column and loses flow; signs alternate
        let mut leaving = cycle[0];
        let mut theta = f64::INFINITY;
        for &cell in cycle.iter().step_by(2) {
            let f = tree.flow[cell];
            if f < theta || (bland && f == theta && cell < leaving) {
                theta = f;
                leaving = cell;
            }
        }
        let theta = theta.max(0.0);
        tree.flow[entering] = theta;
        for (k, &cell) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                tree.flow[cell] = (tree.flow[cell] - theta).max(0.0);
            } else {
                tree.flow[cell] += theta;
            }
        }
        tree.flow[leaving] = 0.0;
        tree.swap(leaving, entering);

        if theta <= 1e-15 {
            degenerate_run += 1;
            if degenerate_run > n + m {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
    Ok(TransportPlan {
        rows: n,
        cols: m,
        data: tree.flow,
    })
}

struct Basis {
    n: usize,
    m: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
    cells: Vec<usize>,
    /// node -> (neighbour node, cell); rows are nodes `0..n`, columns `n..n+m`
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Basis {
    /// Least-cost starting solution: repeatedly fill the cheapest open cell
    /// and close exactly one exhausted line (both on the final cell), which
    /// yields `n + m - 1` basic cells forming a spanning tree.
    fn least_cost(supply: &[f64], demand: &[f64], c: &[f64], n: usize, m: usize) -> Basis {
        let mut order: Vec<usize> = (0..n * m).collect();
        order.sort_by(|&x, &y| c[x].total_cmp(&c[y]).then(x.cmp(&y)));
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut row_closed = vec![false; n];
        let mut col_closed = vec![false; m];
        let (mut rows_left, mut cols_left) = (n, m);
        let mut flow = vec![0.0; n * m];
        let mut basic = vec![false; n * m];
        let mut cells = Vec::with_capacity(n + m - 1);
        for &cell in &order {
            let (i, j) = (cell / m, cell % m);
            if row_closed[i] || col_closed[j] {
                continue;
            }
            let x = s[i].min(d[j]).max(0.0);
            flow[cell] = x;
            basic[cell] = true;
            cells.push(cell);
            s[i] -= x;
            d[j] -= x;
            if rows_left == 1 && cols_left == 1 {
                break;
            }
            let close_row = if rows_left == 1 {
                false
            } else if cols_left == 1 {
                true
            } else {
                s[i] <= d[j]
            };
            if close_row {
                row_closed[i] = true;
                rows_left -= 1;
            } else {
                col_closed[j] = true;
                cols_left -= 1;
            }
        }
        debug_assert_eq!(cells.len(), n + m - 1);
        Basis {
            n,
            m,
            flow,
            basic,
            cells,
            adjacency: vec![Vec::new(); n + m],
        }
    }

    fn rebuild_adjacency(&mut self) {
        for adj in &mut self.adjacency {
            adj.clear();
        }
        for &cell in &self.cells {
            let (i, j) = (cell / self.m, cell % self.m);
            self.adjacency[i].push((self.n + j, cell));
            self.adjacency[self.n + j].push((i, cell));
        }
    }

    /// Dual potentials with `u[0] = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, c: &[f64], u: &mut [f64], v: &mut [f64]) {
        let mut seen = vec![false; self.n + self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &(next, cell) in &self.adjacency[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                if next >= self.n {
                    v[next - self.n] = c[cell] - u[node];
                } else {
                    u[next] = c[cell] - v[node - self.n];
                }
                stack.push(next);
            }
        }
    }

    /// Basic cells on the tree path from column `j` to row `i`, starting
    /// at column `j`.
    fn cycle(&self, i: usize, j: usize) -> Vec<usize> {
        let total = self.n + self.m;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        let mut queue = VecDeque::new();
        seen[i] = true;
        queue.push_back(i);
        let target = self.n + j;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, cell) in &self.adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, cell));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != i {
            let (prev, cell) = parent[node].expect("basis is a spanning tree");
            path.push(cell);
            node = prev;
        }
        path
    }

    fn swap(&mut self, leaving: usize, entering: usize) {
        self.basic[leaving] = false;
        self.basic[entering] = true;
        let slot = self.cells.iter().position(|&c| c == leaving).expect("leaving cell is basic");
        self.cells[slot] = entering;
    }
}
