use std::collections::VecDeque;

use super::MarkovKernel;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::pcg;

/// Symmetric edge conductances `c(x, y)` (no diagonal), the weights of the
/// Dirichlet form `E(f) = 1/2 sum c(x, y) (f(x) - f(y))^2`.
#[derive(Debug, Clone)]
pub struct Conductances {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Conductances {
    /// `c(x, y) = mu_xy`, the form of the natural walk.
    pub fn of_graph(g: &WeightedGraph) -> Self {
        Conductances { rows: (0..g.vertex_count()).map(|x| g.neighbors(x).to_vec()).collect() }
    }

    /// `c(x, y) = k(x, y) mu(x) mu(y)` for `x != y`.
    pub fn of_kernel(k: &MarkovKernel) -> Self {
        let mu = k.measure();
        let rows = (0..k.size())
            .map(|x| {
                k.row_entries(x)
                    .into_iter()
                    .filter(|&(y, v)| y != x && v > 0.0)
                    .map(|(y, v)| (y, v * mu[x] * mu[y]))
                    .collect()
            })
            .collect();
        Conductances { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        0.5 * self
            .rows
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|&(y, c)| c * (f[x] - f[y]).powi(2)).sum::<f64>())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceSolution {
    /// `R(A, B)`; infinite when `B` cannot be reached from `A`.
    pub resistance: f64,
    /// The equilibrium potential: 1 on `A`, 0 on `B`, harmonic elsewhere.
    pub potential: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Relative residual target of the conjugate-gradient solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Effective resistance between disjoint nonempty sets `A` and `B`.
///
/// Solves the Dirichlet problem with Jacobi-preconditioned CG (at most
/// `50 sqrt(N)` iterations) and returns `1 / E(f)`.
pub fn resistance(c: &Conductances, a: &[usize], b: &[usize]) -> Result<ResistanceSolution> {
    let n = c.size();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("resistance needs nonempty A and B".into()));
    }
    let mut role = vec![0u8; n]; // 0 free, 1 in A, 2 in B
    for (set, tag) in [(a, 1u8), (b, 2u8)] {
        for &x in set {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, count: n });
            }
            if role[x] != 0 && role[x] != tag {
                return Err(Error::InvalidParameter(format!("vertex {x} lies in both A and B")));
            }
            role[x] = tag;
        }
    }

    // Free vertices that no path links to A or B carry no energy; B
    // unreachable from A means infinite resistance.
    let reach_from = |tag: u8| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| role[x] == tag).collect();
        for &x in &queue {
            seen[x] = true;
        }
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &c.rows[x] {
                if !seen[y] {
                    seen[y] = true;
                    if role[y] == 0 {
                        queue.push_back(y);
                    }
                }
            }
        }
        seen
    };
    let from_a = reach_from(1);
    let mut potential: Vec<f64> = role.iter().map(|&r| if r == 1 { 1.0 } else { 0.0 }).collect();
    if !(0..n).any(|x| role[x] == 2 && from_a[x]) {
        return Ok(ResistanceSolution { resistance: f64::INFINITY, potential, iterations: 0, residual: 0.0 });
    }
    let from_b = reach_from(2);

    let free: Vec<usize> = (0..n).filter(|&x| role[x] == 0 && from_a[x] && from_b[x]).collect();
    for x in 0..n {
        if role[x] == 0 && from_a[x] && !from_b[x] {
            potential[x] = 1.0;
        }
    }
    let mut index = vec![usize::MAX; n];
    for (i, &x) in free.iter().enumerate() {
        index[x] = i;
    }
    let diag: Vec<f64> = free.iter().map(|&x| c.rows[x].iter().map(|e| e.1).sum()).collect();
    let rhs: Vec<f64> = free
        .iter()
        .map(|&x| c.rows[x].iter().filter(|&&(y, _)| role[y] == 1).map(|e| e.1).sum())
        .collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        free.iter()
            .enumerate()
            .map(|(i, &x)| {
                let off: f64 = c.rows[x]
                    .iter()
                    .filter(|&&(y, _)| index[y] != usize::MAX)
                    .map(|&(y, w)| w * v[index[y]])
                    .sum();
                diag[i] * v[i] - off
            })
            .collect()
    };
    let max_iter = ((50.0 * (n as f64).sqrt()).ceil() as usize).max(1);
    let (iterations, residual) = if free.is_empty() {
        (0, 0.0)
    } else {
        let s = pcg(apply, &diag, &rhs, RESIDUAL_TOL, max_iter)?;
        for (i, &x) in free.iter().enumerate() {
            potential[x] = s.x[i];
        }
        (s.iterations, s.residual)
    };
    let energy = c.energy(&potential);
    Ok(ResistanceSolution { resistance: 1.0 / energy, potential, iterations, residual })
}
