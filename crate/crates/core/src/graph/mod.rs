//! Weighted graphs, hop distances, balls and volume profiles.
//!
//! Distances are hop counts even when edges carry weights; the weights only
//! enter through the vertex measure `mu(x) = sum_{y ~ x} mu_xy` and the
//! transition probabilities of the natural walk.

mod diagnostics;
pub mod io;
mod profile;

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use diagnostics::{default_radius_grid, diagnostics, diagnostics_with, GraphDiagnostics, ReverseDoubling};
pub use profile::{volume_profile, BaseConvention, SafeWindow, VolumeProfile};

/// Sentinel for vertices not reached by a search (never produced on a built graph).
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    boundary: Vec<usize>,
    distances: Vec<OnceLock<Arc<[u32]>>>,
    diameter: OnceLock<u32>,
}

/// Builds a graph from an edge list, inferring the vertex count from the
/// largest endpoint.
pub fn build_graph(edges: &[(usize, usize, f64)]) -> Result<WeightedGraph> {
    let n = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    WeightedGraph::from_edges(n, edges)
}

impl WeightedGraph {
    /// Builds a connected weighted graph on `vertex_count` vertices.
    ///
    /// Each undirected edge may be listed in either orientation; repeated
    /// listings of the same pair have their weights summed.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: x, count: vertex_count });
                }
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { u, v, weight: w });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }

        let mut adjacency = vec![Vec::new(); vertex_count];
        for (&(u, v), &w) in &merged {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(y, _)| y);
        }
        let measure: Vec<f64> = adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();

        let graph = WeightedGraph {
            adjacency,
            measure,
            boundary: Vec::new(),
            distances: (0..vertex_count).map(|_| OnceLock::new()).collect(),
            diameter: OnceLock::new(),
        };
        let sizes = graph.component_sizes();
        if sizes.len() > 1 {
            return Err(Error::Disconnected { components: sizes.len(), sizes });
        }
        Ok(graph)
    }

    /// Attaches the designated boundary set used by the boundary-safe window.
    pub fn with_boundary(mut self, mut boundary: Vec<usize>) -> Result<Self> {
        let n = self.vertex_count();
        if let Some(&bad) = boundary.iter().find(|&&b| b >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, count: n });
        }
        boundary.sort_unstable();
        boundary.dedup();
        self.boundary = boundary;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v, mu_uv)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(v, _)| v)
            .map(|i| self.adjacency[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: x, count: self.vertex_count() })
        }
    }

    fn bfs(&self, sources: &[usize]) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut queue = VecDeque::with_capacity(self.vertex_count());
        for &s in sources {
            if dist[s] == UNREACHED {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == UNREACHED {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn component_sizes(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.vertex_count()];
        let mut sizes = Vec::new();
        for start in 0..self.vertex_count() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            let mut stack = vec![start];
            label[start] = id;
            while let Some(u) = stack.pop() {
                size += 1;
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        stack.push(v);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }

    /// Hop distances from `x`, computed once per source and cached.
    pub fn distances_from(&self, x: usize) -> Result<Arc<[u32]>> {
        self.check_vertex(x)?;
        Ok(self.dist_row(x))
    }

    pub(crate) fn dist_row(&self, x: usize) -> Arc<[u32]> {
        self.distances[x].get_or_init(|| self.bfs(&[x]).into()).clone()
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<u32> {
        self.check_vertex(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// Multi-source hop distance to the designated boundary set, or `None`
    /// when no boundary is designated.
    pub fn distance_to_boundary(&self) -> Option<Vec<u32>> {
        if self.boundary.is_empty() {
            None
        } else {
            Some(self.bfs(&self.boundary))
        }
    }

    pub fn eccentricity(&self, x: usize) -> Result<u32> {
        Ok(self.distances_from(x)?.iter().copied().max().unwrap_or(0))
    }

    pub fn diameter(&self) -> u32 {
        *self.diameter.get_or_init(|| {
            (0..self.vertex_count())
                .into_par_iter()
                .map(|x| match self.distances[x].get() {
                    Some(row) => row.iter().copied().max().unwrap_or(0),
                    None => self.bfs(&[x]).into_iter().max().unwrap_or(0),
                })
                .max()
                .unwrap_or(0)
        })
    }

    /// Vertices of `B(x, r) = { y : d(x, y) <= r }` in increasing order.
    pub fn ball(&self, x: usize, r: f64) -> Result<Vec<usize>> {
        let row = self.distances_from(x)?;
        Ok((0..self.vertex_count()).filter(|&y| f64::from(row[y]) <= r).collect())
    }

    /// `V_mu(x, r) = mu(B(x, r))`.
    pub fn ball_volume(&self, x: usize, r: f64) -> Result<f64> {
        let row = self.distances_from(x)?;
        Ok(row
            .iter()
            .zip(&self.measure)
            .filter(|(&d, _)| f64::from(d) <= r)
            .map(|(_, &m)| m)
            .sum())
    }

    /// Cumulative volumes `V_mu(x, r)` for integer `r = 0..=ecc(x)`.
    pub fn volume_by_radius(&self, x: usize) -> Result<Vec<f64>> {
        let row = self.distances_from(x)?;
        let ecc = row.iter().copied().max().unwrap_or(0) as usize;
        let mut shell = vec![0.0; ecc + 1];
        for (y, &d) in row.iter().enumerate() {
            shell[d as usize] += self.measure[y];
        }
        let mut acc = 0.0;
        Ok(shell
            .into_iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect())
    }

    pub fn is_bipartite(&self) -> bool {
        let row = self.dist_row(0);
        self.edges().all(|(u, v, _)| (row[u] + row[v]) % 2 == 1)
    }

    /// Minimum over edges of `P(x, y) = mu_xy / mu(x)`.
    pub fn p0(&self) -> f64 {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(_, w)| w / self.measure[x]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Returns the same graph with every edge weight multiplied by the
    /// corresponding factor in `factors` (in [`WeightedGraph::edges`] order).
    pub fn reweighted(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.edge_count() {
            return Err(Error::DimensionMismatch { expected: self.edge_count(), got: factors.len() });
        }
        let edges: Vec<_> = self
            .edges()
            .zip(factors)
            .map(|((u, v, w), &f)| (u, v, w * f))
            .collect();
        WeightedGraph::from_edges(self.vertex_count(), &edges)?.with_boundary(self.boundary.clone())
    }
}
