//! Deterministic graph families: the Sierpinski gasket graph, the Vicsek
//! tree, lattice boxes and two simple controls (cycle, path).
//!
//! Every generator produces unit weights, a fixed vertex numbering and an
//! explicit boundary set.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Default vertex budget checked before generation.
pub const DEFAULT_VERTEX_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SierpinskiGasket,
    VicsekTree,
    LatticeBox,
    Cycle,
    Path,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SierpinskiGasket => "sierpinski_gasket",
            Family::VicsekTree => "vicsek_tree",
            Family::LatticeBox => "lattice_box",
            Family::Cycle => "cycle",
            Family::Path => "path",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sierpinski_gasket" | "gasket" => Family::SierpinskiGasket,
            "vicsek_tree" | "vicsek" => Family::VicsekTree,
            "lattice_box" | "lattice" => Family::LatticeBox,
            "cycle" => Family::Cycle,
            "path" => Family::Path,
            other => return Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        })
    }
}

/// A family member. `level_or_size` is the level for the gasket and Vicsek
/// tree, the side length (vertices per axis) for lattice boxes, the vertex
/// count for cycles and the edge count for paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub level_or_size: u32,
    #[serde(default = "one")]
    pub dimension: u32,
}

fn one() -> u32 {
    1
}

impl FamilySpec {
    pub fn gasket(level: u32) -> Self {
        FamilySpec { family: Family::SierpinskiGasket, level_or_size: level, dimension: 2 }
    }

    pub fn vicsek(level: u32) -> Self {
        FamilySpec { family: Family::VicsekTree, level_or_size: level, dimension: 2 }
    }

    pub fn lattice(side: u32, dimension: u32) -> Self {
        FamilySpec { family: Family::LatticeBox, level_or_size: side, dimension }
    }

    pub fn cycle(n: u32) -> Self {
        FamilySpec { family: Family::Cycle, level_or_size: n, dimension: 1 }
    }

    pub fn path(edges: u32) -> Self {
        FamilySpec { family: Family::Path, level_or_size: edges, dimension: 1 }
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::LatticeBox => format!("lattice_box side {} dim {}", self.level_or_size, self.dimension),
            Family::Cycle | Family::Path => format!("{} {}", self.family.name(), self.level_or_size),
            _ => format!("{} level {}", self.family.name(), self.level_or_size),
        }
    }

    /// Vertex count the generator would produce, without building anything.
    pub fn predicted_vertices(&self) -> Result<u128> {
        let l = self.level_or_size;
        let overflow = || Error::BudgetExceeded {
            family: self.label(),
            predicted: u128::MAX,
            limit: DEFAULT_VERTEX_BUDGET,
        };
        match self.family {
            Family::SierpinskiGasket => {
                let p = 3u128.checked_pow(l).ok_or_else(overflow)?;
                Ok(3 * (p + 1) / 2)
            }
            Family::VicsekTree => Ok(4 * 5u128.checked_pow(l).ok_or_else(overflow)? + 1),
            Family::LatticeBox => {
                if l < 2 || self.dimension == 0 {
                    return Err(Error::InvalidParameter("lattice box needs side >= 2 and dimension >= 1".into()));
                }
                u128::from(l).checked_pow(self.dimension).ok_or_else(overflow)
            }
            Family::Cycle => {
                if l < 3 {
                    return Err(Error::InvalidParameter("cycle needs at least 3 vertices".into()));
                }
                Ok(u128::from(l))
            }
            Family::Path => {
                if l < 1 {
                    return Err(Error::InvalidParameter("path needs at least 1 edge".into()));
                }
                Ok(u128::from(l) + 1)
            }
        }
    }
}

/// Builds the graph for `spec` under the default vertex budget.
pub fn generate(spec: &FamilySpec) -> Result<WeightedGraph> {
    generate_with_budget(spec, DEFAULT_VERTEX_BUDGET)
}

pub fn generate_with_budget(spec: &FamilySpec, budget: usize) -> Result<WeightedGraph> {
    let predicted = spec.predicted_vertices()?;
    if predicted > budget as u128 {
        return Err(Error::BudgetExceeded { family: spec.label(), predicted, limit: budget });
    }
    let l = spec.level_or_size;
    let (n, edges, boundary) = match spec.family {
        Family::SierpinskiGasket => gasket(l),
        Family::VicsekTree => vicsek(l),
        Family::LatticeBox => lattice(l as usize, spec.dimension as usize),
        Family::Cycle => {
            let n = l as usize;
            let edges = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
            (n, edges, Vec::new())
        }
        Family::Path => {
            let n = l as usize;
            ((n + 1), (0..n).map(|i| (i, i + 1, 1.0)).collect(), vec![0, n])
        }
    };
    debug_assert_eq!(n as u128, predicted);
    WeightedGraph::from_edges(n, &edges)?.with_boundary(boundary)
}

/// Generates `spec` and multiplies every edge weight by an independent
/// uniform factor in `[1/2, 2]` drawn from a seeded generator.
pub fn generate_perturbed(spec: &FamilySpec, seed: u64) -> Result<WeightedGraph> {
    let g = generate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<f64> = (0..g.edge_count()).map(|_| rng.random_range(0.5..=2.0)).collect();
    g.reweighted(&factors)
}

/// Reference exponents `(alpha, gamma)`: volume growth and walk dimension.
pub fn expected_exponents(spec: &FamilySpec) -> Result<(f64, f64)> {
    match spec.family {
        Family::LatticeBox => Ok((f64::from(spec.dimension), 2.0)),
        Family::SierpinskiGasket => Ok((3f64.ln() / 2f64.ln(), 5f64.ln() / 2f64.ln())),
        Family::VicsekTree => {
            let a = 5f64.ln() / 3f64.ln();
            Ok((a, 1.0 + a))
        }
        Family::Cycle | Family::Path => {
            Err(Error::Unsupported(format!("no reference exponents for {}", spec.family.name())))
        }
    }
}

type Built = (usize, Vec<(usize, usize, f64)>, Vec<usize>);

/// Numbers a set of integer points by `(y, x)` order and maps coordinate edges.
fn number(points: &BTreeSet<(i64, i64)>, edges: &[((i64, i64), (i64, i64))], corners: &[(i64, i64)]) -> Built {
    let index: HashMap<(i64, i64), usize> = points.iter().enumerate().map(|(i, &(y, x))| ((x, y), i)).collect();
    let mut list: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|(a, b)| {
            let (i, j) = (index[a], index[b]);
            (i.min(j), i.max(j), 1.0)
        })
        .collect();
    list.sort_by_key(|a| (a.0, a.1));
    list.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let boundary = corners.iter().map(|c| index[c]).collect();
    (points.len(), list, boundary)
}

/// Coordinates `(a, b)` with `a, b >= 0`, `a + b <= 2^level`; the level `L+1`
/// graph is three copies of level `L` shifted by `2^L` along each axis.
fn gasket_coords(level: u32) -> Vec<((i64, i64), (i64, i64))> {
    let mut edges = vec![((0, 0), (1, 0)), ((0, 0), (0, 1)), ((1, 0), (0, 1))];
    for l in 0..level {
        let s = 1i64 << l;
        let mut next = Vec::with_capacity(edges.len() * 3);
        for (dx, dy) in [(0, 0), (s, 0), (0, s)] {
            next.extend(edges.iter().map(|&((a, b), (c, d))| ((a + dx, b + dy), (c + dx, d + dy))));
        }
        edges = next;
    }
    edges
}

fn gasket(level: u32) -> Built {
    let edges = gasket_coords(level);
    let points: BTreeSet<(i64, i64)> = edges.iter().flat_map(|&(p, q)| [(p.1, p.0), (q.1, q.0)]).collect();
    let s = 1i64 << level;
    number(&points, &edges, &[(0, 0), (s, 0), (0, s)])
}

fn vicsek(level: u32) -> Built {
    let mut edges = vec![((0, 0), (1, 0)), ((0, 0), (-1, 0)), ((0, 0), (0, 1)), ((0, 0), (0, -1))];
    let mut arm = 1i64;
    for _ in 0..level {
        let shift = 2 * arm;
        let mut next = Vec::with_capacity(edges.len() * 5);
        for (dx, dy) in [(0, 0), (shift, 0), (-shift, 0), (0, shift), (0, -shift)] {
            next.extend(edges.iter().map(|&((a, b), (c, d))| ((a + dx, b + dy), (c + dx, d + dy))));
        }
        edges = next;
        arm *= 3;
    }
    let points: BTreeSet<(i64, i64)> = edges.iter().flat_map(|&(p, q)| [(p.1, p.0), (q.1, q.0)]).collect();
    number(&points, &edges, &[(arm, 0), (-arm, 0), (0, arm), (0, -arm)])
}

fn lattice(side: usize, dim: usize) -> Built {
    let n = side.pow(dim as u32);
    let mut edges = Vec::with_capacity(n * dim);
    let mut boundary = Vec::new();
    let mut coord = vec![0usize; dim];
    for v in 0..n {
        let mut rem = v;
        for c in coord.iter_mut().rev() {
            *c = rem % side;
            rem /= side;
        }
        if coord.iter().any(|&c| c == 0 || c == side - 1) {
            boundary.push(v);
        }
        let mut stride = 1;
        for k in (0..dim).rev() {
            if coord[k] + 1 < side {
                edges.push((v, v + stride, 1.0));
            }
            stride *= side;
        }
    }
    edges.sort_by_key(|a| (a.0, a.1));
    (n, edges, boundary)
}

/// Gasket vertex coordinates in generator order, for tests that need geometry.
pub fn gasket_vertex_coords(level: u32) -> Vec<(i64, i64)> {
    let edges = gasket_coords(level);
    let points: BTreeSet<(i64, i64)> = edges.iter().flat_map(|&(p, q)| [(p.1, p.0), (q.1, q.0)]).collect();
    points.into_iter().map(|(b, a)| (a, b)).collect()
}
