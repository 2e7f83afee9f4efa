use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Base vertices and length scale for asymptotic measurements on a finite
/// truncation.
///
/// `r_max` is a quarter of the diameter. Base vertices sit farther than
/// `r_max` from the designated boundary; without a boundary every vertex
/// qualifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafeWindow {
    pub r_max: f64,
    pub base: Vec<usize>,
}

impl SafeWindow {
    pub fn new(g: &WeightedGraph) -> Self {
        Self::with_radius(g, f64::from(g.diameter()) / 4.0)
    }

    pub fn with_radius(g: &WeightedGraph, r_max: f64) -> Self {
        let base = match g.distance_to_boundary() {
            None => (0..g.vertex_count()).collect(),
            Some(dist) => {
                let inside: Vec<usize> =
                    (0..g.vertex_count()).filter(|&x| f64::from(dist[x]) > r_max).collect();
                if inside.is_empty() {
                    // Too small to have an interior: keep the deepest vertices.
                    let deepest = dist.iter().copied().max().unwrap_or(0);
                    (0..g.vertex_count()).filter(|&x| dist[x] == deepest).collect()
                } else {
                    inside
                }
            }
        };
        SafeWindow { r_max, base }
    }

    /// Every vertex as a base point (full-graph diagnostics).
    pub fn full(g: &WeightedGraph) -> Self {
        SafeWindow { r_max: f64::from(g.diameter()), base: (0..g.vertex_count()).collect() }
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.r_max + 1e-12 {
            Err(Error::UnsafeRadius { requested: r, safe: self.r_max })
        } else {
            Ok(())
        }
    }

    /// Every `step`-th base vertex, for scans that do not need all of them.
    pub fn sample(&self, count: usize) -> Vec<usize> {
        if count == 0 || self.base.is_empty() {
            return Vec::new();
        }
        let step = (self.base.len() as f64 / count as f64).max(1.0);
        let mut out: Vec<usize> = (0..count.min(self.base.len()))
            .map(|i| self.base[((i as f64 + 0.5) * step) as usize % self.base.len()])
            .collect();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseConvention {
    /// Median of `V_mu(x, r)` over the base vertices of a [`SafeWindow`].
    Median,
    /// `V(r) = V_mu(x0, r)` for a fixed vertex.
    FixedBase(usize),
}

/// The reference volume function `V`, tabulated at integer radii and
/// extended by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeProfile {
    table: Vec<f64>,
    convention: BaseConvention,
    base_count: usize,
}

pub fn volume_profile(
    g: &WeightedGraph,
    convention: BaseConvention,
    window: &SafeWindow,
) -> Result<VolumeProfile> {
    let (mut table, base_count) = match convention {
        BaseConvention::FixedBase(x0) => (g.volume_by_radius(x0)?, 1),
        BaseConvention::Median => {
            if window.base.is_empty() {
                return Err(Error::EmptyWindow("no base vertices for the median profile".into()));
            }
            let rows: Vec<Vec<f64>> = window
                .base
                .par_iter()
                .map(|&x| g.volume_by_radius(x))
                .collect::<Result<_>>()?;
            let total = g.total_measure();
            let len = rows.iter().map(Vec::len).max().unwrap_or(1);
            let table = (0..len)
                .map(|r| {
                    let mut vals: Vec<f64> =
                        rows.iter().map(|row| row.get(r).copied().unwrap_or(total)).collect();
                    median(&mut vals)
                })
                .collect();
            (table, window.base.len())
        }
    };
    // Stop at the first plateau so the table is strictly increasing.
    if let Some(pos) = table.windows(2).position(|w| w[1] <= w[0]) {
        table.truncate(pos + 1);
    }
    Ok(VolumeProfile { table, convention, base_count })
}

fn median(vals: &mut [f64]) -> f64 {
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

impl VolumeProfile {
    /// Builds a profile from an explicit table (test and file use).
    pub fn from_table(table: Vec<f64>, convention: BaseConvention) -> Result<Self> {
        if table.is_empty() || !(table[0] > 0.0) {
            return Err(Error::InvalidParameter("volume table must start positive".into()));
        }
        if table.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("volume table must be strictly increasing".into()));
        }
        Ok(VolumeProfile { table, convention, base_count: 1 })
    }

    pub fn convention(&self) -> BaseConvention {
        self.convention
    }

    pub fn label(&self) -> String {
        match self.convention {
            BaseConvention::Median => format!("median over {} base vertices", self.base_count),
            BaseConvention::FixedBase(x) => format!("fixed base vertex {x}"),
        }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Largest radius at which the table is still increasing.
    pub fn max_radius(&self) -> f64 {
        (self.table.len() - 1) as f64
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.table[0];
        }
        let last = self.table.len() - 1;
        let i = r.floor() as usize;
        if i >= last {
            return self.table[last];
        }
        let frac = r - i as f64;
        self.table[i] * (1.0 - frac) + self.table[i + 1] * frac
    }

    /// `V^{-1}(v)`: the radius at which the interpolated profile reaches `v`,
    /// clamped to `[0, max_radius]`.
    pub fn inverse(&self, v: f64) -> f64 {
        if v <= self.table[0] {
            return 0.0;
        }
        match self.table.iter().position(|&t| t >= v) {
            None => self.max_radius(),
            Some(i) => {
                let (lo, hi) = (self.table[i - 1], self.table[i]);
                (i - 1) as f64 + (v - lo) / (hi - lo)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn path(edges: usize) -> WeightedGraph {
        let list: Vec<_> = (0..edges).map(|i| (i, i + 1, 1.0)).collect();
        build_graph(&list).unwrap().with_boundary(vec![0, edges]).unwrap()
    }

    #[test]
    fn fixed_base_midpoint_of_path() {
        let g = path(40);
        let w = SafeWindow::new(&g);
        let v = volume_profile(&g, BaseConvention::FixedBase(20), &w).unwrap();
        // unit measure count (interior vertices have mu = 2)
        for r in 0..19 {
            assert_eq!(v.eval(r as f64), 2.0 * (2 * r + 1) as f64);
        }
        assert_eq!(v.eval(0.5), 0.5 * (2.0 + 6.0));
    }

    #[test]
    fn median_profile_is_strictly_increasing_and_positive() {
        let g = path(40);
        let w = SafeWindow::new(&g);
        let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
        assert!(v.eval(0.0) > 0.0);
        assert!(v.table().windows(2).all(|p| p[1] > p[0]));
        assert_eq!(v.eval(3.0), 14.0);
    }

    #[test]
    fn inverse_round_trip() {
        let v = VolumeProfile::from_table(vec![1.0, 3.0, 7.0, 15.0], BaseConvention::Median).unwrap();
        for r in [0.0, 0.25, 1.0, 1.7, 2.9, 3.0] {
            assert!((v.inverse(v.eval(r)) - r).abs() < 1e-12);
        }
        assert_eq!(v.inverse(100.0), 3.0);
        assert_eq!(v.inverse(0.1), 0.0);
    }

    #[test]
    fn window_excludes_boundary_neighbourhood() {
        let g = path(40);
        let w = SafeWindow::new(&g);
        assert_eq!(w.r_max, 10.0);
        assert_eq!(w.base, (11..=29).collect::<Vec<_>>());
        assert!(w.check_radius(10.0).is_ok());
        assert!(matches!(w.check_radius(11.0), Err(Error::UnsafeRadius { .. })));
    }
}
