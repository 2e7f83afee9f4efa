//! Test-function families: normalized ball indicators, resistance
//! potentials, seeded random vectors and low-lying eigenvectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::operators::{norm_l2, resistance, Conductances, MarkovKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFamily {
    BallIndicators,
    Harmonic,
    Random,
    Eigenvectors,
}

/// `1_{B(x, r)} / mu(B(x, r))` for `r = 0, 1, 2, 4, ...` up to `r_max`.
pub fn ball_indicators(g: &WeightedGraph, centers: &[usize], r_max: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for &x in centers {
        let mut r = 0.0;
        while r <= r_max {
            let ball = g.ball(x, r)?;
            let vol: f64 = ball.iter().map(|&y| g.measure(y)).sum();
            let mut f = vec![0.0; g.vertex_count()];
            for y in ball {
                f[y] = 1.0 / vol;
            }
            out.push(f);
            r = if r == 0.0 { 1.0 } else { 2.0 * r };
        }
    }
    Ok(out)
}

/// Equilibrium potentials of `R_P(B(x, r), B(x, 2r)^c)`.
pub fn harmonic_minimizers(g: &WeightedGraph, centers: &[usize], radii: &[f64]) -> Result<Vec<Vec<f64>>> {
    let c = Conductances::of_graph(g);
    let mut out = Vec::new();
    for &x in centers {
        let d = g.distances_from(x)?;
        for &r in radii {
            let inner: Vec<usize> = (0..g.vertex_count()).filter(|&y| f64::from(d[y]) <= r).collect();
            let outer: Vec<usize> = (0..g.vertex_count()).filter(|&y| f64::from(d[y]) > 2.0 * r).collect();
            if outer.is_empty() {
                continue;
            }
            out.push(resistance(&c, &inner, &outer)?.potential);
        }
    }
    Ok(out)
}

/// Gaussian vectors normalized to unit `l^2(mu)` norm.
pub fn random_functions(mu: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f: Vec<f64> = (0..mu.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm_l2(&f, mu);
            f.into_iter().map(|v| v / n).collect()
        })
        .collect()
}

/// The `count` eigenfunctions of `K` with the largest eigenvalues below the
/// top one, as functions in `l^2(mu)`.
pub fn top_eigenvectors(k: &MarkovKernel, count: usize) -> Vec<Vec<f64>> {
    let spec = k.spectrum();
    let mut order: Vec<usize> = (0..spec.len()).collect();
    order.sort_by(|&a, &b| spec.values[b].total_cmp(&spec.values[a]).then(a.cmp(&b)));
    let mu = k.measure();
    order
        .into_iter()
        .skip(1)
        .take(count)
        .map(|j| (0..mu.len()).map(|x| spec.vectors[(x, j)] / mu[x].sqrt()).collect())
        .collect()
}
