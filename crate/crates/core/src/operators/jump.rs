use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{KernelLabel, KernelMeta, MarkovKernel};
use crate::asymptotics::JumpProfile;
use crate::error::{Error, Result};
use crate::graph::{SafeWindow, VolumeProfile, WeightedGraph};

/// Extremes of `k(x, y) V(d) phi(d)` over pairs of base vertices at distance
/// at least `d_min`, and the resulting two-sided constant.
fn comparability(
    k: &DMatrix<f64>,
    g: &WeightedGraph,
    phi: &JumpProfile,
    v: &VolumeProfile,
    base: &[usize],
    d_min: u32,
) -> Option<((f64, f64), f64)> {
    let per_x: Vec<(f64, f64)> = base
        .par_iter()
        .map(|&x| {
            let d = g.dist_row(x);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &y in base {
                if d[y] >= d_min && y != x {
                    let r = f64::from(d[y]);
                    let ratio = k[(x, y)] * v.eval(r) * phi.eval(r);
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
            (lo, hi)
        })
        .collect();
    let (lo, hi) = per_x.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    (lo.is_finite() && hi.is_finite()).then(|| ((lo, hi), hi.max(1.0 / lo)))
}

/// Heavy-tailed jump kernel with off-diagonal `k(x, y) = w(d) / Z`,
/// `w(d) = 1 / (V(d) phi(d))` and `Z = 2 max_x sum_{y != x} w(d(x, y)) mu(y)`.
/// The leftover mass of each row sits on the diagonal.
pub fn jump_kernel(g: &WeightedGraph, phi: &JumpProfile, v: &VolumeProfile) -> Result<MarkovKernel> {
    let n = g.vertex_count();
    let diam = g.diameter() as usize;
    let w: Vec<f64> = (0..=diam)
        .map(|d| if d == 0 { 0.0 } else { 1.0 / (v.eval(d as f64) * phi.eval(d as f64)) })
        .collect();
    let mu = g.measures();
    let masses: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let d = g.dist_row(x);
            (0..n).map(|y| w[d[y] as usize] * mu[y]).sum()
        })
        .collect();
    let z = 2.0 * masses.iter().copied().fold(0.0, f64::max);
    if !(z > 0.0) {
        return Err(Error::InvalidParameter("jump kernel needs at least one off-diagonal pair".into()));
    }
    let mut k = DMatrix::zeros(n, n);
    k.par_column_iter_mut().enumerate().for_each(|(y, mut col)| {
        let d = g.dist_row(y);
        for x in 0..n {
            col[x] = w[d[x] as usize] / z;
        }
    });
    for x in 0..n {
        k[(x, x)] = (1.0 - masses[x] / z) / mu[x];
    }
    let window = SafeWindow::new(g);
    let mut meta = KernelMeta { normalization: Some(z), ..KernelMeta::default() };
    if let Some((band, c)) = comparability(&k, g, phi, v, &window.base, 1) {
        meta.band = Some(band);
        meta.c_phi = Some(c);
    }
    let label = KernelLabel::Jump { beta: phi.beta, log_exponent: phi.log_exponent };
    Ok(MarkovKernel::dense_unchecked(k, mu.into(), label, meta))
}

/// Default truncation `N_T = 4 * diameter`, so that the largest retained
/// power `2 floor(N_T^gamma)` is far past the mixing time.
pub fn default_truncation(g: &WeightedGraph) -> usize {
    4 * (g.diameter() as usize).max(1)
}

/// Mixture weights `c_phi / (n phi(n))` for `n = 1..=n_t` with the tail
/// `sum_{n > n_t}` folded into the last one. Returns `(weights, c_phi, folded)`.
pub fn subordination_weights(phi: &JumpProfile, n_t: usize) -> (Vec<f64>, f64, f64) {
    // Full series: exact partial sum to a cutoff, then the integral tail.
    let cutoff = n_t.max(100_000);
    let partial: f64 = (1..=cutoff).map(|n| 1.0 / (n as f64 * phi.eval(n as f64))).sum();
    let a = cutoff as f64 + 0.5;
    let tail = crate::asymptotics::integrate(
        |u: f64| 1.0 / phi.eval(a * u.exp()),
        0.0,
        40.0 / phi.beta.min(40.0),
        1e-12,
    );
    let c = 1.0 / (partial + tail);
    let mut weights: Vec<f64> = (1..=n_t).map(|n| c / (n as f64 * phi.eval(n as f64))).collect();
    let kept: f64 = weights[..n_t - 1].iter().sum();
    let folded = 1.0 - kept - weights[n_t - 1];
    weights[n_t - 1] = 1.0 - kept;
    (weights, c, folded)
}

/// `Q_phi = sum_{n=1}^{N_T} c_phi / (n phi(n)) Q^{2 floor(n^gamma)}`, evaluated
/// through the spectrum of `Q`.
pub fn subordinated_kernel(
    q: &MarkovKernel,
    g: &WeightedGraph,
    phi: &JumpProfile,
    gamma: f64,
    n_t: usize,
    v: &VolumeProfile,
) -> Result<MarkovKernel> {
    if !(gamma >= 2.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 2 (got {gamma})")));
    }
    if n_t < 1 {
        return Err(Error::InvalidParameter("truncation N_T must be at least 1".into()));
    }
    if q.size() != g.vertex_count() {
        return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: q.size() });
    }
    let (weights, c, folded) = subordination_weights(phi, n_t);
    let exps: Vec<f64> = (1..=n_t).map(|n| (n as f64).powf(gamma).floor()).collect();
    let h = |l: f64| -> f64 {
        let l2 = l * l;
        weights.iter().zip(&exps).map(|(w, &m)| w * l2.powf(m)).sum()
    };
    let top = 2.0 * exps[n_t - 1];
    let meta = KernelMeta {
        normalization: Some(c),
        truncation: Some(n_t),
        folded_mass: Some(folded),
        truncation_warning: top < f64::from(g.diameter()),
        ..KernelMeta::default()
    };
    let label = KernelLabel::Subordinated { beta: phi.beta, log_exponent: phi.log_exponent, gamma, n_t };
    let mut kernel = q.spectral_function(h, label, meta);
    let window = SafeWindow::new(g);
    let found = kernel.dense_table().and_then(|k| comparability(k, g, phi, v, &window.base, 2));
    if let Some((band, cst)) = found {
        kernel.meta.band = Some(band);
        kernel.meta.c_phi = Some(cst);
    }
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, volume_profile, BaseConvention};
    use crate::operators::{lazy_pair, natural_walk};

    #[test]
    fn two_vertex_jump_kernel() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        let v = volume_profile(&g, BaseConvention::FixedBase(0), &SafeWindow::full(&g)).unwrap();
        let k = jump_kernel(&g, &JumpProfile::power(1.0).unwrap(), &v).unwrap();
        assert!((k.entry(0, 1) * 1.0 - 0.5).abs() < 1e-15);
        assert!(k.stochasticity_error() < 1e-15);
    }

    #[test]
    fn subordination_weights_sum_to_one() {
        let phi = JumpProfile::power(1.0).unwrap();
        let (w, c, folded) = subordination_weights(&phi, 10);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // sum 1/(n(n+1)) = 1
        assert!((c - 1.0).abs() < 1e-9, "c = {c}");
        assert!((folded - c / 11.0).abs() < 1e-9);
    }

    #[test]
    fn subordinated_two_vertex_diagonal() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        let q = lazy_pair(&natural_walk(&g)).unwrap();
        let v = volume_profile(&g, BaseConvention::FixedBase(0), &SafeWindow::full(&g)).unwrap();
        let k = subordinated_kernel(&q, &g, &JumpProfile::power(1.5).unwrap(), 2.0, 5, &v).unwrap();
        // Q^m on two vertices is the uniform kernel for every m >= 1.
        assert!((k.entry(0, 0) - 0.5).abs() < 1e-14);
        assert!(k.stochasticity_error() < 1e-14);
    }
}
