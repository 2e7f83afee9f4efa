use nalgebra::DMatrix;

use super::{Band, ConstantReport};
use crate::asymptotics::EtaZeta;
use crate::error::{Error, Result};
use crate::graph::{VolumeProfile, WeightedGraph};
use crate::operators::{ball_average, dirichlet, inner, norm_l1, norm_l2, MarkovKernel};

/// Columns `f / |f|_2`; rejects zero functions.
fn normalized_block(mu: &[f64], fs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = mu.len();
    let mut m = DMatrix::zeros(n, fs.len());
    for (c, f) in fs.iter().enumerate() {
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.len() });
        }
        let norm = norm_l2(f, mu);
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter(format!("test function {c} is zero")));
        }
        for x in 0..n {
            m[(x, c)] = f[x] / norm;
        }
    }
    Ok(m)
}

fn column_inner(a: &DMatrix<f64>, b: &DMatrix<f64>, c: usize, mu: &[f64]) -> f64 {
    (0..mu.len()).map(|x| a[(x, c)] * b[(x, c)] * mu[x]).sum()
}

/// `E_{K^n}(f, f) <= n E_K(f, f)` for `n = 2..=n_max` on unit-norm `f`.
pub fn dircomp_suite(k: &MarkovKernel, fs: &[Vec<f64>], n_max: usize, slack: f64) -> Result<ConstantReport> {
    let mu = k.measure();
    let f = normalized_block(mu, fs)?;
    let mut cur = k.apply_block(&f);
    let e1: Vec<f64> = (0..fs.len()).map(|c| 1.0 - column_inner(&cur, &f, c, mu)).collect();
    let mut violations = 0u64;
    let mut worst: f64 = 0.0;
    for n in 2..=n_max {
        cur = k.apply_block(&cur);
        for c in 0..fs.len() {
            let en = 1.0 - column_inner(&cur, &f, c, mu);
            if en > n as f64 * e1[c] + slack {
                violations += 1;
            }
            if e1[c] > 0.0 {
                worst = worst.max(en / (n as f64 * e1[c]));
            }
        }
    }
    let mut r = ConstantReport::new("dirichlet_power_comparison", "supplied")
        .grid("n", (2..=n_max).map(|n| n as f64).collect())
        .constant("functions", fs.len() as f64)
        .constant("max_ratio", worst);
    r.violations = violations;
    r.pass = violations == 0;
    r.notes.push(format!("kernel {}", k.label()));
    Ok(r)
}

/// `i -> |K^i f|_2 / |K^{i-1} f|_2` is non-decreasing for `i = 1..=n_max`.
pub fn noninc_suite(k: &MarkovKernel, fs: &[Vec<f64>], n_max: usize, slack: f64) -> Result<ConstantReport> {
    let mu = k.measure();
    let f = normalized_block(mu, fs)?;
    let mut prev_norm = vec![1.0; fs.len()];
    let mut prev_ratio = vec![f64::NEG_INFINITY; fs.len()];
    let mut alive = vec![true; fs.len()];
    let mut cur = f;
    let mut violations = 0u64;
    let mut worst_drop: f64 = 0.0;
    for _ in 1..=n_max {
        cur = k.apply_block(&cur);
        for c in 0..fs.len() {
            if !alive[c] {
                continue;
            }
            let norm = column_inner(&cur, &cur, c, mu).sqrt();
            if norm == 0.0 {
                alive[c] = false;
                continue;
            }
            let ratio = norm / prev_norm[c];
            let drop = prev_ratio[c] - ratio;
            if drop > slack {
                violations += 1;
            }
            worst_drop = worst_drop.max(drop);
            prev_ratio[c] = ratio;
            prev_norm[c] = norm;
        }
    }
    let mut r = ConstantReport::new("norm_ratio_monotone", "supplied")
        .grid("i", (1..=n_max).map(|n| n as f64).collect())
        .constant("functions", fs.len() as f64)
        .constant("largest_decrease", worst_drop);
    r.violations = violations;
    r.pass = violations == 0;
    r.notes.push(format!("kernel {}", k.label()));
    Ok(r)
}

/// `|f - f_R|_2^2 <= C eta(R) E_K(f, f)`: reports the needed `C` per `R`;
/// passes when the per-`R` maxima stay within `spread_tol` of each other.
pub fn verify_pseudo_poincare(
    k: &MarkovKernel,
    g: &WeightedGraph,
    ez: &EtaZeta,
    r_grid: &[f64],
    fs: &[Vec<f64>],
    spread_tol: f64,
) -> Result<ConstantReport> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter("empty test-function family".into()));
    }
    let mu = g.measures();
    let energies: Vec<f64> = fs.iter().map(|f| dirichlet(k, f).map(|d| d.energy)).collect::<Result<_>>()?;
    let mut skipped = 0;
    let mut per_r = Vec::with_capacity(r_grid.len());
    for &radius in r_grid {
        let mut worst: f64 = 0.0;
        for (f, &e) in fs.iter().zip(&energies) {
            if e <= 1e-14 * inner(f, f, mu) {
                skipped += 1;
                continue;
            }
            let fr = ball_average(g, f, radius)?;
            let diff: Vec<f64> = f.iter().zip(&fr).map(|(a, b)| a - b).collect();
            let lhs = inner(&diff, &diff, mu);
            worst = worst.max(lhs / (ez.eta(radius) * e));
        }
        per_r.push(worst);
    }
    let band = Band::of(per_r.iter().copied().filter(|&v| v > 0.0));
    let mut r = ConstantReport::new("pseudo_poincare", "supplied")
        .grid("R", r_grid.to_vec())
        .grid("max_ratio_per_R", per_r.clone())
        .constant("C", per_r.iter().copied().fold(0.0, f64::max));
    if skipped > 0 {
        r.notes.push(format!("{} constant-function evaluations skipped", skipped));
    }
    r.band = band;
    r.pass = band.is_some_and(|b| b.spread() <= spread_tol && b.max.is_finite());
    Ok(r)
}

/// Needed `C_1` in `|f|_2^2 <= C_1 E_{K^2}(f, f) eta~(V^{-1}(C_2 |f|_1^2 / |f|_2^2))`.
///
/// With `c2 = None`, `C_2 = V(1) / min_x mu(x)`, which keeps every
/// `V^{-1}` argument at least 1. Passes when the largest `C_1` is within
/// `spread_tol` of the median.
pub fn verify_nash(
    k: &MarkovKernel,
    v: &VolumeProfile,
    ez: &EtaZeta,
    c2: Option<f64>,
    fs: &[Vec<f64>],
    spread_tol: f64,
) -> Result<ConstantReport> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter("empty test-function family".into()));
    }
    let mu = k.measure();
    let c2 = c2.unwrap_or_else(|| v.eval(1.0) / mu.iter().copied().fold(f64::INFINITY, f64::min));
    let mut needed = Vec::with_capacity(fs.len());
    for f in fs {
        let l2sq = inner(f, f, mu);
        if !(l2sq > 0.0) {
            return Err(Error::InvalidParameter("Nash check needs non-zero functions".into()));
        }
        let kf = k.apply(f);
        let e2 = l2sq - inner(&kf, &kf, mu);
        let l1 = norm_l1(f, mu);
        let radius = v.inverse(c2 * l1 * l1 / l2sq);
        needed.push(l2sq / (e2 * ez.eta_tilde(radius)));
    }
    let mut sorted = needed.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = *sorted.last().unwrap();
    let mut r = ConstantReport::new("nash", "supplied")
        .constant("C2", c2)
        .constant("C1_max", max)
        .constant("C1_median", median)
        .grid("C1", needed);
    r.band = Some(Band { min: median, max });
    r.pass = max.is_finite() && max / median <= spread_tol;
    Ok(r)
}
