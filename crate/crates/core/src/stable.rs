//! Discrete-stable weights `A(t, i) = P(N(S(t)) = i)`, where `S` is a
//! `beta0`-stable subordinator and `N` an independent unit-rate Poisson
//! process, and the mixture kernel `k_t = sum_i A(t, i) q_i`.
//!
//! The weights come from the generating function `exp(-t (1 - z)^beta0)`:
//! differentiating gives the nonnegative recurrence
//! `(i + 1) p_{i+1} = t beta0 sum_{j <= i} a_j p_{i-j}` with
//! `a_j = |binom(beta0 - 1, j)|`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::operators::{KernelLabel, KernelMeta, MarkovKernel};

/// Default tolerance on the truncated tail.
pub const DEFAULT_EPS: f64 = 1e-10;
/// Default largest index evaluated by the adaptive constructors.
pub const DEFAULT_BUDGET: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteStableWeights {
    pub t: f64,
    pub beta0: f64,
    /// `A(t, i)` for `i = 0..=i_max`.
    pub pmf: Vec<f64>,
    /// `P(N > i_max)`.
    pub tail_mass: f64,
    /// Set when `tail_mass` exceeds the requested tolerance.
    pub incomplete: bool,
}

fn check_params(t: f64, beta0: f64) -> Result<()> {
    if !(beta0 > 0.0 && beta0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta0 must lie in (0, 1] (got {beta0})")));
    }
    if !(t > 0.0) || t > 700.0 {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 700] (got {t})")));
    }
    Ok(())
}

/// `a_j = |binom(beta0 - 1, j)|` by `a_{j+1} = a_j (j + 1 - beta0) / (j + 1)`.
pub fn binomial_magnitudes(beta0: f64, len: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(len);
    let mut cur = 1.0;
    for j in 0..len {
        a.push(cur);
        cur *= (j as f64 + 1.0 - beta0) / (j as f64 + 1.0);
    }
    a
}

/// Runs the recurrence until `stop(partial_sum)` holds or `i_max` is reached.
fn recurrence(t: f64, beta0: f64, i_max: usize, stop: impl Fn(f64) -> bool) -> Vec<f64> {
    let a = binomial_magnitudes(beta0, i_max + 1);
    let mut p = Vec::with_capacity(i_max + 1);
    p.push((-t).exp());
    let mut total = p[0];
    for i in 0..i_max {
        if stop(total) {
            break;
        }
        let conv: f64 = (0..=i).map(|j| a[j] * p[i - j]).sum();
        let next = t * beta0 * conv / (i as f64 + 1.0);
        total += next;
        p.push(next);
    }
    p
}

/// `P(N <= I) = sum_k (-t)^k / k! prod_{m=1}^{I} (1 - k beta0 / m)`.
///
/// This is an exact series from the generating function, independent of the
/// recurrence. Returns `None` when cancellation between terms would cost more
/// than about four digits.
pub fn cdf_series(t: f64, beta0: f64, i: usize) -> Option<f64> {
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut coeff = 1.0; // (-t)^k / k!
    let mut small = 0;
    for k in 0..10_000usize {
        let kb = k as f64 * beta0;
        let prod: f64 = (1..=i).map(|m| 1.0 - kb / m as f64).product();
        let term = coeff * prod;
        sum += term;
        largest = largest.max(term.abs());
        if k as f64 > 2.0 * t + 10.0 && term.abs() < 1e-20 * largest.max(1.0) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        coeff *= -t / (k as f64 + 1.0);
    }
    (largest < 1e4).then_some(sum)
}

impl DiscreteStableWeights {
    /// `A(t, i)` for `i = 0..=i_max`.
    pub fn new(t: f64, beta0: f64, i_max: usize) -> Result<Self> {
        Self::with_eps(t, beta0, i_max, DEFAULT_EPS)
    }

    pub fn with_eps(t: f64, beta0: f64, i_max: usize, eps: f64) -> Result<Self> {
        check_params(t, beta0)?;
        if i_max < 1 {
            return Err(Error::InvalidParameter("i_max must be at least 1".into()));
        }
        let pmf = recurrence(t, beta0, i_max, |_| false);
        Ok(Self::finish(t, beta0, pmf, eps))
    }

    /// Stops as soon as the truncated tail drops below `eps`, or at `budget`.
    pub fn adaptive(t: f64, beta0: f64, eps: f64, budget: usize) -> Result<Self> {
        check_params(t, beta0)?;
        let pmf = recurrence(t, beta0, budget.max(1), |s| 1.0 - s < eps);
        Ok(Self::finish(t, beta0, pmf, eps))
    }

    fn finish(t: f64, beta0: f64, pmf: Vec<f64>, eps: f64) -> Self {
        let i_max = pmf.len() - 1;
        let direct = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
        let tail_mass = if direct > 1e-6 {
            // Where the series is reliable, prefer it: it does not inherit
            // the round-off of the partial sum.
            cdf_series(t, beta0, i_max).map_or(direct, |c| (1.0 - c).max(0.0))
        } else {
            direct
        };
        DiscreteStableWeights { t, beta0, incomplete: tail_mass > eps, pmf, tail_mass }
    }

    pub fn i_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `sum_i A(t, i) z^i` over the retained indices, with the tail mass
    /// placed on `z^{i_max}`.
    pub fn folded_generating_function(&self, z: f64) -> f64 {
        let last = self.i_max();
        let mut acc = self.pmf[last] + self.tail_mass;
        for i in (0..last).rev() {
            acc = acc * z + self.pmf[i];
        }
        acc
    }

    /// Dump with header `i,A`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,A\n");
        for (i, p) in self.pmf.iter().enumerate() {
            let _ = writeln!(out, "{i},{p:e}");
        }
        out
    }
}

/// Entrywise convolution of two probability vectors (same length output as
/// the shorter input).
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|i| (0..=i).map(|j| a[j] * b[i - j]).sum()).collect()
}

/// One draw of `S(t)` for a `beta0`-stable subordinator with
/// `E exp(-s S(t)) = exp(-t s^beta0)`.
///
/// Chambers-Mallows-Stuck for a totally skewed stable law; with `U = V + pi/2`
/// uniform on `(0, pi)` the formula reduces to Kanter's representation.
pub fn sample_subordinator<R: Rng + ?Sized>(rng: &mut R, t: f64, beta0: f64) -> f64 {
    if beta0 >= 1.0 {
        return t;
    }
    let a = beta0;
    let u: f64 = loop {
        let u = rng.random::<f64>() * std::f64::consts::PI;
        if u > 0.0 {
            break u;
        }
    };
    let w: f64 = Exp1.sample(rng);
    let x = (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a);
    t.powf(1.0 / a) * x
}

/// Monte Carlo histogram of `N(S(t))`: counts for `0..=max_bin` followed by
/// one count for everything larger.
pub fn monte_carlo_counts(t: f64, beta0: f64, draws: usize, seed: u64, max_bin: usize) -> Result<Vec<u64>> {
    check_params(t, beta0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; max_bin + 2];
    for _ in 0..draws {
        let s = sample_subordinator(&mut rng, t, beta0);
        let bin = if !(s > 1e-300) {
            0
        } else if s > 1e9 {
            max_bin + 1
        } else {
            let n = Poisson::new(s).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(&mut rng);
            (n as usize).min(max_bin + 1)
        };
        counts[bin] += 1;
    }
    Ok(counts)
}

/// `k_{t, beta0} = sum_i A(t, i) q_i`, evaluated on the spectrum of `Q`.
/// The index set grows until the tail is below `eps` or `budget` is hit
/// (then the kernel is flagged incomplete); the tail is folded onto the
/// last retained power.
pub fn stable_kernel(q: &MarkovKernel, t: f64, beta0: f64, eps: f64, budget: usize) -> Result<MarkovKernel> {
    if !(beta0 > 0.0 && beta0 < 1.0) {
        return Err(Error::InvalidParameter(format!("stable kernels need beta0 in (0, 1) (got {beta0})")));
    }
    let w = DiscreteStableWeights::adaptive(t, beta0, eps, budget)?;
    let meta = KernelMeta {
        truncation: Some(w.i_max()),
        folded_mass: Some(w.tail_mass),
        incomplete: w.incomplete,
        ..KernelMeta::default()
    };
    let label = KernelLabel::Stable { t, beta0 };
    Ok(q.spectral_function(|l| w.folded_generating_function(l), label, meta))
}

/// `k_{t, beta0}(x, y)` for selected pairs, straight from the spectrum of `Q`.
pub fn stable_kernel_entries(
    q: &MarkovKernel,
    weights: &DiscreteStableWeights,
    pairs: &[(usize, usize)],
) -> Vec<f64> {
    let spec = q.spectrum();
    let h: Vec<f64> = spec.values.iter().map(|&l| weights.folded_generating_function(l)).collect();
    let mu = q.measure();
    pairs
        .par_iter()
        .map(|&(x, y)| {
            let s: f64 = (0..h.len()).map(|j| h[j] * spec.vectors[(x, j)] * spec.vectors[(y, j)]).sum();
            s / (mu[x] * mu[y]).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonVolumeCheck {
    pub u: Vec<f64>,
    pub ratio: Vec<f64>,
    pub max: f64,
}

/// For each `u`: `V(x, u^{1/gamma}) sum_i e^{-u} u^i / i! / V(x, i^{1/gamma})`.
pub fn poisson_volume_bound_check(
    g: &WeightedGraph,
    x: usize,
    gamma: f64,
    u_grid: &[f64],
) -> Result<PoissonVolumeCheck> {
    let vols = g.volume_by_radius(x)?;
    let v_at = |r: f64| vols[(r.floor().max(0.0) as usize).min(vols.len() - 1)];
    let mut ratio = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        if u < 0.0 {
            return Err(Error::InvalidParameter(format!("u must be nonnegative (got {u})")));
        }
        let sum = if u == 0.0 {
            1.0 / v_at(0.0)
        } else {
            let top = (u + 40.0 * u.sqrt() + 60.0) as usize;
            let mut log_p = -u;
            let mut s = 0.0;
            for i in 0..=top {
                if i > 0 {
                    log_p += u.ln() - (i as f64).ln();
                }
                s += log_p.exp() / v_at((i as f64).powf(1.0 / gamma));
            }
            s
        };
        ratio.push(sum * v_at(u.powf(1.0 / gamma)));
    }
    let max = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PoissonVolumeCheck { u: u_grid.to_vec(), ratio, max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSample {
    pub x: usize,
    pub y: usize,
    pub n: usize,
    pub kernel: f64,
    pub profile: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceBand {
    pub beta: f64,
    pub samples: Vec<EvidenceSample>,
    pub min: f64,
    pub max: f64,
    /// Whether any kernel used for the band hit its truncation budget.
    pub incomplete: bool,
}

impl EvidenceBand {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// Ratio of `k_{n, beta0}(x, y)` to
/// `min(1 / V(x, n^{1/beta}), n / (V(x, d) (1 + d)^beta))`, `beta = beta0 gamma`,
/// over every pair in `pairs` and every `n` in `n_list`.
pub fn evidence_band_check(
    g: &WeightedGraph,
    q: &MarkovKernel,
    n_list: &[usize],
    beta0: f64,
    gamma: f64,
    pairs: &[(usize, usize)],
) -> Result<EvidenceBand> {
    if pairs.is_empty() {
        return Err(Error::EmptyWindow("no interior pairs sampled".into()));
    }
    let beta = beta0 * gamma;
    let mut samples = Vec::with_capacity(pairs.len() * n_list.len());
    let mut incomplete = false;
    for &n in n_list {
        let w = DiscreteStableWeights::adaptive(n as f64, beta0, DEFAULT_EPS, DEFAULT_BUDGET)?;
        incomplete |= w.incomplete;
        let ks = stable_kernel_entries(q, &w, pairs);
        for (&(x, y), &k) in pairs.iter().zip(&ks) {
            let d = f64::from(g.distance(x, y)?);
            let near = 1.0 / g.ball_volume(x, (n as f64).powf(1.0 / beta))?;
            let far = n as f64 / (g.ball_volume(x, d)? * (1.0 + d).powf(beta));
            let profile = near.min(far);
            samples.push(EvidenceSample { x, y, n, kernel: k, profile, ratio: k / profile });
        }
    }
    let min = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let max = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(EvidenceBand { beta, samples, min, max, incomplete })
}
