//! Acceptance criteria 1-10. Each test prints one `PASS`/`FAIL` line to
//! stderr (outside the harness capture) and then asserts.

use std::fmt::Write as _;
use std::io::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use walklab::asymptotics::{EtaZeta, JumpProfile};
use walklab::families::{expected_exponents, gasket_vertex_coords, generate, generate_perturbed, FamilySpec};
use walklab::graph::{build_graph, default_radius_grid, diagnostics, volume_profile, BaseConvention, SafeWindow};
use walklab::operators::{
    default_truncation, jump_kernel, kernel_row, lazy_pair, moment, natural_walk, power_apply, psi, psi_with,
    resistance, subordinated_kernel, Conductances, MarkovKernel, PsiRoute,
};
use walklab::stable::{
    cdf_series, evidence_band_check, monte_carlo_counts, stable_kernel, DiscreteStableWeights, DEFAULT_BUDGET,
    DEFAULT_EPS,
};
use walklab::verify::{
    dircomp_suite, lambda_ball, noninc_suite, random_functions, safe_horizon, verify_moment_threshold,
    verify_resistance_band, verify_threshold, Clock, MomentLevel,
};
use walklab::WeightedGraph;

fn gasket_gamma() -> f64 {
    5f64.ln() / 2f64.ln()
}

fn gasket_alpha() -> f64 {
    3f64.ln() / 2f64.ln()
}

struct Outcome {
    pass: bool,
    summary: String,
    /// Every number the criterion computed, as exact bit patterns.
    digest: String,
}

#[derive(Default)]
struct Digest(String);

impl Digest {
    fn push(&mut self, v: f64) {
        let _ = write!(self.0, "{:016x} ", v.to_bits());
    }

    fn extend(&mut self, vs: impl IntoIterator<Item = f64>) {
        for v in vs {
            self.push(v);
        }
    }
}

fn announce(id: u32, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2}: {verdict}  {}", o.summary);
}

fn run(id: u32, f: fn() -> Outcome) {
    let o = f();
    announce(id, &o);
    assert!(o.pass, "criterion {id} failed: {}", o.summary);
}

const T_GRID: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const B_GRID: [f64; 3] = [0.3, 0.5, 0.7];

// ---------------------------------------------------------------- 1

/// Pools bins (in order) until each expected count reaches 5.
fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob as f64;
        e += ex;
        if e >= 5.0 {
            groups.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => groups.push((o, e)),
        }
    }
    let stat = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, groups.len() - 1)
}

fn criterion_1() -> Outcome {
    let mut d = Digest::default();
    let mut worst_sum: f64 = 0.0;
    let mut sums_ok = true;
    for &t in &T_GRID {
        for &b in &B_GRID {
            // Shortest index at which the closed series is still well conditioned.
            let (i, series) = [64usize, 128, 256, 512]
                .iter()
                .find_map(|&i| cdf_series(t, b, i).map(|s| (i, s)))
                .expect("series converges for some index");
            let w = DiscreteStableWeights::new(t, b, i).unwrap();
            let err = (w.pmf.iter().sum::<f64>() + (1.0 - series) - 1.0).abs();
            d.push(err);
            worst_sum = worst_sum.max(err);
            sums_ok &= err <= 1e-10;
        }
    }

    let mut worst_poisson: f64 = 0.0;
    for &t in &T_GRID {
        let w = DiscreteStableWeights::new(t, 1.0, 80).unwrap();
        let oracle = Poisson::new(t).unwrap();
        for (i, &p) in w.pmf.iter().enumerate() {
            worst_poisson = worst_poisson.max((p - oracle.pmf(i as u64)).abs());
        }
    }
    d.push(worst_poisson);

    const DRAWS: usize = 1_000_000;
    const MAX_BIN: usize = 200;
    let mut min_p: f64 = 1.0;
    for (k, &t) in T_GRID.iter().enumerate() {
        for (j, &b) in B_GRID.iter().enumerate() {
            let seed = 2026 + (k * B_GRID.len() + j) as u64;
            let counts = monte_carlo_counts(t, b, DRAWS, seed, MAX_BIN).unwrap();
            let w = DiscreteStableWeights::new(t, b, MAX_BIN).unwrap();
            let mut expected: Vec<f64> = w.pmf.iter().map(|p| p * DRAWS as f64).collect();
            expected.push(w.tail_mass * DRAWS as f64);
            let (stat, dof) = chi_square(&counts, &expected);
            let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
            d.push(p);
            min_p = min_p.min(p);
        }
    }
    let pass = sums_ok && worst_poisson <= 1e-14 && min_p > 0.01;
    Outcome {
        pass,
        summary: format!(
            "discrete-stable pmf: |sum - 1| <= {worst_sum:.1e}, Poisson gap {worst_poisson:.1e}, min chi2 p = {min_p:.3}"
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    const I_MAX: usize = 4096;
    let mut d = Digest::default();
    let mut slope_ok = true;
    let mut worst_slope: f64 = 0.0;
    let mut skipped = Vec::new();
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &T_GRID {
        for &b in &B_GRID {
            let w = DiscreteStableWeights::new(t, b, I_MAX).unwrap();
            let xs: Vec<f64> = (32..=512).map(|i| i as f64).collect();
            let ys: Vec<f64> = (32..=512).map(|i| w.pmf[i]).collect();
            let slope = walklab::linalg::fit_loglog(&xs, &ys).slope;
            d.push(slope);
            let onset = 6f64.max(4.0 * t.powf(1.0 / b));
            // The slope window must sit inside the tail regime the band uses.
            if onset <= 32.0 {
                let gap = (slope + 1.0 + b).abs();
                worst_slope = worst_slope.max(gap);
                slope_ok &= gap <= 0.05;
            } else {
                skipped.push(format!("({t},{b}):{slope:.2}"));
            }
            for i in (onset.ceil() as usize)..=I_MAX {
                let r = t * (i as f64).powf(-1.0 - b) / w.pmf[i];
                band = (band.0.min(r), band.1.max(r));
            }
        }
    }
    d.extend([band.0, band.1]);
    let spread = band.1 / band.0;
    Outcome {
        pass: slope_ok && spread <= 20.0,
        summary: format!(
            "tail law: slope gap <= {worst_slope:.3} where 4t^(1/b) <= 32 (outside: {}), band spread {spread:.2}",
            skipped.join(" ")
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 3

fn small_corpus() -> Vec<(String, WeightedGraph)> {
    let mut out = vec![("two_vertex".to_string(), build_graph(&[(0, 1, 1.0)]).unwrap())];
    let specs = [
        FamilySpec::path(10),
        FamilySpec::cycle(8),
        FamilySpec::gasket(0),
        FamilySpec::gasket(1),
        FamilySpec::gasket(2),
        FamilySpec::gasket(3),
        FamilySpec::vicsek(0),
        FamilySpec::vicsek(1),
        FamilySpec::lattice(4, 2),
        FamilySpec::lattice(8, 2),
        FamilySpec::lattice(3, 3),
    ];
    for s in specs {
        out.push((s.label(), generate(&s).unwrap()));
    }
    out.push(("perturbed gasket 3".into(), generate_perturbed(&FamilySpec::gasket(3), 5).unwrap()));
    out
}

fn corpus_kernels(g: &WeightedGraph) -> Vec<MarkovKernel> {
    let w = SafeWindow::new(g);
    let v = volume_profile(g, BaseConvention::Median, &w).unwrap();
    let p = natural_walk(g);
    let q = lazy_pair(&p).unwrap();
    let phi = JumpProfile::power(1.5).unwrap();
    let mut ks = vec![p, q.clone()];
    if g.vertex_count() > 1 {
        ks.push(jump_kernel(g, &phi, &v).unwrap());
    }
    ks.push(subordinated_kernel(&q, g, &phi, 2.5, default_truncation(g), &v).unwrap());
    ks.push(stable_kernel(&q, 2.0, 0.5, DEFAULT_EPS, DEFAULT_BUDGET).unwrap());
    ks
}

/// `T^n` from plain dense products.
fn dense_power(t: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut r = DMatrix::identity(t.nrows(), t.ncols());
    for _ in 0..n {
        r = &r * t;
    }
    r
}

fn close(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn criterion_3() -> Outcome {
    let mut d = Digest::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, g) in small_corpus() {
        assert!(g.vertex_count() <= 64);
        let n = g.vertex_count();
        let mu = g.measures().to_vec();
        let all: Vec<usize> = (0..n).collect();
        let f: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        for k in corpus_kernels(&g) {
            checked += 1;
            let t = k.transition_matrix();
            // kernel_row and power_apply
            for steps in [0usize, 1, 3, 7] {
                let tn = dense_power(&t, steps);
                for x in [0, n / 2, n - 1] {
                    let row = kernel_row(&k, steps, x).unwrap();
                    for y in 0..n {
                        worst = worst.max(close(row[y], tn[(x, y)] / mu[y]));
                    }
                }
                let kf = power_apply(&k, steps, &f).unwrap();
                let oracle = &tn * DMatrix::from_column_slice(n, 1, &f);
                for x in 0..n {
                    worst = worst.max(close(kf[x], oracle[(x, 0)]));
                }
            }
            // psi by both routes against the dense power
            let ns = [0usize, 1, 2, 5, 10];
            let inc = psi_with(&k, &ns, &all, None, PsiRoute::Incremental).unwrap();
            let spe = psi_with(&k, &ns, &all, None, PsiRoute::Spectral).unwrap();
            for (i, &m) in ns.iter().enumerate() {
                let t2 = dense_power(&t, 2 * m);
                let oracle = (0..n).map(|x| t2[(x, x)] / mu[x]).fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(close(inc.points[i].psi, oracle));
                worst = worst.max(close(spe.points[i].psi, oracle));
            }
            // lambda_ball against the eigenvalues of the restricted Gram matrix
            let s = DMatrix::from_fn(n, n, |x, y| mu[x].sqrt() * k.entry(x, y) * mu[y].sqrt());
            for r in [0.0, 1.0, 2.0] {
                let ball = g.ball(0, r).unwrap();
                let cols = DMatrix::from_fn(n, ball.len(), |x, c| s[(x, ball[c])]);
                let gram = cols.transpose() * &cols;
                let oracle = SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(close(lambda_ball(&k, &g, 0, r).unwrap(), oracle));
            }
        }
    }
    d.push(worst);
    Outcome {
        pass: worst <= 1e-12,
        summary: format!("operator oracles: {checked} kernels on graphs <= 64 vertices, worst relative gap {worst:.1e}"),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut d = Digest::default();
    let mut violations = 0u64;
    let mut kernels = 0;
    for spec in [FamilySpec::gasket(5), FamilySpec::lattice(33, 2)] {
        let g = generate(&spec).unwrap();
        let (_, gamma) = expected_exponents(&spec).unwrap();
        let w = SafeWindow::new(&g);
        let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
        let p = natural_walk(&g);
        let q = lazy_pair(&p).unwrap();
        let mut ks = vec![p, q.clone()];
        for b in [1.0, 2.5, 4.0] {
            ks.push(jump_kernel(&g, &JumpProfile::power(b).unwrap(), &v).unwrap());
        }
        let phi = JumpProfile::power(1.5).unwrap();
        ks.push(subordinated_kernel(&q, &g, &phi, gamma, default_truncation(&g), &v).unwrap());
        ks.push(stable_kernel(&q, 4.0, 0.6, DEFAULT_EPS, DEFAULT_BUDGET).unwrap());
        let fs = random_functions(g.measures(), 200, 11);
        for k in &ks {
            kernels += 1;
            let a = dircomp_suite(k, &fs, 16, 1e-12).unwrap();
            let b = noninc_suite(k, &fs, 16, 1e-12).unwrap();
            violations += a.violations + b.violations;
            d.extend([a.constants["max_ratio"], b.constants["largest_decrease"]]);
        }
    }
    Outcome {
        pass: violations == 0,
        summary: format!("Dirichlet power comparison and norm-ratio monotonicity: {kernels} kernels x 200 functions, {violations} violations"),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 5

fn gasket_corner_to_side(level: u32) -> f64 {
    let g = generate(&FamilySpec::gasket(level)).unwrap();
    let coords = gasket_vertex_coords(level);
    let side = 1i64 << level;
    let a: Vec<usize> = (0..coords.len()).filter(|&i| coords[i] == (0, 0)).collect();
    let b: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].0 + coords[i].1 == side).collect();
    resistance(&Conductances::of_graph(&g), &a, &b).unwrap().resistance
}

fn criterion_5() -> Outcome {
    let mut d = Digest::default();
    let mut path_gap: f64 = 0.0;
    for n in [1u32, 10, 100, 1000] {
        let g = generate(&FamilySpec::path(n)).unwrap();
        let r = resistance(&Conductances::of_graph(&g), &[0], &[n as usize]).unwrap().resistance;
        d.push(r);
        path_gap = path_gap.max((r - f64::from(n)).abs() / f64::from(n));
    }
    let ratio = gasket_corner_to_side(6) / gasket_corner_to_side(5);
    d.push(ratio);

    let gamma = gasket_gamma();
    let mut violations = 0;
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    for level in 4..=6 {
        let g = generate(&FamilySpec::gasket(level)).unwrap();
        let w = SafeWindow::new(&g);
        let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
        let q = lazy_pair(&natural_walk(&g)).unwrap();
        let radii: Vec<f64> =
            (0..8).map(|k| f64::from(1u32 << k)).filter(|&r| 2.0 * r <= w.r_max).collect();
        let rep = verify_resistance_band(&g, &q, gamma, &v, &w.sample(8), &radii, 2.0).unwrap();
        violations += rep.violations;
        let b = rep.band.unwrap();
        band = (band.0.min(b.min), band.1.max(b.max));
        d.extend(rep.grid["ratio"].iter().copied());
    }
    let spread = band.1 / band.0;
    let pass = path_gap <= 1e-8 && (ratio / (5.0 / 3.0) - 1.0).abs() <= 0.05 && violations == 0 && spread <= 10.0;
    Outcome {
        pass,
        summary: format!(
            "resistance: path gap {path_gap:.1e}, gasket R6/R5 = {ratio:.4}, R_Q/R_P violations {violations}, band spread {spread:.2} over levels 4-6"
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let mut d = Digest::default();
    let g = generate(&FamilySpec::gasket(6)).unwrap();
    let w = SafeWindow::new(&g);
    let diag = diagnostics(&g, &default_radius_grid(&w)).unwrap();
    let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
    let gamma = gasket_gamma();
    let q = lazy_pair(&natural_walk(&g)).unwrap();
    let ns: Vec<usize> = (1..=safe_horizon(w.r_max, gamma, None)).collect();
    let curve = psi_with(&q, &ns, &w.base, None, PsiRoute::Spectral).unwrap();
    let rep = verify_threshold(&curve, &v, Clock::Power(gamma), 10.0).unwrap();
    let spread = rep.band.unwrap().spread();
    d.push(diag.alpha_fit);
    d.extend(curve.values());
    let alpha_gap = (diag.alpha_fit - gasket_alpha()).abs();
    Outcome {
        pass: alpha_gap <= 0.1 && spread <= 10.0,
        summary: format!(
            "sub-Gaussian baseline: alpha_fit {:.3}, psi_Q V(n^(1/gamma)) spread {spread:.2} over n <= {}",
            diag.alpha_fit,
            ns.len()
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut d = Digest::default();
    let g = generate(&FamilySpec::gasket(6)).unwrap();
    let w = SafeWindow::new(&g);
    let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
    let gamma = gasket_gamma();
    let mut run = |beta: f64| {
        let phi = JumpProfile::power(beta).unwrap();
        let k = jump_kernel(&g, &phi, &v).unwrap();
        let ez = EtaZeta::new(phi, gamma, 1e4).unwrap();
        let ns: Vec<usize> = (1..=safe_horizon(w.r_max, gamma, Some(&ez))).collect();
        let curve = psi(&k, &ns, &w.base, None).unwrap();
        let by_zeta = verify_threshold(&curve, &v, Clock::Zeta(&ez), 10.0).unwrap();
        let by_power = verify_threshold(&curve, &v, Clock::Power(gamma), 10.0).unwrap();
        d.extend(curve.values());
        (ez, by_zeta, by_power)
    };

    let (_, low, _) = run(1.0);
    let (_, high, _) = run(4.0);
    let (ez, crit, crit_power) = run(gamma);
    let s1 = low.slope.unwrap().value;
    let s4 = high.slope.unwrap().value;
    let zeta_spread = crit.band.unwrap().spread();
    // Same n-window for the n^{1/gamma} comparison.
    let n_min = ez.eta_tilde(1.0);
    let same: Vec<f64> = crit_power.grid["n"]
        .iter()
        .zip(&crit_power.grid["ratio"])
        .filter(|(&n, _)| n >= n_min)
        .map(|(_, &r)| r)
        .collect();
    let power_spread = same.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        / same.iter().copied().fold(f64::INFINITY, f64::min);
    d.extend([s1, s4, zeta_spread, power_spread]);

    let slopes_ok = (s1 + gasket_alpha()).abs() <= 0.15 && (s4 + gasket_alpha() / gamma).abs() <= 0.10;
    let log_correction_shown = power_spread > 10.0;
    Outcome {
        pass: slopes_ok && zeta_spread <= 10.0 && log_correction_shown,
        summary: format!(
            "threshold on gasket 6: slope(beta=1) {s1:.3}, slope(beta=4) {s4:.3}, beta=gamma band spread {zeta_spread:.2} with zeta vs {power_spread:.2} with n^(1/gamma) (needs > 10)"
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 8

fn moment_levels(beta: f64, d: &mut Digest) -> Vec<MomentLevel> {
    let gamma = gasket_gamma();
    let phi = JumpProfile::power(beta).unwrap();
    let ez = EtaZeta::new(phi, gamma, 1e4).unwrap();
    (4..=6)
        .map(|level| {
            let g = generate(&FamilySpec::gasket(level)).unwrap();
            let w = SafeWindow::new(&g);
            let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
            let k = jump_kernel(&g, &phi, &v).unwrap();
            let m = moment(&k, &g, gamma, Some(&w.base)).unwrap();
            let ns: Vec<usize> = (1..=safe_horizon(w.r_max, gamma, Some(&ez))).collect();
            let curve = psi(&k, &ns, &w.base, None).unwrap();
            d.push(m);
            d.extend(curve.values());
            MomentLevel {
                label: format!("gasket {level}"),
                diameter: f64::from(g.diameter()),
                moment: m,
                curve,
                volume: v,
                stationary: 1.0 / g.total_measure(),
            }
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let mut d = Digest::default();
    let gamma = gasket_gamma();
    let finite = verify_moment_threshold(&moment_levels(gamma + 1.0, &mut d), gamma, 10.0).unwrap();
    let infinite_levels = moment_levels(gamma - 0.5, &mut d);
    let infinite = verify_moment_threshold(&infinite_levels, gamma, 10.0).unwrap();

    let f_spread = finite.constants["moment_spread"];
    let f_band = finite.constants["psi_band_spread"];
    let i_growing = infinite_levels.windows(2).all(|w| w[1].moment > w[0].moment);
    let i_slope = infinite.constants["moment_slope"];
    let i_monotone = infinite.constants["monotone_levels"] as usize == infinite_levels.len();
    d.extend([f_spread, f_band, i_slope]);
    Outcome {
        pass: f_spread < 2.0 && f_band <= 10.0 && i_growing && i_slope > 0.3 && i_monotone,
        summary: format!(
            "moment threshold: beta=gamma+1 M spread {f_spread:.2}, psi band {f_band:.2}; beta=gamma-0.5 M slope {i_slope:.2} (growing {i_growing}), psi V(n^(1/gamma)) decreasing on all levels {i_monotone}"
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let mut d = Digest::default();
    let g = generate(&FamilySpec::gasket(6)).unwrap();
    let w = SafeWindow::new(&g);
    let q = lazy_pair(&natural_walk(&g)).unwrap();
    let gamma = gasket_gamma();
    let beta0 = 0.6;
    let beta = beta0 * gamma;
    let mut pairs = Vec::new();
    for &x in &w.sample(6) {
        let dist = g.distances_from(x).unwrap();
        for r in [0u32, 1, 2, 3, 4, 6, 8, 11, 16] {
            if let Some(&y) = w.base.iter().find(|&&y| dist[y] == r) {
                pairs.push((x, y));
            }
        }
    }
    let n_top = w.r_max.powf(beta).floor() as usize;
    let ns: Vec<usize> = [1usize, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64].into_iter().filter(|&n| n <= n_top).collect();
    let band = evidence_band_check(&g, &q, &ns, beta0, gamma, &pairs).unwrap();
    d.extend(band.samples.iter().map(|s| s.ratio));
    Outcome {
        pass: band.spread() <= 100.0,
        summary: format!(
            "stable-subordinated band: {} pairs x {} times, ratio in [{:.3}, {:.3}], spread {:.2}",
            pairs.len(),
            ns.len(),
            band.min,
            band.max,
            band.spread()
        ),
        digest: d.0,
    }
}

// ---------------------------------------------------------------- tests

#[test]
fn criterion_01_discrete_stable_correctness() {
    run(1, criterion_1);
}

#[test]
fn criterion_02_tail_law_band() {
    run(2, criterion_2);
}

#[test]
fn criterion_03_operator_oracles() {
    run(3, criterion_3);
}

#[test]
fn criterion_04_inequality_suites() {
    run(4, criterion_4);
}

#[test]
fn criterion_05_resistance() {
    run(5, criterion_5);
}

#[test]
fn criterion_06_sub_gaussian_baseline() {
    run(6, criterion_6);
}

#[test]
fn criterion_07_threshold_reproduction() {
    run(7, criterion_7);
}

#[test]
fn criterion_08_moment_threshold() {
    run(8, criterion_8);
}

#[test]
fn criterion_09_stable_band() {
    run(9, criterion_9);
}

#[test]
fn criterion_10_determinism() {
    let all: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let in_pool = |threads: usize, f: fn() -> Outcome| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| f().digest)
    };
    let mut differing = Vec::new();
    for (i, f) in all.iter().enumerate() {
        if in_pool(1, *f) != in_pool(4, *f) {
            differing.push(i + 1);
        }
    }
    let o = Outcome {
        pass: differing.is_empty(),
        summary: format!("determinism: criteria 1-9 rerun with 1 and 4 workers, differing outputs: {differing:?}"),
        digest: String::new(),
    };
    announce(10, &o);
    assert!(o.pass, "{}", o.summary);
}
