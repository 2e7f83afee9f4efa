use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use walklab::graph::io::write_graph;
use walklab::graph::{default_radius_grid, diagnostics};
use walklab::linalg::fit_loglog;
use walklab::operators::{moment, psi_with, DecayCurve, PsiRoute};
use walklab::verify::{
    dircomp_suite, noninc_suite, random_functions, trimmed_range, verify_lower_bound_mechanics,
    verify_moment_threshold, verify_nash, verify_pseudo_poincare, verify_resistance_band, verify_subgaussian,
    verify_threshold, ConstantReport, MomentLevel, WalkKind,
};

use crate::build::Setup;
use crate::config::{KernelKind, Route, Scenario};
use crate::CliError;

pub const CHECKS: [&str; 9] = [
    "dircomp",
    "noninc",
    "pseudo_poincare",
    "nash",
    "threshold",
    "resistance_band",
    "lower_bound",
    "subgaussian",
    "moment_threshold",
];

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn gen(s: &Scenario) -> Result<(), CliError> {
    let g = crate::build::graph_at(s, s.level)?;
    let out = s.out_dir();
    write(&out, "graph.txt", &write_graph(&g))?;

    let window = walklab::SafeWindow::new(&g);
    let (diag, diag_error) = match diagnostics(&g, &default_radius_grid(&window)) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = json!({
        "family": s.spec()?.label(),
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "tree": g.edge_count() + 1 == g.vertex_count(),
        "diameter": g.diameter(),
        "boundary": g.boundary(),
        "bipartite": g.is_bipartite(),
        "safe_radius": window.r_max,
        "base_vertices": window.base.len(),
        "diagnostics": diag,
        "diagnostics_error": diag_error,
    });
    write(&out, "diagnostics.json", &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    Ok(())
}

fn route(s: &Scenario) -> Option<PsiRoute> {
    match s.psi_route {
        Route::Auto => None,
        Route::Spectral => Some(PsiRoute::Spectral),
        Route::Incremental => Some(PsiRoute::Incremental),
    }
}

fn curve_of(setup: &Setup, s: &Scenario, ns: &[usize]) -> Result<DecayCurve, CliError> {
    let base = &setup.window.base;
    let c = match route(s) {
        Some(r) => psi_with(&setup.kernel, ns, base, None, r)?,
        None => walklab::operators::psi(&setup.kernel, ns, base, None)?,
    };
    Ok(c)
}

pub fn psi(s: &Scenario) -> Result<(), CliError> {
    let setup = Setup::new(s)?;
    let ns = setup.n_window(s.n_max)?;
    let curve = curve_of(&setup, s, &ns)?;
    let clock = setup.clock();
    let mut csv = String::from("n,psi,V_of_zeta,ratio\n");
    for p in &curve.points {
        let v = setup.volume.eval(clock.radius(p.n as f64));
        let _ = writeln!(csv, "{},{:e},{:e},{:e}", p.n, p.psi, v, p.psi * v);
    }
    write(&s.out_dir(), "psi.csv", &csv)?;
    Ok(())
}

fn needs_clock<'a>(setup: &'a Setup, id: &str) -> Result<&'a walklab::EtaZeta, CliError> {
    setup
        .clock
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("check {id:?} needs a jump or subordinated kernel (a jump profile)")))
}

fn run_check(id: &str, s: &Scenario, setup: &Setup) -> Result<ConstantReport, CliError> {
    let g = &setup.graph;
    let k = &setup.kernel;
    let w = &setup.window;
    let radii = s.radii.clone().unwrap_or_else(|| setup.default_radii());
    let functions = || random_functions(g.measures(), s.functions, s.function_seed);
    let report = match id {
        "dircomp" => dircomp_suite(k, &functions(), s.suite_steps, s.slack)?,
        "noninc" => noninc_suite(k, &functions(), s.suite_steps, s.slack)?,
        "pseudo_poincare" => {
            verify_pseudo_poincare(k, g, needs_clock(setup, id)?, &radii, &functions(), s.kernel_band)?
        }
        "nash" => verify_nash(k, &setup.volume, needs_clock(setup, id)?, None, &functions(), s.kernel_band)?,
        "threshold" => {
            let curve = curve_of(setup, s, &setup.n_window(s.n_max)?)?;
            verify_threshold(&curve, &setup.volume, setup.clock(), s.psi_band)?
        }
        "resistance_band" => {
            verify_resistance_band(g, &setup.lazy, setup.gamma, &setup.volume, &w.sample(8), &radii, 2.0)?
        }
        "lower_bound" => {
            let x = *w.sample(1).first().ok_or_else(|| CliError::Usage("base set is empty".into()))?;
            let ns: Vec<usize> = setup.n_window(s.n_max)?.into_iter().filter(|&n| n >= 1).collect();
            verify_lower_bound_mechanics(k, g, x, &radii, &ns, setup.clock.as_ref())?
        }
        "subgaussian" => {
            let kind = if s.kernel == KernelKind::Natural { WalkKind::PPair } else { WalkKind::Q };
            let horizon = setup.horizon();
            let mut samples = Vec::new();
            for x in w.sample(4) {
                let dist = g.distances_from(x)?;
                for &r in &radii {
                    let Some(y) = w.base.iter().copied().find(|&y| f64::from(dist[y]) == r) else { continue };
                    let d = dist[y] as usize;
                    let mut n = d.max(1);
                    while n <= horizon {
                        samples.push((x, y, n));
                        n *= 2;
                    }
                }
            }
            verify_subgaussian(g, k, kind, setup.gamma, &setup.volume, &samples)?
        }
        "moment_threshold" => {
            let mut levels = Vec::with_capacity(s.levels.len());
            for &level in &s.levels {
                let st = Setup::at(s, level)?;
                let ns: Vec<usize> = (1..=st.horizon()).collect();
                levels.push(MomentLevel {
                    label: format!("level {level}"),
                    diameter: f64::from(st.graph.diameter()),
                    moment: moment(&st.kernel, &st.graph, st.gamma, Some(&st.window.base))?,
                    curve: curve_of(&st, s, &ns)?,
                    volume: st.volume.clone(),
                    stationary: 1.0 / st.graph.total_measure(),
                });
            }
            verify_moment_threshold(&levels, setup.gamma, s.psi_band)?
        }
        other => {
            return Err(CliError::Usage(format!("unknown inequality id {other:?}; known ids: {}", CHECKS.join(", "))))
        }
    };
    Ok(report)
}

pub fn verify(s: &Scenario) -> Result<(), CliError> {
    if s.checks.is_empty() {
        return Err(CliError::Usage(format!("no checks selected; set `checks` to some of: {}", CHECKS.join(", "))));
    }
    if let Some(bad) = s.checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(CliError::Usage(format!("unknown inequality id {bad:?}; known ids: {}", CHECKS.join(", "))));
    }
    let setup = Setup::new(s)?;
    let mut reports = Vec::with_capacity(s.checks.len());
    for id in &s.checks {
        let r = run_check(id, s, &setup)?;
        println!("{} {id}", if r.pass { "PASS" } else { "FAIL" });
        reports.push(r);
    }
    write(&s.out_dir(), "verify.json", &(serde_json::to_string_pretty(&reports).expect("json") + "\n"))?;
    let failed: Vec<&str> = reports.iter().zip(&s.checks).filter(|(r, _)| !r.pass).map(|(_, id)| id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failing inequalities: {}", failed.join(", "))))
    }
}

/// Reads the `n` and `psi` columns of a decay-curve CSV.
pub fn read_curve(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read curve {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::Usage(format!("{}: no `{name}` column", path.display())))
    };
    let (n_col, psi_col) = (col("n")?, col("psi")?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |c: usize| -> Result<f64, CliError> {
            fields.get(c).and_then(|f| f.parse().ok()).ok_or_else(|| {
                CliError::Usage(format!("{}: line {}: bad number in column {}", path.display(), i + 2, header[c]))
            })
        };
        rows.push((num(n_col)?, num(psi_col)?));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub curve: String,
    pub points: usize,
    pub slope: f64,
    pub stderr: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub beta: Option<f64>,
    /// `-alpha / beta`, the slope when `beta < gamma`.
    pub slope_if_beta_below: Option<f64>,
    /// `-alpha / gamma`, the slope when `beta >= gamma` (up to logarithms).
    pub slope_if_beta_above: f64,
    pub regime: String,
}

/// Regime from the fitted slope: steeper than `-alpha/gamma` by more than
/// `tol` means `beta < gamma`; otherwise `beta` close to `gamma` (both
/// predicted slopes within `tol`) or above it.
pub fn classify(slope: f64, alpha: f64, gamma: f64, beta: Option<f64>, tol: f64) -> &'static str {
    let above = -alpha / gamma;
    if slope < above - tol {
        return "beta<gamma";
    }
    match beta {
        Some(b) if (-alpha / b - above).abs() > tol && b > gamma => "beta>gamma",
        Some(_) => "beta~gamma",
        None => "beta>=gamma",
    }
}

pub fn fit(s: &Scenario) -> Result<(), CliError> {
    let path = s.curve.clone().unwrap_or_else(|| s.out_dir().join("psi.csv"));
    let rows: Vec<(f64, f64)> = read_curve(&path)?.into_iter().filter(|&(n, p)| n >= 1.0 && p > 0.0).collect();
    if rows.len() < 4 {
        return Err(CliError::Usage(format!(
            "curve {} has {} usable points (n >= 1, psi > 0); a slope fit needs at least 4",
            path.display(),
            rows.len()
        )));
    }
    let cut = trimmed_range(rows.len());
    let (ns, ps): (Vec<f64>, Vec<f64>) = rows[cut].iter().copied().unzip();
    let f = fit_loglog(&ns, &ps);
    let (alpha, gamma) = s.exponents()?;
    let report = FitReport {
        curve: path.display().to_string(),
        points: ns.len(),
        slope: f.slope,
        stderr: f.stderr,
        alpha,
        gamma,
        beta: s.beta,
        slope_if_beta_below: s.beta.map(|b| -alpha / b),
        slope_if_beta_above: -alpha / gamma,
        regime: classify(f.slope, alpha, gamma, s.beta, s.slope_tol).to_string(),
    };
    println!("slope {:.4} +- {:.4} over {} points: {}", report.slope, report.stderr, report.points, report.regime);
    write(&s.out_dir(), "fit.json", &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    Ok(())
}

pub fn report(s: &Scenario) -> Result<(), CliError> {
    let out = s.out_dir();
    let path = out.join("verify.json");
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {} (run `verify` first): {e}", path.display())))?;
    let reports: Vec<ConstantReport> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let num = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
    let mut csv = String::from("inequality_id,pass,violations,band_min,band_max,spread,slope\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.inequality_id,
            r.pass,
            r.violations,
            num(r.band.map(|b| b.min)),
            num(r.band.map(|b| b.max)),
            num(r.band.map(|b| b.spread())),
            num(r.slope.map(|s| s.value)),
        );
        let spread = r.band.map_or("-".to_string(), |b| format!("{:.3}", b.spread()));
        println!("{:<28} {:<4} violations {:>6}  spread {spread}", r.inequality_id, if r.pass { "PASS" } else { "FAIL" }, r.violations);
    }
    if let Ok(text) = fs::read_to_string(out.join("fit.json")) {
        if let Ok(f) = serde_json::from_str::<FitReport>(&text) {
            println!("fit: slope {:.4} +- {:.4} ({})", f.slope, f.stderr, f.regime);
        }
    }
    write(&out, "summary.csv", &csv)?;
    Ok(())
}
