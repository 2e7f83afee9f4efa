//! Scenario files: flat, commented TOML. Unknown keys are rejected so a
//! typo cannot silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use walklab::families::{expected_exponents, Family, FamilySpec};

use crate::CliError;

/// Only used when a scenario does not name `out_dir`.
pub const OUT_DIR_ENV: &str = "WALKLAB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Natural,
    Lazy,
    Jump,
    Subordinated,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePolicy {
    /// Vertices farther than a quarter diameter from the boundary.
    Safe,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Auto,
    Spectral,
    Incremental,
}

fn default_kernel() -> KernelKind {
    KernelKind::Lazy
}
fn default_base() -> BasePolicy {
    BasePolicy::Safe
}
fn default_route() -> Route {
    Route::Auto
}
fn default_one() -> u32 {
    1
}
fn default_workers() -> usize {
    1
}
fn default_functions() -> usize {
    50
}
fn default_suite_steps() -> usize {
    16
}
fn default_psi_band() -> f64 {
    10.0
}
fn default_kernel_band() -> f64 {
    100.0
}
fn default_slope_tol() -> f64 {
    0.15
}
fn default_slack() -> f64 {
    1e-12
}
fn default_stable_t() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    // graph
    pub family: String,
    /// Level for gasket/vicsek, side for lattice, vertices for cycle, edges for path.
    pub level: u32,
    #[serde(default = "default_one")]
    pub dimension: u32,
    #[serde(default)]
    pub perturb: bool,
    #[serde(default)]
    pub seed: u64,

    // kernel
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    pub beta: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub beta0: Option<f64>,
    #[serde(default = "default_stable_t")]
    pub stable_t: f64,
    /// Steps kept in the subordination sum (default 4 * diameter).
    pub truncation_steps: Option<usize>,

    // experiment
    /// Largest step count; defaults to the boundary-safe horizon.
    pub n_max: Option<usize>,
    #[serde(default = "default_base")]
    pub base: BasePolicy,
    #[serde(default = "default_route")]
    pub psi_route: Route,
    /// Radii (graph distance) for resistance and lower-bound checks.
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_functions")]
    pub functions: usize,
    #[serde(default)]
    pub function_seed: u64,
    #[serde(default = "default_suite_steps")]
    pub suite_steps: usize,
    /// Family levels for the moment check.
    #[serde(default)]
    pub levels: Vec<u32>,
    /// Decay curve read by `fit` (default `<out_dir>/psi.csv`).
    pub curve: Option<PathBuf>,

    // output and execution
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,

    // tolerances (max/min ratios, absolute slope error, absolute slack)
    #[serde(default = "default_psi_band")]
    pub psi_band: f64,
    #[serde(default = "default_kernel_band")]
    pub kernel_band: f64,
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let s: Scenario =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        self.family_enum()?;
        if let Some(g) = self.gamma {
            if !(g >= 2.0) {
                return bad(format!("gamma must be at least 2 (got {g})"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) {
                return bad(format!("beta must be positive (got {b})"));
            }
        }
        if matches!(self.kernel, KernelKind::Jump | KernelKind::Subordinated) && self.beta.is_none() {
            return bad("jump and subordinated kernels need `beta`".into());
        }
        if self.kernel == KernelKind::Stable {
            match self.beta0 {
                Some(b) if b > 0.0 && b < 1.0 => {}
                Some(b) => return bad(format!("beta0 must lie in (0, 1) for stable kernels (got {b})")),
                None => return bad("stable kernels need `beta0`".into()),
            }
            if !(self.stable_t > 0.0) {
                return bad(format!("stable_t must be positive (got {})", self.stable_t));
            }
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        for (name, v) in [("psi_band", self.psi_band), ("kernel_band", self.kernel_band)] {
            if !(v >= 1.0) {
                return bad(format!("{name} is a max/min ratio and must be at least 1 (got {v})"));
            }
        }
        Ok(())
    }

    pub fn family_enum(&self) -> Result<Family, CliError> {
        self.family.parse().map_err(|e: walklab::Error| CliError::Usage(e.to_string()))
    }

    pub fn spec_at(&self, level: u32) -> Result<FamilySpec, CliError> {
        let spec = match self.family_enum()? {
            Family::SierpinskiGasket => FamilySpec::gasket(level),
            Family::VicsekTree => FamilySpec::vicsek(level),
            Family::LatticeBox => FamilySpec::lattice(level, self.dimension),
            Family::Cycle => FamilySpec::cycle(level),
            Family::Path => FamilySpec::path(level),
        };
        Ok(spec)
    }

    pub fn spec(&self) -> Result<FamilySpec, CliError> {
        self.spec_at(self.level)
    }

    /// `(alpha, gamma)` of the family, with `gamma` overridden when set.
    pub fn exponents(&self) -> Result<(f64, f64), CliError> {
        let (alpha, gamma) = expected_exponents(&self.spec()?)?;
        Ok((alpha, self.gamma.unwrap_or(gamma)))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    #[test]
    fn defaults_fill_in() {
        let s = parse("family = \"gasket\"\nlevel = 3\n").unwrap();
        assert_eq!(s.kernel, KernelKind::Lazy);
        assert_eq!(s.workers, 1);
        assert_eq!(s.psi_band, 10.0);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse("family = \"gasket\"\nlevel = 3\ngamma = 1.5\n").is_err());
        assert!(parse("family = \"gasket\"\nlevel = 3\nkernel = \"stable\"\nbeta0 = 1.0\n").is_err());
        assert!(parse("family = \"gasket\"\nlevel = 3\nkernel = \"jump\"\n").is_err());
        assert!(parse("family = \"moebius\"\nlevel = 3\n").is_err());
        assert!(parse("family = \"gasket\"\nlevel = 3\ncolour = 1\n").is_err());
    }
}
