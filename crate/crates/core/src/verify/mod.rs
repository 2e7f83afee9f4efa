//! Measured-constant reports for the inequalities around the decay law.
//!
//! Every check compares ratios and bands, never absolute constants, and is
//! a pure function of its inputs plus an explicit seed.

mod functions;
mod suites;
mod threshold;
mod walk;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use functions::{ball_indicators, harmonic_minimizers, random_functions, top_eigenvectors, TestFamily};
pub use suites::{dircomp_suite, noninc_suite, verify_nash, verify_pseudo_poincare};
pub use threshold::{safe_horizon, verify_moment_threshold, verify_threshold, Clock, MomentLevel};
pub use walk::{
    lambda_ball, lambda_ball_dense, verify_lower_bound_mechanics, verify_resistance_band, verify_subgaussian,
    WalkKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Band> {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        (min <= max).then_some(Band { min, max })
    }

    /// `max / min`.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    pub fn merge(self, other: Band) -> Band {
        Band { min: self.min.min(other.min), max: self.max.max(other.max) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub stderr: f64,
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub inequality_id: String,
    pub test_family: String,
    pub grid: BTreeMap<String, Vec<f64>>,
    pub constants: BTreeMap<String, f64>,
    pub band: Option<Band>,
    pub slope: Option<Slope>,
    pub violations: u64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConstantReport {
    pub fn new(inequality_id: &str, test_family: &str) -> Self {
        ConstantReport {
            inequality_id: inequality_id.to_string(),
            test_family: test_family.to_string(),
            grid: BTreeMap::new(),
            constants: BTreeMap::new(),
            band: None,
            slope: None,
            violations: 0,
            pass: false,
            notes: Vec::new(),
        }
    }

    pub fn grid(mut self, key: &str, values: Vec<f64>) -> Self {
        self.grid.insert(key.to_string(), values);
        self
    }

    pub fn constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Pass bands used by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// max/min for kernel comparability bands.
    pub kernel_band: f64,
    /// max/min for decay-curve bands.
    pub psi_band: f64,
    /// Absolute tolerance on fitted slopes.
    pub slope: f64,
    /// Slack allowed on ordering and monotonicity checks.
    pub slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { kernel_band: 1e2, psi_band: 10.0, slope: 0.15, slack: 1e-12 }
    }
}

/// Indices of the middle 80% of a window (the smallest and largest 10%
/// dropped), keeping at least two points.
pub fn trimmed_range(len: usize) -> std::ops::Range<usize> {
    let cut = len / 10;
    if len - 2 * cut >= 2 {
        cut..len - cut
    } else {
        0..len
    }
}
