//! Graphs, kernels and clocks from a scenario.

use walklab::asymptotics::{EtaZeta, JumpProfile};
use walklab::families::{generate, generate_perturbed};
use walklab::graph::{volume_profile, BaseConvention, SafeWindow, VolumeProfile, WeightedGraph};
use walklab::operators::{default_truncation, jump_kernel, lazy_pair, natural_walk, subordinated_kernel, MarkovKernel};
use walklab::stable::{stable_kernel, DEFAULT_BUDGET, DEFAULT_EPS};
use walklab::verify::{safe_horizon, Clock};

use crate::config::{BasePolicy, KernelKind, Scenario};
use crate::CliError;

/// Radius range of the `eta` / `zeta` table.
const CLOCK_RANGE: f64 = 1e4;

pub fn graph_at(s: &Scenario, level: u32) -> Result<WeightedGraph, CliError> {
    let spec = s.spec_at(level)?;
    let g = if s.perturb { generate_perturbed(&spec, s.seed)? } else { generate(&spec)? };
    Ok(g)
}

/// Everything the commands need on one graph.
pub struct Setup {
    pub graph: WeightedGraph,
    pub window: SafeWindow,
    pub volume: VolumeProfile,
    pub lazy: MarkovKernel,
    pub kernel: MarkovKernel,
    /// Present when the kernel carries a jump profile.
    pub clock: Option<EtaZeta>,
    /// Walk exponent of the power clock `n^{1/exponent}`.
    pub exponent: f64,
    pub gamma: f64,
}

impl Setup {
    pub fn new(s: &Scenario) -> Result<Setup, CliError> {
        Self::at(s, s.level)
    }

    pub fn at(s: &Scenario, level: u32) -> Result<Setup, CliError> {
        let (_, gamma) = s.exponents()?;
        let graph = graph_at(s, level)?;
        let window = match s.base {
            BasePolicy::Safe => SafeWindow::new(&graph),
            BasePolicy::All => SafeWindow::full(&graph),
        };
        let volume = volume_profile(&graph, BaseConvention::Median, &window)?;
        let p = natural_walk(&graph);
        let lazy = lazy_pair(&p)?;
        let profile = s.beta.map(|b| JumpProfile::new(b, s.lambda)).transpose()?;
        let mut exponent = gamma;
        let kernel = match s.kernel {
            KernelKind::Natural => p,
            KernelKind::Lazy => lazy.clone(),
            KernelKind::Jump => jump_kernel(&graph, profile.as_ref().expect("validated"), &volume)?,
            KernelKind::Subordinated => {
                let n_t = s.truncation_steps.unwrap_or_else(|| default_truncation(&graph));
                subordinated_kernel(&lazy, &graph, profile.as_ref().expect("validated"), gamma, n_t, &volume)?
            }
            KernelKind::Stable => {
                let beta0 = s.beta0.expect("validated");
                exponent = beta0 * gamma;
                stable_kernel(&lazy, s.stable_t, beta0, DEFAULT_EPS, DEFAULT_BUDGET)?
            }
        };
        let clock = match s.kernel {
            KernelKind::Jump | KernelKind::Subordinated => {
                Some(EtaZeta::new(profile.expect("validated"), gamma, CLOCK_RANGE)?)
            }
            _ => None,
        };
        Ok(Setup { graph, window, volume, lazy, kernel, clock, exponent, gamma })
    }

    pub fn clock(&self) -> Clock<'_> {
        match &self.clock {
            Some(ez) => Clock::Zeta(ez),
            None => Clock::Power(self.exponent),
        }
    }

    /// Largest step count whose walk scale stays inside the safe radius.
    pub fn horizon(&self) -> usize {
        safe_horizon(self.window.r_max, self.exponent, self.clock.as_ref())
    }

    /// `0..=n_max`, rejecting windows beyond the horizon.
    pub fn n_window(&self, n_max: Option<usize>) -> Result<Vec<usize>, CliError> {
        let h = self.horizon();
        let n_max = n_max.unwrap_or(h);
        if n_max > h {
            return Err(CliError::Usage(format!(
                "n_max = {n_max} leaves the boundary-safe window: n must satisfy n <= {h} (walk scale <= r_max = {})",
                self.window.r_max
            )));
        }
        Ok((0..=n_max).collect())
    }

    /// Powers of two up to `r_max / 2`.
    pub fn default_radii(&self) -> Vec<f64> {
        (0..32).map(|k| f64::from(1u32 << k)).take_while(|&r| 2.0 * r <= self.window.r_max).collect()
    }
}
