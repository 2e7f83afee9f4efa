//! Numerical laboratory for long-range random walks on graphs with
//! sub-Gaussian heat kernel estimates.
//!
//! The crate builds weighted graphs (fractal families and simple controls),
//! Markov operators on them (the natural walk, its lazy pair, heavy-tailed
//! jump kernels, subordinated kernels and discrete-stable mixtures), and the
//! measurements that go with them: the on-diagonal decay `psi_K(n)`, Dirichlet
//! forms, effective resistances, moments, and the numerically inverted clock
//! `zeta` that predicts `psi_K(n) ~ 1/V(zeta(n))`.
//!
//! Everything that the inequality checks in [`verify`] consume is an
//! immutable value; parallel work is merged in a fixed order so reports are
//! reproducible regardless of the thread count.

pub mod asymptotics;
pub mod error;
pub mod families;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod stable;
pub mod verify;

pub use asymptotics::{EtaZeta, JumpProfile};
pub use error::{Error, Result};
pub use families::{Family, FamilySpec};
pub use graph::{BaseConvention, GraphDiagnostics, SafeWindow, VolumeProfile, WeightedGraph};
pub use operators::{DecayCurve, MarkovKernel};
pub use stable::DiscreteStableWeights;
pub use verify::ConstantReport;
