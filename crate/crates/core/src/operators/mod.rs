//! Markov operators that are symmetric with respect to the vertex measure.
//!
//! A kernel is stored in kernel form `k(x, y)`, so the operator acts by
//! `(K f)(x) = sum_y k(x, y) f(y) mu(y)` and stochasticity reads
//! `sum_y k(x, y) mu(y) = 1`. The transition probability is `k(x, y) mu(y)`.

mod jump;
mod resistance;

use std::fmt::{self, Write as _};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{symmetrize, CsrMatrix, Spectrum};

pub use jump::{jump_kernel, subordinated_kernel, subordination_weights, default_truncation};
pub use resistance::{resistance, Conductances, ResistanceSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelLabel {
    Identity,
    P,
    Q,
    Jump { beta: f64, log_exponent: f64 },
    Subordinated { beta: f64, log_exponent: f64, gamma: f64, n_t: usize },
    Stable { t: f64, beta0: f64 },
    Power { base: Box<KernelLabel>, n: usize },
}

impl fmt::Display for KernelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelLabel::Identity => write!(f, "identity"),
            KernelLabel::P => write!(f, "P"),
            KernelLabel::Q => write!(f, "Q"),
            KernelLabel::Jump { beta, log_exponent } => write!(f, "jump(beta={beta},lambda={log_exponent})"),
            KernelLabel::Subordinated { beta, log_exponent, gamma, n_t } => {
                write!(f, "subordinated(beta={beta},lambda={log_exponent},gamma={gamma},n_t={n_t})")
            }
            KernelLabel::Stable { t, beta0 } => write!(f, "stable(t={t},beta0={beta0})"),
            KernelLabel::Power { base, n } => write!(f, "power({base},{n})"),
        }
    }
}

/// Construction facts reported alongside a kernel.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    /// `min P(x, y)` over edges, for the natural walk.
    pub p0: Option<f64>,
    /// Global normalisation: `Z` for jump kernels, `c_phi` for subordinated ones.
    pub normalization: Option<f64>,
    /// Extremes of `k(x, y) V(d) phi(d)` over interior pairs.
    pub band: Option<(f64, f64)>,
    /// Smallest `C` with `1/C <= k(x, y) V(d) phi(d) <= C` on the same pairs.
    pub c_phi: Option<f64>,
    /// Largest retained index of a truncated mixture.
    pub truncation: Option<usize>,
    /// Probability mass moved onto the largest retained index.
    pub folded_mass: Option<f64>,
    /// Truncation too short to reach across the graph.
    pub truncation_warning: bool,
    /// Truncation budget ran out before the tail dropped below tolerance.
    pub incomplete: bool,
}

#[derive(Debug, Clone)]
enum Storage {
    Sparse(CsrMatrix),
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct MarkovKernel {
    storage: Storage,
    measure: Arc<[f64]>,
    label: KernelLabel,
    meta: KernelMeta,
    spectrum: OnceLock<Arc<Spectrum>>,
}

/// Natural random walk: `k(x, y) = mu_xy / (mu(x) mu(y))`.
pub fn natural_walk(g: &WeightedGraph) -> MarkovKernel {
    let mu = g.measures();
    let rows = (0..g.vertex_count())
        .map(|x| g.neighbors(x).iter().map(|&(y, w)| (y, w / (mu[x] * mu[y]))).collect())
        .collect();
    MarkovKernel {
        storage: Storage::Sparse(CsrMatrix::from_rows(rows)),
        measure: mu.into(),
        label: KernelLabel::P,
        meta: KernelMeta { p0: Some(g.p0()), ..KernelMeta::default() },
        spectrum: OnceLock::new(),
    }
}

/// `Q = (P + P^2) / 2`.
///
/// The `P^2` entries are summed over intermediate vertices in increasing
/// order, which makes the stored table exactly symmetric.
pub fn lazy_pair(p: &MarkovKernel) -> Result<MarkovKernel> {
    let Storage::Sparse(pk) = &p.storage else {
        return Err(Error::Unsupported("lazy_pair expects a sparse one-step kernel".into()));
    };
    let n = p.size();
    let mu = &p.measure;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
            for (z, kxz) in pk.row(x) {
                let a = kxz * mu[z];
                for (y, kzy) in pk.row(z) {
                    *acc.entry(y).or_insert(0.0) += a * kzy;
                }
            }
            let mut row: std::collections::BTreeMap<usize, f64> =
                acc.into_iter().map(|(y, v)| (y, 0.5 * v)).collect();
            for (y, kxy) in pk.row(x) {
                *row.entry(y).or_insert(0.0) += 0.5 * kxy;
            }
            row.into_iter().collect::<Vec<_>>()
        })
        .collect();
    // Re-pair each entry with its transpose so symmetry is exact regardless
    // of how the products rounded.
    let mut csr_rows = rows.clone();
    for (x, row) in csr_rows.iter_mut().enumerate() {
        for e in row.iter_mut() {
            if e.0 > x {
                let t = rows[e.0][rows[e.0].binary_search_by_key(&x, |r| r.0).unwrap()].1;
                e.1 = 0.5 * (e.1 + t);
            }
        }
    }
    for x in 0..n {
        for i in 0..csr_rows[x].len() {
            let (y, _) = csr_rows[x][i];
            if y < x {
                let v = csr_rows[y][csr_rows[y].binary_search_by_key(&x, |r| r.0).unwrap()].1;
                csr_rows[x][i].1 = v;
            }
        }
    }
    Ok(MarkovKernel {
        storage: Storage::Sparse(CsrMatrix::from_rows(csr_rows)),
        measure: p.measure.clone(),
        label: KernelLabel::Q,
        meta: KernelMeta::default(),
        spectrum: OnceLock::new(),
    })
}

/// The identity operator, `k(x, y) = 1_{x=y} / mu(x)`.
pub fn identity_kernel(measure: &[f64]) -> MarkovKernel {
    let rows = measure.iter().enumerate().map(|(x, &m)| vec![(x, 1.0 / m)]).collect();
    MarkovKernel {
        storage: Storage::Sparse(CsrMatrix::from_rows(rows)),
        measure: measure.into(),
        label: KernelLabel::Identity,
        meta: KernelMeta::default(),
        spectrum: OnceLock::new(),
    }
}

impl MarkovKernel {
    /// Wraps a dense kernel table after checking symmetry, sign and
    /// stochasticity.
    pub fn from_dense(k: DMatrix<f64>, measure: &[f64], label: KernelLabel) -> Result<Self> {
        let n = measure.len();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: k.nrows() });
        }
        for x in 0..n {
            let mut mass = 0.0;
            for y in 0..n {
                let v = k[(x, y)];
                if !(v >= 0.0) {
                    return Err(Error::InvalidParameter(format!("negative kernel entry at ({x}, {y}): {v}")));
                }
                if v != k[(y, x)] {
                    return Err(Error::InvalidParameter(format!("kernel not symmetric at ({x}, {y})")));
                }
                mass += v * measure[y];
            }
            if (mass - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!("row {x} has mass {mass}")));
            }
        }
        Ok(Self::dense_unchecked(k, measure.into(), label, KernelMeta::default()))
    }

    fn dense_unchecked(k: DMatrix<f64>, measure: Arc<[f64]>, label: KernelLabel, meta: KernelMeta) -> Self {
        MarkovKernel { storage: Storage::Dense(k), measure, label, meta, spectrum: OnceLock::new() }
    }

    pub fn size(&self) -> usize {
        self.measure.len()
    }

    pub fn label(&self) -> &KernelLabel {
        &self.label
    }

    pub fn meta(&self) -> &KernelMeta {
        &self.meta
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub(crate) fn dense_table(&self) -> Option<&DMatrix<f64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    /// `k(x, y)`.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        match &self.storage {
            Storage::Sparse(m) => m.get(x, y),
            Storage::Dense(m) => m[(x, y)],
        }
    }

    /// Nonzero entries `(y, k(x, y))` of row `x`, in increasing `y`.
    pub fn row_entries(&self, x: usize) -> Vec<(usize, f64)> {
        match &self.storage {
            Storage::Sparse(m) => m.row(x).collect(),
            Storage::Dense(m) => (0..self.size()).map(|y| (y, m[(x, y)])).filter(|e| e.1 != 0.0).collect(),
        }
    }

    /// `sum_y k(x, y) mu(y)`.
    pub fn row_mass(&self, x: usize) -> f64 {
        self.row_entries(x).iter().map(|&(y, v)| v * self.measure[y]).sum()
    }

    /// Largest deviation of a row mass from 1.
    pub fn stochasticity_error(&self) -> f64 {
        (0..self.size()).map(|x| (self.row_mass(x) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `K f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = f.iter().zip(self.measure.iter()).map(|(a, m)| a * m).collect();
        match &self.storage {
            Storage::Sparse(m) => m.mul_vec(&g),
            Storage::Dense(m) => {
                let n = self.size();
                // Column-major storage: row x of a symmetric matrix is column x.
                let col = |x: usize| -> f64 { m.column(x).iter().zip(&g).map(|(a, b)| a * b).sum() };
                if n >= 512 {
                    (0..n).into_par_iter().map(col).collect()
                } else {
                    (0..n).map(col).collect()
                }
            }
        }
    }

    /// `K F` for a block of column vectors.
    pub fn apply_block(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = f.clone();
        for (x, mut row) in g.row_iter_mut().enumerate() {
            row *= self.measure[x];
        }
        match &self.storage {
            Storage::Dense(m) => m * g,
            Storage::Sparse(m) => {
                let mut out = DMatrix::zeros(f.nrows(), f.ncols());
                for x in 0..self.size() {
                    for (y, v) in m.row(x) {
                        for c in 0..f.ncols() {
                            out[(x, c)] += v * g[(y, c)];
                        }
                    }
                }
                out
            }
        }
    }

    /// Dense kernel table.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Sparse(m) => m.to_dense(),
            Storage::Dense(m) => m.clone(),
        }
    }

    /// Transition matrix `T(x, y) = k(x, y) mu(y)`.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let mut t = self.to_dense();
        for (y, mut col) in t.column_iter_mut().enumerate() {
            col *= self.measure[y];
        }
        t
    }

    /// `S = D^{1/2} k D^{1/2}`, the matrix of `K` in an orthonormal basis of
    /// `l^2(mu)`.
    pub fn symmetric_form(&self) -> DMatrix<f64> {
        let mut s = self.to_dense();
        let sq: Vec<f64> = self.measure.iter().map(|m| m.sqrt()).collect();
        let n = self.size();
        for y in 0..n {
            for x in 0..n {
                s[(x, y)] *= sq[x] * sq[y];
            }
        }
        symmetrize(&mut s);
        s
    }

    /// Eigen-decomposition of [`Self::symmetric_form`], computed once.
    pub fn spectrum(&self) -> Arc<Spectrum> {
        self.spectrum.get_or_init(|| Arc::new(Spectrum::of(self.symmetric_form()))).clone()
    }

    /// Kernel of `h(K)` for a spectral function `h` that fixes 1 and maps
    /// the spectrum of `K` into `[-1, 1]`.
    ///
    /// Round-off in the reconstruction is cleaned up by clipping negative
    /// entries and resetting the diagonal so every row has mass exactly 1.
    pub fn spectral_function(
        &self,
        h: impl Fn(f64) -> f64,
        label: KernelLabel,
        meta: KernelMeta,
    ) -> MarkovKernel {
        let spec = self.spectrum();
        let mut k = spec.apply_fn(h);
        let isq: Vec<f64> = self.measure.iter().map(|m| 1.0 / m.sqrt()).collect();
        let n = self.size();
        for y in 0..n {
            for x in 0..n {
                let v = k[(x, y)] * isq[x] * isq[y];
                k[(x, y)] = v.max(0.0);
            }
        }
        symmetrize(&mut k);
        fix_diagonal(&mut k, &self.measure);
        Self::dense_unchecked(k, self.measure.clone(), label, meta)
    }

    /// `K^n` as a dense kernel, by repeated squaring on the transition matrix.
    pub fn power(&self, n: usize) -> MarkovKernel {
        let t = self.transition_matrix();
        let size = self.size();
        let mut result = DMatrix::identity(size, size);
        let mut base = t;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        for (y, mut col) in result.column_iter_mut().enumerate() {
            col /= self.measure[y];
        }
        symmetrize(&mut result);
        let label = KernelLabel::Power { base: Box::new(self.label.clone()), n };
        Self::dense_unchecked(result, self.measure.clone(), label, KernelMeta::default())
    }
}

/// Sets `k(x, x)` so that each row of `k` has mass one under `mu`.
fn fix_diagonal(k: &mut DMatrix<f64>, mu: &[f64]) {
    let n = mu.len();
    for x in 0..n {
        let off: f64 = (0..n).filter(|&y| y != x).map(|y| k[(x, y)] * mu[y]).sum();
        k[(x, x)] = ((1.0 - off) / mu[x]).max(0.0);
    }
}

/// `K^n f` by `n` successive applications.
pub fn power_apply(k: &MarkovKernel, n: usize, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != k.size() {
        return Err(Error::DimensionMismatch { expected: k.size(), got: f.len() });
    }
    let mut v = f.to_vec();
    for _ in 0..n {
        v = k.apply(&v);
    }
    Ok(v)
}

/// `k_n(x, .)`, obtained by applying `K^n` to `1_x / mu(x)`.
pub fn kernel_row(k: &MarkovKernel, n: usize, x: usize) -> Result<Vec<f64>> {
    if x >= k.size() {
        return Err(Error::VertexOutOfRange { vertex: x, count: k.size() });
    }
    let mut e = vec![0.0; k.size()];
    e[x] = 1.0 / k.measure[x];
    power_apply(k, n, &e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    pub psi: f64,
    /// `n` lies beyond the boundary-safe window.
    pub flag_boundary: bool,
    pub argmax: usize,
}

/// `psi_K(n) = max_x k_{2n}(x, x)` over a base set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub points: Vec<DecayPoint>,
}

impl DecayCurve {
    pub fn ns(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.n as f64).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.psi).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,psi,flag_boundary,base_vertex_argmax\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:e},{},{}", p.n, p.psi, u8::from(p.flag_boundary), p.argmax);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiRoute {
    /// Rows `k_n(x, .)` advanced one application at a time.
    Incremental,
    /// `k_{2n}(x, x) = sum_j lambda_j^{2n} u_j(x)^2 / mu(x)`.
    Spectral,
}

fn check_psi_args(k: &MarkovKernel, n_list: &[usize], base: &[usize]) -> Result<()> {
    if base.is_empty() {
        return Err(Error::EmptyWindow("psi needs a nonempty base set".into()));
    }
    if let Some(&bad) = base.iter().find(|&&x| x >= k.size()) {
        return Err(Error::VertexOutOfRange { vertex: bad, count: k.size() });
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_list must be strictly increasing".into()));
    }
    Ok(())
}

/// Deterministic reduction: first base vertex attaining the maximum.
fn reduce_max(per_x: &[Vec<f64>], base: &[usize], n_list: &[usize], n_safe: Option<usize>) -> DecayCurve {
    let points = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut best = f64::NEG_INFINITY;
            let mut arg = base[0];
            for (b, vals) in base.iter().zip(per_x) {
                if vals[i] > best {
                    best = vals[i];
                    arg = *b;
                }
            }
            DecayPoint { n, psi: best, flag_boundary: n_safe.is_some_and(|s| n > s), argmax: arg }
        })
        .collect();
    DecayCurve { points }
}

/// `psi_K(n)` over `base` via the chosen route. Entries with `n > n_safe`
/// are flagged.
pub fn psi_with(
    k: &MarkovKernel,
    n_list: &[usize],
    base: &[usize],
    n_safe: Option<usize>,
    route: PsiRoute,
) -> Result<DecayCurve> {
    check_psi_args(k, n_list, base)?;
    let per_x: Vec<Vec<f64>> = match route {
        PsiRoute::Incremental => base
            .par_iter()
            .map(|&x| {
                let mu = &k.measure;
                let mut v = vec![0.0; k.size()];
                v[x] = 1.0 / mu[x];
                let mut at = 0;
                n_list
                    .iter()
                    .map(|&n| {
                        while at < n {
                            v = k.apply(&v);
                            at += 1;
                        }
                        v.iter().zip(mu.iter()).map(|(a, m)| a * a * m).sum()
                    })
                    .collect()
            })
            .collect(),
        PsiRoute::Spectral => {
            let spec = k.spectrum();
            let powers: Vec<Vec<f64>> = n_list
                .iter()
                .map(|&n| spec.values.iter().map(|l| if n == 0 { 1.0 } else { (l * l).powf(n as f64) }).collect())
                .collect();
            base.par_iter()
                .map(|&x| {
                    let w: Vec<f64> = spec.vectors.row(x).iter().map(|u| u * u / k.measure[x]).collect();
                    // k_0(x, x) = 1 / mu(x) exactly; the eigen-sum only up to rounding.
                    powers
                        .iter()
                        .zip(n_list)
                        .map(|(p, &n)| if n == 0 { 1.0 / k.measure[x] } else { p.iter().zip(&w).map(|(a, b)| a * b).sum() })
                        .collect()
                })
                .collect()
        }
    };
    Ok(reduce_max(&per_x, base, n_list, n_safe))
}

/// `psi_K(n)` with the route chosen from the kernel alone: spectral for
/// dense kernels of moderate size, incremental otherwise.
pub fn psi(k: &MarkovKernel, n_list: &[usize], base: &[usize], n_safe: Option<usize>) -> Result<DecayCurve> {
    let route = if k.is_dense() && k.size() <= 4000 { PsiRoute::Spectral } else { PsiRoute::Incremental };
    psi_with(k, n_list, base, n_safe, route)
}

/// `M_{r,K} = max_x sum_y d(x, y)^r k(x, y) mu(y)` over `base` (or every
/// vertex when `base` is `None`).
pub fn moment(k: &MarkovKernel, g: &WeightedGraph, r: f64, base: Option<&[usize]>) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("moment order must be positive (got {r})")));
    }
    let all: Vec<usize>;
    let xs = match base {
        Some(b) => b,
        None => {
            all = (0..g.vertex_count()).collect();
            &all
        }
    };
    let vals: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            let d = g.dist_row(x);
            k.row_entries(x)
                .iter()
                .map(|&(y, v)| f64::from(d[y]).powf(r) * v * k.measure[y])
                .sum()
        })
        .collect();
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    /// `<(I - K) f, f>`.
    pub energy: f64,
    /// `1/2 sum_{x,y} (f(x) - f(y))^2 k(x, y) mu(x) mu(y)`.
    pub pairwise: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn inner(f: &[f64], g: &[f64], mu: &[f64]) -> f64 {
    f.iter().zip(g).zip(mu).map(|((a, b), m)| a * b * m).sum()
}

pub fn norm_l1(f: &[f64], mu: &[f64]) -> f64 {
    f.iter().zip(mu).map(|(a, m)| a.abs() * m).sum()
}

pub fn norm_l2(f: &[f64], mu: &[f64]) -> f64 {
    inner(f, f, mu).sqrt()
}

pub fn norm_linf(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// `E_K(f, f)` as a quadratic form and as the pairwise sum.
pub fn dirichlet(k: &MarkovKernel, f: &[f64]) -> Result<DirichletReport> {
    if f.len() != k.size() {
        return Err(Error::DimensionMismatch { expected: k.size(), got: f.len() });
    }
    let mu = &k.measure;
    let kf = k.apply(f);
    let energy = inner(f, f, mu) - inner(&kf, f, mu);
    let pairwise: f64 = (0..k.size())
        .map(|x| {
            k.row_entries(x)
                .iter()
                .map(|&(y, v)| (f[x] - f[y]).powi(2) * v * mu[x] * mu[y])
                .sum::<f64>()
        })
        .sum::<f64>()
        * 0.5;
    Ok(DirichletReport { energy, pairwise, l1: norm_l1(f, mu), l2: norm_l2(f, mu), linf: norm_linf(f) })
}

/// `f_R(x)`: the `mu`-average of `f` over `B(x, R)`; `f_R = f` for `R < 1`.
pub fn ball_average(g: &WeightedGraph, f: &[f64], r: f64) -> Result<Vec<f64>> {
    if f.len() != g.vertex_count() {
        return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: f.len() });
    }
    if r < 1.0 {
        return Ok(f.to_vec());
    }
    let mu = g.measures();
    Ok((0..g.vertex_count())
        .into_par_iter()
        .map(|x| {
            let d = g.dist_row(x);
            let (mut num, mut den) = (0.0, 0.0);
            for y in 0..f.len() {
                if f64::from(d[y]) <= r {
                    num += f[y] * mu[y];
                    den += mu[y];
                }
            }
            num / den
        })
        .collect())
}

/// FNV-1a hash of the measure's bit patterns.
pub fn measure_checksum(mu: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for m in mu {
        for b in m.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Text dump: a header line, then one row of `k(x, .)` per line.
pub fn kernel_dump(k: &MarkovKernel) -> String {
    let n = k.size();
    let mut out = String::with_capacity(n * n * 12 + 64);
    let _ = writeln!(out, "# size {n} label {} measure_checksum {:016x}", k.label, measure_checksum(&k.measure));
    for x in 0..n {
        for y in 0..n {
            if y > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:e}", k.entry(x, y));
        }
        out.push('\n');
    }
    out
}
