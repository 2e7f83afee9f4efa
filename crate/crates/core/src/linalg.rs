//! Small numerical building blocks: least-squares lines, a CSR matrix,
//! preconditioned conjugate gradients and a cached symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for two points).
    pub stderr: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return LineFit { slope: f64::NAN, intercept: f64::NAN, stderr: f64::NAN };
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let sse: f64 = (0..n).map(|i| (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit { slope, intercept, stderr }
}

/// Fit of `ln y` against `ln x`; non-positive points are dropped.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> LineFit {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .unzip();
    fit_line(&lx, &ly)
}

/// Compressed sparse rows. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists, which must be sorted by column.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`. Each row is summed sequentially in column order, so the
    /// result does not depend on how rows are spread over threads.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let row = |i: usize| -> f64 { self.row(i).map(|(j, v)| v * x[j]).sum() };
        if self.n >= 4096 {
            (0..self.n).into_par_iter().map(row).collect()
        } else {
            (0..self.n).map(row).collect()
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solve {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for `A x = b` with `A`
/// symmetric positive definite, given as a matrix-vector product.
///
/// Stops when `|r| <= tol * |b|`; fails with [`Error::NotConverged`] after
/// `max_iter` iterations.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Solve> {
    let n = b.len();
    if diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: diag.len() });
    }
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(Solve { x, iterations: 0, residual: 0.0 });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(Solve { x, iterations: it, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: norm(&r) / bnorm })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigen-decomposition `S = U diag(values) U^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(s: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(s);
        Spectrum { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `U diag(h(values)) U^T`, symmetrized entrywise.
    pub fn apply_fn(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let hv: Vec<f64> = self.values.iter().map(|&l| h(l)).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= hv[j];
        }
        let mut m = &scaled * self.vectors.transpose();
        symmetrize(&mut m);
        m
    }
}

/// Replaces `m` by `(m + m^T) / 2` so that symmetry holds bit for bit.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
