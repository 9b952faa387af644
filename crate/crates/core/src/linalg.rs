//! Dense kernels behind the screening algorithms.
//!
//! Matrices are stored column-major so that a predictor column is a contiguous
//! slice. The Cholesky factor is kept in upper-triangular form, `W = SᵀS`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Column block width for the batched triangular solve.
const SOLVE_LANES: usize = 8;
/// Column panel length for the gram kernel.
const GRAM_PANEL: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Wraps column-major data, rejecting a length mismatch or non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        let m = DenseMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from a slice of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Self::from_col_major(n, p, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    /// Caller guarantees `data.len() == rows * cols` and finite entries.
    pub(crate) fn from_col_major_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos % self.rows.max(1),
                pos / self.rows.max(1)
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    #[allow(dead_code)]
    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Raw column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[i * self.cols + j] = self.data[j * self.rows + i];
            }
        }
        t
    }

    /// Plain `self * other`; used off the hot path.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in oc.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::invalid(format!(
                "vector of length {} for a matrix with {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (j, &b) in v.iter().enumerate() {
            for (d, &a) in out.iter_mut().zip(self.col(j)) {
                *d += a * b;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Copy of the columns listed in `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        DenseMatrix::from_col_major_unchecked(self.rows, idx.len(), data)
    }
}

/// Upper-triangular `S` with `W = SᵀS`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    s: DenseMatrix,
    dim: usize,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &DenseMatrix {
        &self.s
    }

    /// `W⁻¹ b` by one forward and one back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut z = solve_transposed_triangular(self, b)?;
        self.back_substitute(&mut z);
        Ok(z)
    }

    /// In place `S x = z`.
    fn back_substitute(&self, z: &mut [f64]) {
        let n = self.dim;
        for k in (0..n).rev() {
            let col = self.s.col(k);
            let xk = z[k] / col[k];
            z[k] = xk;
            for (zi, &sik) in z[..k].iter_mut().zip(&col[..k]) {
                *zi -= xk * sik;
            }
        }
    }

    /// In place `Sᵀ v = b`.
    fn forward_substitute(&self, v: &mut [f64]) {
        for k in 0..self.dim {
            let col = self.s.col(k);
            let acc = dot(&col[..k], &v[..k]);
            v[k] = (v[k] - acc) / col[k];
        }
    }
}

/// Four-lane dot product; the lane split is fixed so results are reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            lanes[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

/// `XXᵀ` for an n×p matrix; exactly symmetric.
pub fn gram(x: &DenseMatrix) -> DenseMatrix {
    let n = x.rows;
    let p = x.cols;
    // Row-major copy so each observation is contiguous.
    let mut xt = vec![0.0; n * p];
    const TILE: usize = 32;
    for k0 in (0..p).step_by(TILE) {
        for a0 in (0..n).step_by(TILE) {
            for k in k0..(k0 + TILE).min(p) {
                let col = &x.col(k)[a0..(a0 + TILE).min(n)];
                for (da, &v) in col.iter().enumerate() {
                    xt[(a0 + da) * p + k] = v;
                }
            }
        }
    }

    let mut w = vec![0.0; n * n];
    let mut start = 0;
    while start < p {
        let end = (start + GRAM_PANEL).min(p);
        let xt = &xt;
        w.par_chunks_mut(n.max(1)).enumerate().for_each(|(a, wrow)| {
            let ra = &xt[a * p + start..a * p + end];
            let mut b = a;
            while b + 4 <= n {
                let rows = [
                    &xt[b * p + start..b * p + end],
                    &xt[(b + 1) * p + start..(b + 1) * p + end],
                    &xt[(b + 2) * p + start..(b + 2) * p + end],
                    &xt[(b + 3) * p + start..(b + 3) * p + end],
                ];
                let sums = dot4(ra, rows);
                for r in 0..4 {
                    wrow[b + r] += sums[r];
                }
                b += 4;
            }
            while b < n {
                wrow[b] += dot(ra, &xt[b * p + start..b * p + end]);
                b += 1;
            }
        });
        start = end;
    }

    // Mirror the upper triangle; a symmetric row-major buffer is also column-major.
    for a in 0..n {
        for b in (a + 1)..n {
            w[b * n + a] = w[a * n + b];
        }
    }
    DenseMatrix::from_col_major_unchecked(n, n, w)
}

/// One row against four rows, with the same lane arithmetic as [`dot`].
#[inline]
fn dot4(a: &[f64], rows: [&[f64]; 4]) -> [f64; 4] {
    let mut lanes = [[0.0f64; 4]; 4];
    let len4 = a.len() / 4 * 4;
    let mut k = 0;
    while k < len4 {
        let xa = &a[k..k + 4];
        for r in 0..4 {
            let xb = &rows[r][k..k + 4];
            for l in 0..4 {
                lanes[r][l] += xa[l] * xb[l];
            }
        }
        k += 4;
    }
    let mut out = [0.0; 4];
    for r in 0..4 {
        let mut tail = 0.0;
        for i in len4..a.len() {
            tail += a[i] * rows[r][i];
        }
        let l = &lanes[r];
        out[r] = (l[0] + l[1]) + (l[2] + l[3]) + tail;
    }
    out
}

/// `W = XXᵀ + λI`.
pub fn gram_ridge(x: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    check_lambda(lambda)?;
    let mut w = gram(x);
    add_to_diagonal(&mut w, lambda);
    Ok(w)
}

pub(crate) fn add_to_diagonal(w: &mut DenseMatrix, lambda: f64) {
    let n = w.rows;
    for i in 0..n {
        w.data[i * n + i] += lambda;
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Upper Cholesky factorization without pivoting.
///
/// Fails with the 0-based index of the first pivot that is not above
/// `1e-12` times the largest diagonal entry.
pub fn cholesky(w: &DenseMatrix) -> Result<CholeskyFactor> {
    let n = w.rows;
    if n == 0 || w.cols != n {
        return Err(Error::invalid(format!(
            "cholesky needs a non-empty square matrix, got {}x{}",
            w.rows, w.cols
        )));
    }
    let scale = w.max_abs();
    for j in 0..n {
        for i in 0..j {
            if (w.get(i, j) - w.get(j, i)).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let max_diag = (0..n).map(|i| w.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max_diag.max(0.0);

    let mut s = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let (ci, cj) = (s.col(i), s.col(j));
            let v = (w.get(i, j) - dot(&ci[..i], &cj[..i])) / ci[i];
            s.set(i, j, v);
        }
        let cj = s.col(j);
        let d = w.get(j, j) - dot(&cj[..j], &cj[..j]);
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        s.set(j, j, d.sqrt());
    }
    Ok(CholeskyFactor { s, dim: n })
}

/// Solves `Sᵀ v = b` (forward substitution; `Sᵀ` is lower triangular).
pub fn solve_transposed_triangular(factor: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != factor.dim {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, factor has dimension {}",
            b.len(),
            factor.dim
        )));
    }
    let mut v = b.to_vec();
    factor.forward_substitute(&mut v);
    Ok(v)
}

/// Inverse of a small symmetric positive definite matrix via its Cholesky factor.
pub fn invert_spd(w: &DenseMatrix) -> Result<DenseMatrix> {
    let factor = cholesky(w)?;
    let m = factor.dim;
    let mut inv = DenseMatrix::zeros(m, m);
    inv.data.par_chunks_mut(m).enumerate().for_each(|(j, col)| {
        col[j] = 1.0;
        factor.forward_substitute(col);
        factor.back_substitute(col);
    });
    for j in 0..m {
        for i in (j + 1)..m {
            let avg = 0.5 * (inv.get(i, j) + inv.get(j, i));
            inv.set(i, j, avg);
            inv.set(j, i, avg);
        }
    }
    Ok(inv)
}

/// For every column `x_i` of `x`, computes `u_i = S⁻ᵀ x_i` and returns
/// `(u_iᵀθ, u_iᵀu_i)`. Columns are processed in fixed blocks, so the output
/// does not depend on the number of worker threads.
pub fn whitened_inner_products(
    factor: &CholeskyFactor,
    x: &DenseMatrix,
    theta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = factor.dim;
    if x.rows != n || theta.len() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: factor {n}, x has {} rows, theta has {}",
            x.rows,
            theta.len()
        )));
    }
    let p = x.cols;
    let blocks = p.div_ceil(SOLVE_LANES);
    let per_block: Vec<[[f64; SOLVE_LANES]; 2]> = (0..blocks)
        .into_par_iter()
        .map_init(
            || vec![0.0; n * SOLVE_LANES],
            |buf, blk| solve_block(factor, x, theta, blk * SOLVE_LANES, buf),
        )
        .collect();

    let mut cross = Vec::with_capacity(p);
    let mut norms = Vec::with_capacity(p);
    for (blk, [c, q]) in per_block.iter().enumerate() {
        let width = SOLVE_LANES.min(p - blk * SOLVE_LANES);
        cross.extend_from_slice(&c[..width]);
        norms.extend_from_slice(&q[..width]);
    }
    Ok((cross, norms))
}

/// Forward substitution for up to eight columns at once, interleaved so the
/// inner loop runs across lanes. Unused lanes carry zeros.
fn solve_block(
    factor: &CholeskyFactor,
    x: &DenseMatrix,
    theta: &[f64],
    first: usize,
    buf: &mut [f64],
) -> [[f64; SOLVE_LANES]; 2] {
    let n = factor.dim;
    let width = SOLVE_LANES.min(x.cols - first);
    buf.fill(0.0);
    for l in 0..width {
        for (k, &v) in x.col(first + l).iter().enumerate() {
            buf[k * SOLVE_LANES + l] = v;
        }
    }

    let mut cross = [0.0; SOLVE_LANES];
    let mut norm = [0.0; SOLVE_LANES];
    for k in 0..n {
        let col = factor.s.col(k);
        let mut acc = [0.0; SOLVE_LANES];
        for (j, &c) in col[..k].iter().enumerate() {
            let vj = &buf[j * SOLVE_LANES..(j + 1) * SOLVE_LANES];
            for l in 0..SOLVE_LANES {
                acc[l] += c * vj[l];
            }
        }
        let d = col[k];
        let t = theta[k];
        let vk = &mut buf[k * SOLVE_LANES..(k + 1) * SOLVE_LANES];
        for l in 0..SOLVE_LANES {
            let u = (vk[l] - acc[l]) / d;
            vk[l] = u;
            cross[l] += u * t;
            norm[l] += u * u;
        }
    }
    [cross, norm]
}
