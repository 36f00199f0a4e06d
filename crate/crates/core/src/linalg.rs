//! Dense and sparse matrix storage with row-parallel products.
//!
//! Every product is computed as a collection of independent row dot products,
//! so the `parallel` and sequential builds return bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};

/// Below this many stored entries a product runs on the calling thread.
pub const PAR_MIN_ENTRIES: usize = 1 << 15;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators; fixed order keeps results reproducible
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(out.len(), self.rows);
        if self.cols == 0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        #[cfg(feature = "parallel")]
        {
            if self.data.len() >= PAR_MIN_ENTRIES {
                out.par_iter_mut()
                    .zip(self.data.par_chunks(self.cols))
                    .for_each(|(o, row)| *o = dot(row, x));
                return;
            }
        }
        for (o, row) in out.iter_mut().zip(self.data.chunks(self.cols)) {
            *o = dot(row, x);
        }
    }

    /// `selfᵀ * self`, symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let t = self.transpose();
        t.matmul(self)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let ot = other.transpose();
        let n = other.cols;
        let mut out = DenseMatrix::zeros(self.rows, n);
        if n == 0 {
            return out;
        }
        let fill = |(i, orow): (usize, &mut [f64])| {
            let arow = self.row(i);
            for (j, o) in orow.iter_mut().enumerate() {
                *o = dot(arow, ot.row(j));
            }
        };
        #[cfg(feature = "parallel")]
        {
            out.data.par_chunks_mut(n).enumerate().for_each(fill);
        }
        #[cfg(not(feature = "parallel"))]
        {
            out.data.chunks_mut(n).enumerate().for_each(fill);
        }
        out
    }

    /// Scale row `i` by `d[i]`.
    pub fn scale_rows(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.rows);
        for (i, di) in d.iter().enumerate() {
            for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                *v *= di;
            }
        }
    }

    /// `alpha * self + beta * other`
    pub fn lin_comb(&self, alpha: f64, other: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidArgument(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside {rows}x{cols}"
                )));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            indices.push(j);
            values.push(v);
            indptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(CsrMatrix { rows, cols, indptr, indices, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.push((i, self.indices[k], self.values[k]));
            }
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        CsrMatrix::from_triplets(self.cols, self.rows, &t).expect("transpose keeps bounds")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, v);
        }
        d
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.indptr[i]..self.indptr[i + 1] {
            s += self.values[k] * x[self.indices[k]];
        }
        s
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        #[cfg(feature = "parallel")]
        {
            if self.nnz() >= PAR_MIN_ENTRIES {
                return (0..self.rows).into_par_iter().map(|i| self.row_dot(i, x)).collect();
            }
        }
        (0..self.rows).map(|i| self.row_dot(i, x)).collect()
    }
}

/// A matrix together with its stored transpose, so both `Ax` and `Aᵀy` are
/// row-oriented products.
#[derive(Debug, Clone)]
pub enum LinearOperator {
    Dense { a: DenseMatrix, at: DenseMatrix },
    Sparse { a: CsrMatrix, at: CsrMatrix },
}

impl LinearOperator {
    pub fn dense(a: DenseMatrix) -> Self {
        let at = a.transpose();
        LinearOperator::Dense { a, at }
    }

    pub fn sparse(a: CsrMatrix) -> Self {
        let at = a.transpose();
        LinearOperator::Sparse { a, at }
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearOperator::Dense { a, .. } => a.rows(),
            LinearOperator::Sparse { a, .. } => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearOperator::Dense { a, .. } => a.cols(),
            LinearOperator::Sparse { a, .. } => a.cols(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LinearOperator::Dense { a, .. } => a.matvec(x),
            LinearOperator::Sparse { a, .. } => a.matvec(x),
        }
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        match self {
            LinearOperator::Dense { at, .. } => at.matvec(y),
            LinearOperator::Sparse { at, .. } => at.matvec(y),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LinearOperator::Dense { a, .. } => a.clone(),
            LinearOperator::Sparse { a, .. } => a.to_dense(),
        }
    }
}
