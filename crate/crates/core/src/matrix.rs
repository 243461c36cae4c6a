//! Dense and compressed-sparse-row matrices with the block kernels the
//! row/column-action solvers are built on.
//!
//! Dense storage is row-major. Sparse storage keeps a CSR copy for row access
//! and a transposed twin (CSR of `Aᵀ`, i.e. CSC of `A`) for column access,
//! built once at construction. Matrices are immutable after construction.
//!
//! All block kernels accumulate in index order, so two algorithms that route
//! the same arithmetic through the same kernel produce bitwise-identical
//! results.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

/// An ordered set of 0-based indices along one axis.
///
/// Contiguous ranges are kept as ranges so block kernels slice instead of
/// gathering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSet {
    Range(Range<usize>),
    List(Vec<usize>),
}

impl IndexSet {
    /// Builds an index set, collapsing a contiguous ascending list to a range.
    pub fn from_list(list: Vec<usize>) -> Self {
        let contiguous = !list.is_empty() && list.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous {
            IndexSet::Range(list[0]..list[list.len() - 1] + 1)
        } else {
            IndexSet::List(list)
        }
    }

    pub fn single(index: usize) -> Self {
        IndexSet::Range(index..index + 1)
    }

    pub fn len(&self) -> usize {
        match self {
            IndexSet::Range(r) => r.len(),
            IndexSet::List(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> IndexIter<'_> {
        match self {
            IndexSet::Range(r) => IndexIter::Range(r.clone()),
            IndexSet::List(v) => IndexIter::List(v.iter()),
        }
    }

    pub fn as_range(&self) -> Option<Range<usize>> {
        match self {
            IndexSet::Range(r) => Some(r.clone()),
            IndexSet::List(_) => None,
        }
    }

    /// Membership test. Lists are assumed sorted, which `Partition` guarantees.
    pub fn contains(&self, index: usize) -> bool {
        match self {
            IndexSet::Range(r) => r.contains(&index),
            IndexSet::List(v) => v.binary_search(&index).is_ok(),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Checks bounds and duplicates against an axis of length `len`.
    pub fn validate(&self, axis: Axis, len: usize) -> Result<()> {
        match self {
            IndexSet::Range(r) => {
                if r.end > len {
                    return Err(Error::IndexOutOfRange {
                        axis,
                        index: r.end - 1,
                        len,
                    });
                }
            }
            IndexSet::List(v) => {
                let mut seen = vec![false; len];
                for &i in v {
                    if i >= len {
                        return Err(Error::IndexOutOfRange { axis, index: i, len });
                    }
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(Error::DuplicateIndex { axis, index: i });
                    }
                }
            }
        }
        Ok(())
    }
}

impl From<Range<usize>> for IndexSet {
    fn from(r: Range<usize>) -> Self {
        IndexSet::Range(r)
    }
}

pub enum IndexIter<'a> {
    Range(Range<usize>),
    List(std::slice::Iter<'a, usize>),
}

impl Iterator for IndexIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            IndexIter::Range(r) => r.next(),
            IndexIter::List(it) => it.next().copied(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            IndexIter::Range(r) => r.size_hint(),
            IndexIter::List(it) => it.size_hint(),
        }
    }
}

impl ExactSizeIterator for IndexIter<'_> {}

/// Compressed-sparse-row arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// Transposes an `nrows × ncols` CSR into the `ncols × nrows` CSR.
    /// Column indices of the result come out ascending.
    fn transpose(&self, nrows: usize, ncols: usize) -> Csr {
        let nnz = self.values.len();
        let mut counts = vec![0usize; ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        for i in 0..nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Csr {
            offsets,
            indices,
            values,
        }
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major, `rows * cols` values.
    Dense(Vec<f64>),
    Sparse { csr: Csr, csc: Csr },
}

#[derive(Clone, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, x| acc + x * x)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc + (x - y) * (x - y))
        .sqrt()
}

impl Matrix {
    /// Dense matrix from row-major values.
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        Error::check_len(rows * cols, data.len())?;
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: p / cols,
                col: p % cols,
            });
        }
        Ok(Matrix {
            rows,
            cols,
            storage: Storage::Dense(data),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            Error::check_len(n, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Matrix::dense(m, n, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::dense(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix::dense(n, n, data)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = v;
        }
        Matrix::dense(n, n, data)
    }

    /// Sparse matrix from 0-based `(row, col, value)` triplets. Duplicates are
    /// summed and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        check_shape(rows, cols)?;
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= rows {
                return Err(Error::IndexOutOfRange {
                    axis: Axis::Row,
                    index: i,
                    len: rows,
                });
            }
            if j >= cols {
                return Err(Error::IndexOutOfRange {
                    axis: Axis::Column,
                    index: j,
                    len: cols,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            entries.push((i, j, v));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut offsets = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == i && entries[k].1 == j {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                offsets[i + 1] += 1;
                indices.push(j);
                values.push(v);
            }
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        let csr = Csr {
            offsets,
            indices,
            values,
        };
        let csc = csr.transpose(rows, cols);
        Ok(Matrix {
            rows,
            cols,
            storage: Storage::Sparse { csr, csc },
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn axis_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Row => self.rows,
            Axis::Column => self.cols,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Number of stored nonzeros (dense storage counts nonzero values).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| **v != 0.0).count(),
            Storage::Sparse { csr, .. } => csr.values.len(),
        }
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn csr(&self) -> Option<&Csr> {
        match &self.storage {
            Storage::Sparse { csr, .. } => Some(csr),
            Storage::Dense(_) => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        match &self.storage {
            Storage::Dense(d) => d[i * self.cols + j],
            Storage::Sparse { csr, .. } => {
                let (cols, vals) = csr.row(i);
                cols.binary_search(&j).map_or(0.0, |p| vals[p])
            }
        }
    }

    /// Row-major copy of all entries.
    pub fn to_dense_vec(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { csr, .. } => {
                let mut d = vec![0.0; self.rows * self.cols];
                for i in 0..self.rows {
                    let (cols, vals) = csr.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        d[i * self.cols + j] = v;
                    }
                }
                d
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            storage: Storage::Dense(self.to_dense_vec()),
        }
    }

    pub fn to_sparse(&self) -> Matrix {
        match &self.storage {
            Storage::Sparse { .. } => self.clone(),
            Storage::Dense(_) => {
                let mut t = Vec::new();
                self.for_each_nonzero(|i, j, v| t.push((i, j, v)));
                Matrix::from_triplets(self.rows, self.cols, t).expect("valid dense matrix")
            }
        }
    }

    /// Visits stored nonzeros in row-major order.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, usize, f64)) {
        match &self.storage {
            Storage::Dense(d) => {
                for (p, &v) in d.iter().enumerate() {
                    if v != 0.0 {
                        f(p / self.cols, p % self.cols, v);
                    }
                }
            }
            Storage::Sparse { csr, .. } => {
                for i in 0..self.rows {
                    let (cols, vals) = csr.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        f(i, j, v);
                    }
                }
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        match &self.storage {
            Storage::Dense(d) => {
                let (m, n) = (self.rows, self.cols);
                let mut t = vec![0.0; m * n];
                for i in 0..m {
                    for j in 0..n {
                        t[j * m + i] = d[i * n + j];
                    }
                }
                Matrix {
                    rows: n,
                    cols: m,
                    storage: Storage::Dense(t),
                }
            }
            Storage::Sparse { csr, csc } => Matrix {
                rows: self.cols,
                cols: self.rows,
                storage: Storage::Sparse {
                    csr: csc.clone(),
                    csc: csr.clone(),
                },
            },
        }
    }

    /// Materializes the rows (or columns) in `indices` as a dense matrix.
    pub fn submatrix(&self, axis: Axis, indices: &IndexSet) -> Result<Matrix> {
        indices.validate(axis, self.axis_len(axis))?;
        let k = indices.len();
        match axis {
            Axis::Row => {
                let n = self.cols;
                let mut data = vec![0.0; k * n];
                for (l, i) in indices.iter().enumerate() {
                    let out = &mut data[l * n..(l + 1) * n];
                    match &self.storage {
                        Storage::Dense(d) => out.copy_from_slice(&d[i * n..(i + 1) * n]),
                        Storage::Sparse { csr, .. } => {
                            let (cols, vals) = csr.row(i);
                            for (&j, &v) in cols.iter().zip(vals) {
                                out[j] = v;
                            }
                        }
                    }
                }
                Matrix::dense(k, n, data)
            }
            Axis::Column => {
                let m = self.rows;
                let mut data = vec![0.0; m * k];
                for (l, j) in indices.iter().enumerate() {
                    match &self.storage {
                        Storage::Dense(d) => {
                            for i in 0..m {
                                data[i * k + l] = d[i * self.cols + j];
                            }
                        }
                        Storage::Sparse { csc, .. } => {
                            let (rows, vals) = csc.row(j);
                            for (&i, &v) in rows.iter().zip(vals) {
                                data[i * k + l] = v;
                            }
                        }
                    }
                }
                Matrix::dense(m, k, data)
            }
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => norm_sq(d),
            Storage::Sparse { csr, .. } => norm_sq(&csr.values),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// `σ₁(A)²`, via the SVD.
    pub fn spectral_norm_sq(&self) -> Result<f64> {
        let f = crate::factorizations::svd(self)?;
        Ok(f.sigma()[0] * f.sigma()[0])
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.rows_mul(&IndexSet::Range(0..self.rows), x, &mut out);
        Ok(out)
    }

    pub fn tmatvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        self.cols_tmul(&IndexSet::Range(0..self.cols), y, &mut out);
        Ok(out)
    }

    pub fn block<'a>(&'a self, axis: Axis, indices: &'a IndexSet) -> Result<BlockView<'a>> {
        indices.validate(axis, self.axis_len(axis))?;
        Ok(BlockView {
            matrix: self,
            axis,
            indices,
        })
    }

    /// `‖A_{I,:}‖_F²` or `‖A_{:,J}‖_F²` without materializing the block.
    pub(crate) fn block_frobenius_sq_unchecked(&self, axis: Axis, idx: &IndexSet) -> f64 {
        match (axis, &self.storage) {
            (Axis::Row, Storage::Dense(d)) => {
                let n = self.cols;
                match idx.as_range() {
                    Some(r) => norm_sq(&d[r.start * n..r.end * n]),
                    None => idx
                        .iter()
                        .fold(0.0, |acc, i| acc + norm_sq(&d[i * n..(i + 1) * n])),
                }
            }
            (Axis::Row, Storage::Sparse { csr, .. }) => {
                idx.iter().fold(0.0, |acc, i| acc + norm_sq(csr.row(i).1))
            }
            (Axis::Column, Storage::Dense(d)) => {
                let n = self.cols;
                let mut acc = 0.0;
                for i in 0..self.rows {
                    let row = &d[i * n..(i + 1) * n];
                    match idx.as_range() {
                        Some(r) => acc += norm_sq(&row[r]),
                        None => {
                            for j in idx.iter() {
                                acc += row[j] * row[j];
                            }
                        }
                    }
                }
                acc
            }
            (Axis::Column, Storage::Sparse { csc, .. }) => {
                idx.iter().fold(0.0, |acc, j| acc + norm_sq(csc.row(j).1))
            }
        }
    }

    /// `out[l] = A_{rows[l],:} · x`.
    pub(crate) fn rows_mul(&self, rows: &IndexSet, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), rows.len());
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.cols;
                for (o, i) in out.iter_mut().zip(rows.iter()) {
                    *o = dot(&d[i * n..(i + 1) * n], x);
                }
            }
            Storage::Sparse { csr, .. } => {
                for (o, i) in out.iter_mut().zip(rows.iter()) {
                    let (cols, vals) = csr.row(i);
                    *o = cols.iter().zip(vals).fold(0.0, |acc, (&j, &v)| acc + v * x[j]);
                }
            }
        }
    }

    /// `y += (A_{rows,:})ᵀ c`.
    pub(crate) fn rows_tmul_add(&self, rows: &IndexSet, c: &[f64], y: &mut [f64]) {
        debug_assert_eq!(c.len(), rows.len());
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.cols;
                for (&cl, i) in c.iter().zip(rows.iter()) {
                    for (yj, &a) in y.iter_mut().zip(&d[i * n..(i + 1) * n]) {
                        *yj += a * cl;
                    }
                }
            }
            Storage::Sparse { csr, .. } => {
                for (&cl, i) in c.iter().zip(rows.iter()) {
                    let (cols, vals) = csr.row(i);
                    for (&j, &a) in cols.iter().zip(vals) {
                        y[j] += a * cl;
                    }
                }
            }
        }
    }

    /// `y_J += (A_{rows,J})ᵀ c`, leaving coordinates outside `cols` untouched.
    pub(crate) fn rows_tmul_add_on(
        &self,
        rows: &IndexSet,
        cols: &IndexSet,
        c: &[f64],
        y: &mut [f64],
    ) {
        debug_assert_eq!(c.len(), rows.len());
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.cols;
                for (&cl, i) in c.iter().zip(rows.iter()) {
                    let row = &d[i * n..(i + 1) * n];
                    match cols.as_range() {
                        Some(r) => {
                            for (yj, &a) in y[r.clone()].iter_mut().zip(&row[r]) {
                                *yj += a * cl;
                            }
                        }
                        None => {
                            for j in cols.iter() {
                                y[j] += row[j] * cl;
                            }
                        }
                    }
                }
            }
            Storage::Sparse { csr, .. } => {
                for (&cl, i) in c.iter().zip(rows.iter()) {
                    let (idx, vals) = csr.row(i);
                    for (&j, &a) in idx.iter().zip(vals) {
                        if cols.contains(j) {
                            y[j] += a * cl;
                        }
                    }
                }
            }
        }
    }

    /// `out[l] = (A_{:,cols[l]})ᵀ z`.
    pub(crate) fn cols_tmul(&self, cols: &IndexSet, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), cols.len());
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.cols;
                out.iter_mut().for_each(|o| *o = 0.0);
                for (i, &zi) in z.iter().enumerate() {
                    let row = &d[i * n..(i + 1) * n];
                    match cols.as_range() {
                        Some(r) => {
                            for (o, &a) in out.iter_mut().zip(&row[r]) {
                                *o += a * zi;
                            }
                        }
                        None => {
                            for (o, j) in out.iter_mut().zip(cols.iter()) {
                                *o += row[j] * zi;
                            }
                        }
                    }
                }
            }
            Storage::Sparse { csc, .. } => {
                for (o, j) in out.iter_mut().zip(cols.iter()) {
                    let (rows, vals) = csc.row(j);
                    *o = rows.iter().zip(vals).fold(0.0, |acc, (&i, &a)| acc + a * z[i]);
                }
            }
        }
    }

    /// `z += A_{:,cols} c`.
    pub(crate) fn cols_mul_add(&self, cols: &IndexSet, c: &[f64], z: &mut [f64]) {
        debug_assert_eq!(c.len(), cols.len());
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.cols;
                for (i, zi) in z.iter_mut().enumerate() {
                    let row = &d[i * n..(i + 1) * n];
                    let s = match cols.as_range() {
                        Some(r) => dot(&row[r], c),
                        None => cols
                            .iter()
                            .zip(c)
                            .fold(0.0, |acc, (j, &cl)| acc + row[j] * cl),
                    };
                    *zi += s;
                }
            }
            Storage::Sparse { csc, .. } => {
                for (&cl, j) in c.iter().zip(cols.iter()) {
                    let (rows, vals) = csc.row(j);
                    for (&i, &a) in rows.iter().zip(vals) {
                        z[i] += a * cl;
                    }
                }
            }
        }
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.to_dense_vec() == other.to_dense_vec()
    }
}

/// A row or column block of a matrix, addressed by index set.
#[derive(Clone, Copy, Debug)]
pub struct BlockView<'a> {
    matrix: &'a Matrix,
    axis: Axis,
    indices: &'a IndexSet,
}

impl<'a> BlockView<'a> {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn indices(&self) -> &'a IndexSet {
        self.indices
    }

    /// Shape of the block as a submatrix.
    pub fn shape(&self) -> (usize, usize) {
        match self.axis {
            Axis::Row => (self.indices.len(), self.matrix.cols),
            Axis::Column => (self.matrix.rows, self.indices.len()),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix
            .block_frobenius_sq_unchecked(self.axis, self.indices)
    }

    /// Block-restricted product. With `transposed`, a row block maps a
    /// `|I|`-vector to an `n`-vector and a column block maps an `m`-vector to
    /// a `|J|`-vector.
    pub fn apply(&self, v: &[f64], transposed: bool) -> Result<Vec<f64>> {
        let (r, c) = self.shape();
        let a = self.matrix;
        match (self.axis, transposed) {
            (Axis::Row, false) => {
                Error::check_len(c, v.len())?;
                let mut out = vec![0.0; r];
                a.rows_mul(self.indices, v, &mut out);
                Ok(out)
            }
            (Axis::Row, true) => {
                Error::check_len(r, v.len())?;
                let mut out = vec![0.0; c];
                a.rows_tmul_add(self.indices, v, &mut out);
                Ok(out)
            }
            (Axis::Column, false) => {
                Error::check_len(c, v.len())?;
                let mut out = vec![0.0; r];
                a.cols_mul_add(self.indices, v, &mut out);
                Ok(out)
            }
            (Axis::Column, true) => {
                Error::check_len(r, v.len())?;
                let mut out = vec![0.0; c];
                a.cols_tmul(self.indices, v, &mut out);
                Ok(out)
            }
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        self.matrix
            .submatrix(self.axis, self.indices)
            .expect("block indices validated at construction")
    }

    pub fn spectral_norm_sq(&self) -> Result<f64> {
        self.to_matrix().spectral_norm_sq()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag34() -> Matrix {
        Matrix::from_rows(&[[3.0, 0.0], [0.0, 4.0]]).unwrap()
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(Matrix::identity(2).unwrap().frobenius_norm_sq(), 2.0);
        assert_eq!(diag34().frobenius_norm_sq(), 25.0);
        assert_eq!(Matrix::zeros(3, 5).unwrap().frobenius_norm_sq(), 0.0);
    }

    #[test]
    fn block_frobenius_examples() {
        let a = diag34();
        let r = IndexSet::single(0);
        assert_eq!(a.block(Axis::Row, &r).unwrap().frobenius_sq(), 9.0);
        let c = IndexSet::single(1);
        assert_eq!(a.block(Axis::Column, &c).unwrap().frobenius_sq(), 16.0);
        let all = IndexSet::Range(0..2);
        assert_eq!(a.block(Axis::Row, &all).unwrap().frobenius_sq(), 25.0);
        assert_eq!(a.block(Axis::Column, &all).unwrap().frobenius_sq(), 25.0);
    }

    #[test]
    fn block_apply_examples() {
        let i2 = Matrix::identity(2).unwrap();
        let all = IndexSet::Range(0..2);
        let v = i2.block(Axis::Row, &all).unwrap().apply(&[1.0, 2.0], false).unwrap();
        assert_eq!(v, vec![1.0, 2.0]);

        let a = diag34();
        let row2 = IndexSet::single(1);
        let b = a.block(Axis::Row, &row2).unwrap();
        assert_eq!(b.apply(&[1.0, 1.0], false).unwrap(), vec![4.0]);
        assert_eq!(b.apply(&[5.0], true).unwrap(), vec![0.0, 20.0]);
    }

    #[test]
    fn block_apply_dimension_mismatch() {
        let a = diag34();
        let row2 = IndexSet::single(1);
        let b = a.block(Axis::Row, &row2).unwrap();
        assert!(matches!(
            b.apply(&[1.0], false),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn block_rejects_bad_indices() {
        let a = diag34();
        let bad = IndexSet::List(vec![0, 2]);
        assert!(matches!(
            a.block(Axis::Row, &bad),
            Err(Error::IndexOutOfRange { index: 2, .. })
        ));
        let dup = IndexSet::List(vec![1, 1]);
        assert!(matches!(
            a.block(Axis::Column, &dup),
            Err(Error::DuplicateIndex { index: 1, .. })
        ));
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((Matrix::identity(2).unwrap().spectral_norm_sq().unwrap() - 1.0).abs() < 1e-14);
        assert!((diag34().spectral_norm_sq().unwrap() - 16.0).abs() < 1e-12);
        // unit rank-1 outer product
        let u = [0.6, 0.8, 0.0];
        let v = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
        let rows: Vec<Vec<f64>> = u.iter().map(|ui| v.iter().map(|vj| ui * vj).collect()).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        assert!((m.spectral_norm_sq().unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            Matrix::zeros(2, 2).unwrap().spectral_norm_sq(),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = Matrix::from_triplets(2, 3, [(0, 1, 1.0), (0, 1, 2.0), (1, 2, 5.0), (1, 2, -5.0)])
            .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 2), 0.0);
        let csr = m.csr().unwrap();
        assert_eq!(csr.offsets(), &[0, 1, 1]);
    }

    #[test]
    fn dense_rejects_non_finite() {
        assert!(matches!(
            Matrix::dense(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn from_list_collapses_ranges() {
        assert_eq!(IndexSet::from_list(vec![3, 4, 5]), IndexSet::Range(3..6));
        assert_eq!(IndexSet::from_list(vec![3, 5]), IndexSet::List(vec![3, 5]));
    }

    #[test]
    fn transpose_and_submatrix_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 3.0, 4.0]]).unwrap();
        for m in [a.clone(), a.to_sparse()] {
            let t = m.transpose();
            assert_eq!(t.shape(), (3, 2));
            assert_eq!(t.get(2, 1), 4.0);
            let cols = IndexSet::List(vec![0, 2]);
            let s = m.submatrix(Axis::Column, &cols).unwrap();
            assert_eq!(s.to_dense_vec(), vec![1.0, 0.0, 0.0, 4.0]);
        }
    }
}
