//! Sparse and small dense kernels shared by every solver.
//!
//! Cross-row (or cross-column) reductions that may be split over workers are
//! accumulated with [`ExactSum`] so the rounded result never depends on the
//! partition. Products whose every output element is computed by a single
//! owner use plain ascending-index accumulation.

mod eigen;
mod exact;

pub use eigen::largest_eigenvalue;
pub use exact::{exact_dot, ExactSum};

use std::ops::Range;

use crate::error::{Error, Result};

/// Compressed sparse row matrix (three-array variant).
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != num_rows + 1 {
            return Err(Error::dim(format!("row_offsets has length {}, expected {}", row_offsets.len(), num_rows + 1)));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::dim("row_offsets must start at 0 and end at nnz"));
        }
        if col_indices.len() != values.len() {
            return Err(Error::dim("col_indices and values differ in length"));
        }
        for r in 0..num_rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::dim(format!("row_offsets decreases at row {r}")));
            }
            let cols = &col_indices[lo..hi];
            for (k, &c) in cols.iter().enumerate() {
                if c >= num_cols {
                    return Err(Error::Selection { index: c, bound: num_cols });
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::dim(format!("column indices not strictly increasing in row {r}")));
                }
            }
        }
        Ok(Self { num_rows, num_cols, row_offsets, col_indices, values })
    }

    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self { num_rows, num_cols, row_offsets: vec![0; num_rows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            num_rows: n,
            num_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from a dense row-major table, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let num_rows = rows.len();
        let num_cols = rows.first().map_or(0, Vec::len);
        let mut builder = CsrBuilder::new(num_cols);
        for row in rows {
            if row.len() != num_cols {
                return Err(Error::dim("ragged dense rows"));
            }
            builder.push_row(row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(c, v)| (c, *v)))?;
        }
        debug_assert_eq!(builder.num_rows(), num_rows);
        Ok(builder.finish())
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of stored entries, `nnz / (m n)`.
    pub fn density(&self) -> f64 {
        if self.num_rows == 0 || self.num_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.num_rows as f64 * self.num_cols as f64)
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.num_cols]; self.num_rows];
        for (r, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                row[*c] = *v;
            }
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.num_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.num_cols {
            counts[c + 1] += counts[c];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.num_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let k = next[*c];
                col_indices[k] = r;
                values[k] = *v;
                next[*c] += 1;
            }
        }
        CsrMatrix { num_rows: self.num_cols, num_cols: self.num_rows, row_offsets, col_indices, values }
    }

    /// Contiguous block of rows, column indices unchanged.
    pub fn row_block(&self, rows: Range<usize>) -> Result<CsrMatrix> {
        if rows.start > rows.end || rows.end > self.num_rows {
            return Err(Error::Selection { index: rows.end, bound: self.num_rows });
        }
        let lo = self.row_offsets[rows.start];
        let hi = self.row_offsets[rows.end];
        Ok(CsrMatrix {
            num_rows: rows.len(),
            num_cols: self.num_cols,
            row_offsets: self.row_offsets[rows.start..=rows.end].iter().map(|o| o - lo).collect(),
            col_indices: self.col_indices[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        })
    }

    /// Contiguous block of columns, re-indexed to start at zero.
    pub fn col_block(&self, cols: Range<usize>) -> Result<CsrMatrix> {
        if cols.start > cols.end || cols.end > self.num_cols {
            return Err(Error::Selection { index: cols.end, bound: self.num_cols });
        }
        let mut builder = CsrBuilder::new(cols.len());
        for r in 0..self.num_rows {
            let (ci, vals) = self.row(r);
            let a = ci.partition_point(|&c| c < cols.start);
            let b = ci.partition_point(|&c| c < cols.end);
            builder.push_row(ci[a..b].iter().zip(&vals[a..b]).map(|(c, v)| (c - cols.start, *v)))?;
        }
        Ok(builder.finish())
    }
}

/// Incremental row-by-row CSR construction.
#[derive(Debug)]
pub struct CsrBuilder {
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(num_cols: usize) -> Self {
        Self { num_cols, row_offsets: vec![0], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn num_rows(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Appends a row given as `(column, value)` pairs in strictly increasing column order.
    pub fn push_row<I: IntoIterator<Item = (usize, f64)>>(&mut self, entries: I) -> Result<()> {
        let start = self.col_indices.len();
        for (c, v) in entries {
            if c >= self.num_cols {
                return Err(Error::Selection { index: c, bound: self.num_cols });
            }
            if self.col_indices.len() > start && *self.col_indices.last().unwrap() >= c {
                return Err(Error::dim("column indices not strictly increasing"));
            }
            self.col_indices.push(c);
            self.values.push(v);
        }
        self.row_offsets.push(self.col_indices.len());
        Ok(())
    }

    /// Widens the column dimension (for declared feature counts).
    pub fn set_num_cols(&mut self, num_cols: usize) {
        self.num_cols = self.num_cols.max(num_cols);
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix {
            num_rows: self.row_offsets.len() - 1,
            num_cols: self.num_cols,
            row_offsets: self.row_offsets,
            col_indices: self.col_indices,
            values: self.values,
        }
    }
}

/// Ordered list of distinct coordinate indices chosen for one iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSelection {
    pub indices: Vec<usize>,
    pub iteration: usize,
}

impl IndexSelection {
    pub fn new(indices: Vec<usize>, iteration: usize) -> Self {
        Self { indices, iteration }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Checks distinctness and that every index is below `bound`.
    pub fn validate(&self, bound: usize) -> Result<()> {
        for (k, &i) in self.indices.iter().enumerate() {
            if i >= bound {
                return Err(Error::Selection { index: i, bound });
            }
            if self.indices[..k].contains(&i) {
                return Err(Error::Contract(format!("index {i} selected twice")));
            }
        }
        Ok(())
    }
}

/// Dense symmetric matrix, stored full and row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    order: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        let mut values = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(Error::dim("Gram matrix must be square"));
            }
            values.extend_from_slice(row);
        }
        Ok(Self { order, values })
    }

    /// Expands a packed upper triangle (row-major, `i <= j`) into a full matrix.
    pub fn from_packed_upper(order: usize, packed: &[f64]) -> Result<Self> {
        if packed.len() != packed_len(order) {
            return Err(Error::dim(format!(
                "packed triangle has {} entries, order {order} needs {}",
                packed.len(),
                packed_len(order)
            )));
        }
        let mut values = vec![0.0; order * order];
        let mut k = 0;
        for i in 0..order {
            for j in i..order {
                values[i * order + j] = packed[k];
                values[j * order + i] = packed[k];
                k += 1;
            }
        }
        Ok(Self { order, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.order..(i + 1) * self.order]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    /// Square sub-block starting at `(offset, offset)`.
    pub fn diagonal_block(&self, offset: usize, size: usize) -> GramMatrix {
        let mut values = Vec::with_capacity(size * size);
        for i in offset..offset + size {
            values.extend_from_slice(&self.row(i)[offset..offset + size]);
        }
        GramMatrix { order: size, values }
    }

    pub fn add_to_diagonal(&mut self, shift: f64) {
        for i in 0..self.order {
            self.values[i * self.order + i] += shift;
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.order {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Number of entries in a packed upper triangle of the given order.
pub fn packed_len(order: usize) -> usize {
    order * (order + 1) / 2
}

/// `A 𝕀`: the selected columns of `a`, in selection order.
pub fn extract_columns(a: &CsrMatrix, sel: &IndexSelection) -> Result<CsrMatrix> {
    for &c in &sel.indices {
        if c >= a.num_cols {
            return Err(Error::Selection { index: c, bound: a.num_cols });
        }
    }
    let mut builder = CsrBuilder::new(sel.len());
    for r in 0..a.num_rows {
        let (cols, vals) = a.row(r);
        let entries =
            sel.indices.iter().enumerate().filter_map(|(pos, c)| cols.binary_search(c).ok().map(|k| (pos, vals[k])));
        builder.push_row(entries)?;
    }
    Ok(builder.finish())
}

/// `𝕀ᵀ A`: the selected rows of `a`, in selection order.
pub fn extract_rows(a: &CsrMatrix, sel: &IndexSelection) -> Result<CsrMatrix> {
    let mut builder = CsrBuilder::new(a.num_cols);
    for &r in &sel.indices {
        if r >= a.num_rows {
            return Err(Error::Selection { index: r, bound: a.num_rows });
        }
        let (cols, vals) = a.row(r);
        builder.push_row(cols.iter().copied().zip(vals.iter().copied()))?;
    }
    Ok(builder.finish())
}

/// Places column blocks side by side: `[Y₁, Y₂, …]`.
pub fn hstack(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::dim("cannot stack zero blocks"));
    };
    let m = first.num_rows;
    if let Some(bad) = blocks.iter().find(|b| b.num_rows != m) {
        return Err(Error::dim(format!("blocks have {} and {} rows", m, bad.num_rows)));
    }
    let total: usize = blocks.iter().map(|b| b.num_cols).sum();
    let mut builder = CsrBuilder::new(total);
    for r in 0..m {
        let mut row = Vec::new();
        let mut offset = 0;
        for b in blocks {
            let (cols, vals) = b.row(r);
            row.extend(cols.iter().zip(vals).map(|(c, v)| (c + offset, *v)));
            offset += b.num_cols;
        }
        builder.push_row(row)?;
    }
    Ok(builder.finish())
}

/// Unrounded partial of `YᵀY` over the rows of `y`, packed upper triangle.
///
/// This is what a worker contributes to the Gram reduction.
pub fn gram_partial(y: &CsrMatrix) -> Vec<ExactSum> {
    let k = y.num_cols;
    let mut acc = vec![ExactSum::new(); packed_len(k)];
    for r in 0..y.num_rows {
        let (cols, vals) = y.row(r);
        for (p, (&i, &vi)) in cols.iter().zip(vals).enumerate() {
            let base = packed_index(k, i, i);
            for (&j, &vj) in cols[p..].iter().zip(&vals[p..]) {
                acc[base + (j - i)].add_product(vi, vj);
            }
        }
    }
    acc
}

/// `G = YᵀY`, upper triangle computed and mirrored.
pub fn gram(y: &CsrMatrix) -> Result<GramMatrix> {
    if y.num_cols == 0 {
        return Err(Error::dim("Gram matrix of an empty column collection"));
    }
    let packed: Vec<f64> = gram_partial(y).iter().map(ExactSum::value).collect();
    GramMatrix::from_packed_upper(y.num_cols, &packed)
}

/// Gram matrix of a list of column blocks sharing a row count.
pub fn gram_of_blocks(blocks: &[CsrMatrix]) -> Result<GramMatrix> {
    gram(&hstack(blocks)?)
}

#[inline]
pub(crate) fn packed_index(order: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    // rows before i hold order, order-1, ..., order-i+1 entries
    i * order - i * i.saturating_sub(1) / 2 + (j - i)
}

/// `y = A x`, each row accumulated in ascending column order.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.num_cols {
        return Err(Error::dim(format!("spmv: x has length {}, A has {} columns", x.len(), a.num_cols)));
    }
    Ok((0..a.num_rows)
        .map(|r| {
            let (cols, vals) = a.row(r);
            cols.iter().zip(vals).fold(0.0, |acc, (c, v)| acc + v * x[*c])
        })
        .collect())
}

/// `w = Aᵀ v`, accumulated row by row in ascending row order.
pub fn spmv_transpose(a: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.num_rows {
        return Err(Error::dim(format!("spmv_transpose: v has length {}, A has {} rows", v.len(), a.num_rows)));
    }
    let mut out = vec![0.0; a.num_cols];
    for (r, vr) in v.iter().enumerate() {
        let (cols, vals) = a.row(r);
        for (c, val) in cols.iter().zip(vals) {
            out[*c] += val * vr;
        }
    }
    Ok(out)
}
