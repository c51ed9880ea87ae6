use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Square matrix in compressed sparse row form. Column indices are sorted
/// within each row and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator. Duplicate entries are summed in insertion
/// order when compressed, so assembly is bit-reproducible.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseOperator {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0usize; self.dim + 1];
        let mut col_indices = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut i = 0;
        while i < self.entries.len() {
            let (r, c, mut v) = self.entries[i];
            i += 1;
            while i < self.entries.len() && self.entries[i].0 == r && self.entries[i].1 == c {
                v += self.entries[i].2;
                i += 1;
            }
            if v != 0.0 {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
            }
        }
        for r in 0..self.dim {
            row_offsets[r + 1] += row_offsets[r];
        }
        SparseOperator {
            dim: self.dim,
            row_offsets,
            col_indices,
            values,
        }
    }
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        TripletBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut b = TripletBuilder::with_capacity(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            b.add(i, i, d);
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut b = TripletBuilder::new(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                b.add(i, j, v);
            }
        }
        Ok(b.build())
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    /// Iterates `(col, value)` over row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Iterates all stored `(row, col, value)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.apply(y)).map(|(a, b)| a * b).sum()
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn total_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.dim, self.nnz());
        for (i, j, v) in self.triplets() {
            b.add(j, i, v);
        }
        b.build()
    }

    /// `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut b = TripletBuilder::with_capacity(self.dim, self.nnz());
        for (i, j, v) in self.triplets() {
            b.add(i, j, alpha * v);
        }
        b.build()
    }

    /// `sum_k alpha_k A_k`, all operands of equal dimension.
    pub fn linear_combination(terms: &[(f64, &SparseOperator)]) -> Result<Self> {
        let dim = terms.first().map_or(0, |t| t.1.dim);
        let cap = terms.iter().map(|t| t.1.nnz()).sum();
        let mut b = TripletBuilder::with_capacity(dim, cap);
        for &(alpha, op) in terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim,
                });
            }
            for (i, j, v) in op.triplets() {
                b.add(i, j, alpha * v);
            }
        }
        Ok(b.build())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// Debug dump as `row col value` lines.
    pub fn dump_triplets(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        s
    }
}
