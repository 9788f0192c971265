//! Sparse matrices stored as per-row lists of (column, value) pairs, with
//! the bipartite structure graph used to drive elimination orderings.

use crate::error::Error;
use crate::field::Field;
use crate::graph::Graph;

/// Sparse matrix over a field. No zero values are stored and no duplicate
/// positions exist; rows keep their entries sorted by column.
#[derive(Debug, PartialEq)]
pub struct SparseMatrix<F: Field> {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<(usize, F::Elem)>>,
}

impl<F: Field> Clone for SparseMatrix<F> {
    fn clone(&self) -> Self {
        SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, rows: self.rows.clone() }
    }
}

impl<F: Field> SparseMatrix<F> {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix { n_rows, n_cols, rows: vec![Vec::new(); n_rows] }
    }

    pub fn identity(n: usize, field: &F) -> Self {
        let mut m = SparseMatrix::zero(n, n);
        for i in 0..n {
            m.rows[i].push((i, field.one()));
        }
        m
    }

    /// Builds from (row, col, value) triples; rejects duplicates, zeros and
    /// out-of-range positions.
    pub fn from_entries(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, F::Elem)>,
        field: &F,
    ) -> Result<Self, Error> {
        let mut m = SparseMatrix::zero(n_rows, n_cols);
        for (r, c, v) in entries {
            if r >= n_rows {
                return Err(Error::IndexOutOfRange { index: r, limit: n_rows });
            }
            if c >= n_cols {
                return Err(Error::IndexOutOfRange { index: c, limit: n_cols });
            }
            if field.is_zero(&v) {
                return Err(Error::Precondition(format!("zero value stored at ({r},{c})")));
            }
            match m.rows[r].binary_search_by_key(&c, |e| e.0) {
                Ok(_) => return Err(Error::Precondition(format!("duplicate entry at ({r},{c})"))),
                Err(pos) => m.rows[r].insert(pos, (c, v)),
            }
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, r: usize) -> &[(usize, F::Elem)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&F::Elem> {
        self.rows[r].binary_search_by_key(&c, |e| e.0).ok().map(|i| &self.rows[r][i].1)
    }

    /// Inserts, overwrites or deletes (when `v` is zero) a position.
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem, field: &F) {
        match self.rows[r].binary_search_by_key(&c, |e| e.0) {
            Ok(i) => {
                if field.is_zero(&v) {
                    self.rows[r].remove(i);
                } else {
                    self.rows[r][i].1 = v;
                }
            }
            Err(i) => {
                if !field.is_zero(&v) {
                    self.rows[r].insert(i, (c, v));
                }
            }
        }
    }

    /// Entries as (row, col, value) triples in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, F::Elem)> {
        let mut out = Vec::with_capacity(self.nnz());
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                out.push((r, *c, v.clone()));
            }
        }
        out
    }

    /// Bipartite structure graph: rows first (0..n_rows), then columns
    /// (n_rows..n_rows+n_cols); an edge wherever an entry is nonzero.
    pub fn bipartite_graph(&self) -> Graph {
        let mut g = Graph::empty(self.n_rows + self.n_cols);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, _) in row {
                g.add_edge(r, self.n_rows + c).expect("entry positions are unique");
            }
        }
        g
    }

    /// Restriction to the given rows and columns, reindexed; returns the
    /// submatrix together with the back-maps to original indices.
    pub fn submatrix(
        &self,
        rows: &[usize],
        cols: &[usize],
    ) -> Result<(SparseMatrix<F>, Vec<usize>, Vec<usize>), Error> {
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        rows.dedup();
        let mut cols = cols.to_vec();
        cols.sort_unstable();
        cols.dedup();
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(Error::IndexOutOfRange { index: bad, limit: self.n_rows });
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(Error::IndexOutOfRange { index: bad, limit: self.n_cols });
        }
        let mut col_pos = vec![usize::MAX; self.n_cols];
        for (i, &c) in cols.iter().enumerate() {
            col_pos[c] = i;
        }
        let mut m = SparseMatrix::zero(rows.len(), cols.len());
        for (new_r, &r) in rows.iter().enumerate() {
            for (c, v) in &self.rows[r] {
                if col_pos[*c] != usize::MAX {
                    m.rows[new_r].push((col_pos[*c], v.clone()));
                }
            }
        }
        Ok((m, rows, cols))
    }

    /// Exact sparse product; intended for verification at test scale.
    pub fn multiply(&self, other: &SparseMatrix<F>, field: &F) -> Result<SparseMatrix<F>, Error> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: other.n_rows });
        }
        let mut out = SparseMatrix::zero(self.n_rows, other.n_cols);
        let mut acc: Vec<Option<F::Elem>> = vec![None; other.n_cols];
        for r in 0..self.n_rows {
            let mut touched = Vec::new();
            for (k, a) in &self.rows[r] {
                for (c, b) in &other.rows[*k] {
                    let prod = field.mul(a, b);
                    match &mut acc[*c] {
                        Some(x) => *x = field.add(x, &prod),
                        slot @ None => {
                            *slot = Some(prod);
                            touched.push(*c);
                        }
                    }
                }
            }
            touched.sort_unstable();
            for c in touched {
                let v = acc[c].take().expect("touched entry present");
                if !field.is_zero(&v) {
                    out.rows[r].push((c, v));
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[F::Elem], field: &F) -> Result<Vec<F::Elem>, Error> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        let mut y = vec![field.zero(); self.n_rows];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                y[r] = field.add(&y[r], &field.mul(v, &x[*c]));
            }
        }
        Ok(y)
    }

    /// Applies a row permutation: new row i = old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> SparseMatrix<F> {
        assert_eq!(perm.len(), self.n_rows);
        let rows = perm.iter().map(|&old| self.rows[old].clone()).collect();
        SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, rows }
    }

    /// Applies a column permutation: new col j = old col `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> SparseMatrix<F> {
        assert_eq!(perm.len(), self.n_cols);
        let mut pos = vec![0usize; self.n_cols];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r: Vec<(usize, F::Elem)> =
                    row.iter().map(|(c, v)| (pos[*c], v.clone())).collect();
                r.sort_unstable_by_key(|e| e.0);
                r
            })
            .collect();
        SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, rows }
    }

    pub fn to_dense(&self, field: &F) -> Vec<Vec<F::Elem>> {
        let mut d = vec![vec![field.zero(); self.n_cols]; self.n_rows];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                d[r][*c] = v.clone();
            }
        }
        d
    }
}

/// Permutation matrix as a mapping; `apply` sends index i to perm[i].
pub fn permutation_sign(perm: &[usize]) -> i64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i64;
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
