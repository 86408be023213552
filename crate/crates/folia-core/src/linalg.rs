//! Sparse exact linear algebra: rank and kernel bases over any [`Field`].
//!
//! The engine is an incremental reduced row echelon form ([`Rref`]). Rows are
//! consumed one at a time and the reduced form is maintained throughout, so
//! arbitrarily many rows can be streamed through a bounded amount of memory.
//! Because the RREF of a matrix is unique, ranks, kernel bases and everything
//! derived from them are canonical: independent of row arrival order and
//! bit-identical across runs and platforms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::Field;

/// Immutable sparse matrix over an exact field.
///
/// Entries are stored row-major as `(column, value)` pairs sorted by column;
/// zero entries are never stored. Mutation after assembly is not exposed;
/// eliminations work on private copies.
#[derive(Clone, Debug)]
pub struct SparseMatrix<F: Field> {
    field: F,
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(u32, F::Elem)>>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn zero(field: F, nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            field,
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let one = field.one();
        let rows = (0..n).map(|i| vec![(i as u32, one.clone())]).collect();
        SparseMatrix {
            field,
            nrows: n,
            ncols: n,
            rows,
        }
    }

    /// Builds from an entry list. Duplicate positions are rejected and zero
    /// values dropped.
    pub fn from_entries(
        field: F,
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (u32, u32, F::Elem)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, F::Elem)>> = vec![Vec::new(); nrows];
        for (r, c, v) in entries {
            if r as usize >= nrows || c as usize >= ncols {
                return Err(Error::Shape(alloc::format!(
                    "entry ({r},{c}) outside {nrows}x{ncols}"
                )));
            }
            if field.is_zero(&v) {
                continue;
            }
            rows[r as usize].push((c, v));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Shape("duplicate entry position".into()));
            }
        }
        Ok(SparseMatrix {
            field,
            nrows,
            ncols,
            rows,
        })
    }

    /// Builds from sorted sparse rows; rows must already be deduplicated.
    pub(crate) fn from_rows(
        field: F,
        ncols: usize,
        rows: Vec<Vec<(u32, F::Elem)>>,
    ) -> Self {
        SparseMatrix {
            nrows: rows.len(),
            field,
            ncols,
            rows,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> F::Elem {
        assert!(r < self.nrows && c < self.ncols);
        self.rows[r]
            .iter()
            .find(|&&(col, _)| col as usize == c)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn row(&self, r: usize) -> &[(u32, F::Elem)] {
        &self.rows[r]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(u32, F::Elem)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Exact rank over the coefficient field.
    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Canonical basis of `{x : Mx = 0}`, one dense vector per free column,
    /// free columns in ascending order. Length is always `ncols - rank`.
    pub fn kernel_basis(&self) -> Vec<Vec<F::Elem>> {
        self.rref().kernel_basis()
    }

    /// Reduced row echelon form of a private copy.
    pub fn rref(&self) -> Rref<F> {
        let mut rref = Rref::new(self.field.clone(), self.ncols);
        for row in &self.rows {
            rref.push_sparse_row(row);
        }
        rref
    }

    /// Applies the matrix to a dense vector.
    pub fn apply(&self, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if x.len() != self.ncols {
            return Err(Error::Shape(alloc::format!(
                "vector length {} vs {} columns",
                x.len(),
                self.ncols
            )));
        }
        let mut out = Vec::with_capacity(self.nrows);
        for row in &self.rows {
            let mut acc = self.field.zero();
            for (c, v) in row {
                self.field.add_mul_assign(&mut acc, v, &x[*c as usize]);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Maps entries into another field, dropping images that vanish.
    pub fn map_scalars<G: Field>(
        &self,
        target: G,
        f: impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<SparseMatrix<G>> {
        let mut rows = Vec::with_capacity(self.nrows);
        for row in &self.rows {
            let mut out = Vec::with_capacity(row.len());
            for (c, v) in row {
                let w = f(v)?;
                if !target.is_zero(&w) {
                    out.push((*c, w));
                }
            }
            rows.push(out);
        }
        Ok(SparseMatrix {
            field: target,
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        })
    }
}

/// Incremental reduced row echelon form over a field.
///
/// Pivot rows are kept dense, normalized to a unit pivot, and mutually
/// reduced, so at every moment the stored rows are the RREF of everything
/// pushed so far.
#[derive(Clone, Debug)]
pub struct Rref<F: Field> {
    field: F,
    ncols: usize,
    /// `(lead column, dense row)` sorted by lead column.
    rows: Vec<(u32, Vec<F::Elem>)>,
}

impl<F: Field> Rref<F> {
    pub fn new(field: F, ncols: usize) -> Self {
        Rref {
            field,
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> Vec<u32> {
        self.rows.iter().map(|&(c, _)| c).collect()
    }

    pub fn free_cols(&self) -> Vec<u32> {
        let mut pivots = self.rows.iter().map(|&(c, _)| c).peekable();
        let mut out = Vec::with_capacity(self.ncols - self.rows.len());
        for c in 0..self.ncols as u32 {
            if pivots.peek() == Some(&c) {
                pivots.next();
            } else {
                out.push(c);
            }
        }
        out
    }

    /// Feeds one row; returns true when it increased the rank.
    pub fn push_dense_row(&mut self, mut v: Vec<F::Elem>) -> bool {
        assert_eq!(v.len(), self.ncols);
        self.reduce_in_place(&mut v);
        let lead = match v.iter().position(|x| !self.field.is_zero(x)) {
            Some(i) => i as u32,
            None => return false,
        };
        // normalize pivot to one
        let inv = self.field.inv(&v[lead as usize]);
        for x in v.iter_mut().skip(lead as usize) {
            if !self.field.is_zero(x) {
                *x = self.field.mul(x, &inv);
            }
        }
        // keep earlier rows reduced at the new pivot column
        for (_, row) in self.rows.iter_mut() {
            let c = row[lead as usize].clone();
            if !self.field.is_zero(&c) {
                let nc = self.field.neg(&c);
                for (x, y) in row.iter_mut().zip(v.iter()).skip(lead as usize) {
                    if !self.field.is_zero(y) {
                        self.field.add_mul_assign(x, &nc, y);
                    }
                }
            }
        }
        let pos = self.rows.partition_point(|&(c, _)| c < lead);
        self.rows.insert(pos, (lead, v));
        true
    }

    pub fn push_sparse_row(&mut self, row: &[(u32, F::Elem)]) -> bool {
        if row.is_empty() {
            return false;
        }
        let mut v = vec![self.field.zero(); self.ncols];
        for (c, x) in row {
            v[*c as usize] = x.clone();
        }
        self.push_dense_row(v)
    }

    /// Reduces a vector against the pivot rows. Afterwards the vector is zero
    /// iff it lies in the row space.
    pub fn reduce_in_place(&self, v: &mut [F::Elem]) {
        assert_eq!(v.len(), self.ncols);
        for (lead, row) in &self.rows {
            let c = v[*lead as usize].clone();
            if !self.field.is_zero(&c) {
                let nc = self.field.neg(&c);
                for (x, y) in v.iter_mut().zip(row.iter()).skip(*lead as usize) {
                    if !self.field.is_zero(y) {
                        self.field.add_mul_assign(x, &nc, y);
                    }
                }
            }
        }
    }

    /// Row-space membership.
    pub fn contains(&self, v: &[F::Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce_in_place(&mut w);
        w.iter().all(|x| self.field.is_zero(x))
    }

    /// Whether the vector is orthogonal to the row space, i.e. lies in the
    /// kernel of every matrix with this row space.
    pub fn annihilates(&self, v: &[F::Elem]) -> bool {
        assert_eq!(v.len(), self.ncols);
        self.rows.iter().all(|(_, row)| {
            let mut acc = self.field.zero();
            for (a, b) in row.iter().zip(v.iter()) {
                if !self.field.is_zero(a) && !self.field.is_zero(b) {
                    self.field.add_mul_assign(&mut acc, a, b);
                }
            }
            self.field.is_zero(&acc)
        })
    }

    /// Canonical kernel basis of the accumulated rows, one vector per free
    /// column. Every returned `v` satisfies `row . v = 0` for all rows.
    pub fn kernel_basis(&self) -> Vec<Vec<F::Elem>> {
        let free = self.free_cols();
        let mut out = Vec::with_capacity(free.len());
        for f in free {
            let mut v = vec![self.field.zero(); self.ncols];
            v[f as usize] = self.field.one();
            for (lead, row) in &self.rows {
                let x = &row[f as usize];
                if !self.field.is_zero(x) {
                    v[*lead as usize] = self.field.neg(x);
                }
            }
            out.push(v);
        }
        out
    }

    /// The stored pivot rows, densely.
    pub fn pivot_rows(&self) -> impl Iterator<Item = (&u32, &Vec<F::Elem>)> {
        self.rows.iter().map(|(c, r)| (c, r))
    }
}
