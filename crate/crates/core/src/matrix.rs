//! Dense matrices over a finite field context.
//!
//! Random variables of a finite linear source are identified with column
//! spaces, so most of the linear algebra here is phrased in terms of columns.

use std::fmt;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{dim, invalid, Error, Result};
use crate::field::{Embedding, FieldContext, GfElement};

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixGf {
    ctx: FieldContext,
    rows: usize,
    cols: usize,
    data: Vec<u128>,
}

impl fmt::Debug for MatrixGf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.ctx)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row_codes(i))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: MatrixGf,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl MatrixGf {
    pub fn zeros(ctx: &FieldContext, rows: usize, cols: usize) -> Self {
        MatrixGf { ctx: ctx.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: &FieldContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from integer codes in row-major order.
    pub fn from_codes(ctx: &FieldContext, rows: usize, cols: usize, data: Vec<u128>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        if data.iter().any(|&c| c >= ctx.order()) {
            return invalid("matrix entry out of field range");
        }
        Ok(MatrixGf { ctx: ctx.clone(), rows, cols, data })
    }

    /// Build from a grid of integer codes. An empty grid needs `cols` from
    /// [`MatrixGf::from_rows_with_cols`].
    pub fn from_rows(ctx: &FieldContext, grid: &[Vec<u64>]) -> Result<Self> {
        let cols = grid.first().map_or(0, |r| r.len());
        Self::from_rows_with_cols(ctx, grid, cols)
    }

    pub fn from_rows_with_cols(ctx: &FieldContext, grid: &[Vec<u64>], cols: usize) -> Result<Self> {
        if grid.iter().any(|r| r.len() != cols) {
            return dim("ragged row grid");
        }
        let data = grid.iter().flatten().map(|&c| c as u128).collect();
        Self::from_codes(ctx, grid.len(), cols, data)
    }

    pub fn from_fn(ctx: &FieldContext, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u128) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        MatrixGf { ctx: ctx.clone(), rows, cols, data }
    }

    /// Uniformly random matrix drawn from `rng`.
    pub fn random<R: Rng + ?Sized>(ctx: &FieldContext, rows: usize, cols: usize, rng: &mut R) -> Self {
        let order = ctx.order();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..order)).collect();
        MatrixGf { ctx: ctx.clone(), rows, cols, data }
    }

    /// Uniformly random matrix from a ChaCha8 stream seeded with `seed`.
    pub fn random_seeded(ctx: &FieldContext, rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random(ctx, rows, cols, &mut rng)
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> GfElement {
        self.ctx.wrap(self.code(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, v: GfElement) -> Result<()> {
        if v.field_id() != self.ctx.id() {
            return Err(Error::ContextMismatch);
        }
        self.set_code(i, j, v.code());
        Ok(())
    }

    pub fn code(&self, i: usize, j: usize) -> u128 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j]
    }

    pub(crate) fn set_code(&mut self, i: usize, j: usize, c: u128) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j] = c;
    }

    pub fn row_codes(&self, i: usize) -> Vec<u128> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_code_rows(&self) -> Vec<Vec<u128>> {
        (0..self.rows).map(|i| self.row_codes(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    fn same_ctx(&self, other: &MatrixGf) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn transpose(&self) -> MatrixGf {
        MatrixGf::from_fn(&self.ctx, self.cols, self.rows, |i, j| self.code(j, i))
    }

    pub fn mul(&self, other: &MatrixGf) -> Result<MatrixGf> {
        self.same_ctx(other)?;
        if self.cols != other.rows {
            return dim(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let f = &self.ctx;
        let mut out = MatrixGf::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.code(i, t);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.code(t, j);
                    if b != 0 {
                        let idx = i * other.cols + j;
                        out.data[idx] = f.add_c(out.data[idx], f.mul_c(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MatrixGf) -> Result<MatrixGf> {
        self.same_ctx(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return dim("matrix sum of different shapes");
        }
        let f = &self.ctx;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add_c(a, b)).collect();
        Ok(MatrixGf { ctx: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> MatrixGf {
        let f = &self.ctx;
        let data = self.data.iter().map(|&a| f.neg_c(a)).collect();
        MatrixGf { ctx: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: GfElement) -> Result<MatrixGf> {
        if c.field_id() != self.ctx.id() {
            return Err(Error::ContextMismatch);
        }
        let f = &self.ctx;
        let data = self.data.iter().map(|&a| f.mul_c(a, c.code())).collect();
        Ok(MatrixGf { ctx: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    /// Horizontal concatenation. All parts must share a row count.
    pub fn hstack(ctx: &FieldContext, rows: usize, parts: &[&MatrixGf]) -> Result<MatrixGf> {
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = MatrixGf::zeros(ctx, rows, cols);
        let mut off = 0;
        for m in parts {
            if m.ctx != *ctx {
                return Err(Error::ContextMismatch);
            }
            if m.rows != rows {
                return dim(format!("hstack: {} rows vs {}", m.rows, rows));
            }
            for i in 0..rows {
                for j in 0..m.cols {
                    out.data[i * cols + off + j] = m.code(i, j);
                }
            }
            off += m.cols;
        }
        Ok(out)
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &MatrixGf) -> Result<MatrixGf> {
        Self::hstack(&self.ctx, self.rows, &[self, other])
    }

    /// Vertical concatenation. All parts must share a column count.
    pub fn vstack(ctx: &FieldContext, cols: usize, parts: &[&MatrixGf]) -> Result<MatrixGf> {
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.ctx != *ctx {
                return Err(Error::ContextMismatch);
            }
            if m.cols != cols {
                return dim(format!("vstack: {} cols vs {}", m.cols, cols));
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Ok(MatrixGf { ctx: ctx.clone(), rows, cols, data })
    }

    pub fn select_columns(&self, idx: &[usize]) -> MatrixGf {
        MatrixGf::from_fn(&self.ctx, self.rows, idx.len(), |i, j| self.code(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> MatrixGf {
        MatrixGf::from_fn(&self.ctx, idx.len(), self.cols, |i, j| self.code(idx[i], j))
    }

    pub fn column(&self, j: usize) -> MatrixGf {
        self.select_columns(&[j])
    }

    /// Row echelon form with unit pivots and zeros above and below them.
    pub fn rref(&self) -> Rref {
        let f = &self.ctx;
        let mut m = self.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| m.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    m.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = f.inv_c(m.data[r * cols + c]);
            for j in c..cols {
                let idx = r * cols + j;
                m.data[idx] = f.mul_c(m.data[idx], inv);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = m.data[i * cols + c];
                if factor == 0 {
                    continue;
                }
                let nf = f.neg_c(factor);
                for j in c..cols {
                    let v = m.data[r * cols + j];
                    if v != 0 {
                        let idx = i * cols + j;
                        m.data[idx] = f.add_c(m.data[idx], f.mul_c(nf, v));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        // eliminate along the shorter side
        if self.rows > self.cols {
            self.transpose().rref().rank()
        } else {
            self.rref().rank()
        }
    }

    pub fn inverse(&self) -> Result<MatrixGf> {
        if self.rows != self.cols {
            return dim("inverse of a non-square matrix");
        }
        let n = self.rows;
        let aug = self.hcat(&MatrixGf::identity(&self.ctx, n))?;
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(MatrixGf::from_fn(&self.ctx, n, n, |i, j| r.reduced.code(i, n + j)))
    }

    /// Some `X` with `self * X = b`, or `None` if the system is inconsistent.
    pub fn solve_right(&self, b: &MatrixGf) -> Result<Option<MatrixGf>> {
        self.same_ctx(b)?;
        if self.rows != b.rows {
            return dim("solve_right: row counts differ");
        }
        let n = self.cols;
        let r = self.hcat(b)?.rref();
        if r.pivots.iter().any(|&p| p >= n) {
            return Ok(None);
        }
        let mut x = MatrixGf::zeros(&self.ctx, n, b.cols);
        for (row, &pc) in r.pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set_code(pc, j, r.reduced.code(row, n + j));
            }
        }
        Ok(Some(x))
    }

    /// Rows spanning `{y : y * self = 0}`, in reduced form.
    pub fn left_nullspace_basis(&self) -> MatrixGf {
        let t = self.transpose();
        let ns = t.right_nullspace_columns();
        ns.transpose()
    }

    /// Columns spanning `{v : self * v = 0}`, one per free column of the rref.
    pub fn right_nullspace_columns(&self) -> MatrixGf {
        let f = &self.ctx;
        let r = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !r.pivots.contains(c)).collect();
        let mut out = MatrixGf::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set_code(fc, k, 1);
            for (row, &pc) in r.pivots.iter().enumerate() {
                out.set_code(pc, k, f.neg_c(r.reduced.code(row, fc)));
            }
        }
        out
    }

    /// Basis of `col(self) ∩ col(other)` via the Zassenhaus construction.
    pub fn column_space_intersection(&self, other: &MatrixGf) -> Result<MatrixGf> {
        self.same_ctx(other)?;
        if self.rows != other.rows {
            return dim("column_space_intersection: ambient dimensions differ");
        }
        let l = self.rows;
        let (a, b) = (self.cols, other.cols);
        let z = MatrixGf::from_fn(&self.ctx, a + b, 2 * l, |i, j| {
            if i < a {
                self.code(j % l, i)
            } else if j < l {
                other.code(j, i - a)
            } else {
                0
            }
        });
        let r = z.rref();
        let rows: Vec<usize> = r
            .pivots
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= l)
            .map(|(i, _)| i)
            .collect();
        Ok(MatrixGf::from_fn(&self.ctx, l, rows.len(), |i, j| r.reduced.code(rows[j], l + i)))
    }

    /// Canonical basis of the column space (transposed nonzero rows of the
    /// rref of the transpose).
    pub fn column_basis(&self) -> MatrixGf {
        let r = self.transpose().rref();
        let k = r.rank();
        MatrixGf::from_fn(&self.ctx, self.rows, k, |i, j| r.reduced.code(j, i))
    }

    /// Indices of a maximal independent set of columns, chosen greedily left to right.
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref().pivots
    }

    /// Whether `col(other) ⊆ col(self)`.
    pub fn spans(&self, other: &MatrixGf) -> Result<bool> {
        Ok(self.hcat(other)?.rank() == self.rank())
    }

    /// Standard basis vectors extending the independent columns of `self` to a
    /// basis of the ambient space, chosen greedily in index order.
    pub fn basis_completion(&self) -> Result<MatrixGf> {
        if self.rank() != self.cols {
            return invalid("basis_completion needs linearly independent columns");
        }
        let l = self.rows;
        let aug = self.hcat(&MatrixGf::identity(&self.ctx, l))?;
        let picks: Vec<usize> = aug.rref().pivots.into_iter().filter(|&p| p >= self.cols).collect();
        Ok(aug.select_columns(&picks))
    }

    /// `[self | N]` square and invertible, with `N` from [`Self::basis_completion`].
    pub fn complete_basis(&self) -> Result<MatrixGf> {
        let n = self.basis_completion()?;
        self.hcat(&n)
    }

    /// Image of this matrix under a field embedding.
    pub fn embed(&self, emb: &Embedding, target: &FieldContext) -> MatrixGf {
        let data = self.data.iter().map(|&c| emb.apply_code(c)).collect();
        MatrixGf { ctx: target.clone(), rows: self.rows, cols: self.cols, data }
    }

    /// Image of this matrix in an extension field.
    pub fn embed_into(&self, target: &FieldContext) -> Result<MatrixGf> {
        let emb = target.embedding_from(&self.ctx)?;
        Ok(self.embed(&emb, target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldContext {
        FieldContext::prime(2).unwrap()
    }

    #[test]
    fn rank_and_pivots_over_f2() {
        let m = MatrixGf::from_rows(&f2(), &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let r = m.rref();
        assert_eq!(r.rank(), 2);
        assert_eq!(r.pivots, vec![0, 1]);
    }

    #[test]
    fn zassenhaus_example() {
        let f = f2();
        let a = MatrixGf::from_rows(&f, &[vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        let b = MatrixGf::from_rows(&f, &[vec![0, 1], vec![1, 0], vec![0, 1]]).unwrap();
        let i = a.column_space_intersection(&b).unwrap();
        assert_eq!(i.to_code_rows(), vec![vec![0], vec![1], vec![0]]);
    }

    #[test]
    fn singular_inverse_fails() {
        let m = MatrixGf::from_rows(&f2(), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Singular)));
    }

    #[test]
    fn inconsistent_system() {
        let f = f2();
        let a = MatrixGf::from_rows(&f, &[vec![1], vec![1]]).unwrap();
        let b = MatrixGf::from_rows(&f, &[vec![1], vec![0]]).unwrap();
        assert!(a.solve_right(&b).unwrap().is_none());
    }

    #[test]
    fn completion_of_dependent_columns_rejected() {
        let f = f2();
        let a = MatrixGf::from_rows(&f, &[vec![1, 1], vec![0, 0]]).unwrap();
        assert!(a.complete_basis().is_err());
        let b = MatrixGf::from_rows(&f, &[vec![1], vec![1], vec![0]]).unwrap();
        let c = b.complete_basis().unwrap();
        assert_eq!(c.rank(), 3);
        assert_eq!(c.column(1).to_code_rows(), vec![vec![1], vec![0], vec![0]]);
    }

    #[test]
    fn seeded_random_is_reproducible() {
        let f = FieldContext::new(3, 2).unwrap();
        assert_eq!(MatrixGf::random_seeded(&f, 4, 5, 9), MatrixGf::random_seeded(&f, 4, 5, 9));
    }
}
