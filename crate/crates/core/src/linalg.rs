//! Dense exact linear algebra over F_q.
//!
//! `rref` on a [`Matrix`] keeps its zero rows at the bottom so shapes never
//! change; a [`Subspace`] stores only the nonzero RREF rows, which makes its
//! basis canonical and comparable with `==`.

use std::fmt;
use std::ops::Mul;

use itertools::Itertools;
use rand::Rng;

use crate::gf::{Field, FieldElement};
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    /// Row-major constructor; entries are reduced mod q.
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| field.reduce(x)).collect();
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds from a list of rows. An empty list yields a `0 x 0` matrix.
    pub fn from_rows<R: AsRef<[u64]>>(field: Field, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(field, rows.len(), cols, data)
    }

    /// Like [`Matrix::from_rows`] but accepts negative entries.
    pub fn from_signed_rows<R: AsRef<[i64]>>(field: Field, rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| field.from_i64(x)).collect())
            .collect();
        Self::from_rows(field, &rows)
    }

    pub fn column_vector(field: Field, values: &[u64]) -> Self {
        Self::new(field, values.len(), 1, values.to_vec()).expect("length matches")
    }

    pub fn random(field: Field, rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let q = field.modulus();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.field.reduce(v);
    }

    pub fn element(&self, i: usize, j: usize) -> FieldElement {
        self.field.elem(self.get(i, j))
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn row_vectors(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            let acc = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (o, &b) in acc.iter_mut().zip(other.row(k)) {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let f = self.field;
        let c = f.reduce(c);
        Matrix {
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Stacks matrices vertically. All parts must share the column count.
    pub fn vstack(field: Field, cols: usize, parts: &[&Matrix]) -> Result<Matrix> {
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols || p.field != field {
                return Err(Error::DimensionMismatch("vstack".into()));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            field: self.field,
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for i in 0..self.rows {
            data.extend(idx.iter().map(|&j| self.get(i, j)));
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn first_rows(&self, n: usize) -> Matrix {
        let idx: Vec<usize> = (0..n.min(self.rows)).collect();
        self.select_rows(&idx)
    }

    /// Kronecker product `a ⊗ b`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let f = self.field;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(f, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * c + j * other.cols + l] =
                            f.mul(a, other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// In-place Gauss–Jordan elimination restricted to the first `limit`
    /// columns. Returns pivot columns.
    fn eliminate(&mut self, limit: usize) -> Vec<usize> {
        let f = self.field;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.data[r * cols + c]).expect("pivot is nonzero");
            for j in c..cols {
                self.data[r * cols + j] = f.mul(self.data[r * cols + j], inv);
            }
            let (head, tail) = self.data.split_at_mut(r * cols);
            let (pivot_row, tail) = tail.split_at_mut(cols);
            for other in head
                .chunks_exact_mut(cols)
                .chain(tail.chunks_exact_mut(cols))
            {
                let factor = other[c];
                if factor == 0 {
                    continue;
                }
                for j in c..cols {
                    other[j] = f.sub(other[j], f.mul(factor, pivot_row[j]));
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Canonical reduced row echelon form; zero rows are kept at the bottom.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let p = m.eliminate(m.cols);
        (m, p)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(self.field, n))?;
        let pivots = aug.eliminate(n);
        if pivots.len() < n {
            return Err(Error::NoSolution);
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_cols(&idx))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<u64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "determinant of a non-square matrix".into(),
            ));
        }
        let f = self.field;
        let n = self.rows;
        if n == 0 {
            return Ok(1 % f.modulus());
        }
        let mut m = self.clone();
        let mut negate = false;
        let mut prev = 1u64;
        for k in 0..n - 1 {
            if m.get(k, k) == 0 {
                let Some(p) = (k + 1..n).find(|&i| m.get(i, k) != 0) else {
                    return Ok(0);
                };
                for j in 0..n {
                    m.data.swap(p * n + j, k * n + j);
                }
                negate = !negate;
            }
            let pivot = m.get(k, k);
            let prev_inv = f.inv(prev)?;
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = f.sub(f.mul(m.get(i, j), pivot), f.mul(m.get(i, k), m.get(k, j)));
                    m.data[i * n + j] = f.mul(v, prev_inv);
                }
                m.data[i * n + k] = 0;
            }
            prev = pivot;
        }
        let d = m.get(n - 1, n - 1);
        Ok(if negate { f.neg(d) } else { d })
    }

    /// Basis of the right kernel `{x : self·x = 0}`, one vector per row.
    pub fn kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = self.field;
        let mut out = Matrix::zeros(f, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out.data[k * self.cols + fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                out.data[k * self.cols + pc] = f.neg(r.get(i, fc));
            }
        }
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Matrix over F_{} ({}x{})",
            self.field.modulus(),
            self.rows,
            self.cols
        )?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Returns some `x` with `a·x = b`, or [`Error::NoSolution`].
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch("solve: row counts differ".into()));
    }
    let mut aug = a.hstack(b)?;
    let pivots = aug.eliminate(a.cols);
    let rank = pivots.len();
    if (rank..aug.rows).any(|i| aug.row(i)[a.cols..].iter().any(|&v| v != 0)) {
        return Err(Error::NoSolution);
    }
    let mut x = Matrix::zeros(a.field, a.cols, b.cols);
    for (i, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols {
            x.data[p * b.cols + j] = aug.get(i, a.cols + j);
        }
    }
    Ok(x)
}

/// Matrix with entry `(i, j) = nodes[j]^i` for `i < order`.
pub fn vandermonde(nodes: &[FieldElement], order: usize) -> Result<Matrix> {
    let Some(first) = nodes.first() else {
        return Err(Error::DimensionMismatch("no nodes".into()));
    };
    let field = first.field();
    let mut raw = Vec::with_capacity(nodes.len());
    for n in nodes {
        if n.modulus() != field.modulus() {
            return Err(Error::ModulusMismatch {
                left: field.modulus(),
                right: n.modulus(),
            });
        }
        raw.push(n.value());
    }
    vandermonde_raw(field, &raw, order)
}

/// [`vandermonde`] on raw residues.
pub fn vandermonde_raw(field: Field, nodes: &[u64], order: usize) -> Result<Matrix> {
    if nodes.len() < order {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes for order {order}",
            nodes.len()
        )));
    }
    let nodes: Vec<u64> = nodes.iter().map(|&x| field.reduce(x)).collect();
    if nodes.iter().duplicates().next().is_some() {
        return Err(Error::DuplicateNodes);
    }
    let mut m = Matrix::zeros(field, order, nodes.len());
    for (j, &x) in nodes.iter().enumerate() {
        let mut p = 1 % field.modulus();
        for i in 0..order {
            m.data[i * nodes.len() + j] = p;
            p = field.mul(p, x);
        }
    }
    Ok(m)
}

fn is_systematic(g: &Matrix) -> bool {
    let k = g.rows;
    g.cols >= k && (0..k).all(|i| (0..k).all(|j| g.get(i, j) == u64::from(i == j)))
}

/// True iff every `k`-column subset of `g` is invertible.
///
/// Systematic generators `[I | A]` are checked through their `A` block
/// (every square submatrix nonsingular); others by the definition.
pub fn is_col_mds(g: &Matrix, k: usize) -> bool {
    if g.rows != k || k > g.cols {
        return false;
    }
    if is_systematic(g) {
        let idx: Vec<usize> = (k..g.cols).collect();
        col_mds_by_claim1(&g.select_cols(&idx))
    } else {
        col_mds_by_definition(g)
    }
}

/// Every `rows`-column subset has full rank.
pub fn col_mds_by_definition(g: &Matrix) -> bool {
    (0..g.cols)
        .combinations(g.rows)
        .all(|c| g.select_cols(&c).rank() == g.rows)
}

/// Every square submatrix of `a` is nonsingular, i.e. `[I | a]` is MDS.
pub fn col_mds_by_claim1(a: &Matrix) -> bool {
    (1..=a.rows.min(a.cols)).all(|s| {
        (0..a.rows).combinations(s).all(|ri| {
            let sub = a.select_rows(&ri);
            (0..a.cols)
                .combinations(s)
                .all(|ci| sub.select_cols(&ci).determinant().is_ok_and(|d| d != 0))
        })
    })
}

/// True iff every `t`-row subset of `h` has rank `t`.
pub fn is_row_mds(h: &Matrix, t: usize) -> bool {
    h.cols == t
        && t <= h.rows
        && (0..h.rows)
            .combinations(t)
            .all(|r| h.select_rows(&r).rank() == t)
}

/// A uniformly random invertible `n x n` matrix (rejection sampling).
pub fn random_full_rank(field: Field, n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let m = Matrix::random(field, n, n, rng);
        if m.rank() == n {
            return m;
        }
    }
}

/// A linear subspace of F_q^ambient, kept as its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Matrix,
    ambient: usize,
}

/// Operation selector for [`subspace_ops`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceOp {
    Intersect,
    Sum,
}

impl Subspace {
    /// Row space of `m`.
    pub fn row_space(m: &Matrix) -> Subspace {
        let (r, p) = m.rref();
        Subspace {
            basis: r.first_rows(p.len()),
            ambient: m.cols,
        }
    }

    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace {
            basis: Matrix::zeros(field, 0, ambient),
            ambient,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn field(&self) -> Field {
        self.basis.field
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        self.basis.same_field(&other.basis)?;
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch("ambient dimensions differ".into()));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let m = Matrix::vstack(self.field(), self.ambient, &[&self.basis, &other.basis])?;
        Ok(Subspace::row_space(&m))
    }

    /// Intersection via the left kernel of the stacked bases.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.field(), self.ambient));
        }
        let stacked = Matrix::vstack(self.field(), self.ambient, &[&self.basis, &other.basis])?;
        let ker = stacked.transpose().kernel();
        let a: Vec<usize> = (0..self.dim()).collect();
        let coeffs = ker.select_cols(&a);
        Ok(Subspace::row_space(&(&coeffs * &self.basis)))
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let row = Matrix::from_rows(self.field(), &[v]).expect("one row");
        self.sum(&Subspace::row_space(&row))
            .is_ok_and(|s| s.dim() == self.dim())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} in {}) {:?}",
            self.dim(),
            self.ambient,
            self.basis
        )
    }
}

pub fn subspace_ops(a: &Subspace, b: &Subspace, op: SubspaceOp) -> Result<Subspace> {
    match op {
        SubspaceOp::Intersect => a.intersect(b),
        SubspaceOp::Sum => a.sum(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    fn m(q: u64, rows: &[&[u64]]) -> Matrix {
        Matrix::from_rows(f(q), rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let id = Matrix::identity(f(7), 3);
        assert_eq!(id.rref(), (id.clone(), vec![0, 1, 2]));
        let (r, p) = m(5, &[&[0, 1], &[0, 2]]).rref();
        assert_eq!(r, m(5, &[&[0, 1], &[0, 0]]));
        assert_eq!(p, vec![1]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::zeros(f(5), 3, 4).rank(), 0);
        let v = vandermonde_raw(f(7), &[1, 2, 3], 3).unwrap();
        assert_eq!(v.rank(), 3);
    }

    #[test]
    fn vandermonde_layout() {
        let c4 = vandermonde_raw(f(7), &[0, 1, 2, 3, 4, 5], 6).unwrap();
        let printed = m(
            7,
            &[
                &[1, 1, 1, 1, 1, 1],
                &[0, 1, 2, 3, 4, 5],
                &[0, 1, 4, 2, 2, 4],
                &[0, 1, 1, 6, 1, 6],
                &[0, 1, 2, 4, 4, 2],
                &[0, 1, 4, 5, 2, 3],
            ],
        );
        assert_eq!(c4, printed);
        assert_eq!(c4.rank(), 6);
        let c3 = vandermonde_raw(f(5), &[0, 1, 2, 3], 4).unwrap();
        assert_eq!(
            c3,
            m(
                5,
                &[&[1, 1, 1, 1], &[0, 1, 2, 3], &[0, 1, 4, 4], &[0, 1, 3, 2]]
            )
        );
        let one = vandermonde(&[f(5).elem(3)], 1).unwrap();
        assert_eq!(one, m(5, &[&[1]]));
        assert_eq!(
            vandermonde_raw(f(5), &[1, 6], 2),
            Err(Error::DuplicateNodes)
        );
    }

    #[test]
    fn solve_examples() {
        let b = m(7, &[&[3], &[4]]);
        assert_eq!(solve(&Matrix::identity(f(7), 2), &b).unwrap(), b);
        let a = m(7, &[&[1, 2], &[2, 4]]);
        assert_eq!(solve(&a, &m(7, &[&[1], &[1]])), Err(Error::NoSolution));
        let v = vandermonde_raw(f(7), &[1, 2, 3], 3).unwrap();
        let rhs = m(7, &[&[5], &[0], &[6]]);
        let x = solve(&v, &rhs).unwrap();
        assert_eq!(&v * &x, rhs);
    }

    #[test]
    fn determinant_matches_rank() {
        let a = m(7, &[&[0, 1], &[1, 0]]);
        assert_eq!(a.determinant().unwrap(), 6);
        assert_eq!(m(7, &[&[1, 2], &[2, 4]]).determinant().unwrap(), 0);
    }

    #[test]
    fn mds_examples() {
        let g = m(7, &[&[1, 0, 0, 1, 1], &[0, 1, 0, 1, 2], &[0, 0, 1, 1, 3]]);
        assert!(is_col_mds(&g, 3));
        assert!(col_mds_by_definition(&g));
        let bad = m(7, &[&[1, 0, 1, 1], &[0, 1, 1, 1]]);
        assert!(!is_col_mds(&bad, 2));
        let grs = vandermonde_raw(f(7), &[0, 1, 2, 3, 4], 2).unwrap();
        assert!(is_col_mds(&grs, 2));
        let h11 = m(11, &[&[4, 5], &[3, 4], &[4, 3], &[1, 0], &[0, 1], &[1, 1]]);
        assert!(is_row_mds(&h11, 2));
        let h7 = m(7, &[&[1, 1], &[1, 2], &[1, 3], &[1, 0], &[0, 1]]);
        assert!(is_row_mds(&h7, 2));
        assert!(!is_row_mds(&m(7, &[&[1, 2], &[2, 4], &[0, 1]]), 2));
    }

    #[test]
    fn subspace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Subspace::row_space(&Matrix::random(f(7), 2, 3, &mut rng));
        assert_eq!(a.intersect(&a).unwrap(), a);
        for _ in 0..20 {
            let x = Subspace::row_space(&Matrix::random(f(7), 2, 3, &mut rng));
            let y = Subspace::row_space(&Matrix::random(f(7), 2, 3, &mut rng));
            let i = x.intersect(&y).unwrap();
            let s = x.sum(&y).unwrap();
            assert_eq!(i.dim() + s.dim(), x.dim() + y.dim());
        }
        let e12 = Subspace::row_space(&m(5, &[&[1, 0, 0], &[0, 1, 0]]));
        let e3 = Subspace::row_space(&m(5, &[&[0, 0, 1]]));
        assert_eq!(e12.intersect(&e3).unwrap().dim(), 0);
    }

    #[test]
    fn random_full_rank_is_reproducible() {
        let a = random_full_rank(f(7), 10, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_full_rank(f(7), 10, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(a.rank(), 10);
        let one = random_full_rank(f(2), 1, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(one.get(0, 0), 1);
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (
            prop::sample::select(vec![2u64, 3, 5, 7]),
            1usize..6,
            1usize..6,
            any::<u64>(),
        )
            .prop_map(|(q, r, c, seed)| {
                Matrix::random(f(q), r, c, &mut ChaCha8Rng::seed_from_u64(seed))
            })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(a in arb_matrix()) {
            prop_assert_eq!(a.rank(), a.transpose().rank());
        }

        #[test]
        fn rref_is_canonical(a in arb_matrix(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_full_rank(a.field(), a.rows(), &mut rng);
            let (r, _) = a.rref();
            prop_assert_eq!(&r.rref().0, &r);
            prop_assert_eq!((&p * &a).rref().0, r);
        }

        #[test]
        fn determinant_nonzero_iff_full_rank(seed in any::<u64>(), n in 1usize..6) {
            let a = Matrix::random(f(5), n, n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a.determinant().unwrap() != 0, a.rank() == n);
        }

        #[test]
        fn inverse_roundtrip(seed in any::<u64>(), n in 1usize..7) {
            let a = random_full_rank(f(11), n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(&a * &a.inverse().unwrap(), Matrix::identity(f(11), n));
        }

        #[test]
        fn vandermonde_full_rank(q in prop::sample::select(vec![5u64, 7, 11, 13]), n in 1usize..6) {
            let nodes: Vec<u64> = (0..n as u64).collect();
            prop_assert_eq!(vandermonde_raw(f(q), &nodes, n).unwrap().rank(), n);
        }
    }
}
