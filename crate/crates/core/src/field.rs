//! Prime field arithmetic and dense matrices over it.
//!
//! Entries are stored reduced in `0..p`. Primes are capped below 2^16 so a
//! product of two entries fits in 32 bits and a `u64` accumulator can absorb
//! any realistic inner product before a single final reduction.

use rand::Rng;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    p: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("prime {0} exceeds the supported bound {max}", max = Field::MAX_PRIME)]
    TooLarge(u32),
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Field {
    pub const DEFAULT_PRIME: u32 = 32003;
    pub const MAX_PRIME: u32 = 65521;

    pub fn new(p: u32) -> Result<Self, FieldError> {
        if p > Self::MAX_PRIME {
            return Err(FieldError::TooLarge(p));
        }
        if p < 3 || p % 2 == 0 || (3..).step_by(2).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(FieldError::NotOddPrime(p));
        }
        Ok(Field { p })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u32) -> Option<u32> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p as u64 - 2))
        }
    }

    pub fn elt(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    /// Representative in `(-p/2, p/2]`, convenient for printing signs.
    pub fn signed(self, a: u32) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn sign(self, odd: bool) -> u32 {
        if odd {
            self.p - 1
        } else {
            1
        }
    }

    pub fn random<R: Rng>(self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.p)
    }

    pub fn random_nonzero<R: Rng>(self, rng: &mut R) -> u32 {
        rng.gen_range(1..self.p)
    }
}

impl Default for Field {
    fn default() -> Self {
        Field { p: Self::DEFAULT_PRIME }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    f: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Reduced row echelon form together with the pivot column of each nonzero row.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(fm, "Matrix {}x{} over F_{}", self.rows, self.cols, self.f.p)?;
        for r in 0..self.rows.min(24) {
            let row: Vec<i64> = self.row(r).iter().take(24).map(|&a| self.f.signed(a)).collect();
            writeln!(fm, "  {:?}", row)?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(f: Field, rows: usize, cols: usize) -> Self {
        Matrix { f, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(f: Field, n: usize) -> Self {
        let mut m = Self::zeros(f, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_data(f: Field, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { f, rows, cols, data }
    }

    pub fn from_i64(f: Field, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(f, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &x) in row.iter().enumerate() {
                m.data[i * c + j] = f.elt(x);
            }
        }
        m
    }

    pub fn from_columns(f: Field, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(f, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &x) in col.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    pub fn column_vector(f: Field, v: &[u32]) -> Self {
        Self::from_data(f, v.len(), 1, v.to_vec())
    }

    pub fn random<R: Rng>(f: Field, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| f.random(rng)).collect();
        Matrix { f, rows, cols, data }
    }

    pub fn field(&self) -> Field {
        self.f
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

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: u32) {
        let i = r * self.cols + c;
        self.data[i] = self.f.add(self.data[i], v);
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Self::zeros(self.f, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let p = self.f.p as u64;
        let bc = other.cols;
        let mut out = Self::zeros(self.f, self.rows, bc);
        let mut acc = vec![0u64; bc];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            let mut any = false;
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                any = true;
                let a = a as u64;
                let brow = &other.data[k * bc..(k + 1) * bc];
                for (x, &b) in acc.iter_mut().zip(brow) {
                    *x += a * b as u64;
                }
            }
            if any {
                for (o, &x) in out.data[i * bc..(i + 1) * bc].iter_mut().zip(&acc) {
                    *o = (x % p) as u32;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = self.f.p as u64;
        (0..self.rows)
            .map(|i| {
                let s: u64 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        let f = self.f;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { f, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        let f = self.f;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { f, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = self.f;
        let data = self.data.iter().map(|&a| f.mul(a, s)).collect();
        Matrix { f, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(self.f.p - 1)
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.shape(), other.shape());
        let f = self.f;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, b);
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut m = Self::zeros(self.f, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m.data[i * cols.len() + j] = self.get(r, c);
            }
        }
        m
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Matrix {
        let mut m = Self::zeros(self.f, nr, nc);
        for i in 0..nr {
            m.data[i * nc..(i + 1) * nc]
                .copy_from_slice(&self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + nc]);
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + b.cols].copy_from_slice(b.row(i));
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        let f = self.f;
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            for (a, &x) in self.data[dst..dst + b.cols].iter_mut().zip(b.row(i)) {
                *a = f.add(*a, x);
            }
        }
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.f, self.rows, self.cols + other.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, other);
        m
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { f: self.f, rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn block_diag(f: Field, blocks: &[&Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(f, r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Kronecker product; index `(i, j)` of the left factor and `(k, l)` of the
    /// right land at `(i * r2 + k, j * c2 + l)`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r2, c2) = other.shape();
        let mut m = Self::zeros(self.f, self.rows * r2, self.cols * c2);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if b != 0 {
                            m.set(i * r2 + k, j * c2 + l, self.f.mul(a, b));
                        }
                    }
                }
            }
        }
        m
    }

    pub fn remove_rows_cols(&self, rows: &[bool], cols: &[bool]) -> Matrix {
        let keep_r: Vec<usize> = (0..self.rows).filter(|&i| !rows[i]).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|&j| !cols[j]).collect();
        self.submatrix(&keep_r, &keep_c)
    }

    /// Row reduction in place; returns pivot columns. With `full` the form is
    /// reduced (zeros above pivots as well).
    fn eliminate(&mut self, full: bool, stop_col: usize) -> Vec<usize> {
        let f = self.f;
        let p = f.p as u64;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        let mut nz: Vec<usize> = Vec::new();
        for c in 0..stop_col {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.data[r * cols + c]).unwrap();
            nz.clear();
            for j in c..cols {
                let x = &mut self.data[r * cols + j];
                if *x != 0 {
                    *x = f.mul(*x, inv);
                    nz.push(j);
                }
            }
            let start = if full { 0 } else { r + 1 };
            for i in start..self.rows {
                if i == r {
                    continue;
                }
                let a = self.data[i * cols + c];
                if a == 0 {
                    continue;
                }
                let t = (p - a as u64) % p;
                let (lo, hi) = self.data.split_at_mut(i.max(r) * cols);
                let (src, dst) = if i < r {
                    (&hi[..cols], &mut lo[i * cols..(i + 1) * cols])
                } else {
                    (&lo[r * cols..(r + 1) * cols], &mut hi[..cols])
                };
                for &j in &nz {
                    dst[j] = ((dst[j] as u64 + t * src[j] as u64) % p) as u32;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.eliminate(true, m.cols);
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let c = m.cols;
        m.eliminate(false, c).len()
    }

    /// Basis of the right kernel, one column per basis vector.
    pub fn nullspace(&self) -> Matrix {
        let rr = self.rref();
        let f = self.f;
        let mut is_piv = vec![false; self.cols];
        for &c in &rr.pivots {
            is_piv[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_piv[c]).collect();
        let mut n = Self::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            n.set(fc, k, 1);
            for (row, &pc) in rr.pivots.iter().enumerate() {
                let v = rr.matrix.get(row, fc);
                if v != 0 {
                    n.set(pc, k, f.neg(v));
                }
            }
        }
        n
    }

    /// Basis of the column space, as a matrix whose columns are independent.
    pub fn column_space(&self) -> Matrix {
        let pivots = self.transpose().rref();
        let r = pivots.rank();
        pivots.matrix.block(0, 0, r, self.rows).transpose()
    }

    /// Column indices forming a basis of the column space (greedy, left to right).
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut m = self.clone();
        let c = m.cols;
        m.eliminate(false, c)
    }

    /// Solves `self * X = b` for every column of `b` at once.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows);
        let mut aug = self.hstack(b);
        let pivots = aug.eliminate(true, self.cols);
        let r = pivots.len();
        for i in r..aug.rows {
            if aug.row(i)[self.cols..].iter().any(|&x| x != 0) {
                return None;
            }
        }
        let mut x = Self::zeros(self.f, self.cols, b.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            x.row_mut(pc).copy_from_slice(&aug.row(i)[self.cols..]);
        }
        Some(x)
    }

    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        self.solve_matrix(&Matrix::column_vector(self.f, b)).map(|x| x.column(0))
    }

    pub fn inverse(&self) -> Result<Matrix, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::Dimension(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let id = Matrix::identity(self.f, self.rows);
        match self.solve_matrix(&id) {
            Some(x) if self.rank() == self.rows => Ok(x),
            _ => Err(FieldError::Singular),
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Whether every column of `other` lies in the column space of `self`.
    pub fn spans(&self, other: &Matrix) -> bool {
        self.hstack(other).rank() == self.rank()
    }
}

/// Sparse vector as sorted `(index, nonzero value)` pairs.
pub type SparseVec = Vec<(usize, u32)>;

pub fn dense_to_sparse(v: &[u32]) -> SparseVec {
    v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_primes() {
        assert!(Field::new(2).is_err());
        assert!(Field::new(15).is_err());
        assert!(Field::new(65537).is_err());
        assert!(Field::new(31013).is_ok());
        assert!(Field::new(32003).is_ok());
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Field::default();
        for a in [1u32, 2, 17, 32002] {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
    }

    #[test]
    fn nullspace_is_kernel() {
        let f = Field::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Matrix::random(f, 4, 9, &mut rng);
        let n = a.nullspace();
        assert_eq!(n.cols(), 5);
        assert!(a.mul(&n).is_zero());
    }

    #[test]
    fn inverse_of_random() {
        let f = Field::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Matrix::random(f, 7, 7, &mut rng);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let sing = Matrix::from_i64(f, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(sing.inverse(), Err(FieldError::Singular));
    }

    #[test]
    fn solve_detects_inconsistency() {
        let f = Field::default();
        let a = Matrix::from_i64(f, &[vec![1, 1], vec![2, 2]]);
        assert!(a.solve(&[1, 3]).is_none());
        let x = a.solve(&[1, 2]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![1, 2]);
    }
}
