//! Dense matrices over a [`Ring`], with elimination over a [`Field`].
//!
//! Every matrix carries a zero element of its scalar type so that empty and
//! all-zero matrices over context-carrying scalars (p-adic numbers, series)
//! can still produce entries.

use std::fmt;

use crate::scalar::{Field, Ring};

#[derive(Clone)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    zero: T,
}

impl<T: Ring> PartialEq for Matrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<T: Ring + fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<T: Ring> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i).to_vec()))
            .finish()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, template: &T) -> Self {
        let zero = template.zero_like();
        Matrix {
            rows,
            cols,
            data: vec![zero.clone(); rows * cols],
            zero,
        }
    }

    pub fn identity(n: usize, template: &T) -> Self {
        let mut m = Self::zeros(n, n, template);
        let one = template.one_like();
        for i in 0..n {
            m[(i, i)] = one.clone();
        }
        m
    }

    /// Row-major constructor; panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>, template: &T) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix {
            rows,
            cols,
            data,
            zero: template.zero_like(),
        }
    }

    /// Panics on ragged rows; `template` supplies the zero for empty input.
    pub fn from_rows(rows: Vec<Vec<T>>, template: &T) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_vec(r, c, rows.into_iter().flatten().collect(), template)
    }

    pub fn from_fn(rows: usize, cols: usize, template: &T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data, template)
    }

    /// Square diagonal matrix.
    pub fn diagonal(entries: &[T], template: &T) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n, template);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Matrix whose columns are the given vectors (all of length `n`).
    pub fn from_columns(n: usize, columns: &[Vec<T>], template: &T) -> Self {
        Self::from_fn(n, columns.len(), template, |i, j| columns[j][i].clone())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn zero_element(&self) -> &T {
        &self.zero
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, &self.zero, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Ring>(&self, template: &U, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
            zero: template.zero_like(),
        }
    }

    pub fn try_map<U: Ring, E>(
        &self,
        template: &U,
        mut f: impl FnMut(&T) -> Result<U, E>,
    ) -> Result<Matrix<U>, E> {
        let data = self.data.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
            zero: template.zero_like(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.vanishes())
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, &self.zero, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), &self.zero, |i, j| self[(i, cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, &self.zero, |i, j| self[(rows[i], j)].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, &self.zero, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, &self.zero, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                other[(i - self.rows, j)].clone()
            }
        })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols, &self.zero);
        m.set_block(0, 0, self);
        m.set_block(self.rows, self.cols, other);
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.vanishes() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.vanishes() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], self.zero.clone());
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.zero.clone();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.vanishes() && !b.vanishes() {
                        acc = acc + a.clone() * b.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(&self.zero, |a| -a.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(&self.zero, |a| a.clone() * c.clone())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
            zero: self.zero.clone(),
        }
    }

    /// Kronecker product; index `(i1 * r2 + i2, j1 * c2 + j2)`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(
            self.rows * other.rows,
            self.cols * other.cols,
            &self.zero,
            |i, j| {
                let a = &self[(i / other.rows, j / other.cols)];
                let b = &other[(i % other.rows, j % other.cols)];
                if a.vanishes() || b.vanishes() {
                    self.zero.clone()
                } else {
                    a.clone() * b.clone()
                }
            },
        )
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        (0..self.rows).fold(self.zero.clone(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn pow(&self, n: u32) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows, &self.zero);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Determinant by cofactor expansion along the sparsest row; intended
    /// for the small ranks that occur for modules.
    pub fn det(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        match n {
            0 => self.zero.one_like(),
            1 => self[(0, 0)].clone(),
            2 => self[(0, 0)].clone() * self[(1, 1)].clone() - self[(0, 1)].clone() * self[(1, 0)].clone(),
            _ => {
                let row = (0..n)
                    .min_by_key(|&i| self.row(i).iter().filter(|x| !x.vanishes()).count())
                    .unwrap();
                let mut acc = self.zero.clone();
                for j in 0..n {
                    let a = &self[(row, j)];
                    if a.vanishes() {
                        continue;
                    }
                    let minor = self.minor(row, j).det();
                    let term = a.clone() * minor;
                    acc = if (row + j) % 2 == 0 { acc + term } else { acc - term };
                }
                acc
            }
        }
    }

    fn minor(&self, r: usize, c: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != c).collect();
        self.select_rows(&rows).select_columns(&cols)
    }

    /// Adjugate (transpose of the cofactor matrix).
    pub fn adjugate(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return Self::identity(1, &self.zero);
        }
        Self::from_fn(n, n, &self.zero, |i, j| {
            let m = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                m
            } else {
                -m
            }
        })
    }

    /// Characteristic polynomial `det(x I - M)` by Berkowitz's
    /// division-free algorithm; coefficients low-to-high, monic.
    pub fn charpoly(&self) -> Vec<T> {
        assert!(self.is_square());
        let n = self.rows;
        let one = self.zero.one_like();
        // Coefficients high-to-low while iterating.
        let mut c: Vec<T> = vec![one.clone()];
        for k in 0..n {
            // Leading principal submatrix of size k+1: A = [[B, R],[S, a]].
            let a = self[(k, k)].clone();
            let r: Vec<T> = (0..k).map(|i| self[(i, k)].clone()).collect();
            let s: Vec<T> = (0..k).map(|j| self[(k, j)].clone()).collect();
            let b = self.block(0, k, 0, k);
            // Toeplitz column: 1, -a, -S R, -S B R, ...
            let mut col = vec![one.clone(), -a];
            let mut v = r.clone();
            for _ in 0..k {
                let sv = s
                    .iter()
                    .zip(&v)
                    .fold(self.zero.clone(), |acc, (x, y)| acc + x.clone() * y.clone());
                col.push(-sv);
                v = b.mul_vec(&v);
            }
            let mut next = vec![self.zero.clone(); k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    if i >= j && i - j < col.len() {
                        *slot = slot.clone() + col[i - j].clone() * cj.clone();
                    }
                }
            }
            c = next;
        }
        c.reverse();
        c
    }

    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && self.pow(self.rows as u32).is_zero()
    }
}

impl<T: Field> Matrix<T> {
    /// Reduced row echelon form and pivot columns. The pivot in each column
    /// is the candidate with smallest [`Field::pivot_cost`].
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let best = (r..m.rows)
                .filter(|&i| !m[(i, c)].vanishes())
                .min_by_key(|&i| m[(i, c)].pivot_cost());
            let Some(best) = best else { continue };
            if best != r {
                for j in 0..m.cols {
                    m.data.swap(best * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                if !m[(r, j)].vanishes() {
                    let x = std::mem::replace(&mut m[(r, j)], self.zero.clone());
                    m[(r, j)] = x * inv.clone();
                }
            }
            m[(r, c)] = self.zero.one_like();
            let pivot_row: Vec<(usize, T)> = (c..m.cols)
                .filter(|&j| !m[(r, j)].vanishes())
                .map(|j| (j, m[(r, j)].clone()))
                .collect();
            for i in 0..m.rows {
                if i == r || m[(i, c)].vanishes() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for (j, pv) in &pivot_row {
                    let x = std::mem::replace(&mut m[(i, *j)], self.zero.clone());
                    m[(i, *j)] = x - factor.clone() * pv.clone();
                }
                m[(i, c)] = self.zero.clone();
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![self.zero.clone(); self.cols];
                v[f] = self.zero.one_like();
                for (i, &pc) in pivots.iter().enumerate() {
                    let x = &r[(i, f)];
                    if !x.vanishes() {
                        v[pc] = -x.clone();
                    }
                }
                v
            })
            .collect()
    }

    /// Solves `M X = B`; `None` if inconsistent.
    pub fn solve(&self, b: &Self) -> Option<Self> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Self::zeros(self.cols, b.cols, &self.zero);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(pc, j)] = r[(i, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let x = self.solve(&Self::identity(n, &self.zero))?;
        (self.rank() == n).then_some(x)
    }
}

/// A subspace of `F^n`, stored as the canonical (RREF) row basis.
#[derive(Clone)]
pub struct Subspace<F> {
    basis: Matrix<F>,
}

impl<F: Field> PartialEq for Subspace<F> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.ncols() == other.basis.ncols()
            && self.dim() == other.dim()
            && self.contains_subspace(other)
    }
}

impl<F: Field> fmt::Debug for Subspace<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} of {}) {:?}", self.dim(), self.ambient(), self.basis)
    }
}

impl<F: Field> Subspace<F> {
    pub fn zero(n: usize, template: &F) -> Self {
        Subspace {
            basis: Matrix::zeros(0, n, template),
        }
    }

    pub fn whole(n: usize, template: &F) -> Self {
        Subspace {
            basis: Matrix::identity(n, template),
        }
    }

    /// Span of the given vectors (each of length `n`).
    pub fn span(n: usize, vectors: &[Vec<F>], template: &F) -> Self {
        let rows = Matrix::from_fn(vectors.len(), n, template, |i, j| vectors[i][j].clone());
        Self::from_rows(&rows)
    }

    /// Row space of `rows`.
    pub fn from_rows(rows: &Matrix<F>) -> Self {
        let (r, pivots) = rows.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        Subspace {
            basis: r.select_rows(&keep),
        }
    }

    /// Column space of `m`.
    pub fn column_space(m: &Matrix<F>) -> Self {
        Self::from_rows(&m.transpose())
    }

    pub fn kernel_of(m: &Matrix<F>) -> Self {
        Self::span(m.ncols(), &m.kernel(), m.zero_element())
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn ambient(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis_vectors(&self) -> Vec<Vec<F>> {
        (0..self.dim()).map(|i| self.basis.row(i).to_vec()).collect()
    }

    /// Basis as the rows of a matrix.
    pub fn basis_matrix(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn contains(&self, v: &[F]) -> bool {
        let one = Matrix::from_vec(1, v.len(), v.to_vec(), self.basis.zero_element());
        self.basis.vstack(&one).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Self) -> bool {
        self.basis.vstack(&other.basis).rank() == self.dim()
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::from_rows(&self.basis.vstack(&other.basis))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let n = self.ambient();
        let zero = self.basis.zero_element().clone();
        if self.dim() == 0 || other.dim() == 0 {
            return Self::zero(n, &zero);
        }
        // x = Uᵀ a = Wᵀ b  ⇔  [Uᵀ | -Wᵀ] (a, b) = 0
        let ut = self.basis.transpose();
        let wt = other.basis.transpose().neg();
        let k = self.dim();
        let vecs: Vec<Vec<F>> = ut
            .hstack(&wt)
            .kernel()
            .into_iter()
            .map(|ab| ut.mul_vec(&ab[..k]))
            .collect();
        Self::span(n, &vecs, &zero)
    }

    /// Image under the linear map `m` (acting on column vectors).
    pub fn image(&self, m: &Matrix<F>) -> Self {
        let vecs: Vec<Vec<F>> = self.basis_vectors().iter().map(|v| m.mul_vec(v)).collect();
        Self::span(m.nrows(), &vecs, self.basis.zero_element())
    }

    /// Vectors of `self` completing a basis of `sub` (assumed contained in
    /// `self`) to a basis of `self`.
    pub fn complement_of(&self, sub: &Self) -> Vec<Vec<F>> {
        let mut acc = sub.clone();
        let mut out = Vec::new();
        for v in self.basis_vectors() {
            if !acc.contains(&v) {
                acc = acc.sum(&Self::span(self.ambient(), std::slice::from_ref(&v), self.basis.zero_element()));
                out.push(v);
            }
        }
        out
    }
}

/// Matrix of the map induced by `m` on `upper / lower` (both `m`-stable),
/// in the basis `upper.complement_of(lower)`.
pub fn induced_on_quotient<F: Field>(m: &Matrix<F>, upper: &Subspace<F>, lower: &Subspace<F>) -> Matrix<F> {
    let zero = m.zero_element().clone();
    let comp = upper.complement_of(lower);
    if comp.is_empty() {
        return Matrix::zeros(0, 0, &zero);
    }
    let mut cols = lower.basis_vectors();
    let l = cols.len();
    cols.extend(comp.iter().cloned());
    let n = m.nrows();
    let basis = Matrix::from_columns(n, &cols, &zero);
    let images: Vec<Vec<F>> = comp.iter().map(|c| m.mul_vec(c)).collect();
    let x = basis
        .solve(&Matrix::from_columns(n, &images, &zero))
        .expect("subspaces are stable under the map");
    x.block(l, cols.len(), 0, comp.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn mat(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(),
            &BigRational::zero(),
        )
    }

    #[test]
    fn rank_kernel_inverse() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
        let a = mat(&[&[2, 1], &[7, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2, &q(0)));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn charpoly_matches_det() {
        let m = mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let c = m.charpoly();
        // det(xI - M) at x = 0 is -det(M) for n = 3.
        assert_eq!(c[0], -m.det());
        assert_eq!(c[3], q(1));
        assert_eq!(c[2], -m.trace());
    }

    #[test]
    fn subspace_operations() {
        let z = q(0);
        let a = Subspace::span(3, &[vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]], &z);
        let b = Subspace::span(3, &[vec![q(0), q(1), q(1)], vec![q(0), q(0), q(1)]], &z);
        let i = a.intersection(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[q(0), q(5), q(0)]));
        assert_eq!(a.sum(&b).dim(), 3);
        let comp = a.complement_of(&i);
        assert_eq!(comp.len(), 1);
    }
}
