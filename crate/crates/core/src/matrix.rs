//! Dense integer matrices, determinants and Smith normal form.

use std::fmt;


use crate::scalar::Scalar;

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> IntMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| crate::scalar::int(x)).collect())
                .collect(),
        )
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a[(i, j)].clone() * a[(k, k)].clone()
                        - a[(i, k)].clone() * a[(k, j)].clone())
                        / prev.clone();
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, j * self.cols + c);
            }
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + i, r * self.cols + j);
            }
        }
    }

    /// row_i += c · row_j
    fn add_row(&mut self, i: usize, j: usize, c: &T) {
        for col in 0..self.cols {
            let v = self[(i, col)].clone() + c.clone() * self[(j, col)].clone();
            self[(i, col)] = v;
        }
    }

    /// col_i += c · col_j
    fn add_col(&mut self, i: usize, j: usize, c: &T) {
        for row in 0..self.rows {
            let v = self[(row, i)].clone() + c.clone() * self[(row, j)].clone();
            self[(row, i)] = v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for col in 0..self.cols {
            let v = -self[(i, col)].clone();
            self[(i, col)] = v;
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for IntMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for IntMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for IntMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Result of [`smith_normal_form`]: `u · m · v = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm<T> {
    pub d: IntMatrix<T>,
    pub u: IntMatrix<T>,
    pub v: IntMatrix<T>,
}

impl<T: Scalar> SmithForm<T> {
    /// Diagonal entries `d₁ | d₂ | …` (zeros last).
    pub fn invariants(&self) -> Vec<T> {
        (0..self.d.nrows().min(self.d.ncols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }
}

/// Smith normal form with unimodular transforms.
///
/// The pivot is always the nonzero entry of least absolute value in the
/// remaining block (first in row-major order on ties), so the output is
/// deterministic. Diagonal entries are non-negative and form a divisibility
/// chain.
pub fn smith_normal_form<T: Scalar>(m: &IntMatrix<T>) -> SmithForm<T> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for k in 0..rows.min(cols) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => a[(i, j)].abs() < a[(pi, pj)].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return SmithForm { d: a, u, v };
            };
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            a.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let p = a[(k, k)].clone();
            let mut dirty = false;
            for i in k + 1..rows {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let q = a[(i, k)].div_floor(&p);
                a.add_row(i, k, &-q.clone());
                u.add_row(i, k, &-q);
                dirty |= !a[(i, k)].is_zero();
            }
            for j in k + 1..cols {
                if a[(k, j)].is_zero() {
                    continue;
                }
                let q = a[(k, j)].div_floor(&p);
                a.add_col(j, k, &-q.clone());
                v.add_col(j, k, &-q);
                dirty |= !a[(k, j)].is_zero();
            }
            if dirty {
                continue;
            }
            // Enforce p | every remaining entry by pulling an offending row up.
            let offender = (k + 1..rows)
                .find(|&i| (k + 1..cols).any(|j| !a[(i, j)].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    a.add_row(k, i, &T::one());
                    u.add_row(k, i, &T::one());
                }
                None => break,
            }
        }
        if a[(k, k)].is_negative() {
            a.negate_row(k);
            u.negate_row(k);
        }
    }
    SmithForm { d: a, u, v }
}

/// A basis (as rows) of the ℤ-span of the given integer row vectors.
pub fn row_span_basis<T: Scalar>(rows: &[Vec<T>]) -> Vec<Vec<T>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut a = IntMatrix::from_rows(rows.to_vec());
    let (nr, nc) = (a.nrows(), a.ncols());
    let mut r = 0;
    for c in 0..nc {
        if r == nr {
            break;
        }
        loop {
            // Euclid down column c over rows r..
            let best = (r..nr)
                .filter(|&i| !a[(i, c)].is_zero())
                .min_by(|&i, &j| a[(i, c)].abs().cmp(&a[(j, c)].abs()));
            let Some(b) = best else { break };
            a.swap_rows(r, b);
            let p = a[(r, c)].clone();
            let mut done = true;
            for i in r + 1..nr {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let q = a[(i, c)].div_floor(&p);
                a.add_row(i, r, &-q);
                done &= a[(i, c)].is_zero();
            }
            if done {
                r += 1;
                break;
            }
        }
    }
    (0..r).map(|i| a.row(i).to_vec()).collect()
}
