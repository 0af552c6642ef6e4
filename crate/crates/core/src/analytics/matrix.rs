//! Square dense matrices and the normalizations applied to citation counts.

use std::ops::{Index, IndexMut};

use super::AnalyticsError;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::default(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, AnalyticsError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(AnalyticsError::ShapeMismatch { expected: n, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Matrix::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// The square block covering rows and columns `start..end`.
    pub fn submatrix(&self, start: usize, end: usize) -> Self {
        let k = end - start;
        let mut out = Matrix::zeros(k);
        for r in 0..k {
            out.data[r * k..(r + 1) * k].copy_from_slice(&self.row(start + r)[start..end]);
        }
        out
    }

    pub fn check_same_shape<U>(&self, other: &Matrix<U>) -> Result<(), AnalyticsError> {
        if self.n != other.n {
            return Err(AnalyticsError::ShapeMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.n + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.n + c]
    }
}

impl Matrix<u64> {
    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|v| v as f64)
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }
}

impl Matrix<f64> {
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }
}

/// The citation count output matrix, the transpose of the input matrix.
pub fn transpose_to_output(i0: &Matrix<u64>) -> Matrix<u64> {
    i0.transpose()
}

/// A normalized matrix plus the rows that were all zero and left untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub matrix: Matrix<f64>,
    pub zero_rows: Vec<usize>,
}

/// Divide each row by its sum; zero rows stay zero and are flagged.
pub fn row_normalize(m: &Matrix<f64>) -> Normalized {
    normalize_by(m, |row| row.iter().sum())
}

fn normalize_by(m: &Matrix<f64>, norm: impl Fn(&[f64]) -> f64) -> Normalized {
    let mut out = m.clone();
    let mut zero_rows = Vec::new();
    let n = m.n();
    for r in 0..n {
        let s = norm(m.row(r));
        if s == 0.0 {
            zero_rows.push(r);
            continue;
        }
        for v in &mut out.as_mut_slice()[r * n..(r + 1) * n] {
            *v /= s;
        }
    }
    Normalized { matrix: out, zero_rows }
}

/// `D0 = O0 - I0` and its absolute-row-sum normalization.
pub fn net_output(i0: &Matrix<u64>, o0: &Matrix<u64>) -> Result<(Matrix<i64>, Normalized), AnalyticsError> {
    i0.check_same_shape(o0)?;
    let n = i0.n();
    let mut d0 = Matrix::<i64>::zeros(n);
    for r in 0..n {
        for c in 0..n {
            d0[(r, c)] = o0[(r, c)] as i64 - i0[(r, c)] as i64;
        }
    }
    let d = normalize_by(&d0.map(|v| v as f64), |row| row.iter().map(|v| v.abs()).sum());
    Ok((d0, d))
}

/// Contiguous span of one discipline's rows in a field-level matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub discipline: crate::taxonomy::NodeId,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stripped<T> {
    /// Entries inside the diagonal blocks.
    pub b0: Matrix<T>,
    /// Entries outside the diagonal blocks (`I0 - B0`).
    pub i_star: Matrix<T>,
    /// Transpose of `i_star`.
    pub o_star: Matrix<T>,
}

fn block_of(blocks: &[Block], n: usize) -> Result<Vec<usize>, AnalyticsError> {
    let mut owner = vec![usize::MAX; n];
    for (b, block) in blocks.iter().enumerate() {
        if block.start > block.end || block.end > n {
            return Err(AnalyticsError::MissingBlocks);
        }
        for o in &mut owner[block.start..block.end] {
            if *o != usize::MAX {
                return Err(AnalyticsError::MissingBlocks);
            }
            *o = b;
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(AnalyticsError::MissingBlocks);
    }
    Ok(owner)
}

/// Split a field-level matrix into its block-diagonal part and the rest.
pub fn strip_blocks<T: Copy + Default>(m: &Matrix<T>, blocks: &[Block]) -> Result<Stripped<T>, AnalyticsError> {
    let n = m.n();
    let owner = block_of(blocks, n)?;
    let mut b0 = Matrix::zeros(n);
    let mut i_star = Matrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            if owner[r] == owner[c] {
                b0[(r, c)] = m[(r, c)];
            } else {
                i_star[(r, c)] = m[(r, c)];
            }
        }
    }
    let o_star = i_star.transpose();
    Ok(Stripped { b0, i_star, o_star })
}

/// Clip every entry above `threshold` down to it.
pub fn truncate(m: &Matrix<f64>, threshold: f64) -> Matrix<f64> {
    m.map(|v| if v > threshold { threshold } else { v })
}
