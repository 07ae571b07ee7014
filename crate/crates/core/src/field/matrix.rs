use std::fmt;

use super::{Elem, Field, FieldError};

/// Dense row-major matrix over a [`Field`].
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| format!("{:3x}", e.0)).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FieldError::Dimension("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from raw values; panics on ragged input.
    pub fn from_u16(rows: &[&[u16]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Elem(v)).collect()).collect())
            .expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Elem] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            m.row_mut(i).copy_from_slice(self.row(r));
        }
        m
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (i, &c) in cols.iter().enumerate() {
                m[(r, i)] = self[(r, c)];
            }
        }
        m
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        if self.rows != other.rows {
            return Err(FieldError::Dimension(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            m.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            m.row_mut(r)[self.cols..].copy_from_slice(other.row(r));
        }
        Ok(m)
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Result<Matrix, FieldError> {
        if self.cols != other.rows {
            return Err(FieldError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if !a.is_zero() {
                    let (src, dst) = (other.row(k), r * other.cols);
                    f.mul_add_slice(a, src, &mut out.data[dst..dst + other.cols]);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, f: &Field, v: &[Elem]) -> Result<Vec<Elem>, FieldError> {
        if v.len() != self.rows {
            return Err(FieldError::Dimension(format!(
                "vector of {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![Elem::ZERO; self.cols];
        for (r, &a) in v.iter().enumerate() {
            f.mul_add_slice(a, self.row(r), &mut out);
        }
        Ok(out)
    }

    /// Reduced row echelon form in place over the first `pivot_cols` columns.
    ///
    /// Pivots are chosen as the first nonzero entry scanning columns left to right,
    /// rows top to bottom. Returns the pivot column of each leading row.
    fn reduce(&mut self, f: &Field, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..pivot_cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| !self[(r, c)].is_zero()) else {
                continue;
            };
            if p != lead {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, lead * self.cols + j);
                }
            }
            let inv = f.inv(self[(lead, c)]).expect("pivot is nonzero");
            for e in self.row_mut(lead) {
                *e = f.mul(*e, inv);
            }
            let pivot_row = self.row(lead).to_vec();
            for r in 0..self.rows {
                if r != lead {
                    let factor = self[(r, c)];
                    if !factor.is_zero() {
                        f.mul_add_slice(factor, &pivot_row, self.row_mut(r));
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        let mut m = self.clone();
        m.reduce(f, self.cols).len()
    }

    /// Solves `self * X = rhs` when the solution is unique.
    ///
    /// Returns [`FieldError::Singular`] when `self` has rank below its column
    /// count and [`FieldError::Inconsistent`] when no solution exists.
    pub fn solve(&self, f: &Field, rhs: &Matrix) -> Result<Matrix, FieldError> {
        let (x, rank) = self.solve_inner(f, rhs)?;
        if rank < self.cols {
            return Err(FieldError::Singular {
                rank,
                needed: self.cols,
            });
        }
        x
    }

    /// Some solution of `self * X = rhs`, free variables set to zero.
    pub fn solve_any(&self, f: &Field, rhs: &Matrix) -> Result<Matrix, FieldError> {
        let (x, _) = self.solve_inner(f, rhs)?;
        x
    }

    /// Row-reduces `[self | rhs]`; the rank is reported even when the system is
    /// inconsistent.
    fn solve_inner(
        &self,
        f: &Field,
        rhs: &Matrix,
    ) -> Result<(Result<Matrix, FieldError>, usize), FieldError> {
        if rhs.rows != self.rows {
            return Err(FieldError::Dimension(format!(
                "system has {} equations but rhs has {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut aug = self.hstack(rhs)?;
        let pivots = aug.reduce(f, self.cols);
        let rank = pivots.len();
        // Rows past the rank have a zero left block; their right block must vanish too.
        for r in rank..aug.rows {
            if aug.row(r)[self.cols..].iter().any(|e| !e.is_zero()) {
                return Ok((Err(FieldError::Inconsistent), rank));
            }
        }
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for (r, &c) in pivots.iter().enumerate() {
            x.row_mut(c).copy_from_slice(&aug.row(r)[self.cols..]);
        }
        Ok((Ok(x), rank))
    }

    pub fn inverse(&self, f: &Field) -> Result<Matrix, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::Dimension(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        self.solve(f, &Matrix::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Elem;

    fn index(&self, (r, c): (usize, usize)) -> &Elem {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Elem {
        &mut self.data[r * self.cols + c]
    }
}

/// Incrementally maintained echelon basis of a subspace of F^dim.
///
/// Used as a rank oracle when columns are added one at a time, e.g. while
/// walking subsets of code symbols.
#[derive(Clone, Debug)]
pub struct Basis {
    dim: usize,
    // (pivot index, vector normalised so vector[pivot] == 1)
    vectors: Vec<(usize, Vec<Elem>)>,
}

impl Basis {
    pub fn new(dim: usize) -> Self {
        Basis {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    fn residual(&self, f: &Field, v: &[Elem]) -> Vec<Elem> {
        let mut v = v.to_vec();
        for (p, b) in &self.vectors {
            let c = v[*p];
            if !c.is_zero() {
                f.mul_add_slice(c, b, &mut v);
            }
        }
        v
    }

    /// Whether `v` already lies in the span.
    pub fn contains(&self, f: &Field, v: &[Elem]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length");
        self.residual(f, v).iter().all(|e| e.is_zero())
    }

    /// Adds `v`, returning true if the rank grew.
    pub fn insert(&mut self, f: &Field, v: &[Elem]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length");
        let mut v = self.residual(f, v);
        let Some(p) = v.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = f.inv(v[p]).expect("nonzero");
        for e in v.iter_mut() {
            *e = f.mul(*e, inv);
        }
        // Keep earlier vectors reduced at the new pivot so `residual` stays a
        // single pass.
        for (_, b) in self.vectors.iter_mut() {
            let c = b[p];
            if !c.is_zero() {
                f.mul_add_slice(c, &v, b);
            }
        }
        self.vectors.push((p, v));
        true
    }
}
