//! Dense exact linear algebra over the rationals.
//!
//! [`Matrix`] is a general rectangular matrix (reductions are not
//! symmetric); [`SymMatrix`] wraps a square matrix whose symmetry was
//! checked at construction. The inertia of a symmetric matrix is computed
//! by congruence diagonalization with 1x1 and 2x2 pivots, so no
//! eigenvalue is ever approximated.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    NotSymmetric {
        i: usize,
        j: usize,
        a: Box<Rational>,
        b: Box<Rational>,
    },
    #[error("index {index} out of range for a matrix of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("index {0} repeated in principal index set")]
    RepeatedIndex(usize),
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::RaggedRows {
                    row: r,
                    found: row.len(),
                    expected: cols,
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn negate_row(&mut self, i: usize) {
        for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
            *v = -v.clone();
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }

    /// Exact determinant by Gaussian elimination with nonzero pivots.
    ///
    /// Panics if the matrix is not square.
    pub fn determinant(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                m.swap_rows(pivot, col);
                det = -det;
            }
            let p = m[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &p;
                for c in col..n {
                    let delta = &factor * &m[(col, c)];
                    m[(r, c)] -= delta;
                }
            }
        }
        det
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, row);
            let inv = m[(row, col)].recip();
            for c in col..self.cols {
                let v = &m[(row, c)] * &inv;
                m[(row, c)] = v;
            }
            for r in 0..self.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in col..self.cols {
                    let delta = &factor * &m[(row, c)];
                    m[(r, c)] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    ///
    /// Each basis vector has a 1 in its free column and zeros in the
    /// other free columns.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(row, free)].clone();
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = rhs` for a nonsingular square matrix.
    pub fn solve(&self, rhs: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if rhs.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                found: rhs.len(),
            });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n)] = rhs[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return Err(LinalgError::Singular);
        }
        Ok((0..n).map(|i| r[(i, n)].clone()).collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
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

/// Square rational matrix, symmetric by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in i + 1..m.cols {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric {
                        i,
                        j,
                        a: Box::new(m[(i, j)].clone()),
                        b: Box::new(m[(j, i)].clone()),
                    });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Builds a symmetric matrix from a diagonal and a closure for the strict upper triangle.
    pub fn from_fn(order: usize, mut entry: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut m = Matrix::zeros(order, order);
        for i in 0..order {
            for j in i..order {
                let v = entry(i, j);
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
            }
        }
        Self(m)
    }

    pub fn empty() -> Self {
        Self(Matrix::zeros(0, 0))
    }

    pub fn order(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.order()).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.0.to_rows()
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: &Rational) -> Self {
        Self::from_fn(self.order(), |i, j| self.get(i, j) * c)
    }

    /// Returns a copy with every off-diagonal entry transformed by `f`.
    pub fn map_off_diagonal(&self, mut f: impl FnMut(&Rational) -> Rational) -> Self {
        Self::from_fn(self.order(), |i, j| {
            if i == j {
                self.get(i, i).clone()
            } else {
                f(self.get(i, j))
            }
        })
    }

    /// Congruence `Pᵀ A P`.
    pub fn congruent(&self, p: &Matrix) -> Result<Self, LinalgError> {
        let prod = p.transpose().mul(&self.0)?.mul(p)?;
        Self::new(prod)
    }

    pub fn determinant(&self) -> Rational {
        self.0.determinant()
    }

    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        self.0.kernel_basis()
    }

    pub fn inertia(&self) -> Inertia {
        inertia(self)
    }

    /// True when every eigenvalue is negative. The 0x0 matrix qualifies.
    pub fn is_negative_definite(&self) -> bool {
        let inertia = self.inertia();
        inertia.n_neg == self.order()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[Rational]) -> Result<Rational, LinalgError> {
        let ax = self.0.mul_vec(x)?;
        Ok(ax.iter().zip(x).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<SymMatrix, LinalgError> {
        principal_submatrix(self, idx)
    }

    pub fn graph_components(&self) -> Vec<Vec<usize>> {
        matrix_graph_components(self)
    }

    pub fn is_connected(&self) -> bool {
        self.graph_components().len() <= 1
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Numbers of positive, zero and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub n_pos: usize,
    pub n_zero: usize,
    pub n_neg: usize,
}

impl Inertia {
    pub fn new(n_pos: usize, n_zero: usize, n_neg: usize) -> Self {
        Self {
            n_pos,
            n_zero,
            n_neg,
        }
    }

    pub fn order(&self) -> usize {
        self.n_pos + self.n_zero + self.n_neg
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n_pos, self.n_zero, self.n_neg)
    }
}

/// Exact inertia by symmetric congruence (Sylvester's law of inertia).
///
/// The leading index of the remaining Schur complement is eliminated with
/// a 1x1 pivot when its diagonal entry is nonzero. When the diagonal entry
/// is zero but its row is not, the 2x2 block `[[0, b], [b, c]]` with
/// `b != 0` is eliminated instead; it has determinant `-b^2 < 0` and so
/// contributes one positive and one negative eigenvalue. A zero row
/// contributes a zero eigenvalue.
pub fn inertia(a: &SymMatrix) -> Inertia {
    let mut rest: Vec<Vec<Rational>> = a.to_rows();
    let mut out = Inertia::new(0, 0, 0);
    while !rest.is_empty() {
        let d = rest[0][0].clone();
        if !d.is_zero() {
            if d.is_positive() {
                out.n_pos += 1;
            } else {
                out.n_neg += 1;
            }
            rest = schur_1x1(&rest, &d);
            continue;
        }
        match (1..rest.len()).find(|&j| !rest[0][j].is_zero()) {
            Some(j) => {
                out.n_pos += 1;
                out.n_neg += 1;
                rest = schur_2x2(&rest, j);
            }
            None => {
                out.n_zero += 1;
                rest = rest[1..].iter().map(|row| row[1..].to_vec()).collect();
            }
        }
    }
    out
}

fn schur_1x1(m: &[Vec<Rational>], pivot: &Rational) -> Vec<Vec<Rational>> {
    let n = m.len();
    (1..n)
        .map(|i| {
            let f = &m[i][0] / pivot;
            (1..n).map(|j| &m[i][j] - &f * &m[0][j]).collect()
        })
        .collect()
}

/// Schur complement after eliminating indices `0` and `j` where `m[0][0] = 0`.
fn schur_2x2(m: &[Vec<Rational>], j: usize) -> Vec<Vec<Rational>> {
    let n = m.len();
    let b = &m[0][j];
    let c = &m[j][j];
    // E = [[0, b], [b, c]], E^-1 = [[-c, b], [b, 0]] / b^2
    let b2 = b * b;
    let inv00 = -c / &b2;
    let inv01 = b / &b2;
    let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
    keep.iter()
        .map(|&r| {
            let u0 = &m[r][0];
            let u1 = &m[r][j];
            keep.iter()
                .map(|&s| {
                    let v0 = &m[0][s];
                    let v1 = &m[j][s];
                    // u E^-1 v^T
                    let corr = u0 * &inv00 * v0 + u0 * &inv01 * v1 + u1 * &inv01 * v0;
                    &m[r][s] - corr
                })
                .collect()
        })
        .collect()
}

pub fn determinant(a: &SymMatrix) -> Rational {
    a.determinant()
}

pub fn kernel_basis(a: &SymMatrix) -> Vec<Vec<Rational>> {
    a.kernel_basis()
}

/// Connected components of the graph with an edge `{i, j}` whenever `A[i][j] != 0`.
///
/// Components are listed by their smallest index, each sorted ascending.
pub fn matrix_graph_components(a: &SymMatrix) -> Vec<Vec<usize>> {
    let n = a.order();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for (w, mark) in seen.iter_mut().enumerate() {
                if w != v && !*mark && !a.get(v, w).is_zero() {
                    *mark = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

/// Rows and columns `idx` of `a`, in the given order.
pub fn principal_submatrix(a: &SymMatrix, idx: &[usize]) -> Result<SymMatrix, LinalgError> {
    let n = a.order();
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n {
            return Err(LinalgError::IndexOutOfRange { index: i, order: n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(LinalgError::RepeatedIndex(i));
        }
    }
    Ok(SymMatrix::from_fn(idx.len(), |r, c| a.get(idx[r], idx[c]).clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn sym(rows: &[&[i64]]) -> SymMatrix {
        SymMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(SymMatrix::new(Matrix::identity(3)).unwrap().inertia(), Inertia::new(3, 0, 0));
        assert_eq!(sym(&[&[0, 1], &[1, 0]]).inertia(), Inertia::new(1, 0, 1));
        assert_eq!(sym(&[&[-1, 1], &[1, -1]]).inertia(), Inertia::new(0, 1, 1));
        assert_eq!(SymMatrix::empty().inertia(), Inertia::new(0, 0, 0));
    }

    #[test]
    fn inertia_with_zero_pivots_and_zero_rows() {
        // zero diagonal with a nonzero row, then a trailing zero row
        let a = sym(&[&[0, 2, 0], &[2, 3, 0], &[0, 0, 0]]);
        assert_eq!(a.inertia(), Inertia::new(1, 1, 1));
        // all-zero diagonal 3x3 with ones off the diagonal: eigenvalues 2, -1, -1
        let b = sym(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert_eq!(b.inertia(), Inertia::new(1, 0, 2));
        assert_eq!(sym(&[&[0, 0], &[0, 0]]).inertia(), Inertia::new(0, 2, 0));
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(sym(&[&[-1, 2], &[2, -1]]).determinant(), int(-3));
        assert_eq!(sym(&[&[-1, 1], &[1, -1]]).determinant(), int(0));
        let half = SymMatrix::from_rows(vec![vec![frac(5, 2)]]).unwrap();
        assert_eq!(half.determinant(), frac(5, 2));
        assert_eq!(SymMatrix::empty().determinant(), int(1));
    }

    #[test]
    fn determinant_needs_row_swaps() {
        let m = Matrix::from_rows(vec![
            vec![int(0), int(1), int(2)],
            vec![int(1), int(0), int(3)],
            vec![int(4), int(-3), int(8)],
        ])
        .unwrap();
        // cofactor expansion along the first row: 0 - 1*(8-12) + 2*(-3-0) = -2
        assert_eq!(m.determinant(), int(-2));
    }

    #[test]
    fn kernel_examples() {
        let k = sym(&[&[-1, 1], &[1, -1]]).kernel_basis();
        assert_eq!(k, vec![vec![int(1), int(1)]]);
        assert!(SymMatrix::new(Matrix::identity(3)).unwrap().kernel_basis().is_empty());
        assert_eq!(sym(&[&[0, 0], &[0, 0]]).kernel_basis().len(), 2);
    }

    #[test]
    fn kernel_of_rectangular_matrix_is_annihilated() {
        let m = Matrix::from_rows(vec![
            vec![int(1), int(2), int(3), int(4)],
            vec![int(2), int(4), int(7), int(9)],
        ])
        .unwrap();
        let k = m.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in k {
            assert!(m.mul_vec(&v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn solve_round_trips() {
        let a = sym(&[&[-2, 1], &[1, -2]]);
        let x = a.as_matrix().solve(&[int(-1), int(-1)]).unwrap();
        assert_eq!(x, vec![int(1), int(1)]);
        let s = sym(&[&[-1, 1], &[1, -1]]);
        assert_eq!(s.as_matrix().solve(&[int(1), int(0)]), Err(LinalgError::Singular));
    }

    #[test]
    fn graph_components_examples() {
        assert_eq!(sym(&[&[-1, 1], &[1, -1]]).graph_components(), vec![vec![0, 1]]);
        assert_eq!(
            sym(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]).graph_components(),
            vec![vec![0], vec![1], vec![2]]
        );
        assert_eq!(
            sym(&[&[1, 5, 0], &[5, 2, 0], &[0, 0, 3]]).graph_components(),
            vec![vec![0, 1], vec![2]]
        );
    }

    #[test]
    fn principal_submatrix_examples() {
        let a = sym(&[&[1, 2], &[2, 3]]);
        assert_eq!(a.principal_submatrix(&[1]).unwrap(), sym(&[&[3]]));
        assert_eq!(a.principal_submatrix(&[0, 1]).unwrap(), a);
        let empty = a.principal_submatrix(&[]).unwrap();
        assert_eq!(empty.order(), 0);
        assert!(empty.is_negative_definite());
        assert_eq!(
            a.principal_submatrix(&[2]),
            Err(LinalgError::IndexOutOfRange { index: 2, order: 2 })
        );
        assert_eq!(a.principal_submatrix(&[1, 1]), Err(LinalgError::RepeatedIndex(1)));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(3), int(1)]]).unwrap();
        assert!(matches!(SymMatrix::new(m), Err(LinalgError::NotSymmetric { i: 0, j: 1, .. })));
        assert!(matches!(
            Matrix::from_rows(vec![vec![int(1)], vec![int(1), int(2)]]),
            Err(LinalgError::RaggedRows { row: 1, .. })
        ));
    }
}
