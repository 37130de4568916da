//! Singular reductions and negativity certificates.
//!
//! A *reduction* of a matrix `A` with non-negative off-diagonal entries is
//! a matrix `A'` with the same diagonal and `|A'ᵢⱼ| <= Aᵢⱼ` off the
//! diagonal. `A` has a singular reduction iff `A₋` is not negative
//! definite, and then one exists that annihilates a non-zero vector with
//! non-negative entries. [`find_singular_reduction`] constructs it by
//! sliding single off-diagonal entries to zero until the determinant
//! first vanishes; since the determinant is affine in one entry, the
//! crossing point is an exact rational.

use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, SymMatrix};
use crate::manifold::a_minus;
use crate::rational::{primitive_integer_ray, serde_exact, sign, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("negative off-diagonal entry at ({i},{j})")]
    NegativeOffDiagonal { i: usize, j: usize },
    #[error("A₋ is negative definite: no singular reduction exists")]
    NegativeDefinite,
    #[error("matrix has a positive eigenvalue")]
    NotNegative,
    #[error("A₋ has no positive eigenvalue")]
    NoPositiveEigenvalue,
    #[error("matrix graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("vector entry {index} is zero")]
    ZeroEntryInA { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("determinant did not change sign along the reduction path")]
    NoSignChange,
    #[error("kernel generator is not strictly positive")]
    KernelNotPositive,
}

/// A singular reduction `A'` together with a non-negative vector it annihilates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    #[serde(with = "matrix_rows")]
    pub a_prime: Matrix,
    #[serde(with = "serde_exact::rational_vec")]
    pub a: Vec<Rational>,
}

impl ReductionCertificate {
    /// Indices with `aᵢ > 0`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.a.len()).filter(|&i| self.a[i].is_positive()).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.a.iter().all(Signed::is_positive)
    }
}

pub(crate) mod matrix_rows {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        serde_exact::rational_rows::serialize(&m.to_rows(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = serde_exact::rational_rows::deserialize(d)?;
        Matrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Order in which off-diagonal entries of the selected block are slid to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlideOrder {
    #[default]
    RowMajor,
    /// Row-major order shuffled by a seeded generator.
    Shuffled(u64),
}

fn check_off_diagonal(a: &SymMatrix) -> Result<(), ReductionError> {
    for i in 0..a.order() {
        for j in i + 1..a.order() {
            if a.get(i, j).is_negative() {
                return Err(ReductionError::NegativeOffDiagonal { i, j });
            }
        }
    }
    Ok(())
}

pub fn find_singular_reduction(a: &SymMatrix) -> Result<ReductionCertificate, ReductionError> {
    find_singular_reduction_with(a, SlideOrder::RowMajor)
}

pub fn find_singular_reduction_with(
    a: &SymMatrix,
    order: SlideOrder,
) -> Result<ReductionCertificate, ReductionError> {
    check_off_diagonal(a)?;
    let n = a.order();
    let flipped: Vec<usize> = (0..n).filter(|&i| a.get(i, i).is_positive()).collect();
    let b = a_minus(a);
    let inertia = b.inertia();
    if inertia.n_pos + inertia.n_zero == 0 {
        return Err(ReductionError::NegativeDefinite);
    }

    let mut w = b.as_matrix().clone();
    if inertia.n_zero == 0 {
        let block = if inertia.n_pos == 1 {
            (0..n).collect()
        } else {
            smallest_block_with_one_nonnegative_eigenvalue(&b)
        };
        let mut inside = vec![false; n];
        for &i in &block {
            inside[i] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !(inside[i] && inside[j]) {
                    w[(i, j)] = Rational::zero();
                }
            }
        }
        if !w.determinant().is_zero() {
            let mut entries: Vec<(usize, usize)> = block
                .iter()
                .flat_map(|&i| block.iter().map(move |&j| (i, j)))
                .filter(|&(i, j)| i != j)
                .collect();
            if let SlideOrder::Shuffled(seed) = order {
                entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
            slide_to_first_zero(&mut w, &entries)?;
        }
    }

    let kernel = w.kernel_basis();
    let mut x = primitive_integer_ray(&kernel[0]);
    if !x.iter().any(Signed::is_positive) {
        x.iter_mut().for_each(|v| *v = -v.clone());
    }
    for (i, xi) in x.iter_mut().enumerate() {
        if xi.is_negative() {
            w.negate_row(i);
            w.negate_col(i);
            *xi = -xi.clone();
        }
    }
    // undo the diagonal sign flips; row scaling keeps the kernel
    for &i in &flipped {
        w.negate_row(i);
    }
    Ok(ReductionCertificate { a_prime: w, a: x })
}

/// Smallest principal index set whose submatrix has exactly one
/// non-negative eigenvalue; ties broken lexicographically.
fn smallest_block_with_one_nonnegative_eigenvalue(b: &SymMatrix) -> Vec<usize> {
    let n = b.order();
    for size in 1..=n {
        for idx in (0..n).combinations(size) {
            let sub = b.principal_submatrix(&idx).expect("valid indices");
            let inertia = sub.inertia();
            if inertia.n_pos + inertia.n_zero == 1 {
                return idx;
            }
        }
    }
    (0..n).collect()
}

/// Moves `entries` of `w` to zero one at a time and stops at the first
/// exact zero of the determinant.
fn slide_to_first_zero(w: &mut Matrix, entries: &[(usize, usize)]) -> Result<(), ReductionError> {
    let mut d_start = w.determinant();
    for &(i, j) in entries {
        let v = w[(i, j)].clone();
        if v.is_zero() {
            continue;
        }
        w[(i, j)] = Rational::zero();
        let d_end = w.determinant();
        if d_end.is_zero() {
            return Ok(());
        }
        if sign(&d_end) != sign(&d_start) {
            // det(t) = d_end + (d_start - d_end) * t / v
            let t = &v * &d_end / (&d_end - &d_start);
            w[(i, j)] = t;
            debug_assert!(w.determinant().is_zero());
            return Ok(());
        }
        d_start = d_end;
    }
    Err(ReductionError::NoSignChange)
}

/// A way in which a claimed reduction certificate fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionViolation {
    Dimension { expected: usize, found: usize },
    DiagonalChanged { index: usize },
    NotAReduction { i: usize, j: usize },
    NotAnnihilated { row: usize, value: Rational },
    NegativeEntry { index: usize },
    ZeroVector,
}

impl fmt::Display for ReductionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::DiagonalChanged { index } => {
                write!(f, "diagonal entry {index} differs from the source matrix")
            }
            Self::NotAReduction { i, j } => {
                write!(f, "not a reduction: |A'[{i}][{j}]| exceeds A[{i}][{j}]")
            }
            Self::NotAnnihilated { row, value } => {
                write!(f, "A'a != 0: row {row} gives {value}")
            }
            Self::NegativeEntry { index } => write!(f, "a[{index}] is negative"),
            Self::ZeroVector => write!(f, "a is the zero vector"),
        }
    }
}

/// Re-checks every property of a reduction certificate from scratch.
pub fn verify_reduction(
    a: &SymMatrix,
    cert: &ReductionCertificate,
) -> Result<(), Vec<ReductionViolation>> {
    let n = a.order();
    let m = &cert.a_prime;
    let mut out = Vec::new();
    for found in [m.rows(), m.cols(), cert.a.len()] {
        if found != n {
            out.push(ReductionViolation::Dimension { expected: n, found });
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    for i in 0..n {
        if m[(i, i)] != *a.get(i, i) {
            out.push(ReductionViolation::DiagonalChanged { index: i });
        }
        for j in 0..n {
            if i != j && m[(i, j)].abs() > *a.get(i, j) {
                out.push(ReductionViolation::NotAReduction { i, j });
            }
        }
    }
    let image = m.mul_vec(&cert.a).expect("dimensions checked");
    for (row, value) in image.into_iter().enumerate() {
        if !value.is_zero() {
            out.push(ReductionViolation::NotAnnihilated { row, value });
        }
    }
    for (index, v) in cert.a.iter().enumerate() {
        if v.is_negative() {
            out.push(ReductionViolation::NegativeEntry { index });
        }
    }
    if cert.a.iter().all(Zero::is_zero) {
        out.push(ReductionViolation::ZeroVector);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A positive vector `a` with `A a <= 0` witnessing that `A` is negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativityCertificate {
    #[serde(with = "serde_exact::rational_vec")]
    pub a: Vec<Rational>,
    #[serde(with = "serde_exact::rational_vec")]
    pub image: Vec<Rational>,
}

impl NegativityCertificate {
    /// `A a != 0`, which forces negative definiteness.
    pub fn proves_definite(&self) -> bool {
        self.image.iter().any(|v| !v.is_zero())
    }
}

/// For connected negative `A`: `a = -A⁻¹(1,…,1)` when nonsingular, else the
/// positive kernel generator.
pub fn negativity_certificate(a: &SymMatrix) -> Result<NegativityCertificate, ReductionError> {
    check_off_diagonal(a)?;
    let components = a.graph_components().len();
    if components > 1 {
        return Err(ReductionError::Disconnected { components });
    }
    let inertia = a.inertia();
    if inertia.n_pos > 0 {
        return Err(ReductionError::NotNegative);
    }
    let n = a.order();
    let vec = if inertia.n_zero == 0 {
        let minus_ones = vec![-Rational::one(); n];
        a.as_matrix().solve(&minus_ones).expect("nonsingular")
    } else {
        let kernel = a.kernel_basis();
        let mut x = primitive_integer_ray(&kernel[0]);
        if x.iter().any(Signed::is_negative) {
            x.iter_mut().for_each(|v| *v = -v.clone());
        }
        x
    };
    if !vec.iter().all(Signed::is_positive) {
        return Err(ReductionError::KernelNotPositive);
    }
    let image = a.as_matrix().mul_vec(&vec).expect("square");
    Ok(NegativityCertificate { a: vec, image })
}

/// Evaluates both sides of
/// `xᵀAx = Σᵢ aᵢ(Σⱼ Aᵢⱼaⱼ)(xᵢ/aᵢ)² + Σ_{i<j} (-Aᵢⱼaᵢaⱼ)(xᵢ/aᵢ - xⱼ/aⱼ)²`.
pub fn bilinear_identity(
    a: &SymMatrix,
    weights: &[Rational],
    x: &[Rational],
) -> Result<(Rational, Rational), ReductionError> {
    let n = a.order();
    for len in [weights.len(), x.len()] {
        if len != n {
            return Err(ReductionError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if let Some(index) = weights.iter().position(Zero::is_zero) {
        return Err(ReductionError::ZeroEntryInA { index });
    }
    let lhs = a.quadratic_form(x).expect("dimensions checked");
    let aw = a.as_matrix().mul_vec(weights).expect("dimensions checked");
    let ratio: Vec<Rational> = x.iter().zip(weights).map(|(xi, wi)| xi / wi).collect();
    let mut rhs = Rational::zero();
    for i in 0..n {
        rhs += &weights[i] * &aw[i] * &ratio[i] * &ratio[i];
    }
    for i in 0..n {
        for j in i + 1..n {
            let diff = &ratio[i] - &ratio[j];
            rhs -= a.get(i, j) * &weights[i] * &weights[j] * &diff * &diff;
        }
    }
    Ok((lhs, rhs))
}

/// Result of shrinking every off-diagonal entry by the factor `1 - epsilon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictShrink {
    pub matrix: SymMatrix,
    pub epsilon: Rational,
}

/// Shrinks off-diagonal entries by `1 - ε` for the first `ε` in `1/2, 1/4, …`
/// that keeps a positive eigenvalue in `A₋`.
pub fn strict_shrink(a: &SymMatrix) -> Result<StrictShrink, ReductionError> {
    if a_minus(a).inertia().n_pos == 0 {
        return Err(ReductionError::NoPositiveEigenvalue);
    }
    let two = Rational::from_integer(2.into());
    let mut epsilon = Rational::one() / &two;
    loop {
        let factor = Rational::one() - &epsilon;
        let shrunk = a.map_off_diagonal(|v| v * &factor);
        if a_minus(&shrunk).inertia().n_pos > 0 {
            return Ok(StrictShrink {
                matrix: shrunk,
                epsilon,
            });
        }
        epsilon /= &two;
    }
}

/// A singular reduction annihilating a strictly positive vector, for a
/// connected `A` whose `A₋` has a positive eigenvalue.
///
/// Writing `M = A₋`, bisection on `μ` above the top eigenvalue of `M` finds
/// a rational `μ` with `a = (μI - M)⁻¹(1,…,1)` satisfying `μaᵢ > 1`, so
/// `Ma = μa - 1 > 0`. Row `i` of the reduction is row `i` of `A` with its
/// off-diagonal part scaled by `-Aᵢᵢaᵢ / Σⱼ Aᵢⱼaⱼ`, a factor of absolute
/// value below 1. The result is therefore a strict reduction wherever
/// `Aᵢⱼ != 0`.
pub fn positive_singular_reduction(a: &SymMatrix) -> Result<ReductionCertificate, ReductionError> {
    check_off_diagonal(a)?;
    let components = a.graph_components().len();
    if components > 1 {
        return Err(ReductionError::Disconnected { components });
    }
    let m = a_minus(a);
    let n = m.order();
    if m.inertia().n_pos == 0 {
        return Err(ReductionError::NoPositiveEigenvalue);
    }
    let gershgorin = (0..n)
        .map(|i| (0..n).fold(Rational::zero(), |acc, j| acc + m.get(i, j).abs()))
        .max()
        .expect("non-empty");
    let mut lo = Rational::zero();
    let mut hi = gershgorin + Rational::one();
    let two = Rational::from_integer(2.into());
    let weights = loop {
        if let Some(w) = perron_candidate(&m, &hi) {
            break w;
        }
        // hi is above the top eigenvalue but not close enough; tighten
        loop {
            let mid = (&lo + &hi) / &two;
            let shifted = SymMatrix::from_fn(n, |i, j| {
                if i == j {
                    m.get(i, i) - &mid
                } else {
                    m.get(i, j).clone()
                }
            });
            if shifted.is_negative_definite() {
                hi = mid;
                break;
            }
            lo = mid;
        }
    };
    let weights = primitive_integer_ray(&weights);
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        let s: Rational = (0..n)
            .filter(|&j| j != i)
            .fold(Rational::zero(), |acc, j| acc + a.get(i, j) * &weights[j]);
        let factor = -(a.get(i, i) * &weights[i]) / &s;
        for j in 0..n {
            w[(i, j)] = if i == j {
                a.get(i, i).clone()
            } else {
                a.get(i, j) * &factor
            };
        }
    }
    Ok(ReductionCertificate {
        a_prime: w,
        a: weights,
    })
}

/// `(μI - M)⁻¹(1,…,1)` if `μI - M` is positive definite and `μaᵢ > 1` for all `i`.
fn perron_candidate(m: &SymMatrix, mu: &Rational) -> Option<Vec<Rational>> {
    let n = m.order();
    let shifted = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            mu - m.get(i, i)
        } else {
            -m.get(i, j).clone()
        }
    });
    if shifted.inertia().n_pos != n {
        return None;
    }
    let a = shifted
        .as_matrix()
        .solve(&vec![Rational::one(); n])
        .expect("positive definite");
    a.iter()
        .all(|v| mu * v > Rational::one())
        .then_some(a)
}
